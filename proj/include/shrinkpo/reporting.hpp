#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "shrinkpo/backtest_engine.hpp"

namespace shrinkpo {

struct DatasetRef {
    std::string name;
    std::string path;  // prices CSV for ingest, returns CSV for backtest
};

struct RunConfig {
    std::vector<DatasetRef> datasets;
    long insample_len = 260;
    std::vector<long> outsample_lens = {65, 130, 260};
    double gamma = 1.0;
    double alpha_cvar = 0.05;
    double epsilon_bop = 0.5;
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    std::vector<DeaGroup> groups = {DeaGroup::A, DeaGroup::B, DeaGroup::C};
    int threads = 1;

    // synth command
    long synth_assets = 10;
    long synth_days = 1000;
    long synth_factors = 2;
};

// JSON key-value config file; unknown keys are rejected.
RunConfig load_run_config(const std::string& path);

// Stable hash of the effective configuration, stamped into every table.
std::string config_hash(const RunConfig& config);

// Per-group selection outcome for one dataset.
struct GroupSelection {
    std::vector<std::vector<EfficiencyScore>> rankings;  // one per oos setting
    MarketBest market_best;
};

struct DatasetOutcome {
    std::string name;
    long n_assets = 0;
    long n_obs = 0;
    std::vector<WindowPlan> plans;
    GridResult grid;
    GridResult benchmarks;
    std::vector<std::vector<std::pair<std::string, MetricVector>>> grid_metrics;       // [setting]
    std::vector<std::vector<std::pair<std::string, MetricVector>>> benchmark_metrics;  // [setting]
    std::map<DeaGroup, GroupSelection> selections;
};

struct BacktestResult {
    std::vector<DatasetOutcome> datasets;
    std::map<DeaGroup, std::string> universal_best;
    std::vector<std::string> written_files;
};

// Commands (the CLI is a thin wrapper over these).
void cmd_ingest(const RunConfig& config);
void cmd_synth(const RunConfig& config, const std::string& out_csv);
BacktestResult cmd_backtest(const RunConfig& config);
void cmd_rank(const RunConfig& config, const std::string& metrics_csv, const std::string& out_csv);
void cmd_compare(const RunConfig& config, const std::string& grid_metrics_csv,
                 const std::string& benchmark_metrics_csv, const std::string& selection_json,
                 const std::string& dataset, long outsample_len, const std::string& out_csv);
void cmd_report(const RunConfig& config);

// Artifact formats (shared by commands and tests).
void write_metrics_csv(const std::string& path, const RunConfig& config,
                       const std::vector<std::pair<std::string, MetricVector>>& metrics);
std::vector<std::pair<std::string, MetricVector>> read_metrics_csv(const std::string& path);

struct RankingRow {
    std::string tag;
    std::string group;
    long oos_period = 0;
    double score = 0.0;
    long rank = 0;
};
std::vector<RankingRow> read_ranking_csv(const std::string& path);

std::string format_fixed(double value);  // 5 decimals, "NA" for non-finite

}  // namespace shrinkpo
