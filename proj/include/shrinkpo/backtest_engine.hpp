#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "shrinkpo/dea_rank.hpp"
#include "shrinkpo/market_data.hpp"
#include "shrinkpo/performance_metrics.hpp"
#include "shrinkpo/portfolio_opt.hpp"

namespace shrinkpo {

struct GridSettings {
    std::vector<MeanKind> mean_kinds = all_mean_kinds();
    std::vector<CovKind> cov_kinds;  // empty: all kinds applicable at the window's c
    double gamma = 1.0;
    double epsilon_bop = 0.5;
    double alpha_cvar = 0.05;
    int threads = 1;
};

// One model's track record for one out-of-sample setting.
struct ModelResult {
    OosSeries series;
    bool ok = true;
    std::string failure_reason;
};

struct SettingResult {
    WindowPlan plan;
    // Fixed order: GMV models in covariance-kind order, then MV models with
    // covariance kind outer and mean kind inner.
    std::vector<std::pair<std::string, ModelResult>> models;
};

struct GridResult {
    std::string dataset_name;
    std::vector<SettingResult> settings;
};

// Runs the full estimator grid over every window of every plan. A failing
// estimator or solver marks the affected models failed for that setting.
GridResult run_grid(const ReturnsMatrix& returns, const std::vector<WindowPlan>& plans,
                    const GridSettings& settings, const std::string& dataset_name = "");

// The five benchmark models (MV, GMV, SMAD, CVaR, MM) over the same windows.
GridResult run_benchmarks(const ReturnsMatrix& returns, const std::vector<WindowPlan>& plans,
                          const GridSettings& settings, const std::string& dataset_name = "");

// Successful models of one setting, in model order, ready for DEA.
std::vector<std::pair<std::string, MetricVector>> setting_metrics(const SettingResult& setting);

// Geometric mean of per-setting efficiency scores for every tag that is
// ranked with a finite score in all settings.
std::vector<std::pair<std::string, double>> geometric_mean_scores(
    const std::vector<std::vector<EfficiencyScore>>& per_setting_rankings);

struct MarketBest {
    std::string tag;
    double gm = 0.0;
    bool fallback = false;  // no model made every top-10 list
};

// Among models in the top 10 of every setting, the highest geometric mean;
// falls back to the highest geometric mean overall.
MarketBest select_market_best(const std::vector<std::vector<std::string>>& top10_per_setting,
                              const std::vector<std::pair<std::string, double>>& gm_scores);

// Modal market-best tag; ties by higher mean GM, then lexicographic.
std::string select_universal_best(const std::vector<MarketBest>& market_bests);

// Selected model tags per group, in A/B/C order: market best then universal.
struct SelectedTags {
    std::array<std::string, 3> market;
    std::array<std::string, 3> universal;
};

struct ComparisonRow {
    DeaGroup group = DeaGroup::A;
    std::array<double, 5> benchmark_scores{};   // MV, CVaR, SMAD, MM, GMV
    std::array<double, 6> selected_scores{};    // A mkt, A uni, B mkt, B uni, C mkt, C uni
};

// Scores the pooled DMU set (5 benchmarks plus the distinct selected models)
// with each group's DEA instance. Missing selected models yield NaN cells.
struct ComparisonTable {
    std::string dataset;
    long outsample_len = 0;
    SelectedTags selected;
    std::array<ComparisonRow, 3> rows;
};

ComparisonTable compare_benchmarks(
    const std::string& dataset, long outsample_len,
    const std::vector<std::pair<std::string, MetricVector>>& benchmark_metrics,
    const std::vector<std::pair<std::string, MetricVector>>& grid_metrics,
    const SelectedTags& selected);

}  // namespace shrinkpo
