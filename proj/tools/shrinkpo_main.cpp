// Command-line driver for the shrinkage-portfolio toolkit.
//
// Exit codes: 0 success, 1 validation error (bad input/config), 2 numerical failure.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "shrinkpo/errors.hpp"
#include "shrinkpo/reporting.hpp"

namespace {

using shrinkpo::RunConfig;

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> datasets;
    std::string groups;
    std::string oos;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_dir;
    int threads = 0;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--dataset", flags.datasets, "Dataset as name=path (repeatable)");
    cmd->add_option("--groups", flags.groups, "Investor groups, e.g. A,B,C");
    cmd->add_option("--oos", flags.oos, "Out-of-sample lengths, e.g. 65,130,260");
    cmd->add_option("--seed", flags.seed, "Random seed")->each([&flags](const std::string&) {
        flags.seed_set = true;
    });
    cmd->add_option("--out", flags.out_dir, "Output directory");
    cmd->add_option("--threads", flags.threads, "Worker threads");
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty() || !out.empty()) out.push_back(cur);
    return out;
}

RunConfig build_config(const CommonFlags& flags) {
    RunConfig config;
    if (!flags.config_path.empty()) config = shrinkpo::load_run_config(flags.config_path);

    // Flags win over the config file.
    if (!flags.datasets.empty()) {
        config.datasets.clear();
        for (const auto& spec : flags.datasets) {
            const auto eq = spec.find('=');
            if (eq == std::string::npos) {
                config.datasets.push_back(
                    {std::filesystem::path(spec).stem().string(), spec});
            } else {
                config.datasets.push_back({spec.substr(0, eq), spec.substr(eq + 1)});
            }
        }
    }
    if (!flags.groups.empty()) {
        config.groups.clear();
        for (const auto& g : split_csv(flags.groups))
            config.groups.push_back(shrinkpo::dea_group_from_string(g));
    }
    if (!flags.oos.empty()) {
        config.outsample_lens.clear();
        for (const auto& v : split_csv(flags.oos)) config.outsample_lens.push_back(std::stol(v));
        if (config.outsample_lens.empty())
            throw shrinkpo::validation_error("--oos produced no lengths");
    }
    if (flags.seed_set) config.seed = flags.seed;
    if (!flags.out_dir.empty()) config.out_dir = flags.out_dir;
    if (flags.threads > 0) config.threads = flags.threads;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Shrinkage-estimator portfolio backtesting toolkit"};
    app.require_subcommand(1);

    CommonFlags flags;

    auto* ingest = app.add_subcommand("ingest", "Validate price CSVs and write returns artifacts");
    add_common(ingest, flags);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic price CSV");
    add_common(synth, flags);
    long synth_assets = -1, synth_days = -1, synth_factors = -1;
    std::string synth_out = "synthetic_prices.csv";
    synth->add_option("--p", synth_assets, "Number of assets");
    synth->add_option("--n-days", synth_days, "Number of price rows");
    synth->add_option("--factors", synth_factors, "Number of common factors");
    synth->add_option("--out-csv", synth_out, "Output price CSV path");

    auto* backtest = app.add_subcommand("backtest", "Run the full rolling-window pipeline");
    add_common(backtest, flags);

    auto* rank = app.add_subcommand("rank", "Re-rank an existing metrics CSV");
    add_common(rank, flags);
    std::string rank_metrics, rank_out = "rankings.csv";
    rank->add_option("--metrics", rank_metrics, "Metrics CSV to rank")->required();
    rank->add_option("--out-csv", rank_out, "Output ranking CSV");

    auto* compare = app.add_subcommand("compare", "Score benchmarks against a selected model");
    add_common(compare, flags);
    std::string cmp_grid, cmp_bench, cmp_sel, cmp_dataset = "dataset", cmp_out = "comparison.csv";
    long cmp_oos = 0;
    compare->add_option("--grid-metrics", cmp_grid, "Grid metrics CSV")->required();
    compare->add_option("--benchmark-metrics", cmp_bench, "Benchmark metrics CSV")->required();
    compare->add_option("--selection", cmp_sel, "Selection JSON from backtest")->required();
    compare->add_option("--dataset-name", cmp_dataset, "Dataset label");
    compare->add_option("--oos-len", cmp_oos, "Out-of-sample length label");
    compare->add_option("--out-csv", cmp_out, "Output comparison CSV");

    auto* report = app.add_subcommand("report", "Rebuild the cross-dataset selection summary");
    add_common(report, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig config = build_config(flags);
        if (ingest->parsed()) {
            shrinkpo::cmd_ingest(config);
            std::cout << "ingested " << config.datasets.size() << " dataset(s) into "
                      << config.out_dir << "\n";
        } else if (synth->parsed()) {
            if (synth_assets >= 0) config.synth_assets = synth_assets;
            if (synth_days >= 0) config.synth_days = synth_days;
            if (synth_factors >= 0) config.synth_factors = synth_factors;
            shrinkpo::cmd_synth(config, synth_out);
            std::cout << "wrote " << synth_out << "\n";
        } else if (backtest->parsed()) {
            shrinkpo::BacktestResult result = shrinkpo::cmd_backtest(config);
            for (const auto& [group, tag] : result.universal_best)
                std::cout << "universal best, group " << shrinkpo::to_string(group) << ": " << tag
                          << "\n";
            std::cout << "wrote " << result.written_files.size() << " files to " << config.out_dir
                      << "\n";
        } else if (rank->parsed()) {
            shrinkpo::cmd_rank(config, rank_metrics, rank_out);
            std::cout << "wrote " << rank_out << "\n";
        } else if (compare->parsed()) {
            shrinkpo::cmd_compare(config, cmp_grid, cmp_bench, cmp_sel, cmp_dataset, cmp_oos,
                                  cmp_out);
            std::cout << "wrote " << cmp_out << "\n";
        } else if (report->parsed()) {
            shrinkpo::cmd_report(config);
            std::cout << "wrote selection summary to " << config.out_dir << "\n";
        }
    } catch (const shrinkpo::validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const shrinkpo::numeric_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failure: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
