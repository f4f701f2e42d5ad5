#include "shrinkpo/reporting.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "shrinkpo/errors.hpp"
#include "shrinkpo/synth.hpp"

namespace shrinkpo {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join_longs(const std::vector<long>& values) {
    std::string out;
    for (size_t i = 0; i < values.size(); ++i) {
        if (i) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::ofstream open_out(const std::string& path) {
    fs::path p(path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream f(path);
    if (!f) throw validation_error("cannot write " + path);
    return f;
}

std::string out_path(const RunConfig& config, const std::string& file) {
    return (fs::path(config.out_dir) / file).string();
}

std::string mean_kind_list() {
    std::string out;
    for (MeanKind k : all_mean_kinds()) {
        if (!out.empty()) out += ',';
        out += to_string(k);
    }
    return out;
}

std::string cov_kind_list(const std::vector<CovKind>& kinds) {
    std::string out;
    for (CovKind k : kinds) {
        if (!out.empty()) out += ',';
        out += to_string(k);
    }
    return out;
}

void stamp(std::ofstream& f, const RunConfig& config, const std::string& cov_kinds) {
    f << "# config_hash=" << config_hash(config) << '\n';
    f << "# cov_kinds=" << cov_kinds << '\n';
    f << "# mean_kinds=" << mean_kind_list() << '\n';
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<CovKind> dataset_cov_kinds(const RunConfig& config, long n_assets) {
    const double c = static_cast<double>(n_assets) / static_cast<double>(config.insample_len);
    return applicable_cov_kinds(c);
}

}  // namespace

std::string format_fixed(double value) {
    if (!std::isfinite(value)) return "NA";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.5f", value);
    return buf;
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open config file: " + path);
    json j;
    try {
        f >> j;
    } catch (const json::exception& e) {
        throw validation_error(std::string("config parse error: ") + e.what());
    }

    RunConfig c;
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "datasets") {
                for (const auto& d : value)
                    c.datasets.push_back({d.at("name").get<std::string>(),
                                          d.at("path").get<std::string>()});
            } else if (key == "insample_len") {
                c.insample_len = value.get<long>();
            } else if (key == "outsample_lens") {
                c.outsample_lens = value.get<std::vector<long>>();
            } else if (key == "gamma") {
                c.gamma = value.get<double>();
            } else if (key == "alpha_cvar") {
                c.alpha_cvar = value.get<double>();
            } else if (key == "epsilon_bop") {
                c.epsilon_bop = value.get<double>();
            } else if (key == "seed") {
                c.seed = value.get<std::uint64_t>();
            } else if (key == "out_dir") {
                c.out_dir = value.get<std::string>();
            } else if (key == "groups") {
                c.groups.clear();
                for (const auto& g : value) {
                    DeaGroup group = dea_group_from_string(g.get<std::string>());
                    if (std::find(c.groups.begin(), c.groups.end(), group) == c.groups.end())
                        c.groups.push_back(group);
                }
            } else if (key == "threads") {
                c.threads = value.get<int>();
            } else if (key == "synth_assets") {
                c.synth_assets = value.get<long>();
            } else if (key == "synth_days") {
                c.synth_days = value.get<long>();
            } else if (key == "synth_factors") {
                c.synth_factors = value.get<long>();
            } else {
                throw validation_error("unknown config key: " + key);
            }
        } catch (const json::exception& e) {
            throw validation_error("config key '" + key + "': " + e.what());
        }
    }
    if (c.outsample_lens.empty()) throw validation_error("config: outsample_lens must be non-empty");
    if (c.groups.empty()) throw validation_error("config: groups must be non-empty");
    if (c.insample_len < 2) throw validation_error("config: insample_len too small");
    if (!(c.gamma > 0.0)) throw validation_error("config: gamma must be positive");
    if (!(c.alpha_cvar > 0.0 && c.alpha_cvar < 1.0))
        throw validation_error("config: alpha_cvar must lie inside (0,1)");
    if (!(c.epsilon_bop > 0.0 && c.epsilon_bop < 1.0))
        throw validation_error("config: epsilon_bop must lie inside (0,1)");
    if (c.threads < 1) throw validation_error("config: threads must be >= 1");
    return c;
}

std::string config_hash(const RunConfig& c) {
    std::string s;
    s += "insample_len=" + std::to_string(c.insample_len) + "\n";
    s += "outsample_lens=" + join_longs(c.outsample_lens) + "\n";
    s += "gamma=" + full_precision(c.gamma) + "\n";
    s += "alpha_cvar=" + full_precision(c.alpha_cvar) + "\n";
    s += "epsilon_bop=" + full_precision(c.epsilon_bop) + "\n";
    s += "seed=" + std::to_string(c.seed) + "\n";
    s += "groups=";
    for (DeaGroup g : c.groups) s += to_string(g);
    s += "\n";
    for (const auto& d : c.datasets) s += "dataset=" + d.name + ":" + d.path + "\n";
    s += "synth=" + std::to_string(c.synth_assets) + "x" + std::to_string(c.synth_days) + "f" +
         std::to_string(c.synth_factors) + "\n";
    return hex64(fnv1a(s));
}

void cmd_ingest(const RunConfig& config) {
    if (config.datasets.empty()) throw validation_error("ingest: no datasets configured");
    std::vector<std::string> missing;
    for (const auto& ds : config.datasets)
        if (!fs::exists(ds.path)) missing.push_back(ds.path);
    if (!missing.empty()) {
        std::string msg = "ingest: missing input files:";
        for (const auto& m : missing) msg += " " + m;
        throw validation_error(msg);
    }

    fs::create_directories(config.out_dir);
    for (const auto& ds : config.datasets) {
        PriceSeries prices = load_prices(ds.path);
        ReturnsMatrix returns = compute_returns(prices);
        write_returns_csv(returns, out_path(config, ds.name + "_returns.csv"));

        const double c = static_cast<double>(returns.n_assets()) /
                         static_cast<double>(config.insample_len);
        json manifest;
        manifest["dataset"] = ds.name;
        manifest["config_hash"] = config_hash(config);
        manifest["n_assets"] = returns.n_assets();
        manifest["n_days"] = prices.n_days();
        manifest["n_returns"] = returns.n_obs();
        manifest["insample_len"] = config.insample_len;
        manifest["concentration"] = c;
        manifest["high_dimensional"] = (c >= 1.0);
        json windows = json::object();
        for (long len : config.outsample_lens) {
            const long count = (returns.n_obs() >= config.insample_len + len)
                                   ? (returns.n_obs() - config.insample_len) / len
                                   : 0;
            windows[std::to_string(len)] = count;
        }
        manifest["window_counts"] = windows;
        auto f = open_out(out_path(config, ds.name + "_manifest.json"));
        f << manifest.dump(2) << '\n';
    }
}

void cmd_synth(const RunConfig& config, const std::string& out_csv) {
    SynthConfig sc;
    sc.n_assets = config.synth_assets;
    sc.n_days = config.synth_days;
    sc.n_factors = config.synth_factors;
    sc.seed = config.seed;
    PriceSeries prices = synth_prices(sc);
    fs::path p(out_csv);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    write_prices_csv(prices, out_csv);
}

void write_metrics_csv(const std::string& path, const RunConfig& config,
                       const std::vector<std::pair<std::string, MetricVector>>& metrics) {
    auto f = open_out(path);
    stamp(f, config, "per-dataset");
    f << "tag";
    for (const char* name : MetricVector::field_names()) f << ',' << name;
    f << '\n';
    for (const auto& [tag, mv] : metrics) {
        f << tag;
        const auto vals = mv.values();
        for (int i = 0; i < 10; ++i) {
            if (mv.degenerate(i))
                f << ",NA";
            else
                f << ',' << full_precision(vals[i]);
        }
        f << '\n';
    }
}

std::vector<std::pair<std::string, MetricVector>> read_metrics_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open metrics file: " + path);
    std::vector<std::pair<std::string, MetricVector>> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_line(line);
        if (!header_seen) {
            if (fields.size() != 11 || fields[0] != "tag")
                throw validation_error("metrics file: unexpected header in " + path);
            for (int i = 0; i < 10; ++i)
                if (fields[i + 1] != MetricVector::field_names()[i])
                    throw validation_error("metrics file: unexpected column " + fields[i + 1]);
            header_seen = true;
            continue;
        }
        if (fields.size() != 11) throw validation_error("metrics file: bad row in " + path);
        MetricVector mv;
        auto cell = [&](int i, double& slot, bool* flag) {
            if (fields[i + 1] == "NA") {
                slot = 0.0;
                if (flag) *flag = true;
                return;
            }
            slot = std::stod(fields[i + 1]);
        };
        cell(0, mv.mean_return, nullptr);
        cell(1, mv.sd, nullptr);
        cell(2, mv.var_05, nullptr);
        cell(3, mv.cvar_05, nullptr);
        cell(4, mv.dd, nullptr);
        cell(5, mv.mean_cvar_ratio, &mv.mean_cvar_degenerate);
        cell(6, mv.sharpe, &mv.sharpe_degenerate);
        cell(7, mv.sortino, &mv.sortino_degenerate);
        cell(8, mv.mean_var_ratio, &mv.mean_var_degenerate);
        cell(9, mv.turnover_value, nullptr);
        out.emplace_back(fields[0], mv);
    }
    if (!header_seen) throw validation_error("metrics file: no header in " + path);
    return out;
}

std::vector<RankingRow> read_ranking_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw validation_error("cannot open ranking file: " + path);
    std::vector<RankingRow> out;
    std::string line;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto fields = split_line(line);
        if (!header_seen) {
            if (fields.size() != 5 || fields[0] != "tag")
                throw validation_error("ranking file: unexpected header in " + path);
            header_seen = true;
            continue;
        }
        if (fields.size() != 5) throw validation_error("ranking file: bad row in " + path);
        RankingRow row;
        row.tag = fields[0];
        row.group = fields[1];
        row.oos_period = std::stol(fields[2]);
        row.score = (fields[3] == "NA") ? std::numeric_limits<double>::infinity()
                                        : std::stod(fields[3]);
        row.rank = std::stol(fields[4]);
        out.push_back(std::move(row));
    }
    return out;
}

namespace {

void write_ranking_rows(std::ofstream& f, const std::string& group, long oos_period,
                        const std::vector<EfficiencyScore>& ranking) {
    long rank = 1;
    for (const auto& score : ranking) {
        f << score.dmu_tag << ',' << group << ',' << oos_period << ','
          << (score.unbounded ? "NA" : format_fixed(score.score)) << ',' << rank << '\n';
        ++rank;
    }
}

DatasetOutcome run_dataset(const RunConfig& config, const DatasetRef& ds) {
    DatasetOutcome outcome;
    outcome.name = ds.name;
    ReturnsMatrix returns = load_returns_csv(ds.path);
    outcome.n_assets = returns.n_assets();
    outcome.n_obs = returns.n_obs();
    for (long len : config.outsample_lens)
        outcome.plans.push_back(plan_windows(returns, config.insample_len, len));

    GridSettings settings;
    settings.gamma = config.gamma;
    settings.epsilon_bop = config.epsilon_bop;
    settings.alpha_cvar = config.alpha_cvar;
    settings.threads = config.threads;

    outcome.grid = run_grid(returns, outcome.plans, settings, ds.name);
    outcome.benchmarks = run_benchmarks(returns, outcome.plans, settings, ds.name);
    for (size_t s = 0; s < outcome.plans.size(); ++s) {
        outcome.grid_metrics.push_back(setting_metrics(outcome.grid.settings[s]));
        outcome.benchmark_metrics.push_back(setting_metrics(outcome.benchmarks.settings[s]));
    }

    for (DeaGroup group : config.groups) {
        GroupSelection sel;
        std::vector<std::vector<std::string>> top10s;
        for (const auto& metrics : outcome.grid_metrics) {
            DeaInstance inst = build_instance(metrics, group);
            sel.rankings.push_back(rank_all(inst));
            std::vector<std::string> top10;
            for (const auto& score : sel.rankings.back()) {
                if (top10.size() >= 10) break;
                top10.push_back(score.dmu_tag);
            }
            top10s.push_back(std::move(top10));
        }
        sel.market_best = select_market_best(top10s, geometric_mean_scores(sel.rankings));
        outcome.selections.emplace(group, std::move(sel));
    }
    return outcome;
}

json selection_to_json(const RunConfig& config, const DatasetOutcome& outcome) {
    json j;
    j["dataset"] = outcome.name;
    j["config_hash"] = config_hash(config);
    json groups = json::object();
    for (const auto& [group, sel] : outcome.selections) {
        json g;
        g["market_best"] = {{"tag", sel.market_best.tag},
                            {"gm", sel.market_best.gm},
                            {"fallback", sel.market_best.fallback}};
        json top10 = json::object();
        json warnings = json::array();
        for (size_t s = 0; s < sel.rankings.size(); ++s) {
            json tags = json::array();
            for (size_t r = 0; r < sel.rankings[s].size() && r < 10; ++r)
                tags.push_back(sel.rankings[s][r].dmu_tag);
            top10[std::to_string(config.outsample_lens[s])] = tags;
            for (const auto& score : sel.rankings[s])
                if (score.unbounded)
                    warnings.push_back(score.dmu_tag + " unbounded at oos " +
                                       std::to_string(config.outsample_lens[s]));
        }
        g["top10"] = top10;
        g["warnings"] = warnings;
        groups[to_string(group)] = g;
    }
    j["groups"] = groups;

    json failed = json::object();
    for (size_t s = 0; s < outcome.grid.settings.size(); ++s) {
        json list = json::array();
        for (const auto& [tag, result] : outcome.grid.settings[s].models)
            if (!result.ok) list.push_back(tag + ": " + result.failure_reason);
        for (const auto& [tag, result] : outcome.benchmarks.settings[s].models)
            if (!result.ok) list.push_back(tag + ": " + result.failure_reason);
        if (!list.empty()) failed[std::to_string(config.outsample_lens[s])] = list;
    }
    j["failed_models"] = failed;
    return j;
}

long group_index(DeaGroup g) { return static_cast<long>(g); }

}  // namespace

BacktestResult cmd_backtest(const RunConfig& config) {
    if (config.datasets.empty()) throw validation_error("backtest: no datasets configured");
    for (const auto& ds : config.datasets)
        if (!fs::exists(ds.path))
            throw validation_error("backtest: missing returns artifact " + ds.path +
                                   " (run ingest first)");

    BacktestResult result;
    for (const auto& ds : config.datasets) result.datasets.push_back(run_dataset(config, ds));

    for (DeaGroup group : config.groups) {
        std::vector<MarketBest> bests;
        for (const auto& outcome : result.datasets)
            bests.push_back(outcome.selections.at(group).market_best);
        result.universal_best[group] = select_universal_best(bests);
    }

    auto record = [&result](const std::string& path) { result.written_files.push_back(path); };

    // Per-dataset artifacts.
    for (const auto& outcome : result.datasets) {
        const std::vector<CovKind> kinds = dataset_cov_kinds(config, outcome.n_assets);
        for (size_t s = 0; s < config.outsample_lens.size(); ++s) {
            const std::string suffix = "_oos" + std::to_string(config.outsample_lens[s]) + ".csv";
            std::string path = out_path(config, outcome.name + "_metrics" + suffix);
            write_metrics_csv(path, config, outcome.grid_metrics[s]);
            record(path);
            path = out_path(config, outcome.name + "_benchmark_metrics" + suffix);
            write_metrics_csv(path, config, outcome.benchmark_metrics[s]);
            record(path);
        }

        std::string path = out_path(config, outcome.name + "_rankings.csv");
        {
            auto f = open_out(path);
            stamp(f, config, cov_kind_list(kinds));
            f << "tag,group,oos_period,score,rank\n";
            for (const auto& [group, sel] : outcome.selections)
                for (size_t s = 0; s < sel.rankings.size(); ++s)
                    write_ranking_rows(f, to_string(group), config.outsample_lens[s],
                                       sel.rankings[s]);
        }
        record(path);

        path = out_path(config, outcome.name + "_selection.json");
        {
            auto f = open_out(path);
            f << selection_to_json(config, outcome).dump(2) << '\n';
        }
        record(path);
    }

    // Cross-dataset top-10 tables, one per group.
    for (DeaGroup group : config.groups) {
        std::string path = out_path(config, std::string("top10_group") + to_string(group) + ".csv");
        auto f = open_out(path);
        stamp(f, config, "per-dataset");
        f << "oos_period,rank";
        for (const auto& outcome : result.datasets) f << ',' << outcome.name;
        f << '\n';
        for (size_t s = 0; s < config.outsample_lens.size(); ++s) {
            for (long r = 0; r < 10; ++r) {
                f << config.outsample_lens[s] << ',' << (r + 1);
                for (const auto& outcome : result.datasets) {
                    const auto& ranking = outcome.selections.at(group).rankings[s];
                    f << ',' << (r < static_cast<long>(ranking.size()) ? ranking[r].dmu_tag : "");
                }
                f << '\n';
            }
        }
        f << "summary,market_best";
        for (const auto& outcome : result.datasets)
            f << ',' << outcome.selections.at(group).market_best.tag;
        f << "\nsummary,gm";
        for (const auto& outcome : result.datasets)
            f << ',' << format_fixed(outcome.selections.at(group).market_best.gm);
        f << "\nsummary,universal_best";
        for (size_t i = 0; i < result.datasets.size(); ++i)
            f << ',' << result.universal_best.at(group);
        f << '\n';
        record(path);
    }

    // Comparison tables and box-plot data.
    std::vector<ComparisonTable> tables;
    for (size_t s = 0; s < config.outsample_lens.size(); ++s) {
        std::string path = out_path(
            config, "comparison_oos" + std::to_string(config.outsample_lens[s]) + ".csv");
        auto f = open_out(path);
        stamp(f, config, "per-dataset");
        f << "dataset,group,MV,CVaR,SMAD,MM,GMV,"
             "A_market_tag,A_market,A_universal_tag,A_universal,"
             "B_market_tag,B_market,B_universal_tag,B_universal,"
             "C_market_tag,C_market,C_universal_tag,C_universal\n";
        for (const auto& outcome : result.datasets) {
            SelectedTags selected;
            for (DeaGroup group : config.groups) {
                selected.market[group_index(group)] =
                    outcome.selections.at(group).market_best.tag;
                selected.universal[group_index(group)] = result.universal_best.at(group);
            }
            ComparisonTable table =
                compare_benchmarks(outcome.name, config.outsample_lens[s],
                                   outcome.benchmark_metrics[s], outcome.grid_metrics[s], selected);
            tables.push_back(table);
            for (DeaGroup group : config.groups) {
                const ComparisonRow& row = table.rows[group_index(group)];
                f << outcome.name << ',' << to_string(group);
                for (double v : row.benchmark_scores) f << ',' << format_fixed(v);
                for (int g = 0; g < 3; ++g) {
                    f << ',' << selected.market[g] << ','
                      << format_fixed(row.selected_scores[2 * g]);
                    f << ',' << selected.universal[g] << ','
                      << format_fixed(row.selected_scores[2 * g + 1]);
                }
                f << '\n';
            }
        }
        record(path);
    }

    {
        std::string path = out_path(config, "boxplot_scores.csv");
        auto f = open_out(path);
        stamp(f, config, "per-dataset");
        f << "group,role,model,dataset,oos_period,score\n";
        const std::array<const char*, 5> benchmark_order = {"MV", "CVaR", "SMAD", "MM", "GMV"};
        for (DeaGroup group : config.groups) {
            for (const auto& table : tables) {
                const ComparisonRow& row = table.rows[group_index(group)];
                for (int b = 0; b < 5; ++b)
                    f << to_string(group) << ",benchmark," << benchmark_order[b] << ','
                      << table.dataset << ',' << table.outsample_len << ','
                      << format_fixed(row.benchmark_scores[b]) << '\n';
                f << to_string(group) << ",universal," << result.universal_best.at(group) << ','
                  << table.dataset << ',' << table.outsample_len << ','
                  << format_fixed(row.selected_scores[2 * group_index(group) + 1]) << '\n';
            }
        }
        record(path);
    }

    // Run-level summary.
    {
        json summary;
        summary["config_hash"] = config_hash(config);
        json universal = json::object();
        for (const auto& [group, tag] : result.universal_best) universal[to_string(group)] = tag;
        summary["universal_best"] = universal;
        json market = json::object();
        for (DeaGroup group : config.groups) {
            json per_ds = json::object();
            for (const auto& outcome : result.datasets) {
                const auto& mb = outcome.selections.at(group).market_best;
                per_ds[outcome.name] = {{"tag", mb.tag}, {"gm", mb.gm}, {"fallback", mb.fallback}};
            }
            market[to_string(group)] = per_ds;
        }
        summary["market_best"] = market;
        json stats = json::object();
        for (const auto& outcome : result.datasets) {
            json s;
            s["n_assets"] = outcome.n_assets;
            s["n_returns"] = outcome.n_obs;
            s["model_count"] = static_cast<long>(outcome.grid.settings.front().models.size());
            json wc = json::object();
            for (size_t i = 0; i < outcome.plans.size(); ++i)
                wc[std::to_string(config.outsample_lens[i])] = outcome.plans[i].count();
            s["window_counts"] = wc;
            stats[outcome.name] = s;
        }
        summary["datasets"] = stats;
        std::string path = out_path(config, "selection_summary.json");
        auto f = open_out(path);
        f << summary.dump(2) << '\n';
        record(path);
    }

    return result;
}

void cmd_rank(const RunConfig& config, const std::string& metrics_csv, const std::string& out_csv) {
    auto metrics = read_metrics_csv(metrics_csv);
    auto f = open_out(out_csv);
    stamp(f, config, "from-metrics-file");
    f << "tag,group,oos_period,score,rank\n";
    for (DeaGroup group : config.groups) {
        DeaInstance inst = build_instance(metrics, group);
        write_ranking_rows(f, to_string(group), 0, rank_all(inst));
    }
}

void cmd_compare(const RunConfig& config, const std::string& grid_metrics_csv,
                 const std::string& benchmark_metrics_csv, const std::string& selection_json,
                 const std::string& dataset, long outsample_len, const std::string& out_csv) {
    auto grid_metrics = read_metrics_csv(grid_metrics_csv);
    auto benchmark_metrics = read_metrics_csv(benchmark_metrics_csv);

    std::ifstream sf(selection_json);
    if (!sf) throw validation_error("cannot open selection file: " + selection_json);
    json sel = json::parse(sf);

    SelectedTags selected;
    for (DeaGroup group : config.groups) {
        const auto& g = sel.at("groups").at(to_string(group));
        selected.market[group_index(group)] = g.at("market_best").at("tag").get<std::string>();
        selected.universal[group_index(group)] = selected.market[group_index(group)];
    }

    ComparisonTable table = compare_benchmarks(dataset, outsample_len, benchmark_metrics,
                                               grid_metrics, selected);
    auto f = open_out(out_csv);
    stamp(f, config, "from-metrics-file");
    f << "dataset,group,MV,CVaR,SMAD,MM,GMV,market_tag,market_score\n";
    for (DeaGroup group : config.groups) {
        const ComparisonRow& row = table.rows[group_index(group)];
        f << dataset << ',' << to_string(group);
        for (double v : row.benchmark_scores) f << ',' << format_fixed(v);
        f << ',' << selected.market[group_index(group)] << ','
          << format_fixed(row.selected_scores[2 * group_index(group)]) << '\n';
    }
}

void cmd_report(const RunConfig& config) {
    // Reassemble the cross-dataset selection summary from per-dataset artifacts.
    std::map<DeaGroup, std::vector<MarketBest>> bests;
    for (const auto& ds : config.datasets) {
        const std::string path = out_path(config, ds.name + "_selection.json");
        std::ifstream f(path);
        if (!f) throw validation_error("report: missing selection artifact " + path);
        json sel = json::parse(f);
        for (DeaGroup group : config.groups) {
            const auto& g = sel.at("groups").at(to_string(group)).at("market_best");
            MarketBest mb;
            mb.tag = g.at("tag").get<std::string>();
            mb.gm = g.at("gm").get<double>();
            mb.fallback = g.at("fallback").get<bool>();
            bests[group].push_back(mb);
        }
    }

    json summary;
    summary["config_hash"] = config_hash(config);
    json universal = json::object();
    json market = json::object();
    for (DeaGroup group : config.groups) {
        universal[to_string(group)] = select_universal_best(bests.at(group));
        json per_ds = json::object();
        for (size_t i = 0; i < config.datasets.size(); ++i) {
            const auto& mb = bests.at(group)[i];
            per_ds[config.datasets[i].name] = {{"tag", mb.tag}, {"gm", mb.gm},
                                               {"fallback", mb.fallback}};
        }
        market[to_string(group)] = per_ds;
    }
    summary["universal_best"] = universal;
    summary["market_best"] = market;
    auto f = open_out(out_path(config, "selection_summary.json"));
    f << summary.dump(2) << '\n';
}

}  // namespace shrinkpo
