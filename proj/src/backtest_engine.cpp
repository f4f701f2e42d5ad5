#include "shrinkpo/backtest_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <thread>

#include "shrinkpo/errors.hpp"

namespace shrinkpo {

namespace {

void parallel_for(long count, int threads, const std::function<void(long)>& body) {
    if (threads <= 1 || count <= 1) {
        for (long i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<long> next{0};
    std::vector<std::thread> pool;
    const int workers = static_cast<int>(std::min<long>(threads, count));
    std::vector<std::exception_ptr> errors(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                long i;
                while ((i = next.fetch_add(1)) < count) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct ModelPlan {
    std::string tag;
    bool is_gmv = false;
    CovKind cov = CovKind::SCV;
    MeanKind mean = MeanKind::SM;
};

std::vector<ModelPlan> grid_models(const std::vector<CovKind>& cov_kinds,
                                   const std::vector<MeanKind>& mean_kinds) {
    std::vector<ModelPlan> models;
    models.reserve(cov_kinds.size() * (1 + mean_kinds.size()));
    for (CovKind c : cov_kinds) {
        ModelPlan m;
        m.tag = std::string("GMV+") + to_string(c);
        m.is_gmv = true;
        m.cov = c;
        models.push_back(std::move(m));
    }
    for (CovKind c : cov_kinds)
        for (MeanKind mk : mean_kinds) {
            ModelPlan m;
            m.tag = std::string(to_string(c)) + "+" + to_string(mk);
            m.cov = c;
            m.mean = mk;
            models.push_back(std::move(m));
        }
    return models;
}

// Per-window weights for every model, or the failure that stopped it.
struct WindowOutcome {
    std::vector<std::optional<Eigen::VectorXd>> weights;
    std::vector<std::string> failures;
};

SettingResult assemble_setting(const Eigen::MatrixXd& returns, const WindowPlan& plan,
                               const std::vector<std::string>& tags,
                               const std::vector<WindowOutcome>& outcomes) {
    SettingResult setting;
    setting.plan = plan;
    const long n_windows = plan.count();
    for (size_t m = 0; m < tags.size(); ++m) {
        ModelResult result;
        std::vector<double> series;
        series.reserve(n_windows * plan.outsample_len);
        for (long w = 0; w < n_windows && result.ok; ++w) {
            const auto& slot = outcomes[w].weights[m];
            if (!slot.has_value()) {
                result.ok = false;
                result.failure_reason =
                    "window " + std::to_string(w) + ": " + outcomes[w].failures[m];
                break;
            }
            result.series.weights_history.push_back(*slot);
            Eigen::MatrixXd oos = slice_rows(returns, plan.windows[w].outsample);
            Eigen::VectorXd daily = oos * (*slot);
            series.insert(series.end(), daily.data(), daily.data() + daily.size());
        }
        if (result.ok)
            result.series.returns =
                Eigen::Map<const Eigen::VectorXd>(series.data(), static_cast<long>(series.size()));
        else
            result.series = {};
        setting.models.emplace_back(tags[m], std::move(result));
    }
    return setting;
}

}  // namespace

GridResult run_grid(const ReturnsMatrix& returns, const std::vector<WindowPlan>& plans,
                    const GridSettings& settings, const std::string& dataset_name) {
    if (plans.empty()) throw validation_error("run_grid: no window plans");
    if (settings.mean_kinds.empty()) throw validation_error("run_grid: no mean estimators");

    GridResult grid;
    grid.dataset_name = dataset_name;
    const long p = returns.n_assets();

    for (const WindowPlan& plan : plans) {
        const double c = static_cast<double>(p) / static_cast<double>(plan.insample_len);
        std::vector<CovKind> cov_kinds = applicable_cov_kinds(c);
        if (!settings.cov_kinds.empty()) {
            std::vector<CovKind> filtered;
            for (CovKind k : settings.cov_kinds)
                if (std::find(cov_kinds.begin(), cov_kinds.end(), k) != cov_kinds.end())
                    filtered.push_back(k);
            cov_kinds = std::move(filtered);
        }
        if (cov_kinds.empty()) throw validation_error("run_grid: no covariance estimators apply");

        const std::vector<ModelPlan> models = grid_models(cov_kinds, settings.mean_kinds);
        std::vector<std::string> tags;
        for (const auto& m : models) tags.push_back(m.tag);

        std::vector<WindowOutcome> outcomes(plan.count());
        parallel_for(plan.count(), settings.threads, [&](long w) {
            WindowOutcome& out = outcomes[w];
            out.weights.resize(models.size());
            out.failures.resize(models.size());
            Eigen::MatrixXd insample = slice_rows(returns.returns, plan.windows[w].insample);

            std::map<CovKind, CovEstimate> covs;
            std::map<CovKind, std::string> cov_failures;
            for (CovKind k : cov_kinds) {
                try {
                    covs.emplace(k, estimate_cov(k, insample));
                } catch (const std::exception& e) {
                    cov_failures[k] = std::string(to_string(k)) + ": " + e.what();
                }
            }
            std::map<MeanKind, MeanEstimate> means;
            std::map<MeanKind, std::string> mean_failures;
            for (MeanKind k : settings.mean_kinds) {
                try {
                    means.emplace(k, estimate_mean(k, insample, settings.epsilon_bop));
                } catch (const std::exception& e) {
                    mean_failures[k] = std::string(to_string(k)) + ": " + e.what();
                }
            }

            for (size_t m = 0; m < models.size(); ++m) {
                const ModelPlan& model = models[m];
                auto cov_it = covs.find(model.cov);
                if (cov_it == covs.end()) {
                    out.failures[m] = cov_failures[model.cov];
                    continue;
                }
                try {
                    if (model.is_gmv) {
                        out.weights[m] = solve_gmv(cov_it->second).weights;
                    } else {
                        auto mean_it = means.find(model.mean);
                        if (mean_it == means.end()) {
                            out.failures[m] = mean_failures[model.mean];
                            continue;
                        }
                        out.weights[m] =
                            solve_mv(mean_it->second, cov_it->second, settings.gamma).weights;
                    }
                } catch (const std::exception& e) {
                    out.failures[m] = e.what();
                }
            }
        });

        grid.settings.push_back(assemble_setting(returns.returns, plan, tags, outcomes));
    }
    return grid;
}

GridResult run_benchmarks(const ReturnsMatrix& returns, const std::vector<WindowPlan>& plans,
                          const GridSettings& settings, const std::string& dataset_name) {
    if (plans.empty()) throw validation_error("run_benchmarks: no window plans");

    GridResult grid;
    grid.dataset_name = dataset_name;
    const std::vector<std::string> tags = {"MV", "GMV", "SMAD", "CVaR", "MM"};

    for (const WindowPlan& plan : plans) {
        std::vector<WindowOutcome> outcomes(plan.count());
        parallel_for(plan.count(), settings.threads, [&](long w) {
            WindowOutcome& out = outcomes[w];
            out.weights.resize(tags.size());
            out.failures.resize(tags.size());
            Eigen::MatrixXd insample = slice_rows(returns.returns, plan.windows[w].insample);

            auto attempt = [&](size_t slot, auto&& solve) {
                try {
                    out.weights[slot] = solve().weights;
                } catch (const std::exception& e) {
                    out.failures[slot] = e.what();
                }
            };
            attempt(0, [&] {
                return solve_mv(sample_mean(insample), sample_cov(insample), settings.gamma);
            });
            attempt(1, [&] { return solve_gmv(sample_cov(insample)); });
            attempt(2, [&] { return solve_smad(insample); });
            attempt(3, [&] { return solve_cvar(insample, settings.alpha_cvar); });
            attempt(4, [&] { return solve_minimax(insample); });
        });
        grid.settings.push_back(assemble_setting(returns.returns, plan, tags, outcomes));
    }
    return grid;
}

std::vector<std::pair<std::string, MetricVector>> setting_metrics(const SettingResult& setting) {
    std::vector<std::pair<std::string, MetricVector>> out;
    out.reserve(setting.models.size());
    for (const auto& [tag, result] : setting.models)
        if (result.ok) out.emplace_back(tag, compute_metrics(result.series));
    return out;
}

std::vector<std::pair<std::string, double>> geometric_mean_scores(
    const std::vector<std::vector<EfficiencyScore>>& per_setting_rankings) {
    if (per_setting_rankings.empty()) return {};
    std::map<std::string, std::pair<long, double>> acc;  // tag -> (count, sum of logs)
    for (const auto& ranking : per_setting_rankings) {
        for (const auto& score : ranking) {
            if (score.unbounded || !(score.score > 0.0) || !std::isfinite(score.score)) continue;
            auto& slot = acc[score.dmu_tag];
            slot.first += 1;
            slot.second += std::log(score.score);
        }
    }
    const long needed = static_cast<long>(per_setting_rankings.size());
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [tag, slot] : acc)
        if (slot.first == needed)
            out.emplace_back(tag, std::exp(slot.second / static_cast<double>(needed)));
    return out;
}

MarketBest select_market_best(const std::vector<std::vector<std::string>>& top10_per_setting,
                              const std::vector<std::pair<std::string, double>>& gm_scores) {
    if (gm_scores.empty()) throw validation_error("select_market_best: no scored models");

    std::set<std::string> intersection;
    for (size_t s = 0; s < top10_per_setting.size(); ++s) {
        std::set<std::string> tags(top10_per_setting[s].begin(), top10_per_setting[s].end());
        if (s == 0) {
            intersection = std::move(tags);
        } else {
            std::set<std::string> keep;
            for (const auto& t : intersection)
                if (tags.count(t)) keep.insert(t);
            intersection = std::move(keep);
        }
    }

    auto pick = [&](bool restrict_to_intersection) {
        MarketBest best;
        bool found = false;
        for (const auto& [tag, gm] : gm_scores) {
            if (restrict_to_intersection && !intersection.count(tag)) continue;
            if (!found || gm > best.gm || (gm == best.gm && tag < best.tag)) {
                best.tag = tag;
                best.gm = gm;
                found = true;
            }
        }
        return std::make_pair(found, best);
    };

    auto [found, best] = pick(true);
    if (!found) {
        std::tie(found, best) = pick(false);
        best.fallback = true;
    }
    return best;
}

std::string select_universal_best(const std::vector<MarketBest>& market_bests) {
    if (market_bests.empty()) throw validation_error("select_universal_best: no market bests");
    std::map<std::string, std::pair<long, double>> acc;  // tag -> (count, gm sum)
    for (const auto& mb : market_bests) {
        auto& slot = acc[mb.tag];
        slot.first += 1;
        slot.second += mb.gm;
    }
    std::string best;
    long best_count = -1;
    double best_mean_gm = 0.0;
    for (const auto& [tag, slot] : acc) {
        const double mean_gm = slot.second / static_cast<double>(slot.first);
        if (slot.first > best_count ||
            (slot.first == best_count && mean_gm > best_mean_gm) ||
            (slot.first == best_count && mean_gm == best_mean_gm && tag < best)) {
            best = tag;
            best_count = slot.first;
            best_mean_gm = mean_gm;
        }
    }
    return best;
}

ComparisonTable compare_benchmarks(
    const std::string& dataset, long outsample_len,
    const std::vector<std::pair<std::string, MetricVector>>& benchmark_metrics,
    const std::vector<std::pair<std::string, MetricVector>>& grid_metrics,
    const SelectedTags& selected) {
    ComparisonTable table;
    table.dataset = dataset;
    table.outsample_len = outsample_len;
    table.selected = selected;

    auto find_metric = [](const std::vector<std::pair<std::string, MetricVector>>& pool,
                          const std::string& tag) -> const MetricVector* {
        for (const auto& [t, mv] : pool)
            if (t == tag) return &mv;
        return nullptr;
    };

    // Pool: the five benchmarks plus every distinct selected model found in
    // the grid. Duplicate tags enter the DEA once and are reported per column.
    std::vector<std::pair<std::string, MetricVector>> pool = benchmark_metrics;
    std::vector<std::string> selected_order;
    for (int g = 0; g < 3; ++g) {
        selected_order.push_back(selected.market[g]);
        selected_order.push_back(selected.universal[g]);
    }
    std::set<std::string> added;
    for (const auto& tag : selected_order) {
        if (tag.empty() || added.count(tag)) continue;
        if (const MetricVector* mv = find_metric(grid_metrics, tag)) {
            pool.emplace_back(tag, *mv);
            added.insert(tag);
        }
    }

    const std::array<DeaGroup, 3> groups = {DeaGroup::A, DeaGroup::B, DeaGroup::C};
    const std::array<const char*, 5> benchmark_order = {"MV", "CVaR", "SMAD", "MM", "GMV"};
    for (int g = 0; g < 3; ++g) {
        DeaInstance inst = build_instance(pool, groups[g]);
        std::map<std::string, double> scores;
        for (long i = 0; i < inst.n_dmus(); ++i)
            scores[inst.dmu_tags[i]] = super_efficiency(inst, i).score;

        ComparisonRow& row = table.rows[g];
        row.group = groups[g];
        for (int b = 0; b < 5; ++b) {
            auto it = scores.find(benchmark_order[b]);
            row.benchmark_scores[b] =
                it == scores.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        }
        for (int col = 0; col < 6; ++col) {
            auto it = scores.find(selected_order[col]);
            row.selected_scores[col] =
                it == scores.end() ? std::numeric_limits<double>::quiet_NaN() : it->second;
        }
    }
    return table;
}

}  // namespace shrinkpo
