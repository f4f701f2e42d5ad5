#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles/test_data.hpp"
#include "shrinkpo/backtest_engine.hpp"
#include "shrinkpo/errors.hpp"

using namespace shrinkpo;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ReturnsMatrix wrap_returns(const MatrixXd& data) {
    ReturnsMatrix r;
    r.returns = data;
    for (long j = 0; j < data.cols(); ++j) r.assets.push_back("A" + std::to_string(j));
    for (long t = 0; t < data.rows(); ++t) r.dates.push_back("d" + std::to_string(t));
    return r;
}

const ModelResult& model_of(const SettingResult& setting, const std::string& tag) {
    for (const auto& [t, result] : setting.models)
        if (t == tag) return result;
    throw std::runtime_error("missing model " + tag);
}

}  // namespace

TEST_CASE("run_grid produces 66 models when c < 1 and 48 when c >= 1") {
    ReturnsMatrix low = wrap_returns(oracles::seeded_returns(150, 5, 700));
    WindowPlan plan = plan_windows(low, 60, 30);
    GridSettings settings;
    GridResult grid = run_grid(low, {plan}, settings);
    CHECK(grid.settings.size() == 1);
    CHECK(grid.settings[0].models.size() == 66);

    ReturnsMatrix high = wrap_returns(oracles::seeded_returns(12, 8, 701));
    WindowPlan short_plan = plan_windows(high, 5, 3);
    GridResult high_grid = run_grid(high, {short_plan}, settings);
    CHECK(high_grid.settings[0].models.size() == 48);
}

TEST_CASE("out-of-sample series length equals windows times horizon") {
    ReturnsMatrix r = wrap_returns(oracles::seeded_returns(200, 4, 702));
    WindowPlan plan = plan_windows(r, 60, 25);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);
    for (const auto& [tag, result] : grid.settings[0].models) {
        REQUIRE(result.ok);
        CHECK(result.series.returns.size() == plan.count() * 25);
        CHECK(result.series.weights_history.size() == static_cast<size_t>(plan.count()));
    }
}

TEST_CASE("isotropic data: every GMV model holds the equal-weight portfolio") {
    // Single window whose in-sample slice has an exactly isotropic sample
    // covariance; the out-of-sample block is arbitrary.
    MatrixXd panel(90, 5);
    panel.topRows(60) = oracles::isotropic_returns(60, 5, 0.01, 703);
    panel.bottomRows(30) = oracles::seeded_returns(30, 5, 7030);
    ReturnsMatrix r = wrap_returns(panel);
    WindowPlan plan = plan_windows(r, 60, 30);
    REQUIRE(plan.count() == 1);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);

    for (const auto& [tag, result] : grid.settings[0].models) {
        if (tag.rfind("GMV+", 0) != 0) continue;
        REQUIRE(result.ok);
        const VectorXd& w = result.series.weights_history[0];
        for (long i = 0; i < 5; ++i) CHECK(w(i) == doctest::Approx(0.2).epsilon(1e-6));
    }
}

TEST_CASE("benchmark MV/GMV series coincide with grid SCV models") {
    ReturnsMatrix r = wrap_returns(oracles::seeded_returns(160, 4, 704));
    WindowPlan plan = plan_windows(r, 60, 25);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);
    GridResult bench = run_benchmarks(r, {plan}, settings);

    const ModelResult& bench_mv = model_of(bench.settings[0], "MV");
    const ModelResult& grid_mv = model_of(grid.settings[0], "SCV+SM");
    CHECK((bench_mv.series.returns - grid_mv.series.returns).cwiseAbs().maxCoeff() == 0.0);

    const ModelResult& bench_gmv = model_of(bench.settings[0], "GMV");
    const ModelResult& grid_gmv = model_of(grid.settings[0], "GMV+SCV");
    CHECK((bench_gmv.series.returns - grid_gmv.series.returns).cwiseAbs().maxCoeff() == 0.0);

    for (const auto& [tag, result] : bench.settings[0].models) REQUIRE(result.ok);
}

TEST_CASE("run_grid is deterministic and thread-count independent") {
    ReturnsMatrix r = wrap_returns(oracles::seeded_returns(150, 4, 705));
    WindowPlan plan = plan_windows(r, 50, 25);
    GridSettings one;
    one.threads = 1;
    GridSettings four;
    four.threads = 4;
    GridResult a = run_grid(r, {plan}, one);
    GridResult b = run_grid(r, {plan}, four);
    REQUIRE(a.settings[0].models.size() == b.settings[0].models.size());
    for (size_t m = 0; m < a.settings[0].models.size(); ++m) {
        const auto& [tag_a, res_a] = a.settings[0].models[m];
        const auto& [tag_b, res_b] = b.settings[0].models[m];
        CHECK(tag_a == tag_b);
        CHECK((res_a.series.returns - res_b.series.returns).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("an estimator failure marks only the dependent models failed") {
    // A duplicated asset makes the sample covariance exactly singular, so the
    // eigenvalue-domain estimators fail for the setting while the linear ones
    // keep running.
    MatrixXd data = oracles::seeded_returns(150, 4, 708);
    data.col(2) = data.col(3);
    ReturnsMatrix r = wrap_returns(data);
    WindowPlan plan = plan_windows(r, 60, 30);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);

    long failed = 0;
    for (const auto& [tag, result] : grid.settings[0].models) {
        const bool eigen_domain =
            tag.find("LIS") != std::string::npos || tag.find("QIS") != std::string::npos ||
            tag.find("GIS") != std::string::npos || tag.find("AS") != std::string::npos;
        if (eigen_domain) {
            CHECK(!result.ok);
            CHECK(result.failure_reason.find("nonsingular") != std::string::npos);
            ++failed;
        } else {
            CHECK(result.ok);
        }
    }
    CHECK(failed == 24);  // four kinds, GMV plus five MV pairings each

    auto metrics = setting_metrics(grid.settings[0]);
    CHECK(metrics.size() == 42);
}

TEST_CASE("setting_metrics covers exactly the successful models") {
    ReturnsMatrix r = wrap_returns(oracles::seeded_returns(150, 5, 706));
    WindowPlan plan = plan_windows(r, 60, 30);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);
    auto metrics = setting_metrics(grid.settings[0]);
    CHECK(metrics.size() == 66);
    CHECK(metrics[0].first == grid.settings[0].models[0].first);
}

TEST_CASE("geometric mean of per-setting scores") {
    std::vector<std::vector<EfficiencyScore>> rankings(3);
    auto add = [&](int setting, const std::string& tag, double score) {
        EfficiencyScore s;
        s.dmu_tag = tag;
        s.score = score;
        rankings[setting].push_back(s);
    };
    add(0, "X", 1.2);
    add(1, "X", 0.9);
    add(2, "X", 1.1);
    add(0, "Y", 1.0);
    add(1, "Y", 1.0);  // Y missing from setting 2: excluded
    auto gms = geometric_mean_scores(rankings);
    REQUIRE(gms.size() == 1);
    CHECK(gms[0].first == "X");
    CHECK(gms[0].second == doctest::Approx(std::pow(1.2 * 0.9 * 1.1, 1.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("select_market_best honors the top-10 intersection and falls back") {
    std::vector<std::vector<std::string>> top10 = {
        {"A", "B", "C"}, {"B", "C", "D"}, {"C", "B", "E"}};
    std::vector<std::pair<std::string, double>> gm = {
        {"A", 1.05}, {"B", 1.02}, {"C", 1.04}, {"D", 1.01}, {"E", 1.0}};
    MarketBest best = select_market_best(top10, gm);
    CHECK(best.tag == "C");
    CHECK(!best.fallback);
    CHECK(best.gm == doctest::Approx(1.04));

    // Two qualifiers: the higher GM wins.
    gm[1].second = 1.06;
    best = select_market_best(top10, gm);
    CHECK(best.tag == "B");

    // Empty intersection: fall back to the best GM overall.
    std::vector<std::vector<std::string>> disjoint = {{"A"}, {"D"}, {"E"}};
    best = select_market_best(disjoint, gm);
    CHECK(best.fallback);
    CHECK(best.tag == "B");
}

TEST_CASE("select_universal_best: mode, then mean GM, then tag") {
    auto mb = [](const std::string& tag, double gm) {
        MarketBest b;
        b.tag = tag;
        b.gm = gm;
        return b;
    };
    CHECK(select_universal_best({mb("GMV+COV2", 1.01), mb("GMV+COV2", 1.0), mb("LIS+SM", 1.2)}) ==
          "GMV+COV2");
    CHECK(select_universal_best({mb("A", 1.05), mb("A", 1.05), mb("B", 1.01), mb("B", 1.01)}) ==
          "A");
    CHECK(select_universal_best({mb("B", 1.0), mb("A", 1.0)}) == "A");
}

TEST_CASE("compare_benchmarks pools benchmarks with distinct selections") {
    ReturnsMatrix r = wrap_returns(oracles::seeded_returns(170, 4, 707));
    WindowPlan plan = plan_windows(r, 60, 30);
    GridSettings settings;
    GridResult grid = run_grid(r, {plan}, settings);
    GridResult bench = run_benchmarks(r, {plan}, settings);
    auto grid_metrics = setting_metrics(grid.settings[0]);
    auto bench_metrics = setting_metrics(bench.settings[0]);

    SelectedTags selected;
    selected.market = {"GMV+COV2", "COV2+SM", "GMV+LIS"};
    selected.universal = {"GMV+COV2", "COV2+SM", "GMV+COV2"};
    ComparisonTable table =
        compare_benchmarks("ds", 30, bench_metrics, grid_metrics, selected);

    // Market == universal for group A: both columns carry the same score.
    CHECK(table.rows[0].selected_scores[0] == table.rows[0].selected_scores[1]);
    for (int b = 0; b < 5; ++b) CHECK(std::isfinite(table.rows[0].benchmark_scores[b]));

    // Manual assembly of the pooled instance reproduces the pipeline scores.
    std::vector<std::pair<std::string, MetricVector>> pool = bench_metrics;
    for (const std::string& tag : {std::string("GMV+COV2"), std::string("COV2+SM"),
                                   std::string("GMV+LIS")})
        for (const auto& [t, mv] : grid_metrics)
            if (t == tag) pool.emplace_back(t, mv);
    DeaInstance inst = build_instance(pool, DeaGroup::A);
    for (long i = 0; i < inst.n_dmus(); ++i) {
        if (inst.dmu_tags[i] != "GMV+COV2") continue;
        CHECK(table.rows[0].selected_scores[0] ==
              doctest::Approx(super_efficiency(inst, i).score).epsilon(1e-12));
    }

    // A tag missing from the grid yields NaN cells rather than a failure.
    selected.market[1] = "NOT+THERE";
    ComparisonTable missing = compare_benchmarks("ds", 30, bench_metrics, grid_metrics, selected);
    CHECK(!std::isfinite(missing.rows[1].selected_scores[2]));
}
