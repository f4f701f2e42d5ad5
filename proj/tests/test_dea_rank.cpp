#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles/test_data.hpp"
#include "shrinkpo/dea_rank.hpp"
#include "shrinkpo/errors.hpp"

using namespace shrinkpo;
using Eigen::MatrixXd;

namespace {

MetricVector metric_sample(std::uint64_t seed, bool negative_mean = false) {
    shrinkpo::NormalStream rng(seed);
    MetricVector m;
    m.mean_return = (negative_mean ? -1.0 : 1.0) * (4e-4 + 1e-4 * std::abs(rng.next()));
    m.sd = 0.008 + 0.002 * std::abs(rng.next());
    m.var_05 = 0.012 + 0.003 * std::abs(rng.next());
    m.cvar_05 = m.var_05 + 0.004 * std::abs(rng.next());
    m.dd = 0.005 + 0.002 * std::abs(rng.next());
    m.turnover_value = 0.2 + 0.1 * std::abs(rng.next());
    if (negative_mean) {
        m.sharpe_degenerate = m.sortino_degenerate = true;
        m.mean_cvar_degenerate = m.mean_var_degenerate = true;
    } else {
        m.mean_cvar_ratio = m.mean_return / m.cvar_05;
        m.sharpe = m.mean_return / m.sd;
        m.sortino = m.mean_return / m.dd;
        m.mean_var_ratio = m.mean_return / m.var_05;
    }
    return m;
}

std::vector<std::pair<std::string, MetricVector>> metric_pool(long d, std::uint64_t seed) {
    std::vector<std::pair<std::string, MetricVector>> pool;
    for (long i = 0; i < d; ++i)
        pool.emplace_back("M" + std::to_string(i), metric_sample(seed + i));
    return pool;
}

DeaInstance ratio_instance(const std::vector<double>& outputs) {
    DeaInstance inst;
    const long d = static_cast<long>(outputs.size());
    inst.inputs = MatrixXd::Ones(d, 1);
    inst.outputs.resize(d, 1);
    for (long i = 0; i < d; ++i) {
        inst.outputs(i, 0) = outputs[i];
        inst.dmu_tags.push_back("D" + std::to_string(i));
    }
    return inst;
}

}  // namespace

TEST_CASE("build_instance shapes and flooring") {
    auto pool = metric_pool(4, 600);
    DeaInstance a = build_instance(pool, DeaGroup::A);
    CHECK(a.inputs.rows() == 4);
    CHECK(a.inputs.cols() == 5);
    CHECK(a.outputs.cols() == 5);

    DeaInstance b = build_instance(pool, DeaGroup::B);
    CHECK(b.inputs.cols() == 1);
    CHECK((b.inputs.array() == 1.0).all());
    CHECK(b.outputs.cols() == 5);

    DeaInstance c = build_instance(pool, DeaGroup::C);
    CHECK(c.inputs.cols() == 5);
    CHECK(c.outputs.cols() == 1);
    CHECK((c.outputs.array() == 1.0).all());

    // A nonpositive mean floors the mean cell and every ratio cell.
    pool[2].second = metric_sample(777, true);
    DeaInstance floored = build_instance(pool, DeaGroup::A);
    for (long j = 0; j < 5; ++j) CHECK(floored.outputs(2, j) == kDeaFloor);

    CHECK_THROWS_AS(build_instance({pool[0]}, DeaGroup::A), validation_error);
}

TEST_CASE("single input/output super-efficiency reduces to output ratios") {
    DeaInstance inst = ratio_instance({4.0, 2.0, 1.0});
    CHECK(super_efficiency(inst, 0).score == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(super_efficiency(inst, 1).score == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(super_efficiency(inst, 2).score == doctest::Approx(0.25).epsilon(1e-10));
}

TEST_CASE("two identical DMUs score exactly 1") {
    DeaInstance inst = ratio_instance({3.0, 3.0});
    CHECK(super_efficiency(inst, 0).score == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(super_efficiency(inst, 1).score == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("unbounded super-efficiency yields the sentinel") {
    DeaInstance inst;
    inst.inputs = MatrixXd::Ones(2, 1);
    inst.outputs.resize(2, 2);
    inst.outputs << 1.0, 1.0, 1.0, 0.0;  // DMU 1 never constrains output 2
    inst.dmu_tags = {"free", "other"};
    EfficiencyScore score = super_efficiency(inst, 0);
    CHECK(score.unbounded);
    CHECK(std::isinf(score.score));
}

TEST_CASE("rank_all ordering and tie-breaking") {
    DeaInstance inst = ratio_instance({2.0, 0.5, 0.8});
    auto ranked = rank_all(inst);
    CHECK(ranked[0].dmu_tag == "D0");
    CHECK(ranked[1].dmu_tag == "D2");
    CHECK(ranked[2].dmu_tag == "D1");

    DeaInstance ties = ratio_instance({1.0, 1.0, 1.0});
    auto tied = rank_all(ties);
    CHECK(tied[0].dmu_tag == "D0");
    CHECK(tied[1].dmu_tag == "D1");
    CHECK(tied[2].dmu_tag == "D2");
}

TEST_CASE("rank_all order agrees with per-DMU scores") {
    auto pool = metric_pool(10, 610);
    DeaInstance inst = build_instance(pool, DeaGroup::A);
    auto ranked = rank_all(inst);
    REQUIRE(ranked.size() == 10);
    std::map<std::string, double> individual;
    for (long i = 0; i < 10; ++i)
        individual[inst.dmu_tags[i]] = super_efficiency(inst, i).score;
    for (size_t r = 0; r + 1 < ranked.size(); ++r) {
        CHECK(ranked[r].score == individual[ranked[r].dmu_tag]);
        CHECK(ranked[r].score >= ranked[r + 1].score);
    }
}

TEST_CASE("inefficient DMUs keep their standard CCR score") {
    for (std::uint64_t seed : {620u, 621u, 622u}) {
        auto pool = metric_pool(8, seed);
        for (DeaGroup group : {DeaGroup::A, DeaGroup::B, DeaGroup::C}) {
            DeaInstance inst = build_instance(pool, group);
            for (long i = 0; i < inst.n_dmus(); ++i) {
                EfficiencyScore sup = super_efficiency(inst, i);
                if (sup.unbounded || sup.score >= 1.0 - 1e-9) continue;
                EfficiencyScore ccr = ccr_efficiency(inst, i);
                CHECK(sup.score == doctest::Approx(ccr.score).epsilon(1e-8));
            }
        }
    }
}

TEST_CASE("units invariance: rescaling an input column leaves scores unchanged") {
    auto pool = metric_pool(7, 630);
    DeaInstance inst = build_instance(pool, DeaGroup::A);
    DeaInstance scaled = inst;
    scaled.inputs.col(2) *= 37.5;
    for (long i = 0; i < inst.n_dmus(); ++i) {
        const double a = super_efficiency(inst, i).score;
        const double b = super_efficiency(scaled, i).score;
        CHECK(a == doctest::Approx(b).epsilon(1e-8));
    }
}

TEST_CASE("adding a dominated DMU never raises an existing score") {
    auto pool = metric_pool(6, 640);
    DeaInstance base = build_instance(pool, DeaGroup::A);
    std::vector<double> before;
    for (long i = 0; i < base.n_dmus(); ++i) before.push_back(super_efficiency(base, i).score);

    // Dominated unit: worse on every input, worse on every output.
    MetricVector bad = pool[0].second;
    bad.sd *= 2.0;
    bad.var_05 *= 2.0;
    bad.cvar_05 *= 2.0;
    bad.dd *= 2.0;
    bad.turnover_value *= 2.0;
    bad.mean_return *= 0.5;
    bad.mean_cvar_ratio *= 0.5;
    bad.sharpe *= 0.5;
    bad.sortino *= 0.5;
    bad.mean_var_ratio *= 0.5;
    pool.emplace_back("DOMINATED", bad);
    DeaInstance bigger = build_instance(pool, DeaGroup::A);
    for (long i = 0; i < base.n_dmus(); ++i) {
        const double after = super_efficiency(bigger, i).score;
        CHECK(after <= before[static_cast<size_t>(i)] + 1e-9);
    }
}
