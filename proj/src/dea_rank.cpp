#include "shrinkpo/dea_rank.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

double floored(double v) {
    if (!std::isfinite(v) || v < kDeaFloor) return kDeaFloor;
    return v;
}

// Multiplier-form DEA: maximize u'y_i subject to u'y_j - v'w_j <= 0 over the
// reference set and v'w_i = 1, u, v >= 0. `exclude_self` removes DMU i from
// the reference set (super-efficiency variant).
EfficiencyScore solve_dea(const DeaInstance& inst, long i, bool exclude_self) {
    const long d = inst.n_dmus();
    const long m = inst.inputs.cols();
    const long s = inst.outputs.cols();
    if (i < 0 || i >= d) throw validation_error("DEA: DMU index out of range");

    LpProblem lp;
    lp.sense = LpSense::Maximize;
    lp.objective = Eigen::VectorXd::Zero(s + m);
    lp.objective.head(s) = inst.outputs.row(i).transpose();

    for (long j = 0; j < d; ++j) {
        if (exclude_self && j == i) continue;
        LpConstraint con;
        con.coeffs = Eigen::VectorXd::Zero(s + m);
        con.coeffs.head(s) = inst.outputs.row(j).transpose();
        con.coeffs.tail(m) = -inst.inputs.row(j).transpose();
        con.relation = Relation::LessEqual;
        con.rhs = 0.0;
        lp.constraints.push_back(std::move(con));
    }
    LpConstraint norm;
    norm.coeffs = Eigen::VectorXd::Zero(s + m);
    norm.coeffs.tail(m) = inst.inputs.row(i).transpose();
    norm.relation = Relation::Equal;
    norm.rhs = 1.0;
    lp.constraints.push_back(std::move(norm));

    LpSolution sol = solve_lp(lp);
    EfficiencyScore score;
    score.dmu_tag = inst.dmu_tags[i];
    if (sol.status == SolveStatus::Unbounded) {
        score.score = EfficiencyScore::kUnboundedSentinel;
        score.unbounded = true;
        return score;
    }
    if (!sol.optimal()) throw numeric_error("DEA LP failed for DMU " + inst.dmu_tags[i]);
    score.score = sol.value;
    return score;
}

}  // namespace

const char* to_string(DeaGroup group) {
    switch (group) {
        case DeaGroup::A: return "A";
        case DeaGroup::B: return "B";
        case DeaGroup::C: return "C";
    }
    return "?";
}

DeaGroup dea_group_from_string(const std::string& name) {
    if (name == "A") return DeaGroup::A;
    if (name == "B") return DeaGroup::B;
    if (name == "C") return DeaGroup::C;
    throw validation_error("unknown DEA group: " + name);
}

DeaInstance build_instance(const std::vector<std::pair<std::string, MetricVector>>& metrics,
                           DeaGroup group) {
    const long d = static_cast<long>(metrics.size());
    if (d < 2) throw validation_error("DEA instance needs at least 2 models");

    DeaInstance inst;
    inst.group = group;
    inst.dmu_tags.reserve(d);
    for (const auto& [tag, mv] : metrics) inst.dmu_tags.push_back(tag);

    auto risk_row = [](const MetricVector& mv) {
        Eigen::RowVectorXd r(5);
        r << floored(mv.sd), floored(mv.var_05), floored(mv.cvar_05), floored(mv.dd),
            floored(mv.turnover_value);
        return r;
    };
    // Outputs honor the positivity proviso: a nonpositive mean floors the
    // mean cell and every ratio cell.
    auto reward_row = [](const MetricVector& mv) {
        Eigen::RowVectorXd r(5);
        r << floored(mv.mean_return),
            (mv.mean_cvar_degenerate ? kDeaFloor : floored(mv.mean_cvar_ratio)),
            (mv.sharpe_degenerate ? kDeaFloor : floored(mv.sharpe)),
            (mv.sortino_degenerate ? kDeaFloor : floored(mv.sortino)),
            (mv.mean_var_degenerate ? kDeaFloor : floored(mv.mean_var_ratio));
        return r;
    };

    switch (group) {
        case DeaGroup::A:
            inst.inputs.resize(d, 5);
            inst.outputs.resize(d, 5);
            for (long i = 0; i < d; ++i) {
                inst.inputs.row(i) = risk_row(metrics[i].second);
                inst.outputs.row(i) = reward_row(metrics[i].second);
            }
            break;
        case DeaGroup::B:
            inst.inputs = Eigen::MatrixXd::Ones(d, 1);
            inst.outputs.resize(d, 5);
            for (long i = 0; i < d; ++i) inst.outputs.row(i) = reward_row(metrics[i].second);
            break;
        case DeaGroup::C:
            inst.inputs.resize(d, 5);
            inst.outputs = Eigen::MatrixXd::Ones(d, 1);
            for (long i = 0; i < d; ++i) inst.inputs.row(i) = risk_row(metrics[i].second);
            break;
    }
    return inst;
}

EfficiencyScore super_efficiency(const DeaInstance& instance, long dmu_index) {
    return solve_dea(instance, dmu_index, true);
}

EfficiencyScore ccr_efficiency(const DeaInstance& instance, long dmu_index) {
    return solve_dea(instance, dmu_index, false);
}

std::vector<EfficiencyScore> rank_all(const DeaInstance& instance) {
    std::vector<EfficiencyScore> scores;
    scores.reserve(instance.n_dmus());
    for (long i = 0; i < instance.n_dmus(); ++i) scores.push_back(super_efficiency(instance, i));
    std::stable_sort(scores.begin(), scores.end(), [](const EfficiencyScore& a, const EfficiencyScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.dmu_tag < b.dmu_tag;
    });
    return scores;
}

}  // namespace shrinkpo
