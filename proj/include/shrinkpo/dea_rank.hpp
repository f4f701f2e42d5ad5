#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

#include "shrinkpo/performance_metrics.hpp"

namespace shrinkpo {

// Investor groups from the ranking methodology:
//   A: five risk inputs against five return/ratio outputs,
//   B: unit input against the five return/ratio outputs,
//   C: five risk inputs against a unit output.
enum class DeaGroup { A, B, C };

const char* to_string(DeaGroup group);
DeaGroup dea_group_from_string(const std::string& name);

struct DeaInstance {
    Eigen::MatrixXd inputs;    // d x m, strictly positive after flooring
    Eigen::MatrixXd outputs;   // d x s, strictly positive after flooring
    std::vector<std::string> dmu_tags;
    DeaGroup group = DeaGroup::A;

    long n_dmus() const { return inputs.rows(); }
};

struct EfficiencyScore {
    std::string dmu_tag;
    double score = 0.0;
    bool unbounded = false;  // empty effective reference set; score is a sentinel

    static constexpr double kUnboundedSentinel = std::numeric_limits<double>::infinity();
};

// Positivity floor applied to every DEA cell (degenerate ratios included).
constexpr double kDeaFloor = 1e-6;

DeaInstance build_instance(const std::vector<std::pair<std::string, MetricVector>>& metrics,
                           DeaGroup group);

// Input-oriented CCR super-efficiency: the evaluated DMU is removed from the
// reference set, so efficient units can score above 1.
EfficiencyScore super_efficiency(const DeaInstance& instance, long dmu_index);

// Standard CCR score (DMU kept in the reference set); equals super-efficiency
// for inefficient units. Exposed for verification.
EfficiencyScore ccr_efficiency(const DeaInstance& instance, long dmu_index);

// All DMUs, descending score, ties broken by tag.
std::vector<EfficiencyScore> rank_all(const DeaInstance& instance);

}  // namespace shrinkpo
