#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

namespace shrinkpo {

// One model's concatenated out-of-sample daily returns plus the weight vector
// chosen at each rebalance.
struct OosSeries {
    Eigen::VectorXd returns;
    std::vector<Eigen::VectorXd> weights_history;
};

// The ten financial metrics. Risk metrics are expressed as losses
// (VaR/CVaR positive when the tail loses money). Ratio metrics carry a
// degenerate flag when the mean is nonpositive or the denominator is.
struct MetricVector {
    double mean_return = 0.0;
    double sd = 0.0;
    double var_05 = 0.0;
    double cvar_05 = 0.0;
    double dd = 0.0;
    double mean_cvar_ratio = 0.0;
    double sharpe = 0.0;
    double sortino = 0.0;
    double mean_var_ratio = 0.0;
    double turnover_value = 0.0;

    bool mean_cvar_degenerate = false;
    bool sharpe_degenerate = false;
    bool sortino_degenerate = false;
    bool mean_var_degenerate = false;
    bool turnover_flagged = false;  // fewer than 2 rebalances

    static const std::array<const char*, 10>& field_names();
    std::array<double, 10> values() const;
    bool degenerate(int field_index) const;
};

MetricVector compute_metrics(const OosSeries& series);

// Mean L1 distance between consecutive rebalance weight vectors.
double turnover(const std::vector<Eigen::VectorXd>& weights_history);

}  // namespace shrinkpo
