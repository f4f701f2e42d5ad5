#include "shrinkpo/performance_metrics.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkpo/errors.hpp"

namespace shrinkpo {

const std::array<const char*, 10>& MetricVector::field_names() {
    static const std::array<const char*, 10> names = {
        "mean_return", "sd",     "var_05",  "cvar_05",        "dd",
        "mean_cvar_ratio", "sharpe", "sortino", "mean_var_ratio", "turnover"};
    return names;
}

std::array<double, 10> MetricVector::values() const {
    return {mean_return, sd,     var_05,  cvar_05,        dd,
            mean_cvar_ratio, sharpe, sortino, mean_var_ratio, turnover_value};
}

bool MetricVector::degenerate(int field_index) const {
    switch (field_index) {
        case 5: return mean_cvar_degenerate;
        case 6: return sharpe_degenerate;
        case 7: return sortino_degenerate;
        case 8: return mean_var_degenerate;
        default: return false;
    }
}

double turnover(const std::vector<Eigen::VectorXd>& weights_history) {
    if (weights_history.empty()) throw validation_error("turnover needs at least one weight vector");
    const size_t count = weights_history.size();
    if (count == 1) return 0.0;
    double acc = 0.0;
    for (size_t l = 0; l + 1 < count; ++l) {
        if (weights_history[l].size() != weights_history[l + 1].size())
            throw validation_error("turnover: weight vectors of unequal length");
        acc += (weights_history[l + 1] - weights_history[l]).cwiseAbs().sum();
    }
    return acc / static_cast<double>(count - 1);
}

MetricVector compute_metrics(const OosSeries& series) {
    const long n = series.returns.size();
    if (n < 2) throw validation_error("compute_metrics needs at least 2 return observations");
    if (!series.returns.allFinite()) throw validation_error("compute_metrics: non-finite returns");

    MetricVector m;
    m.mean_return = series.returns.mean();
    m.sd = std::sqrt((series.returns.array() - m.mean_return).square().sum() /
                     static_cast<double>(n));
    m.dd = std::sqrt(series.returns.array().min(0.0).square().sum() / static_cast<double>(n));

    // Empirical lower quantile: k-th smallest with k = ceil(0.05 n).
    std::vector<double> sorted(series.returns.data(), series.returns.data() + n);
    std::sort(sorted.begin(), sorted.end());
    const long k = static_cast<long>(std::ceil(0.05 * static_cast<double>(n)));
    const double quantile = sorted[std::max<long>(k, 1) - 1];
    m.var_05 = -quantile;
    double tail_sum = 0.0;
    long tail_count = 0;
    for (double r : sorted) {
        if (r <= quantile) {
            tail_sum += r;
            ++tail_count;
        } else {
            break;
        }
    }
    m.cvar_05 = -(tail_sum / static_cast<double>(tail_count));

    auto ratio = [&](double denominator, bool& flag) {
        if (m.mean_return <= 0.0 || denominator <= 0.0) {
            flag = true;
            return 0.0;
        }
        return m.mean_return / denominator;
    };
    m.mean_cvar_ratio = ratio(m.cvar_05, m.mean_cvar_degenerate);
    m.sharpe = ratio(m.sd, m.sharpe_degenerate);
    m.sortino = ratio(m.dd, m.sortino_degenerate);
    m.mean_var_ratio = ratio(m.var_05, m.mean_var_degenerate);

    if (series.weights_history.empty()) {
        m.turnover_value = 0.0;
        m.turnover_flagged = true;
    } else {
        m.turnover_value = turnover(series.weights_history);
        m.turnover_flagged = series.weights_history.size() < 2;
    }
    return m;
}

}  // namespace shrinkpo
