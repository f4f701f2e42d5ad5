#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

namespace shrinkpo {

enum class MeanKind { SM, JS, BS, QUAD, BOP };

const char* to_string(MeanKind kind);
MeanKind mean_kind_from_string(const std::string& name);
const std::vector<MeanKind>& all_mean_kinds();

struct MeanDiagnostics {
    double alpha = std::numeric_limits<double>::quiet_NaN();   // target weight
    double beta = std::numeric_limits<double>::quiet_NaN();    // sample weight (BOP)
    double target_value = std::numeric_limits<double>::quiet_NaN();  // scalar level of the target
    bool degenerate = false;
    std::string note;
};

struct MeanEstimate {
    MeanKind kind = MeanKind::SM;
    Eigen::VectorXd mu;
    MeanDiagnostics diag;
};

MeanEstimate sample_mean(const Eigen::MatrixXd& returns);

// James-Stein: shrink the sample mean toward r0 * 1 with r0 the
// covariance-weighted grand mean; intensity clipped at 1.
MeanEstimate js_mean(const Eigen::MatrixXd& returns);

// Bayes-Stein: same target, intensity (p+2) / (p+2 + n q).
MeanEstimate bs_mean(const Eigen::MatrixXd& returns);

// Quadratic-loss shrinkage with Moore-Penrose inverted covariance.
// Throws numeric_error("QUAD degenerate") when the combining denominator vanishes.
MeanEstimate quad_mean(const Eigen::MatrixXd& returns);

// Optimal linear shrinkage toward n^((eps-1)/2) * 1, eps in (0,1).
MeanEstimate bop_mean(const Eigen::MatrixXd& returns, double epsilon = 0.5);

MeanEstimate estimate_mean(MeanKind kind, const Eigen::MatrixXd& returns, double bop_epsilon = 0.5);

}  // namespace shrinkpo
