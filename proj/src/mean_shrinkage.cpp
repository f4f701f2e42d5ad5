#include "shrinkpo/mean_shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkpo/cov_shrinkage.hpp"
#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

void require_returns(const Eigen::MatrixXd& returns, long min_rows, const char* who) {
    if (returns.rows() < min_rows)
        throw validation_error(std::string(who) + " needs at least " + std::to_string(min_rows) +
                               " observations");
    if (returns.cols() < 1) throw validation_error(std::string(who) + " needs at least 1 asset");
    if (!returns.allFinite()) throw validation_error(std::string(who) + ": non-finite returns");
}

// Shared pieces for the Stein-type estimators: r_bar, pseudo-inverted S_n and
// the grand-mean target r0.
struct SteinParts {
    Eigen::VectorXd rbar;
    Eigen::MatrixXd sinv;
    double r0 = 0.0;
    double q = 0.0;  // n-free quadratic form (rbar - r0 1)' Sinv (rbar - r0 1)
    bool target_fallback = false;
};

SteinParts stein_parts(const Eigen::MatrixXd& returns) {
    SteinParts parts;
    parts.rbar = returns.colwise().mean();
    parts.sinv = pinv(sample_cov_matrix(returns));
    const long p = returns.cols();
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(p);
    const double denom = ones.dot(parts.sinv * ones);
    if (denom > 1e-300) {
        parts.r0 = parts.rbar.dot(parts.sinv * ones) / denom;
    } else {
        // 1_p is in the null space of S+; fall back to the plain grand mean.
        parts.r0 = parts.rbar.mean();
        parts.target_fallback = true;
    }
    Eigen::VectorXd diff = parts.rbar - parts.r0 * ones;
    parts.q = std::max(diff.dot(parts.sinv * diff), 0.0);
    return parts;
}

}  // namespace

const char* to_string(MeanKind kind) {
    switch (kind) {
        case MeanKind::SM: return "SM";
        case MeanKind::JS: return "JS";
        case MeanKind::BS: return "BS";
        case MeanKind::QUAD: return "QUAD";
        case MeanKind::BOP: return "BOP";
    }
    return "?";
}

const std::vector<MeanKind>& all_mean_kinds() {
    static const std::vector<MeanKind> kinds = {MeanKind::SM, MeanKind::JS, MeanKind::BS,
                                                MeanKind::QUAD, MeanKind::BOP};
    return kinds;
}

MeanKind mean_kind_from_string(const std::string& name) {
    for (MeanKind k : all_mean_kinds())
        if (name == to_string(k)) return k;
    throw validation_error("unknown mean estimator: " + name);
}

MeanEstimate sample_mean(const Eigen::MatrixXd& returns) {
    require_returns(returns, 1, "sample mean");
    MeanEstimate est;
    est.kind = MeanKind::SM;
    est.mu = returns.colwise().mean();
    return est;
}

MeanEstimate js_mean(const Eigen::MatrixXd& returns) {
    require_returns(returns, 2, "JS");
    const long p = returns.cols();
    const double n = static_cast<double>(returns.rows());
    SteinParts parts = stein_parts(returns);

    double alpha;
    if (parts.q <= 0.0) {
        alpha = 1.0;  // limit of min(1, (p-2)/0+)
    } else {
        alpha = std::clamp((static_cast<double>(p) - 2.0) / (n * parts.q), 0.0, 1.0);
    }

    MeanEstimate est;
    est.kind = MeanKind::JS;
    est.diag.alpha = alpha;
    est.diag.target_value = parts.r0;
    est.diag.degenerate = parts.target_fallback;
    if (parts.target_fallback) est.diag.note = "grand-mean target fallback";
    est.mu = alpha * parts.r0 * Eigen::VectorXd::Ones(p) + (1.0 - alpha) * parts.rbar;
    return est;
}

MeanEstimate bs_mean(const Eigen::MatrixXd& returns) {
    require_returns(returns, 2, "BS");
    const long p = returns.cols();
    const double n = static_cast<double>(returns.rows());
    SteinParts parts = stein_parts(returns);

    const double alpha = (static_cast<double>(p) + 2.0) /
                         (static_cast<double>(p) + 2.0 + n * parts.q);

    MeanEstimate est;
    est.kind = MeanKind::BS;
    est.diag.alpha = alpha;
    est.diag.target_value = parts.r0;
    est.diag.degenerate = parts.target_fallback;
    if (parts.target_fallback) est.diag.note = "grand-mean target fallback";
    est.mu = alpha * parts.r0 * Eigen::VectorXd::Ones(p) + (1.0 - alpha) * parts.rbar;
    return est;
}

MeanEstimate quad_mean(const Eigen::MatrixXd& returns) {
    require_returns(returns, 2, "QUAD");
    const long p = returns.cols();
    const long n = returns.rows();
    const double dn = static_cast<double>(n);
    const double dp = static_cast<double>(p);

    Eigen::MatrixXd splus = pinv(sample_cov_matrix(returns));
    Eigen::VectorXd ones_p = Eigen::VectorXd::Ones(p);

    // Gram matrix of observations in the S+ metric.
    Eigen::MatrixXd g = returns * splus * returns.transpose();
    const double g_total = g.sum();
    const double g_diag = g.trace();
    const double g_off = g_total - g_diag;

    Eigen::VectorXd w = returns * (splus * ones_p);
    const double s1 = ones_p.dot(splus * ones_p);
    if (s1 <= 1e-300) throw numeric_error("QUAD degenerate");

    const double r1 = g_off / (dp * (dn - 1.0));
    const double r2 = (g_diag - g_off / (dn - 1.0)) / (dn * dp);
    const double r3 = w.sum() / (dn * s1);
    const double r4 = (w.sum() * w.sum() - w.squaredNorm()) / (dp * (dn - 1.0) * s1);

    const double denom = r1 + r2 - r3;
    if (std::abs(denom) <= 1e-12) throw numeric_error("QUAD degenerate");

    MeanEstimate est;
    est.kind = MeanKind::QUAD;
    est.diag.alpha = r2 * r4 / denom;        // weight on 1_p
    est.diag.beta = (r1 - r3) / denom;       // weight on r_bar
    est.mu = est.diag.alpha * ones_p + est.diag.beta * returns.colwise().mean().transpose();
    return est;
}

MeanEstimate bop_mean(const Eigen::MatrixXd& returns, double epsilon) {
    require_returns(returns, 2, "BOP");
    if (!(epsilon > 0.0 && epsilon < 1.0))
        throw validation_error("BOP epsilon must lie strictly inside (0,1)");
    const long p = returns.cols();
    const double n = static_cast<double>(returns.rows());
    const double c = static_cast<double>(p) / n;

    Eigen::VectorXd rbar = returns.colwise().mean();
    Eigen::VectorXd mu0 = std::pow(n, (epsilon - 1.0) / 2.0) * Eigen::VectorXd::Ones(p);

    MeanEstimate est;
    est.kind = MeanKind::BOP;
    est.diag.target_value = mu0(0);

    auto fallback = [&](const char* why) {
        est.mu = rbar;
        est.diag.alpha = 0.0;
        est.diag.beta = 1.0;
        est.diag.degenerate = true;
        est.diag.note = why;
        return est;
    };

    if (std::abs(1.0 - c) <= 1e-12) return fallback("concentration ratio at 1");

    Eigen::MatrixXd sinv = pinv(sample_cov_matrix(returns));
    const double a = rbar.dot(sinv * rbar);
    const double b = rbar.dot(sinv * mu0);
    const double q0 = mu0.dot(sinv * mu0);
    if (q0 <= 1e-300) return fallback("target in covariance null space");

    const double denom = a * q0 - b * b;
    if (denom <= 1e-12 * std::max(a * q0, 1e-300))
        return fallback("sample mean collinear with target");

    const double beta = ((a - c / (1.0 - c)) * q0 - b * b) / denom;
    const double alpha = (1.0 - beta) * b / q0;
    est.diag.alpha = alpha;
    est.diag.beta = beta;
    est.mu = alpha * mu0 + beta * rbar;
    return est;
}

MeanEstimate estimate_mean(MeanKind kind, const Eigen::MatrixXd& returns, double bop_epsilon) {
    switch (kind) {
        case MeanKind::SM: return sample_mean(returns);
        case MeanKind::JS: return js_mean(returns);
        case MeanKind::BS: return bs_mean(returns);
        case MeanKind::QUAD: return quad_mean(returns);
        case MeanKind::BOP: return bop_mean(returns, bop_epsilon);
    }
    throw validation_error("estimate_mean: unknown kind");
}

}  // namespace shrinkpo
