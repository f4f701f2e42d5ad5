#include "shrinkpo/cov_shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_obs(const Eigen::MatrixXd& returns, const char* who) {
    if (returns.rows() < 2)
        throw validation_error(std::string(who) + " needs at least 2 observations");
    if (returns.cols() < 1)
        throw validation_error(std::string(who) + " needs at least 1 asset");
    if (!returns.allFinite())
        throw validation_error(std::string(who) + ": non-finite returns");
}

Eigen::MatrixXd demean(const Eigen::MatrixXd& returns) {
    return returns.rowwise() - returns.colwise().mean();
}

// Spectrum of S_n, ascending. Shared precondition for the eigenvalue-domain
// estimators: c < 1 and a nonsingular sample covariance.
struct Spectrum {
    Eigen::VectorXd lambda;
    Eigen::MatrixXd u;
    double c = 0.0;
};

Spectrum spectrum_of(const Eigen::MatrixXd& returns) {
    Spectrum s;
    s.c = static_cast<double>(returns.cols()) / static_cast<double>(returns.rows());
    SymEigen eig = sym_eigen(sample_cov_matrix(returns));
    s.lambda = eig.eigenvalues;
    s.u = eig.eigenvectors;
    return s;
}

void require_nonsingular(const Spectrum& s, const char* who) {
    const double lmax = s.lambda.maxCoeff();
    if (lmax <= 0.0 || s.lambda.minCoeff() <= lmax * 1e-12)
        throw numeric_error(std::string(who) + " requires nonsingular sample covariance");
}

double lw_smoothing_bandwidth(double c, long p) {
    return std::pow(std::min(c * c, 1.0 / (c * c)), 0.35) / std::pow(static_cast<double>(p), 0.35);
}

// Smoothed Stein shrinker over the inverse-eigenvalue grid, 1/p normalization.
double stein_theta(const Eigen::VectorXd& x, double xi, double h, long p) {
    double acc = 0.0;
    for (long j = 0; j < x.size(); ++j) {
        const double d = x(j) - xi;
        acc += x(j) * d / (d * d + h * h * x(j) * x(j));
    }
    return acc / static_cast<double>(p);
}

double stein_conjugate(const Eigen::VectorXd& x, double xi, double h, long p) {
    double acc = 0.0;
    for (long j = 0; j < x.size(); ++j) {
        const double d = x(j) - xi;
        acc += h * x(j) * x(j) / (d * d + h * h * x(j) * x(j));
    }
    return acc / static_cast<double>(p);
}

// Truncated LIS inverse-eigenvalues on the nonzero grid. The linear formula
// can turn negative when eigenvalues cluster within the bandwidth at large c;
// such a slot keeps its sample value (no shrinkage) so the estimate stays PSD.
Eigen::VectorXd lis_inverse_deltas(const Eigen::VectorXd& x, double c, double h, long p,
                                   bool* fallback_used = nullptr) {
    Eigen::VectorXd delta(x.size());
    for (long i = 0; i < x.size(); ++i) {
        const double raw = (1.0 - c) * x(i) + 2.0 * c * x(i) * stein_theta(x, x(i), h, p);
        if (raw > 0.0) {
            delta(i) = std::min(x(i), raw);
        } else {
            delta(i) = x(i);
            if (fallback_used) *fallback_used = true;
        }
    }
    return delta;
}

// QIS eigenvalues before trace normalization, one per eigenvalue slot
// (ascending). `x` holds the inverse nonzero eigenvalues, ascending-lambda order.
Eigen::VectorXd qis_raw_deltas(const Eigen::VectorXd& lambda, double c, double h, long p, long n) {
    const long n_null = std::max<long>(p - n, 0);
    const long n_grid = p - n_null;
    Eigen::VectorXd x(n_grid);
    for (long i = 0; i < n_grid; ++i) x(i) = 1.0 / lambda(n_null + i);

    Eigen::VectorXd delta(p);
    if (n_null == 0) {
        for (long i = 0; i < p; ++i) {
            const double th = stein_theta(x, x(i), h, p);
            const double hj = stein_conjugate(x, x(i), h, p);
            const double a2 = th * th + hj * hj;
            delta(i) = 1.0 / ((1.0 - c) * (1.0 - c) * x(i) +
                              2.0 * c * (1.0 - c) * x(i) * th + c * c * x(i) * a2);
        }
    } else {
        // Null-eigenvalue level: mean of the first p-n inverse eigenvalues as
        // displayed; when p-n exceeds the grid size, the mean over the whole
        // grid is the only sensible reading.
        const long take = std::min<long>(n_null, n_grid);
        const double mean_x = x.head(take).sum() / static_cast<double>(take);
        const double delta0 = 1.0 / ((c - 1.0) * mean_x);
        for (long i = 0; i < n_null; ++i) delta(i) = delta0;
        for (long i = 0; i < n_grid; ++i) {
            const double th = stein_theta(x, x(i), h, p);
            const double hj = stein_conjugate(x, x(i), h, p);
            delta(n_null + i) = 1.0 / (x(i) * (th * th + hj * hj));
        }
    }
    return delta;
}

Eigen::VectorXd qis_normalized_deltas(const Eigen::VectorXd& lambda, double c, double h, long p, long n) {
    Eigen::VectorXd delta = qis_raw_deltas(lambda, c, h, p, n);
    const double sum_delta = delta.sum();
    if (sum_delta == 0.0) throw numeric_error("QIS: degenerate eigenvalue sum");
    return delta * (lambda.sum() / sum_delta);
}

Eigen::MatrixXd reassemble(const Spectrum& s, const Eigen::VectorXd& eigenvalues) {
    Eigen::MatrixXd m = s.u * eigenvalues.asDiagonal() * s.u.transpose();
    return 0.5 * (m + m.transpose());
}

}  // namespace

const char* to_string(CovKind kind) {
    switch (kind) {
        case CovKind::SCV: return "SCV";
        case CovKind::LS: return "LS";
        case CovKind::COV1: return "COV1";
        case CovKind::COV2: return "COV2";
        case CovKind::COVCOR: return "COVCOR";
        case CovKind::COVDIAG: return "COVDIAG";
        case CovKind::COVMKT: return "COVMKT";
        case CovKind::LIS: return "LIS";
        case CovKind::QIS: return "QIS";
        case CovKind::GIS: return "GIS";
        case CovKind::AS: return "AS";
    }
    return "?";
}

const std::vector<CovKind>& all_cov_kinds() {
    static const std::vector<CovKind> kinds = {
        CovKind::SCV,  CovKind::LS,      CovKind::COV1,   CovKind::COV2,
        CovKind::COVCOR, CovKind::COVDIAG, CovKind::COVMKT, CovKind::LIS,
        CovKind::QIS,  CovKind::GIS,     CovKind::AS};
    return kinds;
}

CovKind cov_kind_from_string(const std::string& name) {
    for (CovKind k : all_cov_kinds())
        if (name == to_string(k)) return k;
    throw validation_error("unknown covariance estimator: " + name);
}

Eigen::MatrixXd sample_cov_matrix(const Eigen::MatrixXd& returns) {
    require_obs(returns, "sample covariance");
    Eigen::MatrixXd centered = demean(returns);
    Eigen::MatrixXd s = (centered.transpose() * centered) / static_cast<double>(returns.rows());
    return 0.5 * (s + s.transpose());
}

CovEstimate sample_cov(const Eigen::MatrixXd& returns) {
    CovEstimate est;
    est.kind = CovKind::SCV;
    est.sigma = sample_cov_matrix(returns);
    est.diag.concentration = static_cast<double>(returns.cols()) / returns.rows();
    return est;
}

CovEstimate ls_cov(const Eigen::MatrixXd& returns) {
    const long p = returns.cols();
    const long n = returns.rows();
    Eigen::MatrixXd s = sample_cov_matrix(returns);

    CovEstimate est;
    est.kind = CovKind::LS;
    est.diag.concentration = static_cast<double>(p) / n;

    // Target (1/p) I. Trace norm of a PSD product reduces to the trace.
    const double tr = s.trace();
    const double fro2_s = s.squaredNorm();
    const double fro2_t = 1.0 / static_cast<double>(p);
    const double tr_st = tr / static_cast<double>(p);
    const double denom = fro2_s * fro2_t - tr_st * tr_st;
    if (std::abs(denom) <= 1e-14) {
        // S proportional to the identity: the loss has no unique minimizer.
        est.sigma = s;
        est.diag.alpha = 1.0;
        est.diag.beta = 0.0;
        est.diag.degenerate = true;
        est.diag.note = "S proportional to target; kept sample covariance";
        return est;
    }
    const double alpha = 1.0 - (tr * tr * fro2_t) / (static_cast<double>(n) * denom);
    const double beta = tr_st / fro2_t * (1.0 - alpha);
    est.diag.alpha = alpha;
    est.diag.beta = beta;
    est.sigma = alpha * s;
    est.sigma.diagonal().array() += beta / static_cast<double>(p);
    return est;
}

LwIngredients lw_ingredients(const Eigen::MatrixXd& returns, CovKind target_kind) {
    require_obs(returns, "lw_cov");
    const long p = returns.cols();
    const long n = returns.rows();
    const double dn = static_cast<double>(n);

    Eigen::MatrixXd rc = demean(returns);
    Eigen::MatrixXd s = sample_cov_matrix(returns);
    Eigen::MatrixXd rc2 = rc.cwiseProduct(rc);
    Eigen::MatrixXd s2 = (rc2.transpose() * rc2) / dn;  // second-moment matrix

    LwIngredients ing;
    ing.pi_hat = s2.sum() - s.squaredNorm();
    ing.rho_diag = s2.diagonal().sum() - s.diagonal().squaredNorm();

    const double vbar = s.trace() / static_cast<double>(p);
    switch (target_kind) {
        case CovKind::COV1: {
            ing.target = vbar * Eigen::MatrixXd::Identity(p, p);
            // This estimator discards rho entirely.
            ing.rho_diag = 0.0;
            ing.rho_off = 0.0;
            break;
        }
        case CovKind::COV2: {
            const double off_sum = s.sum() - s.trace();
            const double cbar = (p > 1) ? off_sum / (static_cast<double>(p) * (p - 1)) : 0.0;
            ing.target = Eigen::MatrixXd::Constant(p, p, cbar);
            ing.target.diagonal().setConstant(vbar);
            if (p > 1) {
                double sum_sq = 0.0;
                for (long t = 0; t < n; ++t) {
                    const double row_sum = rc.row(t).sum();
                    const double row_sq = rc2.row(t).sum();
                    const double cross = row_sum * row_sum - row_sq;
                    sum_sq += cross * cross;
                }
                ing.rho_off = (sum_sq / (static_cast<double>(p) * dn) -
                               off_sum * off_sum / static_cast<double>(p)) /
                              static_cast<double>(p - 1);
            }
            break;
        }
        case CovKind::COVCOR: {
            Eigen::VectorXd sd = s.diagonal().cwiseSqrt();
            if ((s.diagonal().array() <= 0.0).any())
                throw numeric_error("COVCOR requires positive asset variances");
            double rbar = 0.0;
            for (long i = 0; i < p; ++i)
                for (long j = 0; j < p; ++j)
                    if (i != j) rbar += s(i, j) / (sd(i) * sd(j));
            rbar = (p > 1) ? rbar / (static_cast<double>(p) * (p - 1)) : 0.0;
            ing.target = rbar * (sd * sd.transpose());
            ing.target.diagonal() = s.diagonal();

            Eigen::MatrixXd rc3 = rc2.cwiseProduct(rc);
            Eigen::MatrixXd gamma_m = (rc3.transpose() * rc) / dn;
            gamma_m -= s.diagonal().replicate(1, p).cwiseProduct(s);
            double acc = 0.0;
            for (long i = 0; i < p; ++i)
                for (long j = 0; j < p; ++j)
                    acc += gamma_m(i, j) / (s(i, i) * s(j, j));
            ing.rho_off = rbar * acc;
            break;
        }
        case CovKind::COVDIAG: {
            ing.target = Eigen::MatrixXd(s.diagonal().asDiagonal());
            // rho_off stays zero.
            break;
        }
        case CovKind::COVMKT: {
            Eigen::VectorXd mkt = rc.rowwise().mean();
            const double var_mkt = mkt.squaredNorm() / dn;
            if (var_mkt <= 0.0)
                throw numeric_error("COVMKT requires a non-degenerate market return");
            Eigen::VectorXd cov_mkt = (rc.transpose() * mkt) / dn;
            ing.target = (cov_mkt * cov_mkt.transpose()) / var_mkt;
            ing.target.diagonal() = s.diagonal();

            Eigen::MatrixXd m = rc.array().colwise() * mkt.array();
            Eigen::MatrixXd k1 = (rc2.transpose() * m) / dn -
                                 cov_mkt.replicate(1, p).cwiseProduct(s);
            Eigen::MatrixXd k2 = (m.transpose() * m) / dn - var_mkt * s;

            double term1 = 0.0, term2 = 0.0, term3 = 0.0;
            for (long i = 0; i < p; ++i) {
                for (long j = 0; j < p; ++j) {
                    term1 += k1(i, j) * cov_mkt(j);
                    term2 += k2(i, j) * cov_mkt(i) * cov_mkt(j);
                }
                term3 += k1(i, i) * cov_mkt(i) * cov_mkt(i);
            }
            ing.rho_off = 2.0 * term1 / var_mkt - term2 / (var_mkt * var_mkt) -
                          term3 / (var_mkt * var_mkt);
            break;
        }
        default:
            throw validation_error("lw_cov: target_kind must be COV1/COV2/COVCOR/COVDIAG/COVMKT");
    }
    ing.gamma_hat = (s - ing.target).squaredNorm();
    return ing;
}

CovEstimate lw_cov(const Eigen::MatrixXd& returns, CovKind target_kind) {
    LwIngredients ing = lw_ingredients(returns, target_kind);
    Eigen::MatrixXd s = sample_cov_matrix(returns);
    const double n = static_cast<double>(returns.rows());

    double lambda = 0.0;
    if (ing.gamma_hat > 1e-300)
        lambda = std::clamp((ing.pi_hat - ing.rho_hat()) / (n * ing.gamma_hat), 0.0, 1.0);

    CovEstimate est;
    est.kind = target_kind;
    est.diag.concentration = static_cast<double>(returns.cols()) / n;
    est.diag.lambda = lambda;
    est.sigma = lambda * ing.target + (1.0 - lambda) * s;
    est.sigma = 0.5 * (est.sigma + est.sigma.transpose());
    return est;
}

CovEstimate lis_cov(const Eigen::MatrixXd& returns) {
    require_obs(returns, "LIS");
    Spectrum sp = spectrum_of(returns);
    if (sp.c >= 1.0) throw numeric_error("LIS requires concentration ratio below 1");
    require_nonsingular(sp, "LIS");

    const long p = returns.cols();
    const double h = lw_smoothing_bandwidth(sp.c, p);
    Eigen::VectorXd x = sp.lambda.cwiseInverse();
    bool fallback = false;
    Eigen::VectorXd delta = lis_inverse_deltas(x, sp.c, h, p, &fallback);

    CovEstimate est;
    est.kind = CovKind::LIS;
    est.diag.concentration = sp.c;
    est.diag.bandwidth = h;
    est.diag.degenerate = fallback;
    if (fallback) est.diag.note = "nonpositive shrunk inverse eigenvalue; sample value kept";
    est.diag.shrunk_eigenvalues = delta.cwiseInverse();
    est.sigma = reassemble(sp, est.diag.shrunk_eigenvalues);
    return est;
}

CovEstimate qis_cov(const Eigen::MatrixXd& returns) {
    require_obs(returns, "QIS");
    Spectrum sp = spectrum_of(returns);
    const long p = returns.cols();
    const long n = returns.rows();
    if (sp.lambda.maxCoeff() <= 0.0) throw numeric_error("QIS: all eigenvalues zero");
    if (p <= n) require_nonsingular(sp, "QIS with p <= n");

    const double h = lw_smoothing_bandwidth(sp.c, p);
    Eigen::VectorXd delta = qis_normalized_deltas(sp.lambda, sp.c, h, p, n);

    CovEstimate est;
    est.kind = CovKind::QIS;
    est.diag.concentration = sp.c;
    est.diag.bandwidth = h;
    est.diag.shrunk_eigenvalues = delta;
    est.sigma = reassemble(sp, delta);
    return est;
}

CovEstimate gis_cov(const Eigen::MatrixXd& returns) {
    require_obs(returns, "GIS");
    Spectrum sp = spectrum_of(returns);
    if (sp.c >= 1.0) throw numeric_error("GIS requires concentration ratio below 1");
    require_nonsingular(sp, "GIS");

    const long p = returns.cols();
    const long n = returns.rows();
    const double h = lw_smoothing_bandwidth(sp.c, p);
    Eigen::VectorXd x = sp.lambda.cwiseInverse();
    Eigen::VectorXd lis_delta = lis_inverse_deltas(x, sp.c, h, p);
    Eigen::VectorXd qis_delta = qis_normalized_deltas(sp.lambda, sp.c, h, p, n);

    // Geometric mean of the QIS eigenvalue and the LIS eigenvalue 1/delta_lis.
    Eigen::VectorXd gis(p);
    for (long i = 0; i < p; ++i) {
        const double ratio = qis_delta(i) / lis_delta(i);
        if (!(ratio > 0.0)) throw numeric_error("GIS: nonpositive eigenvalue ratio");
        gis(i) = std::sqrt(ratio);
    }

    CovEstimate est;
    est.kind = CovKind::GIS;
    est.diag.concentration = sp.c;
    est.diag.bandwidth = h;
    est.diag.shrunk_eigenvalues = gis;
    est.sigma = reassemble(sp, gis);
    return est;
}

namespace {

// Hilbert-transform kernel -0.3k + (3/(4 sqrt 5))(1 - k^2/5) log|(sqrt5-k)/(sqrt5+k)|.
// The two terms cancel to O(1/k) for large |k|, so a series in sqrt5/k takes
// over where the direct form loses precision.
double as_hilbert_bracket(double kappa) {
    const double sqrt5 = std::sqrt(5.0);
    if (std::abs(kappa) >= 100.0) {
        const double t = sqrt5 / kappa;
        const double t2 = t * t;
        return -(t * (1.0 + t2 * (0.2 + t2 * (3.0 / 35.0 + t2 / 21.0)))) / sqrt5;
    }
    const double u = 1.0 - kappa * kappa / 5.0;
    double log_term = 0.0;
    if (std::abs(u) > 1e-14)
        log_term = 3.0 / (4.0 * sqrt5) * u *
                   std::log(std::abs((sqrt5 - kappa) / (sqrt5 + kappa)));
    return -0.3 * kappa + log_term;
}

}  // namespace

CovEstimate as_cov(const Eigen::MatrixXd& returns) {
    require_obs(returns, "AS");
    Spectrum sp = spectrum_of(returns);
    if (sp.c >= 1.0) throw numeric_error("AS requires concentration ratio below 1");
    require_nonsingular(sp, "AS");

    const long p = returns.cols();
    const long n = returns.rows();
    const double h = std::pow(static_cast<double>(n), -1.0 / 3.0);
    const double sqrt5 = std::sqrt(5.0);

    Eigen::VectorXd f_hat(p), hilbert(p), delta(p);
    for (long i = 0; i < p; ++i) {
        double f = 0.0, ht = 0.0;
        for (long j = 0; j < p; ++j) {
            const double hnj = h * sp.lambda(j);
            const double kappa = (sp.lambda(i) - sp.lambda(j)) / hnj;
            const double u = 1.0 - kappa * kappa / 5.0;
            f += 3.0 / (4.0 * sqrt5 * hnj) * std::max(u, 0.0);
            ht += as_hilbert_bracket(kappa) / (hnj * kPi);
        }
        f_hat(i) = f / static_cast<double>(p);
        hilbert(i) = ht / static_cast<double>(p);
        const double a = kPi * sp.c * sp.lambda(i) * f_hat(i);
        const double b = 1.0 - sp.c - kPi * sp.c * sp.lambda(i) * hilbert(i);
        delta(i) = sp.lambda(i) / (a * a + b * b);
    }

    CovEstimate est;
    est.kind = CovKind::AS;
    est.diag.concentration = sp.c;
    est.diag.bandwidth = h;
    est.diag.shrunk_eigenvalues = delta;
    est.diag.spectral_density = f_hat;
    est.diag.hilbert_transform = hilbert;
    est.sigma = reassemble(sp, delta);
    return est;
}

std::vector<CovKind> applicable_cov_kinds(double concentration) {
    if (concentration <= 0.0) throw validation_error("concentration ratio must be positive");
    std::vector<CovKind> out;
    for (CovKind k : all_cov_kinds()) {
        const bool needs_low_dim = (k == CovKind::LIS || k == CovKind::GIS || k == CovKind::AS);
        if (!needs_low_dim || concentration < 1.0) out.push_back(k);
    }
    return out;
}

CovEstimate estimate_cov(CovKind kind, const Eigen::MatrixXd& returns) {
    switch (kind) {
        case CovKind::SCV: return sample_cov(returns);
        case CovKind::LS: return ls_cov(returns);
        case CovKind::COV1:
        case CovKind::COV2:
        case CovKind::COVCOR:
        case CovKind::COVDIAG:
        case CovKind::COVMKT: return lw_cov(returns, kind);
        case CovKind::LIS: return lis_cov(returns);
        case CovKind::QIS: return qis_cov(returns);
        case CovKind::GIS: return gis_cov(returns);
        case CovKind::AS: return as_cov(returns);
    }
    throw validation_error("estimate_cov: unknown kind");
}

}  // namespace shrinkpo
