#pragma once

// Deterministic datasets for tests: factor-structured return panels and an
// exactly isotropic panel (demeaned columns orthogonal with equal norms).

#include <Eigen/Core>
#include <cstdint>

#include "shrinkpo/synth.hpp"

namespace oracles {

inline Eigen::MatrixXd seeded_returns(long n, long p, std::uint64_t seed, long factors = 2) {
    shrinkpo::NormalStream rng(seed);
    Eigen::VectorXd mu(p);
    for (long i = 0; i < p; ++i) mu(i) = 4e-4 + 3e-4 * rng.next();
    Eigen::MatrixXd loadings(p, factors);
    for (long i = 0; i < p; ++i)
        for (long j = 0; j < factors; ++j) loadings(i, j) = 0.011 * rng.next();
    Eigen::MatrixXd r(n, p);
    Eigen::VectorXd f(factors);
    for (long t = 0; t < n; ++t) {
        for (long j = 0; j < factors; ++j) f(j) = rng.next();
        for (long i = 0; i < p; ++i) {
            const double sys = (factors > 0) ? loadings.row(i).dot(f) : 0.0;
            r(t, i) = mu(i) + sys + 0.009 * rng.next();
        }
    }
    return r;
}

// Returns whose sample covariance is exactly sigma^2 * I: demeaned columns are
// Gram-Schmidt orthonormalized in long double and rescaled to norm
// sigma * sqrt(n), then a common mean is added back.
inline Eigen::MatrixXd isotropic_returns(long n, long p, double sigma, std::uint64_t seed) {
    shrinkpo::NormalStream rng(seed);
    std::vector<std::vector<long double>> cols(p, std::vector<long double>(n));
    for (long j = 0; j < p; ++j) {
        long double mean = 0.0L;
        for (long t = 0; t < n; ++t) {
            cols[j][t] = static_cast<long double>(rng.next());
            mean += cols[j][t];
        }
        mean /= n;
        for (long t = 0; t < n; ++t) cols[j][t] -= mean;
    }
    // Two Gram-Schmidt passes for orthogonality near long-double precision.
    for (int pass = 0; pass < 2; ++pass) {
        for (long j = 0; j < p; ++j) {
            for (long k = 0; k < j; ++k) {
                long double proj = 0.0L;
                for (long t = 0; t < n; ++t) proj += cols[j][t] * cols[k][t];
                for (long t = 0; t < n; ++t) cols[j][t] -= proj * cols[k][t];
            }
            long double norm = 0.0L;
            for (long t = 0; t < n; ++t) norm += cols[j][t] * cols[j][t];
            norm = std::sqrt(norm);
            for (long t = 0; t < n; ++t) cols[j][t] /= norm;
        }
    }
    const long double scale = static_cast<long double>(sigma) * std::sqrt(static_cast<long double>(n));
    Eigen::MatrixXd r(n, p);
    for (long j = 0; j < p; ++j)
        for (long t = 0; t < n; ++t)
            r(t, j) = static_cast<double>(cols[j][t] * scale) + 5e-4;
    return r;
}

inline double rel_err(const Eigen::MatrixXd& got, const Eigen::MatrixXd& want) {
    const double denom = std::max(want.norm(), 1e-300);
    return (got - want).norm() / denom;
}

}  // namespace oracles
