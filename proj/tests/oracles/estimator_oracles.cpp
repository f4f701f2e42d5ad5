#include "estimator_oracles.hpp"

#include <cmath>
#include <stdexcept>

#include "jacobi.hpp"

namespace oracles {

namespace {

LMat to_l(const Eigen::MatrixXd& m) {
    LMat out(m.rows(), LVec(m.cols()));
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j) out[i][j] = static_cast<LD>(m(i, j));
    return out;
}

Eigen::MatrixXd from_l(const LMat& m) {
    Eigen::MatrixXd out(m.size(), m[0].size());
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < m[0].size(); ++j) out(i, j) = static_cast<double>(m[i][j]);
    return out;
}

Eigen::VectorXd from_l(const LVec& v) {
    Eigen::VectorXd out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out(i) = static_cast<double>(v[i]);
    return out;
}

LVec col_means(const LMat& r) {
    const size_t n = r.size(), p = r[0].size();
    LVec mu(p, 0.0L);
    for (size_t t = 0; t < n; ++t)
        for (size_t j = 0; j < p; ++j) mu[j] += r[t][j];
    for (size_t j = 0; j < p; ++j) mu[j] /= static_cast<LD>(n);
    return mu;
}

LMat demeaned(const LMat& r) {
    LVec mu = col_means(r);
    LMat out = r;
    for (auto& row : out)
        for (size_t j = 0; j < row.size(); ++j) row[j] -= mu[j];
    return out;
}

// S_n = (1/n) Rc' Rc, divisor n.
LMat sample_cov_l(const LMat& r) {
    const size_t n = r.size(), p = r[0].size();
    LMat rc = demeaned(r);
    LMat s(p, LVec(p, 0.0L));
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < p; ++j) {
            LD acc = 0.0L;
            for (size_t t = 0; t < n; ++t) acc += rc[t][i] * rc[t][j];
            s[i][j] = acc / static_cast<LD>(n);
        }
    return s;
}

LVec mat_vec(const LMat& m, const LVec& v) {
    LVec out(m.size(), 0.0L);
    for (size_t i = 0; i < m.size(); ++i)
        for (size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    return out;
}

LD dot(const LVec& a, const LVec& b) {
    LD acc = 0.0L;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct SteinTarget {
    LVec rbar;
    LMat sinv;
    LD r0;
    LD q;
};

SteinTarget stein_target(const LMat& r) {
    SteinTarget st;
    st.rbar = col_means(r);
    st.sinv = pinv_l(sample_cov_l(r));
    const size_t p = st.rbar.size();
    LVec ones(p, 1.0L);
    LVec sinv_ones = mat_vec(st.sinv, ones);
    st.r0 = dot(st.rbar, sinv_ones) / dot(ones, sinv_ones);
    LVec diff(p);
    for (size_t i = 0; i < p; ++i) diff[i] = st.rbar[i] - st.r0;
    st.q = dot(diff, mat_vec(st.sinv, diff));
    return st;
}

// Shared spectral pieces for LIS/QIS/GIS.
struct SpectrumL {
    JacobiResult eig;
    LD c;
    LD h;
    size_t p, n;
};

SpectrumL spectrum_l(const LMat& r) {
    SpectrumL sp;
    sp.n = r.size();
    sp.p = r[0].size();
    sp.c = static_cast<LD>(sp.p) / static_cast<LD>(sp.n);
    sp.eig = jacobi_eigen(sample_cov_l(r));
    const LD cc = sp.c * sp.c;
    sp.h = std::pow(std::min(cc, 1.0L / cc), 0.35L) / std::pow(static_cast<LD>(sp.p), 0.35L);
    return sp;
}

LD theta_at(const LVec& x, LD xi, LD h, size_t p) {
    LD acc = 0.0L;
    for (LD xj : x) {
        const LD d = xj - xi;
        acc += xj * d / (d * d + h * h * xj * xj);
    }
    return acc / static_cast<LD>(p);
}

LD conjugate_at(const LVec& x, LD xi, LD h, size_t p) {
    LD acc = 0.0L;
    for (LD xj : x) {
        const LD d = xj - xi;
        acc += h * xj * xj / (d * d + h * h * xj * xj);
    }
    return acc / static_cast<LD>(p);
}

LVec lis_delta_l(const SpectrumL& sp) {
    LVec x(sp.p);
    for (size_t i = 0; i < sp.p; ++i) x[i] = 1.0L / sp.eig.values[i];
    LVec delta(sp.p);
    for (size_t i = 0; i < sp.p; ++i) {
        const LD raw = (1.0L - sp.c) * x[i] + 2.0L * sp.c * x[i] * theta_at(x, x[i], sp.h, sp.p);
        // Nonpositive shrunk inverse keeps the sample value, matching the library.
        delta[i] = (raw > 0.0L) ? std::min(x[i], raw) : x[i];
    }
    return delta;
}

LVec qis_delta_l(const SpectrumL& sp) {
    const size_t p = sp.p, n = sp.n;
    const size_t n_null = (p > n) ? p - n : 0;
    const size_t n_grid = p - n_null;
    LVec x(n_grid);
    for (size_t i = 0; i < n_grid; ++i) x[i] = 1.0L / sp.eig.values[n_null + i];

    LVec delta(p);
    if (n_null == 0) {
        for (size_t i = 0; i < p; ++i) {
            const LD th = theta_at(x, x[i], sp.h, p);
            const LD hj = conjugate_at(x, x[i], sp.h, p);
            const LD a2 = th * th + hj * hj;
            delta[i] = 1.0L / ((1.0L - sp.c) * (1.0L - sp.c) * x[i] +
                               2.0L * sp.c * (1.0L - sp.c) * x[i] * th + sp.c * sp.c * x[i] * a2);
        }
    } else {
        const size_t take = std::min(n_null, n_grid);
        LD mean_x = 0.0L;
        for (size_t i = 0; i < take; ++i) mean_x += x[i];
        mean_x /= static_cast<LD>(take);
        const LD delta0 = 1.0L / ((sp.c - 1.0L) * mean_x);
        for (size_t i = 0; i < n_null; ++i) delta[i] = delta0;
        for (size_t i = 0; i < n_grid; ++i) {
            const LD th = theta_at(x, x[i], sp.h, p);
            const LD hj = conjugate_at(x, x[i], sp.h, p);
            delta[n_null + i] = 1.0L / (x[i] * (th * th + hj * hj));
        }
    }

    LD sum_lambda = 0.0L, sum_delta = 0.0L;
    for (size_t i = 0; i < p; ++i) {
        sum_lambda += sp.eig.values[i];
        sum_delta += delta[i];
    }
    for (size_t i = 0; i < p; ++i) delta[i] *= sum_lambda / sum_delta;
    return delta;
}

LMat reassemble_l(const JacobiResult& eig, const LVec& values) {
    const size_t p = values.size();
    LMat out(p, LVec(p, 0.0L));
    for (size_t k = 0; k < p; ++k)
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j)
                out[i][j] += values[k] * eig.vectors[i][k] * eig.vectors[j][k];
    return out;
}

}  // namespace

Eigen::VectorXd mean_sm(const Eigen::MatrixXd& returns) { return from_l(col_means(to_l(returns))); }

Eigen::VectorXd mean_js(const Eigen::MatrixXd& returns) {
    LMat r = to_l(returns);
    const size_t p = r[0].size();
    const LD n = static_cast<LD>(r.size());
    SteinTarget st = stein_target(r);
    LD alpha = (st.q <= 0.0L) ? 1.0L
                              : std::min(1.0L, (static_cast<LD>(p) - 2.0L) / (n * st.q));
    alpha = std::max(alpha, 0.0L);
    LVec mu(p);
    for (size_t i = 0; i < p; ++i) mu[i] = alpha * st.r0 + (1.0L - alpha) * st.rbar[i];
    return from_l(mu);
}

Eigen::VectorXd mean_bs(const Eigen::MatrixXd& returns) {
    LMat r = to_l(returns);
    const size_t p = r[0].size();
    const LD n = static_cast<LD>(r.size());
    SteinTarget st = stein_target(r);
    const LD alpha = (static_cast<LD>(p) + 2.0L) / (static_cast<LD>(p) + 2.0L + n * st.q);
    LVec mu(p);
    for (size_t i = 0; i < p; ++i) mu[i] = alpha * st.r0 + (1.0L - alpha) * st.rbar[i];
    return from_l(mu);
}

Eigen::VectorXd mean_quad(const Eigen::MatrixXd& returns) {
    LMat r = to_l(returns);
    const size_t n = r.size(), p = r[0].size();
    const LD dn = static_cast<LD>(n), dp = static_cast<LD>(p);
    LMat splus = pinv_l(sample_cov_l(r));
    LVec ones(p, 1.0L);

    LD g_diag = 0.0L, g_total = 0.0L;
    for (size_t i = 0; i < n; ++i) {
        LVec si = mat_vec(splus, r[i]);
        for (size_t j = 0; j < n; ++j) {
            const LD gij = dot(r[j], si);
            g_total += gij;
            if (i == j) g_diag += gij;
        }
    }
    const LD g_off = g_total - g_diag;

    LVec splus_one = mat_vec(splus, ones);
    LD w_sum = 0.0L, w_sq = 0.0L;
    for (size_t k = 0; k < n; ++k) {
        const LD wk = dot(r[k], splus_one);
        w_sum += wk;
        w_sq += wk * wk;
    }
    const LD s1 = dot(ones, splus_one);

    const LD r1 = g_off / (dp * (dn - 1.0L));
    const LD r2 = (g_diag - g_off / (dn - 1.0L)) / (dn * dp);
    const LD r3 = w_sum / (dn * s1);
    const LD r4 = (w_sum * w_sum - w_sq) / (dp * (dn - 1.0L) * s1);
    const LD denom = r1 + r2 - r3;

    LVec rbar = col_means(r);
    LVec mu(p);
    for (size_t i = 0; i < p; ++i)
        mu[i] = (r2 * r4 / denom) + ((r1 - r3) / denom) * rbar[i];
    return from_l(mu);
}

Eigen::VectorXd mean_bop(const Eigen::MatrixXd& returns, double epsilon) {
    LMat r = to_l(returns);
    const size_t p = r[0].size();
    const LD n = static_cast<LD>(r.size());
    const LD c = static_cast<LD>(p) / n;

    LVec rbar = col_means(r);
    const LD mu0_level = std::pow(n, (static_cast<LD>(epsilon) - 1.0L) / 2.0L);
    LVec mu0(p, mu0_level);
    LMat sinv = pinv_l(sample_cov_l(r));

    const LD a = dot(rbar, mat_vec(sinv, rbar));
    const LD b = dot(rbar, mat_vec(sinv, mu0));
    const LD q0 = dot(mu0, mat_vec(sinv, mu0));
    const LD denom = a * q0 - b * b;
    const LD beta = ((a - c / (1.0L - c)) * q0 - b * b) / denom;
    const LD alpha = (1.0L - beta) * b / q0;

    LVec mu(p);
    for (size_t i = 0; i < p; ++i) mu[i] = alpha * mu0[i] + beta * rbar[i];
    return from_l(mu);
}

Eigen::MatrixXd cov_scv(const Eigen::MatrixXd& returns) {
    return from_l(sample_cov_l(to_l(returns)));
}

Eigen::MatrixXd cov_ls(const Eigen::MatrixXd& returns) {
    LMat r = to_l(returns);
    const size_t p = r[0].size();
    const LD n = static_cast<LD>(r.size());
    LMat s = sample_cov_l(r);

    LD tr = 0.0L, fro2 = 0.0L;
    for (size_t i = 0; i < p; ++i) {
        tr += s[i][i];
        for (size_t j = 0; j < p; ++j) fro2 += s[i][j] * s[i][j];
    }
    const LD fro2_t = 1.0L / static_cast<LD>(p);
    const LD tr_st = tr / static_cast<LD>(p);
    const LD denom = fro2 * fro2_t - tr_st * tr_st;
    const LD alpha = 1.0L - (tr * tr * fro2_t) / (n * denom);
    const LD beta = tr_st / fro2_t * (1.0L - alpha);

    LMat out(p, LVec(p, 0.0L));
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < p; ++j)
            out[i][j] = alpha * s[i][j] + ((i == j) ? beta / static_cast<LD>(p) : 0.0L);
    return from_l(out);
}

namespace {

struct LwParts {
    LMat target;
    LD pi_hat;
    LD rho_hat;
    LD gamma_hat;
};

LwParts lw_parts(const LMat& r, int kind) {
    const size_t n = r.size(), p = r[0].size();
    const LD dn = static_cast<LD>(n), dp = static_cast<LD>(p);
    LMat rc = demeaned(r);
    LMat s = sample_cov_l(r);

    LD pi_hat = 0.0L;
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < p; ++j) {
            LD s2 = 0.0L;
            for (size_t t = 0; t < n; ++t) s2 += rc[t][i] * rc[t][i] * rc[t][j] * rc[t][j];
            s2 /= dn;
            pi_hat += s2 - s[i][j] * s[i][j];
        }
    LD rho_diag = 0.0L;
    for (size_t i = 0; i < p; ++i) {
        LD s2 = 0.0L;
        for (size_t t = 0; t < n; ++t) s2 += rc[t][i] * rc[t][i] * rc[t][i] * rc[t][i];
        s2 /= dn;
        rho_diag += s2 - s[i][i] * s[i][i];
    }

    LD tr = 0.0L;
    for (size_t i = 0; i < p; ++i) tr += s[i][i];
    const LD vbar = tr / dp;

    LwParts parts;
    parts.target.assign(p, LVec(p, 0.0L));
    LD rho_off = 0.0L;
    bool use_rho_diag = true;

    if (kind == 1) {  // COV1: T = vbar I, rho = 0
        for (size_t i = 0; i < p; ++i) parts.target[i][i] = vbar;
        use_rho_diag = false;
    } else if (kind == 2) {  // COV2
        LD off_sum = 0.0L;
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j)
                if (i != j) off_sum += s[i][j];
        const LD cbar = off_sum / (dp * (dp - 1.0L));
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) parts.target[i][j] = (i == j) ? vbar : cbar;
        LD sum_sq = 0.0L;
        for (size_t t = 0; t < n; ++t) {
            LD row_sum = 0.0L, row_sq = 0.0L;
            for (size_t i = 0; i < p; ++i) {
                row_sum += rc[t][i];
                row_sq += rc[t][i] * rc[t][i];
            }
            const LD cross = row_sum * row_sum - row_sq;
            sum_sq += cross * cross;
        }
        rho_off = (sum_sq / (dp * dn) - off_sum * off_sum / dp) / (dp - 1.0L);
    } else if (kind == 3) {  // COVCOR
        LD rbar = 0.0L;
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j)
                if (i != j) rbar += s[i][j] / std::sqrt(s[i][i] * s[j][j]);
        rbar /= dp * (dp - 1.0L);
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j)
                parts.target[i][j] =
                    (i == j) ? s[i][i] : rbar * std::sqrt(s[i][i] * s[j][j]);
        LD acc = 0.0L;
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) {
                LD third = 0.0L;
                for (size_t t = 0; t < n; ++t)
                    third += rc[t][i] * rc[t][i] * rc[t][i] * rc[t][j];
                third /= dn;
                const LD gamma_ij = third - s[i][i] * s[i][j];
                acc += gamma_ij / (s[i][i] * s[j][j]);
            }
        rho_off = rbar * acc;
    } else if (kind == 4) {  // COVDIAG
        for (size_t i = 0; i < p; ++i) parts.target[i][i] = s[i][i];
    } else if (kind == 5) {  // COVMKT
        LVec mkt(n, 0.0L);
        for (size_t t = 0; t < n; ++t) {
            for (size_t i = 0; i < p; ++i) mkt[t] += rc[t][i];
            mkt[t] /= dp;
        }
        LD var_mkt = 0.0L;
        for (size_t t = 0; t < n; ++t) var_mkt += mkt[t] * mkt[t];
        var_mkt /= dn;
        LVec cov_mkt(p, 0.0L);
        for (size_t i = 0; i < p; ++i) {
            for (size_t t = 0; t < n; ++t) cov_mkt[i] += rc[t][i] * mkt[t];
            cov_mkt[i] /= dn;
        }
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j)
                parts.target[i][j] =
                    (i == j) ? s[i][i] : cov_mkt[i] * cov_mkt[j] / var_mkt;

        LMat k1(p, LVec(p, 0.0L)), k2(p, LVec(p, 0.0L));
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) {
                LD acc1 = 0.0L, acc2 = 0.0L;
                for (size_t t = 0; t < n; ++t) {
                    acc1 += rc[t][i] * rc[t][i] * rc[t][j] * mkt[t];
                    acc2 += rc[t][i] * mkt[t] * rc[t][j] * mkt[t];
                }
                k1[i][j] = acc1 / dn - cov_mkt[i] * s[i][j];
                k2[i][j] = acc2 / dn - var_mkt * s[i][j];
            }
        LD term1 = 0.0L, term2 = 0.0L, term3 = 0.0L;
        for (size_t i = 0; i < p; ++i) {
            for (size_t j = 0; j < p; ++j) {
                term1 += k1[i][j] * cov_mkt[j];
                term2 += k2[i][j] * cov_mkt[i] * cov_mkt[j];
            }
            term3 += k1[i][i] * cov_mkt[i] * cov_mkt[i];
        }
        rho_off = 2.0L * term1 / var_mkt - term2 / (var_mkt * var_mkt) -
                  term3 / (var_mkt * var_mkt);
    } else {
        throw std::invalid_argument("lw_parts: bad kind");
    }

    parts.pi_hat = pi_hat;
    parts.rho_hat = (use_rho_diag ? rho_diag : 0.0L) + rho_off;
    parts.gamma_hat = 0.0L;
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < p; ++j) {
            const LD d = s[i][j] - parts.target[i][j];
            parts.gamma_hat += d * d;
        }
    return parts;
}

}  // namespace

double lw_lambda(const Eigen::MatrixXd& returns, int kind) {
    LMat r = to_l(returns);
    LwParts parts = lw_parts(r, kind);
    const LD n = static_cast<LD>(r.size());
    if (parts.gamma_hat <= 0.0L) return 0.0;
    LD lambda = (parts.pi_hat - parts.rho_hat) / (n * parts.gamma_hat);
    lambda = std::min(1.0L, std::max(0.0L, lambda));
    return static_cast<double>(lambda);
}

Eigen::MatrixXd cov_lw(const Eigen::MatrixXd& returns, int kind) {
    LMat r = to_l(returns);
    LwParts parts = lw_parts(r, kind);
    LMat s = sample_cov_l(r);
    const LD n = static_cast<LD>(r.size());
    LD lambda = 0.0L;
    if (parts.gamma_hat > 0.0L)
        lambda = std::min(1.0L, std::max(0.0L, (parts.pi_hat - parts.rho_hat) / (n * parts.gamma_hat)));
    const size_t p = s.size();
    LMat out(p, LVec(p, 0.0L));
    for (size_t i = 0; i < p; ++i)
        for (size_t j = 0; j < p; ++j)
            out[i][j] = lambda * parts.target[i][j] + (1.0L - lambda) * s[i][j];
    return from_l(out);
}

Eigen::MatrixXd cov_lis(const Eigen::MatrixXd& returns) {
    SpectrumL sp = spectrum_l(to_l(returns));
    LVec delta = lis_delta_l(sp);
    LVec values(sp.p);
    for (size_t i = 0; i < sp.p; ++i) values[i] = 1.0L / delta[i];
    return from_l(reassemble_l(sp.eig, values));
}

Eigen::MatrixXd cov_qis(const Eigen::MatrixXd& returns) {
    SpectrumL sp = spectrum_l(to_l(returns));
    return from_l(reassemble_l(sp.eig, qis_delta_l(sp)));
}

Eigen::VectorXd qis_deltas(const Eigen::MatrixXd& returns) {
    SpectrumL sp = spectrum_l(to_l(returns));
    return from_l(qis_delta_l(sp));
}

Eigen::MatrixXd cov_gis(const Eigen::MatrixXd& returns) {
    SpectrumL sp = spectrum_l(to_l(returns));
    LVec lis = lis_delta_l(sp);
    LVec qis = qis_delta_l(sp);
    LVec values(sp.p);
    for (size_t i = 0; i < sp.p; ++i) values[i] = std::sqrt(qis[i] / lis[i]);
    return from_l(reassemble_l(sp.eig, values));
}

void as_intermediates(const Eigen::MatrixXd& returns, Eigen::VectorXd& f_hat,
                      Eigen::VectorXd& hilbert, Eigen::VectorXd& delta) {
    LMat r = to_l(returns);
    const size_t n = r.size(), p = r[0].size();
    const LD c = static_cast<LD>(p) / static_cast<LD>(n);
    JacobiResult eig = jacobi_eigen(sample_cov_l(r));
    const LD h = std::pow(static_cast<LD>(n), -1.0L / 3.0L);
    const LD pi_l = 3.14159265358979323846264338327950288L;
    const LD sqrt5 = std::sqrt(5.0L);

    // Same large-kappa series as the library: the direct bracket cancels
    // catastrophically for |kappa| >> 1.
    auto bracket = [sqrt5](LD kappa) {
        if (std::fabs(kappa) >= 100.0L) {
            const LD t = sqrt5 / kappa;
            const LD t2 = t * t;
            return -(t * (1.0L + t2 * (0.2L + t2 * (3.0L / 35.0L + t2 / 21.0L)))) / sqrt5;
        }
        const LD u = 1.0L - kappa * kappa / 5.0L;
        LD log_term = 0.0L;
        if (std::fabs(u) > 1e-14L)
            log_term = 3.0L / (4.0L * sqrt5) * u *
                       std::log(std::fabs((sqrt5 - kappa) / (sqrt5 + kappa)));
        return -0.3L * kappa + log_term;
    };

    LVec f(p), ht(p), d(p);
    for (size_t i = 0; i < p; ++i) {
        LD facc = 0.0L, hacc = 0.0L;
        for (size_t j = 0; j < p; ++j) {
            const LD hnj = h * eig.values[j];
            const LD kappa = (eig.values[i] - eig.values[j]) / hnj;
            const LD u = 1.0L - kappa * kappa / 5.0L;
            facc += 3.0L / (4.0L * sqrt5 * hnj) * std::max(u, 0.0L);
            hacc += bracket(kappa) / (hnj * pi_l);
        }
        f[i] = facc / static_cast<LD>(p);
        ht[i] = hacc / static_cast<LD>(p);
        const LD a = pi_l * c * eig.values[i] * f[i];
        const LD b = 1.0L - c - pi_l * c * eig.values[i] * ht[i];
        d[i] = eig.values[i] / (a * a + b * b);
    }
    f_hat = from_l(f);
    hilbert = from_l(ht);
    delta = from_l(d);
}

Eigen::MatrixXd cov_as(const Eigen::MatrixXd& returns) {
    LMat r = to_l(returns);
    JacobiResult eig = jacobi_eigen(sample_cov_l(r));
    Eigen::VectorXd f, ht, delta;
    as_intermediates(returns, f, ht, delta);
    LVec values(delta.size());
    for (long i = 0; i < delta.size(); ++i) values[i] = static_cast<LD>(delta(i));
    return from_l(reassemble_l(eig, values));
}

}  // namespace oracles
