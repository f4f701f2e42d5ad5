#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

// Minimum-norm solution of the symmetric (possibly singular) KKT system.
// Reports whether the system is consistent at tolerance `tol`.
Eigen::VectorXd min_norm_solve(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs,
                               double tol, bool& consistent) {
    SymEigen eig = sym_eigen(K);
    const long n = K.rows();
    const double lmax = eig.eigenvalues.cwiseAbs().maxCoeff();
    const double cut = std::max(lmax, 1.0) * 1e-13;
    Eigen::VectorXd proj = eig.eigenvectors.transpose() * rhs;
    Eigen::VectorXd scaled(n);
    for (long i = 0; i < n; ++i) {
        const double l = eig.eigenvalues(i);
        scaled(i) = (std::abs(l) <= cut) ? 0.0 : proj(i) / l;
    }
    Eigen::VectorXd x = eig.eigenvectors * scaled;
    consistent = ((K * x - rhs).cwiseAbs().maxCoeff() <= tol);
    return x;
}

double qp_objective(const QpProblem& p, const Eigen::VectorXd& x) {
    return x.dot(p.quadratic * x) + p.linear.dot(x);
}

double kkt_residual(const QpProblem& p, const Eigen::VectorXd& x) {
    Eigen::VectorXd g = 2.0 * (p.quadratic * x) + p.linear;
    const double lambda = g.minCoeff();
    double res = std::abs(x.sum() - 1.0);
    for (long i = 0; i < x.size(); ++i) {
        if (x(i) > 1e-10)
            res = std::max(res, std::abs(g(i) - lambda));
        else
            res = std::max(res, std::max(0.0, lambda - g(i)));
        res = std::max(res, -x(i));
    }
    return res;
}

}  // namespace

QpSolution solve_qp(const QpProblem& problem) {
    const long p = problem.quadratic.rows();
    if (p == 0 || problem.quadratic.cols() != p || problem.linear.size() != p)
        throw validation_error("solve_qp: dimension mismatch");
    if (!problem.quadratic.allFinite() || !problem.linear.allFinite())
        throw numeric_error("solve_qp: non-finite input");

    SymEigen qeig = sym_eigen(problem.quadratic);
    const double lmax = std::max(qeig.eigenvalues.maxCoeff(), 0.0);
    if (qeig.eigenvalues.minCoeff() < -1e-10 * std::max(lmax, 1.0))
        throw numeric_error("solve_qp: quadratic matrix is not PSD");

    // Clamp round-off negatives to zero so singular directions stay flat.
    Eigen::VectorXd clamped = qeig.eigenvalues.cwiseMax(0.0);
    QpProblem prob;
    prob.quadratic = qeig.eigenvectors * clamped.asDiagonal() * qeig.eigenvectors.transpose();
    prob.quadratic = 0.5 * (prob.quadratic + prob.quadratic.transpose());
    prob.linear = problem.linear;

    QpSolution out;
    if (p == 1) {
        out.x = Eigen::VectorXd::Ones(1);
        out.value = qp_objective(prob, out.x);
        out.kkt_residual = 0.0;
        return out;
    }

    const double scale = std::max({1.0, prob.quadratic.cwiseAbs().maxCoeff(),
                                   prob.linear.cwiseAbs().maxCoeff()});
    const double tol_consistent = 1e-9 * scale;
    const double tol_free = 1e-11 * scale;

    Eigen::VectorXd x = Eigen::VectorXd::Constant(p, 1.0 / p);
    std::vector<bool> in_set(p, true);
    const long max_iter = 200 + 40 * p;

    for (long iter = 0; iter < max_iter; ++iter) {
        out.iterations = iter;
        std::vector<long> F;
        for (long i = 0; i < p; ++i)
            if (in_set[i]) F.push_back(i);
        const long f = static_cast<long>(F.size());

        // Equality-constrained subproblem on the current support.
        Eigen::MatrixXd K(f + 1, f + 1);
        Eigen::VectorXd rhs(f + 1);
        for (long a = 0; a < f; ++a) {
            for (long b = 0; b < f; ++b) K(a, b) = 2.0 * prob.quadratic(F[a], F[b]);
            K(a, f) = 1.0;
            K(f, a) = 1.0;
            rhs(a) = -prob.linear(F[a]);
        }
        K(f, f) = 0.0;
        rhs(f) = 1.0;

        bool consistent = false;
        Eigen::VectorXd sol = min_norm_solve(K, rhs, tol_consistent, consistent);

        Eigen::VectorXd target(f);
        if (consistent) {
            target = sol.head(f);
        } else {
            // Subproblem has no stationary point: follow the in-support
            // steepest-descent ray until a bound blocks it.
            Eigen::VectorXd g = 2.0 * (prob.quadratic * x) + prob.linear;
            Eigen::VectorXd d(f);
            double mean_g = 0.0;
            for (long a = 0; a < f; ++a) mean_g += g(F[a]);
            mean_g /= f;
            for (long a = 0; a < f; ++a) d(a) = -(g(F[a]) - mean_g);
            if (d.cwiseAbs().maxCoeff() <= tol_free) {
                target = Eigen::VectorXd(f);
                for (long a = 0; a < f; ++a) target(a) = x(F[a]);
            } else {
                // Big multiple of the ray; the blocking logic below truncates it.
                target = Eigen::VectorXd(f);
                for (long a = 0; a < f; ++a) target(a) = x(F[a]) + d(a) * 1e12;
            }
        }

        double min_target = target.minCoeff();
        if (min_target >= -1e-12) {
            for (long a = 0; a < f; ++a) x(F[a]) = std::max(target(a), 0.0);
            // Dual check over the zero set.
            Eigen::VectorXd g = 2.0 * (prob.quadratic * x) + prob.linear;
            double lambda = 0.0;
            for (long a = 0; a < f; ++a) lambda += g(F[a]);
            lambda /= f;
            long worst = -1;
            double worst_gap = -tol_free * 100.0 - 1e-12;
            for (long i = 0; i < p; ++i) {
                if (in_set[i]) continue;
                const double gap = g(i) - lambda;
                if (gap < worst_gap) {
                    worst_gap = gap;
                    worst = i;
                }
            }
            if (worst < 0) break;
            in_set[worst] = true;
            continue;
        }

        // Partial step toward the subproblem target; smallest blocking ratio,
        // ties broken by smallest variable index.
        double step = 1.0;
        long blocker = -1;
        for (long a = 0; a < f; ++a) {
            const double d = target(a) - x(F[a]);
            if (d < -1e-15) {
                const double t = x(F[a]) / (-d);
                if (t < step - 1e-15 || (t <= step + 1e-15 && (blocker < 0 || F[a] < blocker))) {
                    if (t < step) step = t;
                    blocker = F[a];
                }
            }
        }
        if (blocker < 0) {
            for (long a = 0; a < f; ++a) x(F[a]) = std::max(target(a), 0.0);
            continue;
        }
        step = std::max(step, 0.0);
        for (long a = 0; a < f; ++a) x(F[a]) += step * (target(a) - x(F[a]));
        x(blocker) = 0.0;
        in_set[blocker] = false;
        if (std::count(in_set.begin(), in_set.end(), true) == 0) {
            // Cannot happen for a consistent simplex step; restore the blocker.
            in_set[blocker] = true;
            x(blocker) = 1.0;
        }
    }

    // Final cleanup: exact simplex membership.
    x = x.cwiseMax(0.0);
    x /= x.sum();
    out.x = x;
    out.value = qp_objective(prob, x);
    out.kkt_residual = kkt_residual(prob, x);
    out.status = (out.kkt_residual <= 1e-6) ? SolveStatus::Optimal : SolveStatus::IterationLimit;
    return out;
}

}  // namespace shrinkpo
