#pragma once

#include <Eigen/Core>
#include <vector>

namespace shrinkpo {

// Eigendecomposition of a symmetric matrix, eigenvalues ascending,
// eigenvector columns aligned with eigenvalues, U orthonormal.
struct SymEigen {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;

    Eigen::MatrixXd reconstruct() const {
        return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
    }
};

// Throws numeric_error if the input is not symmetric to 1e-10 (relative).
SymEigen sym_eigen(const Eigen::MatrixXd& matrix);

// Moore-Penrose pseudo-inverse of a symmetric PSD matrix. Eigenvalues below
// rank_tol * lambda_max are treated as exact zeros.
Eigen::MatrixXd pinv(const Eigen::MatrixXd& matrix, double rank_tol = 1e-12);

// ---------------------------------------------------------------------------
// Linear programming
// ---------------------------------------------------------------------------

enum class LpSense { Minimize, Maximize };
enum class Relation { LessEqual, Equal, GreaterEqual };
enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpConstraint {
    Eigen::VectorXd coeffs;
    Relation relation = Relation::LessEqual;
    double rhs = 0.0;
};

struct LpProblem {
    LpSense sense = LpSense::Minimize;
    Eigen::VectorXd objective;
    std::vector<LpConstraint> constraints;
    // free_vars[i] == true lets variable i take any sign; default all x >= 0.
    std::vector<bool> free_vars;

    long n_vars() const { return objective.size(); }
};

struct LpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    double value = 0.0;       // in the problem's own sense
    Eigen::VectorXd x;        // primal point (original variables)
    Eigen::VectorXd duals;    // one multiplier per constraint (minimize convention)
    long iterations = 0;

    bool optimal() const { return status == SolveStatus::Optimal; }
};

// Dense two-phase simplex with Bland's smallest-index pivot rule.
// Deterministic for a fixed input; infeasible/unbounded reported via status.
LpSolution solve_lp(const LpProblem& problem);

// max over constraints of primal violation plus complementary-slackness
// residual |dual_i * slack_i|; used by tests and sanity checks.
double lp_kkt_residual(const LpProblem& problem, const LpSolution& solution);

// ---------------------------------------------------------------------------
// Quadratic programming over the unit simplex
// ---------------------------------------------------------------------------

// minimize x' Q x + c' x  subject to  sum(x) = 1, x >= 0.
struct QpProblem {
    Eigen::MatrixXd quadratic;  // symmetric PSD (eigenvalues >= -1e-10 relative)
    Eigen::VectorXd linear;
};

struct QpSolution {
    SolveStatus status = SolveStatus::Optimal;
    double value = 0.0;
    Eigen::VectorXd x;
    double kkt_residual = 0.0;
    long iterations = 0;
};

// Primal active-set method; equality subproblems solved by a minimum-norm
// KKT solve so PSD-singular matrices are handled. Deterministic.
QpSolution solve_qp(const QpProblem& problem);

}  // namespace shrinkpo
