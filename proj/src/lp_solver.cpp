#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

constexpr double kRedTol = 1e-9;   // entering-candidate reduced-cost threshold
constexpr double kPivTol = 1e-9;   // smallest usable pivot magnitude

// Standardized problem: minimize c'z s.t. Az = b, z >= 0, b >= 0.
struct Standard {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    long n_struct = 0;              // structural columns (before artificials)
    long n_art = 0;
    std::vector<long> var_col;      // original var -> first standardized column
    std::vector<bool> row_negated;  // rhs sign flip applied to constraint i
};

Standard standardize(const LpProblem& p) {
    const long n = p.n_vars();
    const long m = static_cast<long>(p.constraints.size());
    if (!p.free_vars.empty() && static_cast<long>(p.free_vars.size()) != n)
        throw validation_error("solve_lp: free_vars size mismatch");
    for (const auto& con : p.constraints)
        if (con.coeffs.size() != n) throw validation_error("solve_lp: constraint width mismatch");
    if (!p.objective.allFinite()) throw numeric_error("solve_lp: non-finite objective");

    Standard s;
    s.var_col.resize(n);
    long cols = 0;
    for (long j = 0; j < n; ++j) {
        s.var_col[j] = cols;
        cols += (!p.free_vars.empty() && p.free_vars[j]) ? 2 : 1;
    }
    const long first_slack = cols;
    long n_slack = 0;
    for (const auto& con : p.constraints)
        if (con.relation != Relation::Equal) ++n_slack;
    cols += n_slack;
    s.n_struct = cols;

    s.A = Eigen::MatrixXd::Zero(m, cols);
    s.b = Eigen::VectorXd::Zero(m);
    s.c = Eigen::VectorXd::Zero(cols);
    s.row_negated.assign(m, false);

    const double sense = (p.sense == LpSense::Maximize) ? -1.0 : 1.0;
    for (long j = 0; j < n; ++j) {
        s.c(s.var_col[j]) = sense * p.objective(j);
        if (!p.free_vars.empty() && p.free_vars[j]) s.c(s.var_col[j] + 1) = -sense * p.objective(j);
    }

    long slack = first_slack;
    for (long i = 0; i < m; ++i) {
        const auto& con = p.constraints[i];
        if (!con.coeffs.allFinite() || !std::isfinite(con.rhs))
            throw numeric_error("solve_lp: non-finite constraint");
        double flip = 1.0;
        Relation rel = con.relation;
        if (con.rhs < 0.0) {
            flip = -1.0;
            s.row_negated[i] = true;
            if (rel == Relation::LessEqual) rel = Relation::GreaterEqual;
            else if (rel == Relation::GreaterEqual) rel = Relation::LessEqual;
        }
        for (long j = 0; j < n; ++j) {
            const double a = flip * con.coeffs(j);
            s.A(i, s.var_col[j]) = a;
            if (!p.free_vars.empty() && p.free_vars[j]) s.A(i, s.var_col[j] + 1) = -a;
        }
        s.b(i) = flip * con.rhs;
        if (con.relation != Relation::Equal)
            s.A(i, slack++) = (rel == Relation::LessEqual) ? 1.0 : -1.0;
    }
    return s;
}

struct Tableau {
    Eigen::MatrixXd T;          // m x cols, current B^-1 A
    Eigen::VectorXd rhs;        // m, current B^-1 b
    Eigen::VectorXd red;        // cols, reduced costs for the active phase
    double obj = 0.0;           // current phase objective
    std::vector<long> basis;    // column basic in each row
    std::vector<bool> banned;   // columns excluded from entering
    long iterations = 0;

    long m() const { return T.rows(); }
    long cols() const { return T.cols(); }

    void pivot(long row, long col) {
        const double piv = T(row, col);
        T.row(row) /= piv;
        rhs(row) /= piv;
        for (long r = 0; r < m(); ++r) {
            if (r == row) continue;
            const double f = T(r, col);
            if (f != 0.0) {
                T.row(r) -= f * T.row(row);
                rhs(r) -= f * rhs(row);
                if (rhs(r) < 0.0 && rhs(r) > -1e-11) rhs(r) = 0.0;
            }
        }
        const double fr = red(col);
        if (fr != 0.0) {
            red -= fr * T.row(row).transpose();
            obj += fr * rhs(row);
        }
        basis[row] = col;
        ++iterations;
    }

    // Dantzig pricing with smallest-index ties, falling back to Bland's rule
    // after a stretch of degenerate pivots so cycling cannot occur. Both rules
    // are index-deterministic, so solves are reproducible.
    SolveStatus run(long max_iter) {
        long degenerate_streak = 0;
        while (iterations < max_iter) {
            const bool blands = degenerate_streak > 2 * m() + 20;
            long enter = -1;
            double most_negative = -kRedTol;
            for (long j = 0; j < cols(); ++j) {
                if (banned[j]) continue;
                if (red(j) < most_negative) {
                    enter = j;
                    if (blands) break;
                    most_negative = red(j);
                }
            }
            if (enter < 0) return SolveStatus::Optimal;

            long leave = -1;
            double best_ratio = 0.0;
            for (long r = 0; r < m(); ++r) {
                const double a = T(r, enter);
                if (a <= kPivTol) continue;
                const double ratio = std::max(rhs(r), 0.0) / a;
                if (leave < 0 || ratio < best_ratio - 1e-12 ||
                    (ratio <= best_ratio + 1e-12 && basis[r] < basis[leave])) {
                    leave = r;
                    best_ratio = ratio;
                }
            }
            if (leave < 0) return SolveStatus::Unbounded;
            if (best_ratio <= 1e-12)
                ++degenerate_streak;
            else
                degenerate_streak = 0;
            pivot(leave, enter);
        }
        return SolveStatus::IterationLimit;
    }
};

void load_reduced_costs(Tableau& t, const Eigen::VectorXd& phase_cost) {
    t.red = phase_cost;
    t.obj = 0.0;
    for (long r = 0; r < t.m(); ++r) {
        const double cb = phase_cost(t.basis[r]);
        if (cb != 0.0) {
            t.red -= cb * t.T.row(r).transpose();
            t.obj += cb * t.rhs(r);
        }
    }
}

}  // namespace

LpSolution solve_lp(const LpProblem& problem) {
    Standard s = standardize(problem);
    const long m = s.A.rows();
    const long n_struct = s.n_struct;

    // Artificial basis: reuse a +1 slack column where one exists, else append.
    std::vector<long> art_cols;
    std::vector<long> basis(m, -1);
    for (long i = 0; i < m; ++i) {
        for (long j = n_struct - 1; j >= 0; --j) {
            if (s.A(i, j) == 1.0 && s.A.col(j).cwiseAbs().sum() == 1.0 && s.c(j) == 0.0) {
                bool taken = false;
                for (long r = 0; r < i; ++r) taken = taken || basis[r] == j;
                if (!taken) {
                    basis[i] = j;
                    break;
                }
            }
        }
        if (basis[i] < 0) art_cols.push_back(i);
    }
    s.n_art = static_cast<long>(art_cols.size());
    const long cols = n_struct + s.n_art;

    Tableau t;
    t.T = Eigen::MatrixXd::Zero(m, cols);
    t.T.leftCols(n_struct) = s.A;
    t.rhs = s.b;
    t.basis = basis;
    t.banned.assign(cols, false);
    for (long k = 0; k < s.n_art; ++k) {
        t.T(art_cols[k], n_struct + k) = 1.0;
        t.basis[art_cols[k]] = n_struct + k;
    }

    const long max_iter = 20000 + 200 * (m + cols);
    LpSolution out;

    if (s.n_art > 0) {
        Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(cols);
        phase1.tail(s.n_art).setOnes();
        load_reduced_costs(t, phase1);
        SolveStatus st = t.run(max_iter);
        out.iterations = t.iterations;
        if (st == SolveStatus::IterationLimit) {
            out.status = st;
            return out;
        }
        const double feas_tol = 1e-8 * std::max(1.0, s.b.cwiseAbs().maxCoeff());
        if (t.obj > feas_tol) {
            out.status = SolveStatus::Infeasible;
            return out;
        }
        // Drive basic artificials to structural columns where possible; a row
        // with no structural pivot is redundant and keeps its artificial at 0.
        for (long r = 0; r < m; ++r) {
            if (t.basis[r] < n_struct) continue;
            long col = -1;
            for (long j = 0; j < n_struct; ++j) {
                if (std::abs(t.T(r, j)) > kPivTol) {
                    col = j;
                    break;
                }
            }
            if (col >= 0) t.pivot(r, col);
        }
        for (long k = 0; k < s.n_art; ++k) t.banned[n_struct + k] = true;
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(cols);
    phase2.head(n_struct) = s.c;
    load_reduced_costs(t, phase2);
    SolveStatus st = t.run(max_iter);
    out.iterations = t.iterations;
    out.status = st;
    if (st != SolveStatus::Optimal) return out;

    Eigen::VectorXd z = Eigen::VectorXd::Zero(cols);
    for (long r = 0; r < m; ++r) z(t.basis[r]) = std::max(t.rhs(r), 0.0);

    const long n = problem.n_vars();
    out.x.resize(n);
    for (long j = 0; j < n; ++j) {
        const long col = s.var_col[j];
        const bool is_free = !problem.free_vars.empty() && problem.free_vars[j];
        out.x(j) = is_free ? z(col) - z(col + 1) : z(col);
    }
    out.value = problem.objective.dot(out.x);

    // Duals from the final basis: solve B' y = c_B on the standardized system.
    if (m > 0) {
        Eigen::MatrixXd B(m, m);
        Eigen::VectorXd cb(m);
        for (long r = 0; r < m; ++r) {
            const long j = t.basis[r];
            if (j < n_struct) {
                B.col(r) = s.A.col(j);
                cb(r) = s.c(j);
            } else {
                B.col(r) = Eigen::VectorXd::Unit(m, j - n_struct);
                cb(r) = 0.0;
            }
        }
        Eigen::VectorXd y = B.transpose().fullPivLu().solve(cb);
        out.duals.resize(m);
        for (long i = 0; i < m; ++i) out.duals(i) = s.row_negated[i] ? -y(i) : y(i);
    }
    return out;
}

double lp_kkt_residual(const LpProblem& problem, const LpSolution& sol) {
    if (!sol.optimal()) return std::numeric_limits<double>::infinity();
    double res = 0.0;
    for (long j = 0; j < problem.n_vars(); ++j) {
        const bool is_free = !problem.free_vars.empty() && problem.free_vars[j];
        if (!is_free) res = std::max(res, -sol.x(j));
    }
    for (size_t i = 0; i < problem.constraints.size(); ++i) {
        const auto& con = problem.constraints[i];
        const double lhs = con.coeffs.dot(sol.x);
        const double slack = con.rhs - lhs;
        switch (con.relation) {
            case Relation::LessEqual: res = std::max(res, -slack); break;
            case Relation::GreaterEqual: res = std::max(res, slack); break;
            case Relation::Equal: res = std::max(res, std::abs(slack)); break;
        }
        if (sol.duals.size() == static_cast<long>(problem.constraints.size()) &&
            con.relation != Relation::Equal)
            res = std::max(res, std::abs(sol.duals(i) * slack));
    }
    return res;
}

}  // namespace shrinkpo
