#include "shrinkpo/portfolio_opt.hpp"

#include <cmath>

#include "shrinkpo/errors.hpp"
#include "shrinkpo/numerics.hpp"

namespace shrinkpo {

namespace {

constexpr double kWeightDust = 1e-9;

// Drop solver dust below 1e-9 and renormalize to an exact simplex point.
Eigen::VectorXd clean_weights(Eigen::VectorXd w) {
    for (long i = 0; i < w.size(); ++i)
        if (w(i) < kWeightDust) w(i) = 0.0;
    const double total = w.sum();
    if (total <= 0.0) throw numeric_error("portfolio weights collapsed to zero");
    return w / total;
}

Portfolio from_qp(const QpSolution& sol, std::string tag) {
    if (sol.status != SolveStatus::Optimal)
        throw numeric_error("QP solver failed for model " + tag);
    Portfolio p;
    p.weights = clean_weights(sol.x);
    p.model_tag = std::move(tag);
    p.objective = sol.value;
    return p;
}

void require_scenarios(const Eigen::MatrixXd& r, const char* who) {
    if (r.rows() < 1 || r.cols() < 1)
        throw validation_error(std::string(who) + " needs a nonempty scenario matrix");
    if (!r.allFinite()) throw validation_error(std::string(who) + ": non-finite scenarios");
}

Portfolio from_lp(const LpSolution& sol, long p, std::string tag) {
    if (!sol.optimal()) throw numeric_error("LP solver failed for model " + tag);
    Portfolio out;
    out.weights = clean_weights(sol.x.head(p));
    out.model_tag = std::move(tag);
    out.objective = sol.value;
    return out;
}

}  // namespace

std::string model_tag(const ModelSpec& spec) {
    switch (spec.family) {
        case ModelFamily::MV:
            return std::string(to_string(spec.cov_kind)) + "+" + to_string(spec.mean_kind);
        case ModelFamily::GMV:
            return std::string("GMV+") + to_string(spec.cov_kind);
        case ModelFamily::SMAD: return "SMAD";
        case ModelFamily::CVAR: return "CVaR";
        case ModelFamily::MINIMAX: return "MM";
    }
    return "?";
}

Portfolio solve_mv(const MeanEstimate& mu, const CovEstimate& sigma, double gamma) {
    if (gamma <= 0.0) throw validation_error("risk aversion must be positive");
    if (mu.mu.size() != sigma.sigma.rows())
        throw validation_error("solve_mv: mean/covariance dimension mismatch");
    QpProblem qp;
    qp.quadratic = gamma * sigma.sigma;
    qp.linear = -mu.mu;
    std::string tag = std::string(to_string(sigma.kind)) + "+" + to_string(mu.kind);
    return from_qp(solve_qp(qp), std::move(tag));
}

Portfolio solve_gmv(const CovEstimate& sigma) {
    QpProblem qp;
    qp.quadratic = sigma.sigma;
    qp.linear = Eigen::VectorXd::Zero(sigma.sigma.rows());
    return from_qp(solve_qp(qp), std::string("GMV+") + to_string(sigma.kind));
}

Portfolio solve_smad(const Eigen::MatrixXd& scenario_returns) {
    require_scenarios(scenario_returns, "SMAD");
    const long n = scenario_returns.rows();
    const long p = scenario_returns.cols();
    Eigen::VectorXd rbar = scenario_returns.colwise().mean();

    // Variables: x (p, >= 0), d (n, >= 0). minimize (1/n) sum d_j.
    LpProblem lp;
    lp.sense = LpSense::Minimize;
    lp.objective = Eigen::VectorXd::Zero(p + n);
    lp.objective.tail(n).setConstant(1.0 / static_cast<double>(n));

    for (long j = 0; j < n; ++j) {
        LpConstraint con;
        con.coeffs = Eigen::VectorXd::Zero(p + n);
        con.coeffs.head(p) = (scenario_returns.row(j).transpose() - rbar);
        con.coeffs(p + j) = 1.0;
        con.relation = Relation::GreaterEqual;
        con.rhs = 0.0;
        lp.constraints.push_back(std::move(con));
    }
    LpConstraint budget;
    budget.coeffs = Eigen::VectorXd::Zero(p + n);
    budget.coeffs.head(p).setOnes();
    budget.relation = Relation::Equal;
    budget.rhs = 1.0;
    lp.constraints.push_back(std::move(budget));

    return from_lp(solve_lp(lp), p, "SMAD");
}

Portfolio solve_cvar(const Eigen::MatrixXd& scenario_returns, double alpha_cvar) {
    require_scenarios(scenario_returns, "CVaR");
    if (!(alpha_cvar > 0.0 && alpha_cvar < 1.0))
        throw validation_error("CVaR tail level must lie inside (0,1)");
    const long n = scenario_returns.rows();
    const long p = scenario_returns.cols();
    Eigen::VectorXd rbar = scenario_returns.colwise().mean();

    // Variables: x (p, >= 0), u (n, >= 0), beta (free).
    const long nv = p + n + 1;
    LpProblem lp;
    lp.sense = LpSense::Minimize;
    lp.objective = Eigen::VectorXd::Zero(nv);
    lp.objective.head(p) = -rbar;
    lp.objective.segment(p, n).setConstant(1.0 / (alpha_cvar * static_cast<double>(n)));
    lp.objective(nv - 1) = 1.0;
    lp.free_vars.assign(nv, false);
    lp.free_vars[nv - 1] = true;

    for (long j = 0; j < n; ++j) {
        LpConstraint con;
        con.coeffs = Eigen::VectorXd::Zero(nv);
        con.coeffs.head(p) = scenario_returns.row(j).transpose();
        con.coeffs(p + j) = 1.0;
        con.coeffs(nv - 1) = 1.0;
        con.relation = Relation::GreaterEqual;
        con.rhs = 0.0;
        lp.constraints.push_back(std::move(con));
    }
    LpConstraint budget;
    budget.coeffs = Eigen::VectorXd::Zero(nv);
    budget.coeffs.head(p).setOnes();
    budget.relation = Relation::Equal;
    budget.rhs = 1.0;
    lp.constraints.push_back(std::move(budget));

    return from_lp(solve_lp(lp), p, "CVaR");
}

Portfolio solve_minimax(const Eigen::MatrixXd& scenario_returns) {
    require_scenarios(scenario_returns, "MiniMax");
    const long n = scenario_returns.rows();
    const long p = scenario_returns.cols();
    Eigen::VectorXd rbar = scenario_returns.colwise().mean();

    // Variables: x (p, >= 0), y (free). minimize -y - rbar' x.
    const long nv = p + 1;
    LpProblem lp;
    lp.sense = LpSense::Minimize;
    lp.objective = Eigen::VectorXd::Zero(nv);
    lp.objective.head(p) = -rbar;
    lp.objective(p) = -1.0;
    lp.free_vars.assign(nv, false);
    lp.free_vars[p] = true;

    for (long j = 0; j < n; ++j) {
        LpConstraint con;
        con.coeffs = Eigen::VectorXd::Zero(nv);
        con.coeffs.head(p) = scenario_returns.row(j).transpose();
        con.coeffs(p) = -1.0;
        con.relation = Relation::GreaterEqual;
        con.rhs = 0.0;
        lp.constraints.push_back(std::move(con));
    }
    LpConstraint budget;
    budget.coeffs = Eigen::VectorXd::Zero(nv);
    budget.coeffs.head(p).setOnes();
    budget.relation = Relation::Equal;
    budget.rhs = 1.0;
    lp.constraints.push_back(std::move(budget));

    return from_lp(solve_lp(lp), p, "MM");
}

}  // namespace shrinkpo
