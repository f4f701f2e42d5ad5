#pragma once

#include <Eigen/Core>
#include <string>

#include "shrinkpo/cov_shrinkage.hpp"
#include "shrinkpo/mean_shrinkage.hpp"

namespace shrinkpo {

// Long-only fully-invested weights plus the tag of the model that produced them.
struct Portfolio {
    Eigen::VectorXd weights;  // >= 0, sums to 1
    std::string model_tag;
    double objective = 0.0;   // solver objective at the optimum
};

enum class ModelFamily { MV, GMV, SMAD, CVAR, MINIMAX };

struct ModelSpec {
    ModelFamily family = ModelFamily::GMV;
    MeanKind mean_kind = MeanKind::SM;  // MV only
    CovKind cov_kind = CovKind::SCV;    // MV / GMV
    double gamma = 1.0;                 // risk aversion, MV
    double alpha_cvar = 0.05;           // CVaR tail level
};

// Serialized tags: "COV2+SM" style for MV, "GMV+COV2" for GMV,
// and the bare benchmark names "MV", "GMV", "SMAD", "CVaR", "MM".
std::string model_tag(const ModelSpec& spec);

// max mu' x - gamma x' Sigma x over the simplex.
Portfolio solve_mv(const MeanEstimate& mu, const CovEstimate& sigma, double gamma = 1.0);

// min x' Sigma x over the simplex.
Portfolio solve_gmv(const CovEstimate& sigma);

// Semi mean absolute deviation LP over scenario rows (uniform probabilities).
Portfolio solve_smad(const Eigen::MatrixXd& scenario_returns);

// Rockafellar-Uryasev CVaR LP including the mean term, as modeled.
Portfolio solve_cvar(const Eigen::MatrixXd& scenario_returns, double alpha_cvar = 0.05);

// Worst-case scenario return maximization plus the mean term.
Portfolio solve_minimax(const Eigen::MatrixXd& scenario_returns);

}  // namespace shrinkpo
