#pragma once

#include <Eigen/Core>
#include <limits>
#include <string>
#include <vector>

namespace shrinkpo {

// The eleven covariance estimators. LIS, GIS and AS require the concentration
// ratio c = p/n to be below 1; the other eight work in both regimes.
enum class CovKind { SCV, LS, COV1, COV2, COVCOR, COVDIAG, COVMKT, LIS, QIS, GIS, AS };

const char* to_string(CovKind kind);
CovKind cov_kind_from_string(const std::string& name);
const std::vector<CovKind>& all_cov_kinds();

// Linear-shrinkage ingredients: Sigma_hat = lambda * T + (1 - lambda) * S_n
// with lambda = clip((pi - rho) / (n * gamma), 0, 1).
struct LwIngredients {
    Eigen::MatrixXd target;
    double pi_hat = 0.0;
    double rho_diag = 0.0;
    double rho_off = 0.0;
    double gamma_hat = 0.0;

    double rho_hat() const { return rho_diag + rho_off; }
};

struct CovDiagnostics {
    double concentration = 0.0;  // c = p/n
    double lambda = std::numeric_limits<double>::quiet_NaN();  // LW intensity
    double alpha = std::numeric_limits<double>::quiet_NaN();   // LS sample weight
    double beta = std::numeric_limits<double>::quiet_NaN();    // LS target weight
    double bandwidth = std::numeric_limits<double>::quiet_NaN();
    bool degenerate = false;
    std::string note;
    Eigen::VectorXd shrunk_eigenvalues;   // LIS/QIS/GIS/AS, ascending basis
    Eigen::VectorXd spectral_density;     // AS kernel estimate at each eigenvalue
    Eigen::VectorXd hilbert_transform;    // AS Hilbert transform at each eigenvalue
};

struct CovEstimate {
    CovKind kind = CovKind::SCV;
    Eigen::MatrixXd sigma;
    CovDiagnostics diag;
};

// The one sample-covariance definition used repo-wide:
// S_n = (1/n) * Rc' * Rc with Rc the column-demeaned returns (divisor n).
Eigen::MatrixXd sample_cov_matrix(const Eigen::MatrixXd& returns);

CovEstimate sample_cov(const Eigen::MatrixXd& returns);

// Linear shrinkage toward (1/p) * I minimizing expected Frobenius loss.
CovEstimate ls_cov(const Eigen::MatrixXd& returns);

// Ledoit-Wolf family; target_kind one of COV1, COV2, COVCOR, COVDIAG, COVMKT.
LwIngredients lw_ingredients(const Eigen::MatrixXd& returns, CovKind target_kind);
CovEstimate lw_cov(const Eigen::MatrixXd& returns, CovKind target_kind);

// Inverse-eigenvalue shrinkage family. Sample eigenvectors are kept and the
// (inverse) eigenvalues are shrunk; see each function for the rule applied.
CovEstimate lis_cov(const Eigen::MatrixXd& returns);
CovEstimate qis_cov(const Eigen::MatrixXd& returns);
CovEstimate gis_cov(const Eigen::MatrixXd& returns);

// Analytic nonlinear shrinkage via Epanechnikov kernel density and its
// Hilbert transform on the sample spectrum.
CovEstimate as_cov(const Eigen::MatrixXd& returns);

// All 11 kinds when c < 1; the 8 without LIS/GIS/AS when c >= 1.
std::vector<CovKind> applicable_cov_kinds(double concentration);

CovEstimate estimate_cov(CovKind kind, const Eigen::MatrixXd& returns);

}  // namespace shrinkpo
