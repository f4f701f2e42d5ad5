#include "shrinkpo/numerics.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "shrinkpo/errors.hpp"

namespace shrinkpo {

SymEigen sym_eigen(const Eigen::MatrixXd& matrix) {
    if (matrix.rows() != matrix.cols())
        throw numeric_error("sym_eigen: matrix is not square");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    const double asym = (matrix - matrix.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-10 * scale)
        throw numeric_error("sym_eigen: matrix is not symmetric");

    // Work on the symmetrized matrix so round-off asymmetry cannot leak through.
    Eigen::MatrixXd sym = 0.5 * (matrix + matrix.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success)
        throw numeric_error("sym_eigen: eigendecomposition failed");

    SymEigen out;
    out.eigenvalues = es.eigenvalues();  // ascending
    out.eigenvectors = es.eigenvectors();
    return out;
}

Eigen::MatrixXd pinv(const Eigen::MatrixXd& matrix, double rank_tol) {
    SymEigen eig = sym_eigen(matrix);
    const long p = eig.eigenvalues.size();
    const double lmax = eig.eigenvalues.cwiseAbs().maxCoeff();
    const double cut = rank_tol * std::max(lmax, 0.0);

    Eigen::VectorXd inv(p);
    for (long i = 0; i < p; ++i) {
        const double l = eig.eigenvalues(i);
        inv(i) = (std::abs(l) <= cut || l == 0.0) ? 0.0 : 1.0 / l;
    }
    return eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace shrinkpo
