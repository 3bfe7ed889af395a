#ifndef SPP_NUMERICS_HPP
#define SPP_NUMERICS_HPP

#include <Eigen/Dense>

#include "spp/errors.hpp"

namespace spp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct EigenDecomposition {
    Vector eigenvalues; // non-increasing
    Matrix eigenvectors; // columns, orthonormal, same order
};

// Symmetric eigendecomposition, eigenvalues sorted non-increasing.
inline EigenDecomposition sym_eig(const Matrix& A, double sym_tol = 1e-9) {
    if (A.rows() != A.cols())
        throw NotSymmetric("sym_eig: matrix is not square");
    double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if (((A - A.transpose()).cwiseAbs().maxCoeff()) > sym_tol * scale)
        throw NotSymmetric("sym_eig: matrix is not symmetric within tolerance");

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (A + A.transpose()));
    if (es.info() != Eigen::Success)
        throw DidNotConverge("sym_eig: eigensolver did not converge");

    const Eigen::Index n = A.rows();
    EigenDecomposition out;
    out.eigenvalues = es.eigenvalues().reverse();
    out.eigenvectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
    return out;
}

// Solve A X = B for symmetric positive definite A via Cholesky.
inline Matrix solve_spd(const Matrix& A, const Matrix& B) {
    if (A.rows() != A.cols() || A.rows() != B.rows())
        throw DimensionMismatch("solve_spd: shape mismatch");
    Eigen::LLT<Matrix> llt(A);
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("solve_spd: matrix is not positive definite");
    return llt.solve(B);
}

} // namespace spp

#endif
