#pragma once
// Dense and sparse linear-algebra contracts used by the pipeline: a sparse
// symmetric generalized eigensolver (shift-invert with spectrum slicing),
// complex dense SVD / QR / solves, and a complex sparse direct solve.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace hsurf {

using ComplexDenseMatrix = Eigen::MatrixXcd;
using SparseSymmetricMatrix = Eigen::SparseMatrix<double>;
using SparseComplexMatrix = Eigen::SparseMatrix<std::complex<double>>;

// Thrown when the iterative eigensolver cannot reach its residual target;
// carries the residuals it did achieve.
struct EigNonConvergence : std::runtime_error {
    std::vector<double> achieved_residuals;
    explicit EigNonConvergence(const std::string& what_arg, std::vector<double> res = {})
        : std::runtime_error(what_arg), achieved_residuals(std::move(res)) {}
};

// Validates the SparseSymmetricMatrix contract: square, structurally
// symmetric, values symmetric to 1e-12 relative, finite.
void check_sparse_symmetric(const SparseSymmetricMatrix& A);

struct GeneralizedEigs {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // columns, M-orthonormal, matching `values`
};

// First n eigenpairs of K v = lambda M v with K symmetric sparse and M
// symmetric positive definite sparse, eigenvalues ascending.  Small problems
// are handled densely; large ones by shift-invert Lanczos restarted over
// spectrum slices whose completeness is verified with factorization inertia
// counts.  Residuals ||K v - lambda M v|| <= 1e-8 ||K v|| are verified (the
// scale is regularized for eigenvalues at zero), and vectors are returned
// M-orthonormal.  Throws EigNonConvergence if the targets cannot be met.
GeneralizedEigs generalized_eigs(const SparseSymmetricMatrix& K,
                                 const SparseSymmetricMatrix& M, int n);

struct SVDResult {
    Eigen::MatrixXcd U;      // m x r, orthonormal columns
    Eigen::VectorXd sigma;   // r = min(m, n), descending, nonnegative
    Eigen::MatrixXcd V;      // n x r, orthonormal columns
};

// Singular value decomposition A = U diag(sigma) V^*.
SVDResult svd(const ComplexDenseMatrix& A);

struct QRResult {
    Eigen::MatrixXcd Q;  // m x r with orthonormal columns, r = min(m, n)
    Eigen::MatrixXcd R;  // r x n, upper triangular
};

// QR factorization A = Q R.
QRResult qr(const ComplexDenseMatrix& A);

// Solve A X = B for dense complex A (any number of right-hand sides).
// Throws std::runtime_error naming the reciprocal condition estimate if A is
// singular to working precision.
Eigen::MatrixXcd solve_dense(const ComplexDenseMatrix& A, const Eigen::MatrixXcd& B);

// Solve S x = b for sparse complex square S by sparse LU.
Eigen::VectorXcd solve_sparse_complex(const SparseComplexMatrix& S, const Eigen::VectorXcd& b);

// Same factorization, many right-hand sides (columns of B).
Eigen::MatrixXcd solve_sparse_complex_multi(const SparseComplexMatrix& S,
                                            const Eigen::MatrixXcd& B);

}  // namespace hsurf
