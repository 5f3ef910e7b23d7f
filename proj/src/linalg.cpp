#include "hsurf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/SparseLU>
#include <arpack/arpack.hpp>

namespace hsurf {

void check_sparse_symmetric(const SparseSymmetricMatrix& A) {
    if (A.rows() != A.cols()) throw std::invalid_argument("sparse matrix must be square");
    SparseSymmetricMatrix At = SparseSymmetricMatrix(A.transpose());
    double scale = 0.0;
    for (int k = 0; k < A.outerSize(); ++k)
        for (SparseSymmetricMatrix::InnerIterator it(A, k); it; ++it) {
            if (!std::isfinite(it.value()))
                throw std::invalid_argument("sparse matrix has non-finite entries");
            scale = std::max(scale, std::abs(it.value()));
        }
    SparseSymmetricMatrix D = A - At;
    for (int k = 0; k < D.outerSize(); ++k)
        for (SparseSymmetricMatrix::InnerIterator it(D, k); it; ++it)
            if (std::abs(it.value()) > 1e-12 * scale)
                throw std::invalid_argument("sparse matrix is not symmetric");
}

namespace {

using SpMat = SparseSymmetricMatrix;

// Number of eigenvalues of (K, M) strictly below sigma, by Sylvester inertia
// of K - sigma M.  Returns -1 if the factorization hits a near-zero pivot
// (sigma is essentially an eigenvalue); callers should nudge sigma.
int inertia_below(const SpMat& K, const SpMat& M, double sigma) {
    SpMat S = K - sigma * M;
    Eigen::SimplicialLDLT<SpMat> ldlt(S);
    if (ldlt.info() != Eigen::Success) return -1;
    const auto d = ldlt.vectorD();
    double dmax = 0.0;
    for (int i = 0; i < d.size(); ++i) dmax = std::max(dmax, std::abs(d[i]));
    int neg = 0;
    for (int i = 0; i < d.size(); ++i) {
        if (std::abs(d[i]) < 1e-12 * dmax) return -1;
        if (d[i] < 0) ++neg;
    }
    return neg;
}

// inertia_below with automatic nudging off eigenvalues.
int inertia_below_robust(const SpMat& K, const SpMat& M, double& sigma, double scale) {
    for (int attempt = 0; attempt < 8; ++attempt) {
        const int c = inertia_below(K, M, sigma);
        if (c >= 0) return c;
        sigma += (attempt + 1) * 3e-7 * scale;
    }
    throw EigNonConvergence("inertia probe failed: shifted matrix numerically singular");
}

struct WindowPairs {
    std::vector<double> values;
    std::vector<Eigen::VectorXd> vectors;
};

// All eigenpairs with eigenvalue in (lo, hi], via ARPACK shift-invert Lanczos
// centered in the window.  `expect` is the inertia count of the window.
WindowPairs arpack_window(const SpMat& K, const SpMat& M, double lo, double hi, int expect) {
    const int dim = static_cast<int>(K.rows());
    const double sigma = 0.5 * (lo + hi);
    SpMat S = K - sigma * M;
    Eigen::SparseLU<SpMat> lu(S);
    if (lu.info() != Eigen::Success)
        throw EigNonConvergence("shift-invert factorization failed");

    WindowPairs out;
    int nev = std::min(expect + 8, dim - 1);
    for (int attempt = 0; attempt < 3; ++attempt) {
        const int ncv = std::min(dim, std::max(2 * nev + 16, 48));
        const a_int n = dim;
        a_int ido = 0, info = 0;
        a_int iparam[11] = {}, ipntr[11] = {};
        iparam[0] = 1;     // exact shifts
        iparam[2] = 3000;  // max Arnoldi iterations
        iparam[3] = 1;
        iparam[6] = 3;  // shift-invert on a generalized problem
        const a_int lworkl = ncv * (ncv + 8);
        std::vector<double> resid(dim), v(static_cast<size_t>(dim) * ncv),
            workd(3 * static_cast<size_t>(dim)), workl(lworkl);
        Eigen::Map<Eigen::VectorXd> residm(resid.data(), dim);

        while (true) {
            arpack::saupd(ido, arpack::bmat::generalized, n, arpack::which::largest_magnitude,
                          nev, 0.0, resid.data(), ncv, v.data(), n, iparam, ipntr,
                          workd.data(), workl.data(), lworkl, info);
            if (ido == -1) {
                Eigen::Map<Eigen::VectorXd> x(&workd[ipntr[0] - 1], dim);
                Eigen::Map<Eigen::VectorXd> y(&workd[ipntr[1] - 1], dim);
                y = lu.solve(M * x);
            } else if (ido == 1) {
                // M x is already available in workd at ipntr[2].
                Eigen::Map<Eigen::VectorXd> mx(&workd[ipntr[2] - 1], dim);
                Eigen::Map<Eigen::VectorXd> y(&workd[ipntr[1] - 1], dim);
                y = lu.solve(mx);
            } else if (ido == 2) {
                Eigen::Map<Eigen::VectorXd> x(&workd[ipntr[0] - 1], dim);
                Eigen::Map<Eigen::VectorXd> y(&workd[ipntr[1] - 1], dim);
                y = M * x;
            } else {
                break;
            }
        }
        if (info < 0)
            throw EigNonConvergence("Lanczos iteration failed with code " + std::to_string(info));

        std::vector<a_int> select(ncv);
        std::vector<double> d(nev), z(static_cast<size_t>(dim) * nev);
        a_int ierr = 0;
        arpack::seupd(1, arpack::howmny::ritz_vectors, select.data(), d.data(), z.data(), n,
                      sigma, arpack::bmat::generalized, n, arpack::which::largest_magnitude,
                      nev, 0.0, resid.data(), ncv, v.data(), n, iparam, ipntr, workd.data(),
                      workl.data(), lworkl, ierr);
        if (ierr != 0)
            throw EigNonConvergence("eigenpair extraction failed with code " +
                                    std::to_string(ierr));
        const int nconv = static_cast<int>(iparam[4]);

        out.values.clear();
        out.vectors.clear();
        for (int j = 0; j < nconv; ++j) {
            if (d[j] > lo && d[j] <= hi) {
                out.values.push_back(d[j]);
                out.vectors.emplace_back(
                    Eigen::Map<Eigen::VectorXd>(&z[static_cast<size_t>(j) * dim], dim));
            }
        }
        if (static_cast<int>(out.values.size()) == expect) return out;
        // Missed some: enlarge the subspace and retry.
        nev = std::min(nev + std::max(10, expect / 2), dim - 1);
    }
    throw EigNonConvergence("spectrum slice kept missing eigenvalues (got " +
                            std::to_string(out.values.size()) + ", expected " +
                            std::to_string(expect) + ")");
}

GeneralizedEigs dense_fallback(const SpMat& K, const SpMat& M, int n) {
    Eigen::MatrixXd Kd(K), Md(M);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Kd, Md);
    if (es.info() != Eigen::Success) throw EigNonConvergence("dense eigensolver failed");
    GeneralizedEigs out;
    out.values = es.eigenvalues().head(n);
    out.vectors = es.eigenvectors().leftCols(n);
    return out;
}

void verify_pairs(const SpMat& K, const SpMat& M, GeneralizedEigs& r) {
    const double normK = K.norm();  // Frobenius, straight off the stored coefficients
    std::vector<double> residuals;
    double worst = 0.0;
    for (int j = 0; j < r.values.size(); ++j) {
        const Eigen::VectorXd Kv = K * r.vectors.col(j);
        const Eigen::VectorXd Mv = M * r.vectors.col(j);
        const double res = (Kv - r.values[j] * Mv).norm();
        // Relative to ||K v||, regularized so an exact zero eigenvalue
        // (constant Neumann mode, where ||K v|| is itself rounding noise) is
        // judged against the matrix scale instead.
        const double denom = std::max(Kv.norm(), 1e-6 * normK * r.vectors.col(j).norm());
        residuals.push_back(res / denom);
        worst = std::max(worst, res / denom);
    }
    if (worst > 1e-8)
        throw EigNonConvergence("eigenpair residuals exceed 1e-8 (worst " +
                                    std::to_string(worst) + ")",
                                std::move(residuals));
    // M-orthonormalize the returned block (cheap safeguard; the solver output
    // is already near-orthonormal).
    for (int j = 0; j < r.vectors.cols(); ++j) {
        Eigen::VectorXd vj = r.vectors.col(j);
        for (int k = 0; k < j; ++k) {
            const double c = r.vectors.col(k).dot(M * vj);
            vj -= c * r.vectors.col(k);
        }
        const double nrm = std::sqrt(vj.dot(M * vj));
        if (nrm <= 0) throw EigNonConvergence("eigenvector collapsed during orthonormalization");
        r.vectors.col(j) = vj / nrm;
    }
}

}  // namespace

GeneralizedEigs generalized_eigs(const SparseSymmetricMatrix& K,
                                 const SparseSymmetricMatrix& M, int n) {
    check_sparse_symmetric(K);
    check_sparse_symmetric(M);
    const int dim = static_cast<int>(K.rows());
    if (M.rows() != dim) throw std::invalid_argument("generalized_eigs: size mismatch");
    if (n < 1 || n > dim) throw std::invalid_argument("generalized_eigs: need 1 <= n <= dim");
    {
        Eigen::SimplicialLDLT<SpMat> mld(M);
        if (mld.info() != Eigen::Success || mld.vectorD().minCoeff() <= 0.0)
            throw std::invalid_argument("generalized_eigs: M is not positive definite");
    }

    GeneralizedEigs result;
    if (dim <= 400 || n > dim / 2) {
        result = dense_fallback(K, M, n);
        verify_pairs(K, M, result);
        return result;
    }

    // Scale for shift nudges: a crude Rayleigh bound ||K|| / ||M|| from
    // diagonal magnitudes.
    double kd = 0.0, md = std::numeric_limits<double>::max();
    for (int i = 0; i < dim; ++i) {
        kd = std::max(kd, std::abs(K.coeff(i, i)));
        md = std::min(md, std::max(M.coeff(i, i), 1e-300));
    }
    const double scale = std::max(1.0, kd / md);

    // Bracket the first n eigenvalues with inertia counts.
    double lo = -1e-6 * scale;
    for (int i = 0; i < 200 && inertia_below_robust(K, M, lo, scale) > 0; ++i) lo *= 4.0;
    double hi = 1e-3 * scale;
    for (int i = 0; i < 200 && inertia_below_robust(K, M, hi, scale) < n; ++i) hi *= 2.0;

    // Slice [lo, hi] into windows of at most `max_per_window` eigenvalues by
    // bisection on the inertia count, then harvest each window.
    const int max_per_window = 120;
    std::vector<double> values;
    std::vector<Eigen::VectorXd> vectors;
    struct Window {
        double a, b;
        int ca, cb;
    };
    std::vector<Window> stack;
    {
        double a = lo, b = hi;
        const int ca = inertia_below_robust(K, M, a, scale);
        const int cb = inertia_below_robust(K, M, b, scale);
        stack.push_back({a, b, ca, cb});
    }
    while (!stack.empty()) {
        Window w = stack.back();
        stack.pop_back();
        const int cnt = w.cb - w.ca;
        if (cnt == 0) continue;
        if (cnt > max_per_window && w.b - w.a > 1e-10 * scale) {
            double mid = 0.5 * (w.a + w.b);
            const int cm = inertia_below_robust(K, M, mid, scale);
            stack.push_back({w.a, mid, w.ca, cm});
            stack.push_back({mid, w.b, cm, w.cb});
            continue;
        }
        WindowPairs pairs = arpack_window(K, M, w.a, w.b, cnt);
        for (size_t i = 0; i < pairs.values.size(); ++i) {
            values.push_back(pairs.values[i]);
            vectors.push_back(std::move(pairs.vectors[i]));
        }
    }

    std::vector<int> order(values.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return values[a] < values[b]; });
    if (static_cast<int>(values.size()) < n)
        throw EigNonConvergence("collected only " + std::to_string(values.size()) +
                                " of " + std::to_string(n) + " eigenpairs");
    result.values.resize(n);
    result.vectors.resize(dim, n);
    for (int j = 0; j < n; ++j) {
        result.values[j] = values[order[j]];
        result.vectors.col(j) = vectors[order[j]];
    }
    verify_pairs(K, M, result);
    return result;
}

SVDResult svd(const ComplexDenseMatrix& A) {
    if (!A.allFinite()) throw std::invalid_argument("svd: non-finite entries");
    SVDResult out;
    if (std::min(A.rows(), A.cols()) <= 16) {
        Eigen::JacobiSVD<Eigen::MatrixXcd> s(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = s.matrixU();
        out.sigma = s.singularValues();
        out.V = s.matrixV();
    } else {
        Eigen::BDCSVD<Eigen::MatrixXcd> s(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        out.U = s.matrixU();
        out.sigma = s.singularValues();
        out.V = s.matrixV();
    }
    return out;
}

QRResult qr(const ComplexDenseMatrix& A) {
    if (!A.allFinite()) throw std::invalid_argument("qr: non-finite entries");
    Eigen::HouseholderQR<Eigen::MatrixXcd> h(A);
    const Eigen::Index r = std::min(A.rows(), A.cols());
    QRResult out;
    out.Q = Eigen::MatrixXcd(h.householderQ()).leftCols(r);
    out.R = h.matrixQR().topRows(r).triangularView<Eigen::Upper>();
    return out;
}

Eigen::MatrixXcd solve_dense(const ComplexDenseMatrix& A, const Eigen::MatrixXcd& B) {
    if (A.rows() != A.cols()) throw std::invalid_argument("solve_dense: A must be square");
    if (A.rows() != B.rows()) throw std::invalid_argument("solve_dense: size mismatch");
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
    const double rcond_proxy =
        lu.rank() < A.rows()
            ? 0.0
            : std::abs(lu.matrixLU().diagonal().cwiseAbs().minCoeff()) /
                  std::max(std::abs(lu.matrixLU().diagonal().cwiseAbs().maxCoeff()), 1e-300);
    if (lu.rank() < A.rows() || rcond_proxy < 1e-15)
        throw std::runtime_error(
            "solve_dense: matrix singular to working precision (pivot ratio " +
            std::to_string(rcond_proxy) + ")");
    return lu.solve(B);
}

Eigen::VectorXcd solve_sparse_complex(const SparseComplexMatrix& S, const Eigen::VectorXcd& b) {
    if (S.rows() != S.cols()) throw std::invalid_argument("solve_sparse_complex: S must be square");
    if (S.rows() != b.size()) throw std::invalid_argument("solve_sparse_complex: size mismatch");
    Eigen::SparseLU<SparseComplexMatrix> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_sparse_complex: factorization failed (singular?)");
    Eigen::VectorXcd x = lu.solve(b);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_sparse_complex: solve failed");
    return x;
}

Eigen::MatrixXcd solve_sparse_complex_multi(const SparseComplexMatrix& S,
                                            const Eigen::MatrixXcd& B) {
    if (S.rows() != S.cols()) throw std::invalid_argument("solve_sparse_complex: S must be square");
    if (S.rows() != B.rows()) throw std::invalid_argument("solve_sparse_complex: size mismatch");
    Eigen::SparseLU<SparseComplexMatrix> lu;
    lu.compute(S);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_sparse_complex: factorization failed (singular?)");
    Eigen::MatrixXcd X = lu.solve(B);
    if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_sparse_complex: solve failed");
    return X;
}

}  // namespace hsurf
