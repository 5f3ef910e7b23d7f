#include "hsurf/scattering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hsurf/linalg.hpp"

namespace hsurf {

namespace {

int mode_position(SymmetryReduction red, int J, int m) {
    const auto modes = trace_mode_list(red, J);
    for (int i = 0; i < static_cast<int>(modes.size()); ++i)
        if (modes[i] == m) return i;
    throw std::out_of_range("mode " + std::to_string(m) + " is not in the trace basis");
}

// sqrt of the cut height per column/row of the mode layout
Eigen::VectorXd sqrt_height_diagonal(const std::vector<double>& a, int mpc) {
    Eigen::VectorXd v(static_cast<int>(a.size()) * mpc);
    for (int k = 0; k < static_cast<int>(a.size()); ++k)
        for (int i = 0; i < mpc; ++i) v[k * mpc + i] = std::sqrt(a[k]);
    return v;
}

bool same_heights(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i)
        if (std::abs(x[i] - y[i]) > 1e-12 * (1.0 + std::abs(x[i]))) return false;
    return true;
}

void check_anchor_layout(const NeumannSpectralData& data, const AnchorSolve& an) {
    if (an.reduction != data.reduction || an.J != data.J || an.p != data.p ||
        !same_heights(an.a, data.a))
        throw std::invalid_argument(
            "interior_nd: anchor solve does not share the trace basis layout of the "
            "spectral data");
    const int na = data.num_modes();
    if (an.nd.rows() != na || an.nd.cols() != na)
        throw std::invalid_argument("interior_nd: anchor matrix has the wrong size");
}

cplx height_power(double a, cplx z) { return std::exp(z * std::log(a)); }

}  // namespace

int NDMatrix::alpha(int k, int m) const {
    return (k - 1) * modes_per_cusp() + mode_position(reduction, J, m);
}

NDMatrix interior_nd(const NeumannSpectralData& data,
                     const std::vector<AnchorSolve>& anchors, cplx s) {
    const int na = data.num_modes();
    const int n = static_cast<int>(data.eigenvalues.size());
    if (data.p < 1 || na <= 0) throw std::invalid_argument("interior_nd: empty data");
    if (data.coeffs.rows() != n || data.coeffs.cols() != na)
        throw std::invalid_argument(
            "interior_nd: coefficient matrix does not match eigenvalues x modes");

    const cplx lambda = s * (1.0 - s);
    for (int j = 0; j < n; ++j)
        if (std::abs(lambda - data.eigenvalues[j]) < 1e-6) {
            std::ostringstream msg;
            msg << "interior_nd: s(1-s) = " << lambda
                << " is within 1e-6 of interior eigenvalue "
                << std::to_string(data.eigenvalues[j]) << " (index " << j
                << "); the response has a pole there";
            throw std::domain_error(msg.str());
        }

    for (const auto& an : anchors) check_anchor_layout(data, an);
    const int r = static_cast<int>(anchors.size());
    for (int i = 0; i < r; ++i) {
        for (int l = 0; l < i; ++l)
            if (std::abs(anchors[i].lambda0 - anchors[l].lambda0) <=
                1e-9 * (1.0 + std::abs(anchors[i].lambda0)))
                throw std::invalid_argument(
                    "interior_nd: coincident anchors make the interpolation degenerate");
        for (int j = 0; j < n; ++j)
            if (std::abs(anchors[i].lambda0 - data.eigenvalues[j]) < 1e-6)
                throw std::invalid_argument(
                    "interior_nd: an anchor sits on the interior spectrum");
    }

    NDMatrix out;
    out.s = s;
    out.reduction = data.reduction;
    out.J = data.J;
    out.p = data.p;
    out.a = data.a;

    const Eigen::VectorXd sq = sqrt_height_diagonal(data.a, data.modes_per_cusp());

    // a requested point that *is* an anchor: return that solve, rescaled to
    // the boundary-orthonormal basis (rows carry the stored height factor)
    for (const auto& an : anchors)
        if (std::abs(lambda - an.lambda0) <= 1e-12 * (1.0 + std::abs(lambda))) {
            out.provenance = NDProvenance::Direct;
            out.entries = (sq.cwiseInverse()).asDiagonal() * an.nd * sq.asDiagonal();
            return out;
        }

    // series weights: plain reciprocal gaps, or the interpolation remainder
    Eigen::VectorXcd w(n);
    for (int j = 0; j < n; ++j) {
        cplx wj = 1.0 / (data.eigenvalues[j] - lambda);
        for (int i = 0; i < r; ++i)
            wj *= (lambda - anchors[i].lambda0) /
                  (data.eigenvalues[j] - anchors[i].lambda0);
        w[j] = wj;
    }

    const Eigen::MatrixXcd b = data.coeffs * sq.asDiagonal();
    Eigen::MatrixXcd entries = b.transpose() * w.asDiagonal() * b.conjugate();

    if (r > 0) {
        // Newton interpolation through the anchor responses: divided
        // differences F[i] over the anchor spectral values, then Horner
        std::vector<Eigen::MatrixXcd> F(r);
        for (int i = 0; i < r; ++i)
            F[i] = (sq.cwiseInverse()).asDiagonal() * anchors[i].nd * sq.asDiagonal();
        for (int k = 1; k < r; ++k)
            for (int i = r - 1; i >= k; --i)
                F[i] = (F[i] - F[i - 1]) /
                       (anchors[i].lambda0 - anchors[i - k].lambda0);
        Eigen::MatrixXcd P = F[r - 1];
        for (int i = r - 2; i >= 0; --i)
            P = F[i] + (lambda - anchors[i].lambda0) * P;
        entries += P;
        out.provenance = NDProvenance::AnchoredSeries;
    } else {
        out.provenance = NDProvenance::Series;
    }
    out.entries = std::move(entries);
    return out;
}

Eigen::VectorXcd cusp_diagonal(cplx s, const std::vector<double>& a,
                               SymmetryReduction red, int J) {
    const auto modes = trace_mode_list(red, J);
    const int mpc = static_cast<int>(modes.size());
    Eigen::VectorXcd out(static_cast<int>(a.size()) * mpc);
    for (int k = 0; k < static_cast<int>(a.size()); ++k)
        for (int i = 0; i < mpc; ++i)
            out[k * mpc + i] = cusp_mode_coefficient(s, a[k], modes[i]);
    return out;
}

Eigen::VectorXd averaging_diagonal(SymmetryReduction red, int J, int p) {
    const auto modes = trace_mode_list(red, J);
    const int mpc = static_cast<int>(modes.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(p * mpc);
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < mpc; ++i)
            if (modes[i] == 0) out[k * mpc + i] = 1.0;
    return out;
}

Eigen::VectorXd q_weight_diagonal(SymmetryReduction red, int J, int p) {
    const auto modes = trace_mode_list(red, J);
    const int mpc = static_cast<int>(modes.size());
    Eigen::VectorXd out(p * mpc);
    for (int k = 0; k < p; ++k)
        for (int i = 0; i < mpc; ++i) out[k * mpc + i] = std::abs(modes[i]) + 1.0;
    return out;
}

Eigen::MatrixXcd assemble_T(const NDMatrix& ndm, const Eigen::VectorXcd& cusp_diag,
                            const Eigen::VectorXd& av_diag) {
    const int na = ndm.dim();
    if (cusp_diag.size() != na || av_diag.size() != na)
        throw std::invalid_argument("assemble_T: diagonal sizes do not match the response");
    Eigen::MatrixXcd T = ndm.entries;
    for (int al = 0; al < na; ++al)
        if (av_diag[al] != 0.0) T.row(al).setZero();
    T += Eigen::MatrixXcd(cusp_diag.asDiagonal());
    return T;
}

Eigen::MatrixXcd assemble_T(const NDMatrix& ndm, const CuspNDMatrix& ndc,
                            const Eigen::MatrixXcd& av) {
    if (ndm.reduction != SymmetryReduction::None)
        throw std::invalid_argument(
            "assemble_T: the assembled cusp matrix covers the full mode range only");
    if (ndc.J != ndm.J || !same_heights(ndc.a, ndm.a) || av.rows() != ndm.dim() ||
        av.cols() != ndm.dim() || ndc.dim() != ndm.dim())
        throw std::invalid_argument("assemble_T: layouts do not match");
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(ndm.dim(), ndm.dim());
    return (id - av) * ndm.entries + ndc.dense();
}

KernelReport kernel_vectors(const Eigen::MatrixXcd& T, int p,
                            const Eigen::VectorXd& q_diag) {
    const int n = static_cast<int>(T.rows());
    if (T.cols() != n) throw std::invalid_argument("kernel_vectors: matrix must be square");
    if (p < 1 || p >= n)
        throw std::invalid_argument(
            "kernel_vectors: need 1 <= p < dim to resolve p kernel directions and a gap");
    Eigen::MatrixXcd M;
    if (q_diag.size() == 0) {
        M = T;
    } else {
        if (q_diag.size() != n)
            throw std::invalid_argument("kernel_vectors: weight diagonal size mismatch");
        M = q_diag.asDiagonal() * T;
    }
    const SVDResult dec = svd(M);  // sigma descending, V columns matching
    KernelReport r;
    r.vectors = Eigen::MatrixXcd(n, p);
    for (int i = 0; i < p; ++i) r.vectors.col(i) = dec.V.col(n - 1 - i);
    r.sigma_p = dec.sigma[n - p];
    r.sigma_next = dec.sigma[n - p - 1];
    r.gap_warning = !(r.sigma_next > 10.0 * r.sigma_p);
    return r;
}

Eigen::MatrixXcd scattering_from_kernel(const NDMatrix& ndm,
                                        const Eigen::MatrixXcd& kernel, cplx s,
                                        double max_cond, double* cond_out) {
    const int p = ndm.p;
    if (kernel.rows() != ndm.dim() || kernel.cols() != p)
        throw std::invalid_argument(
            "scattering_from_kernel: kernel basis must have one column per cusp");
    Eigen::MatrixXcd Q1(p, p), Q2(p, p);
    const Eigen::MatrixXcd NV = ndm.entries * kernel;
    for (int k = 1; k <= p; ++k) {
        const int row = ndm.alpha(k, 0);
        Q1.row(k - 1) = kernel.row(row);
        Q2.row(k - 1) = NV.row(row);
    }
    const Eigen::MatrixXcd denom = (s - 1.0) * Q2 + Q1;
    // condition of the solve measured against the pre-cancellation scale, so
    // a catastrophic cancellation is caught even when p = 1
    const double scale = std::abs(s - 1.0) * Q2.norm() + Q1.norm();
    const SVDResult dec = svd(denom);
    const double smin = dec.sigma[p - 1];
    const double cond = smin > 0.0 ? scale / smin : std::numeric_limits<double>::infinity();
    if (cond_out) *cond_out = cond;
    if (!(cond < max_cond))
        throw std::runtime_error(
            "scattering_from_kernel: (s-1) Q2 + Q1 is singular to working precision "
            "(condition " +
            std::to_string(cond) + "); the coefficient has a pole here");
    const Eigen::MatrixXcd num = s * Q2 - Q1;
    const Eigen::MatrixXcd ratio = num * denom.fullPivLu().solve(
                                             Eigen::MatrixXcd::Identity(p, p));
    Eigen::MatrixXcd C(p, p);
    for (int i = 0; i < p; ++i)
        for (int j = 0; j < p; ++j)
            C(i, j) = height_power(ndm.a[i], s - 1.0) * ratio(i, j) *
                      height_power(ndm.a[j], s);
    return C;
}

namespace {

void check_evaluation_point(const NeumannSpectralData& data, cplx s) {
    if (std::abs(s - 0.5) < 1e-10)
        throw std::invalid_argument(
            "the coefficient formula degenerates at the symmetry point s = 1/2");
    const auto modes = trace_mode_list(data.reduction, data.J);
    if (std::find(modes.begin(), modes.end(), 0) == modes.end())
        throw std::invalid_argument(
            "the trace basis has no mean mode, so no scattering channel is open "
            "(odd reflection sector)");
}

}  // namespace

ScatteringResult scattering_matrix(const NeumannSpectralData& data,
                                   const std::vector<AnchorSolve>& anchors, cplx s,
                                   const ScatteringOptions& opt) {
    check_evaluation_point(data, s);
    const NDMatrix ndm = interior_nd(data, anchors, s);
    const Eigen::VectorXcd dc = cusp_diagonal(s, data.a, data.reduction, data.J);
    const Eigen::VectorXd av = averaging_diagonal(data.reduction, data.J, data.p);
    const Eigen::MatrixXcd T = assemble_T(ndm, dc, av);
    const Eigen::VectorXd q = opt.q_weight
                                  ? q_weight_diagonal(data.reduction, data.J, data.p)
                                  : Eigen::VectorXd();
    const KernelReport kr = kernel_vectors(T, data.p, q);
    if (!(kr.sigma_next > opt.min_gap * kr.sigma_p))
        throw std::runtime_error(
            "scattering_matrix: kernel dimension is not resolved (sigma_p = " +
            std::to_string(kr.sigma_p) + ", sigma_next = " +
            std::to_string(kr.sigma_next) +
            "); an embedded eigenvalue or a resonance close to the spectrum?");
    ScatteringResult res;
    res.s = s;
    res.sigma_p = kr.sigma_p;
    res.sigma_next = kr.sigma_next;
    res.provenance = ndm.provenance;
    res.C = scattering_from_kernel(ndm, kr.vectors, s, opt.max_cond, &res.cond);
    return res;
}

OneCuspResult one_cusp_scattering(const NeumannSpectralData& data,
                                  const std::vector<AnchorSolve>& anchors, cplx s) {
    check_evaluation_point(data, s);
    if (data.p != 1)
        throw std::invalid_argument("one_cusp_scattering: the shortcut needs p = 1");
    const NDMatrix ndm = interior_nd(data, anchors, s);
    const Eigen::VectorXcd dc = cusp_diagonal(s, data.a, data.reduction, data.J);
    Eigen::MatrixXcd W = ndm.entries + Eigen::MatrixXcd(dc.asDiagonal());
    const int i0 = ndm.alpha(1, 0);
    const double a = data.a[0];
    const cplx apow = height_power(a, 2.0 * s - 1.0);

    OneCuspResult res;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(W);
    if (lu.isInvertible()) {
        Eigen::VectorXcd e0 = Eigen::VectorXcd::Zero(W.rows());
        e0[i0] = 1.0;
        const Eigen::VectorXcd u = lu.solve(e0);
        if (std::abs(u[i0]) <= 1e-10 * u.norm()) {
            res.exceptional = true;
        } else {
            res.G = 1.0 / u[i0];
        }
    } else {
        const Eigen::MatrixXcd ker = lu.kernel();
        const Eigen::VectorXcd v = ker.col(0);
        if (std::abs(v[i0]) > 1e-8 * v.norm()) {
            res.G = 0.0;  // the glued pencil already balances at G = 0
        } else {
            res.exceptional = true;
        }
    }
    if (res.exceptional) {
        res.value = apow * s / (s - 1.0);
    } else {
        res.value = apow * (s * res.G - 1.0) / ((s - 1.0) * res.G + 1.0);
    }
    return res;
}

double scattering_error_bound(double delta1, double delta2, double K1, double K2,
                              double K3, double norm_nm, double norm_as,
                              double norm_as1, cplx s, int p) {
    if (delta1 < 0.0 || delta2 < 0.0 || !(K1 > 0.0) || !(K2 > 0.0) || K3 < 0.0 ||
        norm_nm < 0.0 || norm_as < 0.0 || norm_as1 < 0.0 || p < 1)
        throw std::invalid_argument("scattering_error_bound: inputs out of range");
    const double sp = std::sqrt(static_cast<double>(p));
    const double kernel_term = sp * delta1 / K1;
    const double response_term = sp * (delta2 + norm_nm * delta1 / K1);
    const double eps1 = kernel_term + std::abs(s - 1.0) * response_term;
    const double eps2 = kernel_term + std::abs(s) * response_term;
    if (eps1 * K2 >= 1.0) return std::numeric_limits<double>::infinity();
    return norm_as1 * norm_as *
           (eps1 * K2 * K2 * (K3 + eps2) / (1.0 - eps1 * K2) + eps2 * K2);
}

}  // namespace hsurf
