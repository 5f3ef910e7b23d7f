#pragma once
// Scattering matrices from glued Neumann-to-Dirichlet data.
//
// The interior boundary response is evaluated from eigenpair trace data as a
// spectral series, optionally accelerated through anchor solves: subtracting
// the exact response at anchor points lifts the series decay from 1/lambda_j
// to 1/lambda_j^{r+1} with r anchors.  Combining it with the analytic cusp
// response and the mean-value projector yields an operator whose kernel
// carries the scattering data; the p x p scattering matrix follows from the
// kernel basis by a rational matrix formula.
//
// All matrices here live in the basis that is orthonormal for the boundary
// arclength measure (the cut circle at height a_k has length 1/a_k); trace
// data stored in the unit-period Fourier convention is rescaled by sqrt(a_k)
// on entry.  This normalization matters for several cusps with distinct cut
// heights: the scattering matrix is unitary on the critical line only in the
// arclength-orthonormal basis.

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "hsurf/cuspnd.hpp"
#include "hsurf/fem.hpp"

namespace hsurf {

enum class NDProvenance { Series, AnchoredSeries, Direct };

// Truncated interior Neumann-to-Dirichlet matrix at one spectral parameter,
// indexed like the trace data: alpha = (k, m), cusps outer, modes inner.
struct NDMatrix {
    cplx s;
    SymmetryReduction reduction = SymmetryReduction::None;
    int J = 0;
    int p = 0;
    std::vector<double> a;
    NDProvenance provenance = NDProvenance::Series;
    Eigen::MatrixXcd entries;

    int modes_per_cusp() const {
        return static_cast<int>(trace_mode_list(reduction, J).size());
    }
    int dim() const { return static_cast<int>(entries.rows()); }
    int alpha(int k, int m) const;
};

// Interior boundary response at s from eigenpair trace data, optionally
// accelerated by anchor solves (all anchors must share the data's basis
// layout).  With no anchors this is the plain spectral series over the
// computed pairs; each anchor is interpolated exactly (Newton divided
// differences) and the series keeps only the remainder weights
// prod_i(lambda - lambda_i) / (prod_i(lambda_j - lambda_i) (lambda_j -
// lambda)).  Evaluating exactly at an anchor returns that solve verbatim.
// Throws std::domain_error (naming the eigenvalue) when s(1-s) comes within
// 1e-6 of a computed eigenvalue, and std::invalid_argument on layout
// mismatches or coincident anchors.
NDMatrix interior_nd(const NeumannSpectralData& data,
                     const std::vector<AnchorSolve>& anchors, cplx s);

// Diagonal of the cusp response over the same mode layout (zero at m = 0),
// the 0/1 diagonal of the mean-value projector (1 at m = 0), and the
// first-order Fourier weight |m| + 1 used to precondition the kernel search.
Eigen::VectorXcd cusp_diagonal(cplx s, const std::vector<double>& a,
                               SymmetryReduction red, int J);
Eigen::VectorXd averaging_diagonal(SymmetryReduction red, int J, int p);
Eigen::VectorXd q_weight_diagonal(SymmetryReduction red, int J, int p);

// T(s) = (1 - av) N^M(s) + N^c(s): rows at m = 0 are replaced by the cusp
// diagonal's (zero) entries, everything else gets the cusp diagonal added.
Eigen::MatrixXcd assemble_T(const NDMatrix& ndm, const Eigen::VectorXcd& cusp_diag,
                            const Eigen::VectorXd& av_diag);
// Unreduced convenience overload taking the assembled cusp matrix and a
// dense projector; validates the layouts match.
Eigen::MatrixXcd assemble_T(const NDMatrix& ndm, const CuspNDMatrix& ndc,
                            const Eigen::MatrixXcd& av);

// Right singular vectors of diag(q) T for the p smallest singular values
// (ascending), plus the gap report sigma_p (largest of the p) and sigma_next
// (the (p+1)-th).  A gap ratio sigma_next / sigma_p below 10 sets
// gap_warning: the kernel dimension is then not cleanly resolved (embedded
// eigenvalue or a resonance very close to the spectrum).  Pass an empty q
// for the unweighted operator.
struct KernelReport {
    Eigen::MatrixXcd vectors;
    double sigma_p = 0.0;
    double sigma_next = 0.0;
    bool gap_warning = false;
};
KernelReport kernel_vectors(const Eigen::MatrixXcd& T, int p,
                            const Eigen::VectorXd& q_diag = Eigen::VectorXd());

struct ScatteringOptions {
    bool q_weight = true;      // precondition the kernel SVD by |m| + 1
    double min_gap = 10.0;     // required sigma_next / sigma_p ratio
    double max_cond = 1e12;    // limit on the (s-1) Q2 + Q1 solve condition
};

struct ScatteringResult {
    cplx s;
    Eigen::MatrixXcd C;        // p x p scattering matrix
    double sigma_p = 0.0;      // kernel gap report of the weighted T
    double sigma_next = 0.0;
    double cond = 0.0;         // solve condition of (s-1) Q2 + Q1, see below
    NDProvenance provenance = NDProvenance::Series;
};

// Rational formula alone, from an interior response matrix and a kernel
// basis (columns).  The result does not depend on the choice of basis within
// the kernel: any invertible recombination of the columns cancels.  cond_out
// (optional) receives the solve condition of (s-1) Q2 + Q1, measured as
// (|s-1| |Q2| + |Q1|) / sigma_min so that an exact cancellation is flagged
// even when p = 1; values beyond max_cond throw std::runtime_error.
Eigen::MatrixXcd scattering_from_kernel(const NDMatrix& ndm,
                                        const Eigen::MatrixXcd& kernel, cplx s,
                                        double max_cond = 1e12,
                                        double* cond_out = nullptr);

// Full evaluation at one spectral parameter: interior response, cusp
// response, kernel extraction, and the rational formula
//   C(s) = A^{s-1} (s Q2 - Q1) ((s-1) Q2 + Q1)^{-1} A^{s},
// with Q1 = [av v_i], Q2 = [av N^M v_i] over the kernel basis and
// A = diag(a_k).  Throws std::invalid_argument at s = 1/2 or for a basis
// with no mean mode (odd reduction), std::domain_error near interior
// eigenvalues, and std::runtime_error when the kernel gap collapses or the
// denominator is numerically singular.
ScatteringResult scattering_matrix(const NeumannSpectralData& data,
                                   const std::vector<AnchorSolve>& anchors, cplx s,
                                   const ScatteringOptions& opt = ScatteringOptions());

// One-cusp shortcut: the pencil (N^M + N^c, av) has exactly one finite
// generalized eigenvalue G(s) generically, and
//   C(s) = a^{2s-1} (s G - 1) / ((s-1) G + 1).
// When the pencil degenerates (the candidate kernel vector has no mean
// component) the exceptional branch C(s) = a^{2s-1} s/(s-1) is returned with
// the flag set.
struct OneCuspResult {
    cplx value;
    cplx G{0.0, 0.0};
    bool exceptional = false;
};
OneCuspResult one_cusp_scattering(const NeumannSpectralData& data,
                                  const std::vector<AnchorSolve>& anchors, cplx s);

// A-priori error bound for the computed scattering matrix in terms of the
// kernel residual delta1 = ||T' v||, the interior-response accuracy delta2,
// the spectral gap K1 of |T'|, K2 = ||((s-1)Q2 + Q1)^{-1}||, K3 =
// ||s Q2 - Q1||, and the norms of N^M(s), A^s, A^{s-1}:
//   eps1 = sqrt(p)/K1 delta1 + |s-1| sqrt(p) (delta2 + ||N^M||/K1 delta1)
//   eps2 = sqrt(p)/K1 delta1 + |s|   sqrt(p) (delta2 + ||N^M||/K1 delta1)
//   bound = ||A^{s-1}|| ||A^s|| (eps1 K2^2 (K3 + eps2)/(1 - eps1 K2) + eps2 K2)
// Returns +infinity when eps1 K2 >= 1 (bound unavailable).
double scattering_error_bound(double delta1, double delta2, double K1, double K2,
                              double K3, double norm_nm, double norm_as,
                              double norm_as1, cplx s, int p);

}  // namespace hsurf
