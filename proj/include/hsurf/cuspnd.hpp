#pragma once
// Analytic Neumann-to-Dirichlet data on cusp ends.
//
// On a cusp cylinder (R/Z) x [a, inf) with the hyperbolic metric, each
// transverse Fourier mode e^{2 pi i m x} of a decaying harmonic function is a
// multiple of sqrt(y) K_{it}(2 pi |m| y), where the spectral parameter is
// s = 1/2 + i t.  The Neumann-to-Dirichlet map at the cut y = a is therefore
// diagonal in the Fourier basis, with entries given by a logarithmic
// derivative of the modified Bessel function K at x = 2 pi |m| a.  Only the
// combination f(t, x) = 1/2 + x K'_{it}(x) / K_{it}(x) is ever needed, and it
// is evaluated directly by a continued fraction, with an integral-based
// fallback where the fraction stalls.

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hsurf/geometry.hpp"

namespace hsurf {

// Thrown when the continued fraction fails to settle within its iteration
// budget; carries the value accumulated so far.
struct BesselCFError : std::runtime_error {
    std::complex<double> partial;
    int iterations;
    BesselCFError(std::complex<double> partial_value, int iterations_used);
};

// f(t, x) = 1/2 + x K'_{it}(x) / K_{it}(x) by the continued fraction
//
//   f = -x - K_{n=1}^inf ( a_n / b_n ),   a_n = -t^2 - (2n-1)^2 / 4,
//                                         b_n = 2x + 2n,
//
// evaluated with the modified Lentz algorithm (tiny-value substitution 1e-30),
// terminating when the multiplicative update differs from 1 by less than tol.
// Throws BesselCFError if that does not happen within max_iter terms, and
// std::invalid_argument if x <= 0.
std::complex<double> bessel_ratio_cf(std::complex<double> t, double x,
                                     double tol = 1e-14, int max_iter = 10000);

// The same quantity from the integral representation
// K_{it}(x) = \int_0^inf exp(-x cosh u) cos(t u) du and its x-derivative,
// by a doubling trapezoid rule accumulated in long double (the integrand is
// even at u = 0 and flat at the truncation point, so the trapezoid rule
// converges superalgebraically).  Slower than the continued fraction but
// unconditionally stable; used as its fallback.
std::complex<double> bessel_ratio_integral(std::complex<double> t, double x);

// Robust evaluator: continued fraction first, integral fallback if the
// fraction fails to converge.
std::complex<double> bessel_ratio(std::complex<double> t, double x,
                                  double tol = 1e-14, int max_iter = 10000);

// Diagonal entry of the cusp Neumann-to-Dirichlet matrix for transverse mode
// m at cut height a, at spectral parameter s = 1/2 + i t:
//
//   d = 0                         for m = 0,
//   d = -1 / f(t, 2 pi |m| a)     for m != 0.
//
// Depends on m only through |m|.
std::complex<double> cusp_mode_coefficient(std::complex<double> s, double a, int m);

// Cusp Neumann-to-Dirichlet matrix: diagonal over modes m in [-J, J] for each
// of p cusps, stored cusp-major with m ascending.
struct CuspNDMatrix {
    std::complex<double> s;
    std::vector<double> a;  // cut heights, one per cusp
    int J = 0;

    // diag[k * (2J+1) + (m + J)] = entry for mode m at cusp k (0-based).
    std::vector<std::complex<double>> diag;

    int num_cusps() const { return static_cast<int>(a.size()); }
    int dim() const { return static_cast<int>(diag.size()); }
    std::complex<double> entry(int k, int m) const;
    // Dense square matrix with `diag` on the diagonal.
    Eigen::MatrixXcd dense() const;
};

// Assemble the cusp ND matrix at spectral parameter s for the given cut
// heights, modes |m| <= J.  Continued-fraction failures fall back to the
// integral route automatically.
CuspNDMatrix cusp_nd(std::complex<double> s, const std::vector<double>& heights, int J);
CuspNDMatrix cusp_nd(std::complex<double> s, const std::vector<CuspSpec>& cusps, int J);

// 0/1 diagonal projection onto the m = 0 mode of each of the p cusps, in the
// same cusp-major ordering; a (2J+1)p square matrix.
Eigen::MatrixXcd averaging_matrix(int J, int p);

}  // namespace hsurf
