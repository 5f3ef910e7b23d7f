#pragma once
// Spectral parameter bookkeeping for the hyperbolic Laplacian: the eigenvalue
// lambda, the point s with lambda = s(1-s), and t with s = 1/2 + it are used
// interchangeably; this type pins the conversions and the half-plane choice.

#include <complex>

namespace hsurf {

using cplx = std::complex<double>;

struct SpectralPoint {
    cplx s{0.5, 0.0};

    static SpectralPoint from_s(cplx s) { return SpectralPoint{s}; }
    static SpectralPoint from_t(cplx t) { return SpectralPoint{cplx(0.5, 0.0) + cplx(0.0, 1.0) * t}; }

    // lambda = s(1-s) determines s only up to s <-> 1-s; halfplane +1 selects
    // Re s >= 1/2 (default), -1 selects Re s <= 1/2.  On the line Re s = 1/2
    // the two roots coincide up to conjugation and the +Im branch is returned.
    static SpectralPoint from_lambda(cplx lambda, int halfplane = +1);

    cplx lambda() const { return s * (cplx(1.0, 0.0) - s); }
    cplx t() const { return (s - cplx(0.5, 0.0)) / cplx(0.0, 1.0); }
    SpectralPoint reflected() const { return SpectralPoint{cplx(1.0, 0.0) - s}; }
    bool on_critical_line(double tol = 1e-12) const { return std::abs(s.real() - 0.5) <= tol; }
};

inline SpectralPoint SpectralPoint::from_lambda(cplx lambda, int halfplane) {
    // s = 1/2 +- sqrt(1/4 - lambda); principal sqrt has Re >= 0, so "+" is the
    // Re s >= 1/2 root.
    cplx r = std::sqrt(cplx(0.25, 0.0) - lambda);
    cplx s = (halfplane >= 0) ? cplx(0.5, 0.0) + r : cplx(0.5, 0.0) - r;
    if (std::abs(s.real() - 0.5) < 1e-300 && s.imag() < 0.0) s = std::conj(s);
    return SpectralPoint{s};
}

} // namespace hsurf
