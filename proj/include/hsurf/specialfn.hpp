#pragma once

#include <hsurf/spectral.hpp>

#include <Eigen/Dense>

#include <array>

namespace hsurf {

// Gamma function on the complex plane (poles at 0, -1, -2, ... excluded).
// Lanczos approximation with reflection into Re s < 1/2; ~13-14 correct digits.
cplx gamma(cplx s);

// Riemann zeta via Euler-Maclaurin summation, reflection for Re s < 0.
// At least 10 correct digits for |Im s| <= 60.
cplx zeta(cplx s);

// pi^{-s/2} Gamma(s/2) zeta(s); symmetric under s -> 1-s.
cplx completed_zeta(cplx s);

// Surfaces whose scattering coefficients have exact closed forms, used as
// references for the numerical pipeline.
//
//   Modular        quotient by PSL(2,Z)
//   HeckeQ3..Q6    even Neumann halves of Hecke triangle quotients (Q3 is the
//                  even half of the modular surface and shares its coefficient)
//   TorusAcosh2/3/9  once-punctured tori, untwisted, geodesic length acosh(2|3|9)
//   TorusHalfTwist   once-punctured torus, length 2*acosh(3/2), half twist
enum class KnownSurface {
    Modular,
    HeckeQ3,
    HeckeQ4,
    HeckeQ6,
    TorusAcosh2,
    TorusAcosh3,
    TorusAcosh9,
    TorusHalfTwist,
};

// Exact scattering coefficient of a one-cusp reference surface.
cplx known_scattering(KnownSurface k, cplx s);

// Exact 3x3 scattering matrix of the three-cusp congruence reference surface.
Eigen::Matrix3cd known_scattering_threecusp(cplx s);

// 2x2 prime-block factor of congruence scattering matrices,
//   1/(q^{2s}-1) * [ q-1        q^s-q^{1-s} ]
//                  [ q^s-q^{1-s}    q-1     ]
// (1,1)^T is an eigenvector with eigenvalue (1+q^{1-s})/(1+q^s), and
// eisenstein_mq(q, s) * eisenstein_mq(q, 1-s) = I.
Eigen::Matrix2cd eisenstein_mq(int q, cplx s);

// Ordinates of the first zeros of completed_zeta on the symmetry line
// Re s = 1/2, ascending.
const std::array<double, 30>& zeta_zero_ordinates();

} // namespace hsurf
