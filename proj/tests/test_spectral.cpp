#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hsurf/spectral.hpp>

#include <complex>

using hsurf::cplx;
using hsurf::SpectralPoint;

TEST_CASE("s <-> t <-> lambda conversions are mutually consistent") {
    auto p = SpectralPoint::from_t(cplx(6.0, 0.0));
    CHECK(std::abs(p.s - cplx(0.5, 6.0)) < 1e-15);
    CHECK(std::abs(p.lambda() - cplx(0.25 + 36.0, 0.0)) < 1e-12);
    CHECK(std::abs(p.t() - cplx(6.0, 0.0)) < 1e-15);

    auto q = SpectralPoint::from_s(cplx(0.25, 7.0674));
    CHECK(std::abs(q.lambda() - q.s * (1.0 - q.s)) < 1e-14);
    CHECK(std::abs(q.reflected().s - (1.0 - q.s)) < 1e-15);
    // lambda is invariant under s -> 1-s
    CHECK(std::abs(q.reflected().lambda() - q.lambda()) < 1e-12);
}

TEST_CASE("from_lambda picks the requested half-plane and branch") {
    // real lambda > 1/4: on the critical line, +Im branch
    auto p = SpectralPoint::from_lambda(cplx(36.25, 0.0));
    CHECK(std::abs(p.s - cplx(0.5, 6.0)) < 1e-12);
    CHECK(p.on_critical_line(1e-12));

    // real lambda < 1/4: real s, halfplane selects which root
    auto hi = SpectralPoint::from_lambda(cplx(0.1875, 0.0), +1);
    auto lo = SpectralPoint::from_lambda(cplx(0.1875, 0.0), -1);
    CHECK(std::abs(hi.s - cplx(0.75, 0.0)) < 1e-12);
    CHECK(std::abs(lo.s - cplx(0.25, 0.0)) < 1e-12);

    // generic complex lambda round-trips
    cplx lam(3.0, -2.0);
    auto g = SpectralPoint::from_lambda(lam, +1);
    CHECK(std::abs(g.lambda() - lam) < 1e-12);
    CHECK(g.s.real() >= 0.5);
    auto g2 = SpectralPoint::from_lambda(lam, -1);
    CHECK(std::abs(g2.lambda() - lam) < 1e-12);
    CHECK(g2.s.real() <= 0.5);
}

TEST_CASE("critical-line helper tolerance") {
    CHECK(SpectralPoint::from_s(cplx(0.5 + 5e-13, 3.0)).on_critical_line(1e-12));
    CHECK(!SpectralPoint::from_s(cplx(0.51, 3.0)).on_critical_line(1e-12));
}
