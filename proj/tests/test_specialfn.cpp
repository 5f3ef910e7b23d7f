#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <hsurf/specialfn.hpp>

#include "oracles.hpp"

#include <cmath>
#include <complex>

using hsurf::cplx;

namespace {
double relerr(cplx got, cplx want) {
    double scale = std::max(std::abs(want), 1e-300);
    return std::abs(got - want) / scale;
}
} // namespace

// Reference values in this file were generated offline with an independent
// arbitrary-precision library and frozen here as literals.

TEST_CASE("log-gamma / gamma against frozen references") {
    CHECK(relerr(hsurf::gamma(cplx(4.0, 0.0)), cplx(6.0, 0.0)) < 1e-13);
    CHECK(relerr(hsurf::gamma(cplx(0.5, 3.0)),
                 cplx(0.0214456705524306461, 0.00686536483726167791)) < 1e-12);
    CHECK(relerr(hsurf::gamma(cplx(2.0, 6.0)),
                 cplx(0.00240933172758773941, 0.00181082034046226317)) < 1e-12);
    // reflection region (Re < 0.5)
    CHECK(relerr(hsurf::gamma(cplx(-1.5, 0.5)),
                 cplx(0.937916662787885051, 0.349205668147804869)) < 1e-12);
    CHECK(relerr(hsurf::gamma(cplx(-0.5, -20.0)),
                 cplx(2.31287943107656735e-15, -1.65757009379582669e-15)) < 1e-11);
    // tall on the strip: |Im| = 60 where magnitudes are ~1e-41
    CHECK(relerr(hsurf::gamma(cplx(0.25, 60.0)),
                 cplx(-1.05114163913667587e-41, 9.04292931691278418e-43)) < 1e-11);
}

TEST_CASE("gamma cross-checked by direct quadrature oracle") {
    cplx s(0.5, 3.0);
    cplx byquad = oracles::gamma_quadrature(s);
    CHECK(relerr(hsurf::gamma(s), byquad) < 1e-9);
    cplx s2(2.0, 6.0);
    CHECK(relerr(hsurf::gamma(s2), oracles::gamma_quadrature(s2)) < 1e-9);
}

TEST_CASE("zeta against frozen references") {
    CHECK(relerr(hsurf::zeta(cplx(2.0, 0.0)), cplx(1.64493406684822644, 0.0)) < 1e-12);
    CHECK(relerr(hsurf::zeta(cplx(3.0, -4.0)),
                 cplx(0.890554906965073258, 0.00807594542432725985)) < 1e-12);
    CHECK(relerr(hsurf::zeta(cplx(0.5, 30.0)),
                 cplx(-0.1206422875900437, -0.583691214763706289)) < 1e-11);
    CHECK(relerr(hsurf::zeta(cplx(1.0, 60.0)),
                 cplx(0.493688387495978149, 0.109854692109941727)) < 1e-11);
    // close to the pole line and at the awkward ordinate pi/log2 * 2
    CHECK(relerr(hsurf::zeta(cplx(0.99, 9.0647)),
                 cplx(1.34855991092884882, 0.110936847042738124)) < 1e-11);
    // reflection region
    CHECK(relerr(hsurf::zeta(cplx(-2.5, 10.0)),
                 cplx(4.26359028888919448, 1.45981661991756281)) < 1e-11);
    CHECK(relerr(hsurf::zeta(cplx(-4.2, -33.0)),
                 cplx(-530.736629611951878, 2367.30759231688032)) < 1e-10);
}

TEST_CASE("zeta is tiny at the first nontrivial zero") {
    cplx z = hsurf::zeta(cplx(0.5, 14.134725));
    // frozen reference: (1.767e-8, -1.110e-7); only magnitude matters here
    CHECK(std::abs(z - cplx(1.76742984138490391e-8, -1.11020289309231167e-7)) < 1e-12);
}

TEST_CASE("completed zeta: values and reflection symmetry") {
    CHECK(relerr(hsurf::completed_zeta(cplx(3.0, 0.0)),
                 cplx(0.191313298015585171, 0.0)) < 1e-12);
    CHECK(std::abs(hsurf::completed_zeta(cplx(0.5, 20.0)) -
                  cplx(1.83162662114225893e-7, 0.0)) < 1e-15);
    CHECK(relerr(hsurf::completed_zeta(cplx(2.0, 2.0)),
                 cplx(-0.0274524483354350176, -0.14855232170248907)) < 1e-11);

    // Lambda(s) == Lambda(1-s) on a spread of points
    const cplx pts[] = {{0.3, 4.0}, {0.7, -2.5}, {1.4, 9.0}, {0.5, 17.0}, {2.2, 0.3}};
    for (cplx s : pts) {
        cplx a = hsurf::completed_zeta(s);
        cplx b = hsurf::completed_zeta(1.0 - s);
        CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
    }
}

TEST_CASE("one-cusp closed forms against frozen references") {
    using hsurf::KnownSurface;
    CHECK(relerr(hsurf::known_scattering(KnownSurface::Modular, cplx(0.5, 2.0)),
                 cplx(0.777709870863430801, -0.628623382289893657)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::Modular, cplx(2.0, 0.0)),
                 cplx(1.74456808213125595, 0.0)) < 1e-12);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::Modular, cplx(0.3, 5.0)),
                 cplx(0.730643572221379545, -0.732510961991007615)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::Modular, cplx(0.5, 9.0647)),
                 cplx(0.656137469006312683, -0.754641386200087799)) < 1e-11);

    CHECK(relerr(hsurf::known_scattering(KnownSurface::HeckeQ4, cplx(0.5, 2.0)),
                 cplx(-0.702144071259482742, -0.712034903073689541)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::HeckeQ4, cplx(0.75, -4.5324)),
                 cplx(0.202567568395174244, 0.177510725991015885)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::HeckeQ6, cplx(0.5, 5.0988)),
                 cplx(0.997946642128523872, 0.0640507569385695425)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::HeckeQ6, cplx(1.5, 0.3)),
                 cplx(0.436096308180052675, -0.420703356533558921)) < 1e-11);

    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusAcosh2, cplx(0.5, 3.0)),
                 cplx(-0.29041513754692192, -0.956900751323564602)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusAcosh2, cplx(0.8, 1.0)),
                 cplx(-0.0531419269008100183, 0.398898589543382256)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusHalfTwist, cplx(0.5, 3.0)),
                 cplx(0.371943751081643157, 0.928255269864554378)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusHalfTwist, cplx(0.8, 1.0)),
                 cplx(-0.0679868788068888255, 0.411043286202360691)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusAcosh3, cplx(0.5, 3.0)),
                 cplx(0.561463338989002914, 0.827501612669921025)) < 1e-11);
    CHECK(relerr(hsurf::known_scattering(KnownSurface::TorusAcosh9, cplx(0.5, 3.0)),
                 cplx(-0.892895504996139493, -0.450263941658322262)) < 1e-11);
}

TEST_CASE("three-cusp closed-form matrix against frozen references") {
    auto M = hsurf::known_scattering_threecusp(cplx(0.5, 3.0));
    REQUIRE(M.rows() == 3);
    REQUIRE(M.cols() == 3);
    cplx diag(-0.25986135751643112, -0.270672816220099505);
    cplx off(0.166205632518091475, 0.634018799747972802);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            CHECK(relerr(M(i, j), i == j ? diag : off) < 1e-11);
}

TEST_CASE("closed forms satisfy C(s) C(1-s) = 1 on the line and off it") {
    using hsurf::KnownSurface;
    const KnownSurface all[] = {KnownSurface::Modular,      KnownSurface::HeckeQ3,
                                KnownSurface::HeckeQ4,      KnownSurface::HeckeQ6,
                                KnownSurface::TorusAcosh2, KnownSurface::TorusAcosh3,
                                KnownSurface::TorusAcosh9, KnownSurface::TorusHalfTwist};
    for (auto ks : all) {
        for (int i = 1; i <= 50; ++i) {
            cplx s(0.5 + 0.003 * i, 0.17 * i + 0.11);
            cplx prod = hsurf::known_scattering(ks, s) * hsurf::known_scattering(ks, 1.0 - s);
            CHECK(std::abs(prod - 1.0) < 1e-9);
        }
    }
    // matrix version: C(s) C(1-s) = I
    for (int i = 1; i <= 10; ++i) {
        cplx s(0.5 + 0.01 * i, 0.9 * i + 0.05);
        auto P = (hsurf::known_scattering_threecusp(s) *
                  hsurf::known_scattering_threecusp(1.0 - s))
                     .eval();
        CHECK((P - Eigen::Matrix3cd::Identity()).norm() < 1e-9);
    }
}

TEST_CASE("closed forms are unimodular on the critical line") {
    using hsurf::KnownSurface;
    for (int i = 1; i <= 40; ++i) {
        cplx s(0.5, 0.35 * i);
        CHECK(std::abs(std::abs(hsurf::known_scattering(KnownSurface::Modular, s)) - 1.0) <
              1e-10);
        CHECK(std::abs(std::abs(hsurf::known_scattering(KnownSurface::HeckeQ4, s)) - 1.0) <
              1e-10);
    }
}

TEST_CASE("zeta zero ordinates table") {
    const auto& zz = hsurf::zeta_zero_ordinates();
    REQUIRE(zz.size() >= 30);
    CHECK(zz[0] == doctest::Approx(14.13472514173469).epsilon(1e-12));
    CHECK(zz[4] == doctest::Approx(32.93506158773919).epsilon(1e-12));
    CHECK(zz[29] == doctest::Approx(101.3178510057314).epsilon(1e-12));
    // each really is a zero of the completed function
    for (int k = 0; k < 5; ++k) {
        cplx v = hsurf::completed_zeta(cplx(0.5, zz[k]));
        CHECK(std::abs(v) < 1e-10);
    }
}

TEST_CASE("prime-block factor: exact entries, symmetry eigenvector, inverse law") {
    // q = 2, s = 2: denominator 15, diagonal 1/15, off-diagonal (4 - 1/2)/15.
    {
        Eigen::Matrix2cd M = hsurf::eisenstein_mq(2, cplx(2.0, 0.0));
        CHECK(std::abs(M(0, 0) - cplx(1.0 / 15.0)) < 1e-12);
        CHECK(std::abs(M(1, 1) - cplx(1.0 / 15.0)) < 1e-12);
        CHECK(std::abs(M(0, 1) - cplx(7.0 / 30.0)) < 1e-12);
        CHECK(std::abs(M(1, 0) - cplx(7.0 / 30.0)) < 1e-12);
    }
    const int primes[] = {2, 3, 5};
    for (int q : primes) {
        for (int i = 0; i < 12; ++i) {
            cplx s(0.1 + 0.17 * i, -1.5 + 0.45 * i);
            Eigen::Matrix2cd M = hsurf::eisenstein_mq(q, s);
            // (1,1)^T eigenvector with eigenvalue (1+q^{1-s})/(1+q^s)
            cplx qs = std::pow(cplx(q, 0.0), s);
            cplx lam = (1.0 + static_cast<double>(q) / qs) / (1.0 + qs);
            Eigen::Vector2cd ones(1.0, 1.0);
            CHECK((M * ones - lam * ones).norm() < 1e-12 * std::abs(lam));
            // M(s) M(1-s) = I
            Eigen::Matrix2cd P = M * hsurf::eisenstein_mq(q, 1.0 - s);
            CHECK((P - Eigen::Matrix2cd::Identity()).norm() < 1e-10);
        }
    }
}
