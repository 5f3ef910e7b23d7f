#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace oracles {

cplx gamma_quadrature(cplx s) {
    if (s.real() <= 0.0) throw std::invalid_argument("gamma_quadrature: need Re s > 0");
    // integrand g(u) = exp(s*u - e^u); truncate where |g| < 1e-20 * peak
    const double h = 0.002;
    const double ulo = (std::log(1e-22) / s.real()) - 1.0; // left tail e^{Re(s) u}
    double uhi = 1.0;
    while (std::exp(uhi) - s.real() * uhi < 55.0) uhi += 0.5; // right tail e^u dominates
    cplx acc = 0.0;
    const long nsteps = (long)std::ceil((uhi - ulo) / h);
    for (long i = 0; i <= nsteps; ++i) {
        double u = ulo + i * (uhi - ulo) / nsteps;
        cplx g = std::exp(s * u - std::exp(u));
        acc += (i == 0 || i == nsteps) ? 0.5 * g : g;
    }
    return acc * ((uhi - ulo) / nsteps);
}

namespace {
// Shooting for -y^2 f'' + 4 pi^2 m^2 y^2 f = lambda f, f'(a) = 0; returns f'(b)
// scaled; zero crossings in lambda are the Neumann eigenvalues.  Classic RK4.
double shoot(double a, double b, int m, double lambda, int nsteps) {
    double y = a, f = 1.0, g = 0.0; // g = f'
    const double h = (b - a) / nsteps;
    auto rhs = [&](double yy, double ff) {
        double w = 4.0 * M_PI * M_PI * m * m - lambda / (yy * yy);
        return w * ff;
    };
    for (int i = 0; i < nsteps; ++i) {
        double k1f = g, k1g = rhs(y, f);
        double k2f = g + 0.5 * h * k1g, k2g = rhs(y + 0.5 * h, f + 0.5 * h * k1f);
        double k3f = g + 0.5 * h * k2g, k3g = rhs(y + 0.5 * h, f + 0.5 * h * k2f);
        double k4f = g + h * k3g, k4g = rhs(y + h, f + h * k3f);
        f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
        g += h / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
        y += h;
        // renormalize to dodge overflow in evanescent regimes
        double sc = std::max(std::abs(f), std::abs(g));
        if (sc > 1e100) { f /= sc; g /= sc; }
    }
    return g;
}
} // namespace

std::vector<double> strip_mode_eigenvalues(double a, double b, int m, int n) {
    std::vector<double> out;
    const int nsteps = 4000;
    double lo = (m == 0) ? -0.5 : 0.0;
    double prev = shoot(a, b, m, lo, nsteps);
    double step = 0.25;
    for (double lam = lo + step; (int)out.size() < n && lam < 1e7; lam += step) {
        double cur = shoot(a, b, m, lam, nsteps);
        if (prev == 0.0 || (prev < 0) != (cur < 0)) {
            double x0 = lam - step, x1 = lam, f0 = prev;
            for (int it = 0; it < 200; ++it) {
                double xm = 0.5 * (x0 + x1);
                double fm = shoot(a, b, m, xm, nsteps);
                if ((f0 < 0) == (fm < 0)) { x0 = xm; f0 = fm; } else { x1 = xm; }
            }
            out.push_back(0.5 * (x0 + x1));
        }
        prev = cur;
    }
    return out;
}

const double hilbert4_inverse[4][4] = {
    {   16.0,  -120.0,   240.0,  -140.0},
    { -120.0,  1200.0, -2700.0,  1680.0},
    {  240.0, -2700.0,  6480.0, -4200.0},
    { -140.0,  1680.0, -4200.0,  2800.0},
};

std::vector<double> generalized_eigs_jacobi(const std::vector<double>& K,
                                            const std::vector<double>& M, int n) {
    if ((int)K.size() != n * n || (int)M.size() != n * n)
        throw std::invalid_argument("generalized_eigs_jacobi: bad dimensions");
    // Cholesky M = L L^T (lower).
    std::vector<double> L(M);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < j; ++k) L[j * n + j] -= L[j * n + k] * L[j * n + k];
        if (L[j * n + j] <= 0.0)
            throw std::invalid_argument("generalized_eigs_jacobi: M not positive definite");
        L[j * n + j] = std::sqrt(L[j * n + j]);
        for (int i = j + 1; i < n; ++i) {
            for (int k = 0; k < j; ++k) L[i * n + j] -= L[i * n + k] * L[j * n + k];
            L[i * n + j] /= L[j * n + j];
        }
        for (int i = 0; i < j; ++i) L[i * n + j] = 0.0;
    }
    // B = L^{-1} K: forward-substitute each column of K.
    std::vector<double> B(K);
    for (int c = 0; c < n; ++c) {
        for (int i = 0; i < n; ++i) {
            double s = B[i * n + c];
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * B[k * n + c];
            B[i * n + c] = s / L[i * n + i];
        }
    }
    // A = B L^{-T}: forward-substitute each column of B^T, i.e. each row of B.
    std::vector<double> A(n * n);
    for (int r = 0; r < n; ++r) {
        for (int i = 0; i < n; ++i) {
            double s = B[r * n + i];
            for (int k = 0; k < i; ++k) s -= L[i * n + k] * A[r * n + k];
            A[r * n + i] = s / L[i * n + i];
        }
    }
    // Cyclic Jacobi sweeps on the symmetric A.
    double normA = 0.0;
    for (double v : A) normA += v * v;
    normA = std::sqrt(normA);
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += A[p * n + q] * A[p * n + q];
        if (std::sqrt(2.0 * off) < 1e-13 * normA) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = A[p * n + q];
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (A[q * n + q] - A[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = A[k * n + p], akq = A[k * n + q];
                    A[k * n + p] = c * akp - s * akq;
                    A[k * n + q] = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = A[p * n + k], aqk = A[q * n + k];
                    A[p * n + k] = c * apk - s * aqk;
                    A[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = A[i * n + i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

namespace {

using cld = std::complex<long double>;

// One trapezoid pass over [0, U] with n intervals, Kahan-compensated.
// g0 = exp(-x cosh u) cos(t u), g1 = g0 * cosh u.  Also reports the gross
// (absolute) sum so the caller can detect the rounding floor.
void bessel_trap_pass(cld t, long double x, long double U, int n,
                      cld& I0, cld& I1, long double& gross) {
    const long double h = U / n;
    auto eval = [&](long double u, cld& g0, cld& g1) {
        const long double c = coshl(u);
        const long double e = expl(-x * c);
        const cld ct = std::cos(t * u);
        g0 = e * ct;
        g1 = e * c * ct;
    };
    cld a0, a1, b0, b1;
    eval(0.0L, a0, a1);
    eval(U, b0, b1);
    cld s0 = (a0 + b0) / 2.0L, c0(0), s1 = (a1 + b1) / 2.0L, c1(0);
    long double g = std::abs(s0) + std::abs(s1);
    for (int i = 1; i < n; ++i) {
        cld g0, g1;
        eval(i * h, g0, g1);
        cld y0 = g0 - c0, u0 = s0 + y0;
        c0 = (u0 - s0) - y0;
        s0 = u0;
        cld y1 = g1 - c1, u1 = s1 + y1;
        c1 = (u1 - s1) - y1;
        s1 = u1;
        g += std::abs(g0) + std::abs(g1);
    }
    I0 = s0 * h;
    I1 = s1 * h;
    gross = g * h;
}

} // namespace

cplx bessel_ratio_quadrature(cplx t, double x) {
    if (!(x > 0)) throw std::invalid_argument("bessel_ratio_quadrature: x must be positive");
    const cld tl((long double)t.real(), (long double)t.imag());
    const long double xl = x;
    // Truncation point: exp(-x cosh U) must beat both the target accuracy and
    // any growth of cos(t u) ~ exp(|Im t| u).
    const long double g = std::abs(t.imag());
    long double U = acoshl(std::max(120.0L / xl, 2.0L));
    U = acoshl(std::max((120.0L + g * U + 10.0L) / xl, 2.0L));
    cld K0, K1;
    long double gross = 0;
    int n = 64;
    bessel_trap_pass(tl, xl, U, n, K0, K1, gross);
    for (int pass = 0; pass < 12; ++pass) {
        n *= 2;
        cld K0n, K1n;
        bessel_trap_pass(tl, xl, U, n, K0n, K1n, gross);
        const long double d0 = std::abs(K0n - K0), d1 = std::abs(K1n - K1);
        K0 = K0n;
        K1 = K1n;
        // Converged when the change is below the relative target or below the
        // long-double rounding floor of the gross accumulation.
        const long double floor0 = 1e-17L * std::abs(K0n) + 4e-19L * gross;
        const long double floor1 = 1e-17L * std::abs(K1n) + 4e-19L * gross;
        if (d0 <= floor0 && d1 <= floor1) break;
    }
    const cld f = 0.5L - xl * K1 / K0; // K' = -I1
    return cplx((double)f.real(), (double)f.imag());
}

} // namespace oracles
