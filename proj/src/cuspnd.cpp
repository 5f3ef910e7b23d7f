#include "hsurf/cuspnd.hpp"

#include <algorithm>
#include <cmath>

namespace hsurf {

BesselCFError::BesselCFError(std::complex<double> partial_value, int iterations_used)
    : std::runtime_error("Bessel-K ratio continued fraction did not converge after " +
                         std::to_string(iterations_used) + " terms"),
      partial(partial_value),
      iterations(iterations_used) {}

std::complex<double> bessel_ratio_cf(std::complex<double> t, double x, double tol, int max_iter) {
    if (!(x > 0)) throw std::invalid_argument("bessel_ratio_cf: x must be positive");
    constexpr double tiny = 1e-30;
    const std::complex<double> t2 = t * t;
    std::complex<double> f(tiny, 0.0), C(tiny, 0.0), D(0.0, 0.0);
    for (int n = 1; n <= max_iter; ++n) {
        const double half_odd = n - 0.5;                       // (2n-1)/2
        const std::complex<double> an = -t2 - half_odd * half_odd;
        const double bn = 2.0 * x + 2.0 * n;
        D = bn + an * D;
        if (std::abs(D) < tiny) D = tiny;
        C = bn + an / C;
        if (std::abs(C) < tiny) C = tiny;
        D = 1.0 / D;
        const std::complex<double> delta = C * D;
        f *= delta;
        if (std::abs(delta - 1.0) < tol) return -x - f;
    }
    throw BesselCFError(-x - f, max_iter);
}

namespace {

using cld = std::complex<long double>;

// Composite 16-point Gauss-Legendre integration of
//   g0 = exp(-x cosh u) cos(t u)  and  g1 = g0 cosh u
// over [0, U], Kahan-compensated in long double.
void bessel_integrals_gl(cld t, long double x, long double U, long double panel,
                         cld& I0, cld& I1) {
    // 16-point Gauss-Legendre nodes/weights on [-1, 1], generated by Newton
    // iteration on the Legendre polynomial from Chebyshev initial guesses.
    static long double node[8], weight[8];
    static bool init = false;
    if (!init) {
        const int n = 16;
        for (int i = 0; i < 8; ++i) {
            long double z = cosl(3.14159265358979323846L * (i + 0.75L) / (n + 0.5L));
            for (int it = 0; it < 100; ++it) {
                long double p0 = 1.0L, p1 = 0.0L;
                for (int j = 0; j < n; ++j) {
                    long double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0L * j + 1.0L) * z * p1 - j * p2) / (j + 1.0L);
                }
                const long double dp = n * (z * p0 - p1) / (z * z - 1.0L);
                const long double dz = p0 / dp;
                z -= dz;
                if (fabsl(dz) < 1e-19L) break;
            }
            long double p0 = 1.0L, p1 = 0.0L;
            for (int j = 0; j < n; ++j) {
                long double p2 = p1;
                p1 = p0;
                p0 = ((2.0L * j + 1.0L) * z * p1 - j * p2) / (j + 1.0L);
            }
            const long double dp = n * (z * p0 - p1) / (z * z - 1.0L);
            node[i] = z;
            weight[i] = 2.0L / ((1.0L - z * z) * dp * dp);
        }
        init = true;
    }

    const int npanels = std::max(1, (int)ceill(U / panel));
    const long double h = U / npanels;
    cld s0(0), c0(0), s1(0), c1(0);
    auto add = [](cld& s, cld& c, cld v) {
        const cld y = v - c;
        const cld u = s + y;
        c = (u - s) - y;
        s = u;
    };
    for (int p = 0; p < npanels; ++p) {
        const long double mid = (p + 0.5L) * h;
        for (int i = 0; i < 8; ++i) {
            for (int sign = -1; sign <= 1; sign += 2) {
                const long double u = mid + sign * 0.5L * h * node[i];
                const long double ch = coshl(u);
                const long double e = expl(-x * ch);
                const cld ct = std::cos(t * u);
                const long double w = 0.5L * h * weight[i];
                add(s0, c0, w * e * ct);
                add(s1, c1, w * e * ch * ct);
            }
        }
    }
    I0 = s0;
    I1 = s1;
}

}  // namespace

std::complex<double> bessel_ratio_integral(std::complex<double> t, double x) {
    if (!(x > 0)) throw std::invalid_argument("bessel_ratio_integral: x must be positive");
    const cld tl((long double)t.real(), (long double)t.imag());
    const long double xl = x;
    // Truncate where exp(-x cosh U) beats the target even against the growth
    // of cos(t u) ~ exp(|Im t| u).
    const long double g = std::abs(t.imag());
    long double U = acoshl(std::max(120.0L / xl, 2.0L));
    U = acoshl(std::max((120.0L + g * U + 10.0L) / xl, 2.0L));
    // Panels short enough that 16-point Gauss-Legendre resolves the
    // oscillation cos(t u) to full precision.
    const long double panel =
        std::min(0.5L, 6.283185307179586477L / (4.0L * (std::abs(t) + 1.0L)));
    cld I0, I1;
    bessel_integrals_gl(tl, xl, U, panel, I0, I1);
    const cld f = 0.5L - xl * I1 / I0;  // K' = -I1, K = I0
    return {(double)f.real(), (double)f.imag()};
}

std::complex<double> bessel_ratio(std::complex<double> t, double x, double tol, int max_iter) {
    try {
        return bessel_ratio_cf(t, x, tol, max_iter);
    } catch (const BesselCFError&) {
        return bessel_ratio_integral(t, x);
    }
}

std::complex<double> cusp_mode_coefficient(std::complex<double> s, double a, int m) {
    if (m == 0) return {0.0, 0.0};
    if (!(a > 0)) throw std::invalid_argument("cusp_mode_coefficient: cut height must be positive");
    const std::complex<double> t = std::complex<double>(0.0, -1.0) * (s - 0.5);
    const double x = 2.0 * 3.141592653589793238462643383279502884 * std::abs(m) * a;
    return -1.0 / bessel_ratio(t, x);
}

std::complex<double> CuspNDMatrix::entry(int k, int m) const {
    if (k < 0 || k >= num_cusps() || m < -J || m > J)
        throw std::out_of_range("CuspNDMatrix::entry: index out of range");
    return diag[static_cast<size_t>(k) * (2 * J + 1) + (m + J)];
}

Eigen::MatrixXcd CuspNDMatrix::dense() const {
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim(), dim());
    for (int i = 0; i < dim(); ++i) M(i, i) = diag[i];
    return M;
}

CuspNDMatrix cusp_nd(std::complex<double> s, const std::vector<double>& heights, int J) {
    if (J < 0) throw std::invalid_argument("cusp_nd: J must be nonnegative");
    if (heights.empty()) throw std::invalid_argument("cusp_nd: need at least one cusp");
    CuspNDMatrix out;
    out.s = s;
    out.a = heights;
    out.J = J;
    out.diag.resize(heights.size() * (2 * J + 1));
    for (size_t k = 0; k < heights.size(); ++k) {
        // d depends on |m| only: evaluate once per |m| and mirror.
        for (int m = 0; m <= J; ++m) {
            const std::complex<double> d = cusp_mode_coefficient(s, heights[k], m);
            out.diag[k * (2 * J + 1) + (J + m)] = d;
            out.diag[k * (2 * J + 1) + (J - m)] = d;
        }
    }
    return out;
}

CuspNDMatrix cusp_nd(std::complex<double> s, const std::vector<CuspSpec>& cusps, int J) {
    std::vector<double> heights;
    heights.reserve(cusps.size());
    for (const auto& c : cusps) heights.push_back(c.a);
    return cusp_nd(s, heights, J);
}

Eigen::MatrixXcd averaging_matrix(int J, int p) {
    if (J < 0 || p <= 0) throw std::invalid_argument("averaging_matrix: need J >= 0, p >= 1");
    const int n = (2 * J + 1) * p;
    Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n, n);
    for (int k = 0; k < p; ++k) {
        const int i = k * (2 * J + 1) + J;  // m = 0 slot of cusp k
        A(i, i) = 1.0;
    }
    return A;
}

}  // namespace hsurf
