#include <hsurf/specialfn.hpp>

#include <cmath>
#include <stdexcept>

namespace hsurf {

namespace {

constexpr double kPi = 3.141592653589793238462643383279502884;

// Lanczos coefficients, g = 7, 9 terms.
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7,
};

cplx gamma_core(cplx z) {
    // caller guarantees Re z >= 0.5
    z -= 1.0;
    cplx x = kLanczos[0];
    for (int i = 1; i < 9; ++i) x += kLanczos[i] / (z + (double)i);
    cplx t = z + 7.5;
    return std::sqrt(2.0 * kPi) * std::exp((z + 0.5) * std::log(t) - t) * x;
}

// Bernoulli numbers B_2 .. B_28.
constexpr double kBernoulli[14] = {
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
};

cplx zeta_euler_maclaurin(cplx s) {
    // caller guarantees Re s >= 0 and s != 1
    const int N = std::max(20, (int)std::ceil(1.2 * std::abs(s.imag()) + 10.0));
    cplx acc = 0.0;
    for (int n = 1; n < N; ++n) acc += std::exp(-s * std::log((double)n));
    const double logN = std::log((double)N);
    acc += std::exp((1.0 - s) * logN) / (s - 1.0);
    acc += 0.5 * std::exp(-s * logN);
    // correction terms: B_{2k}/(2k)! * s(s+1)...(s+2k-2) * N^{1-s-2k}
    cplx poch = s;          // rising product with 2k-1 factors
    double fact = 2.0;      // (2k)!
    cplx npow = std::exp((-s - 1.0) * logN);
    const double n2 = 1.0 / ((double)N * (double)N);
    for (int k = 1; k <= 14; ++k) {
        acc += kBernoulli[k - 1] / fact * poch * npow;
        if (k < 14) {
            poch *= (s + (double)(2 * k - 1)) * (s + (double)(2 * k));
            fact *= (double)(2 * k + 1) * (double)(2 * k + 2);
            npow *= n2;
        }
    }
    return acc;
}

// (1 + p^{1-s}) / (1 + p^s)
cplx prime_factor(double p, cplx s) {
    const double lp = std::log(p);
    return (1.0 + std::exp((1.0 - s) * lp)) / (1.0 + std::exp(s * lp));
}

// b^{1-2s}
cplx width_factor(double b, cplx s) { return std::exp((1.0 - 2.0 * s) * std::log(b)); }

} // namespace

cplx gamma(cplx s) {
    if (s.real() >= 0.5) return gamma_core(s);
    // reflection: Gamma(s) Gamma(1-s) = pi / sin(pi s)
    return kPi / (std::sin(kPi * s) * gamma_core(1.0 - s));
}

cplx zeta(cplx s) {
    if (s == cplx(1.0, 0.0)) throw std::domain_error("zeta: pole at s = 1");
    if (s.real() >= 0.0) return zeta_euler_maclaurin(s);
    // reflection: zeta(s) = 2^s pi^{s-1} sin(pi s / 2) Gamma(1-s) zeta(1-s)
    cplx one_minus = 1.0 - s;
    return std::exp(s * std::log(2.0)) * std::exp((s - 1.0) * std::log(kPi)) *
           std::sin(kPi * s / 2.0) * gamma(one_minus) * zeta_euler_maclaurin(one_minus);
}

cplx completed_zeta(cplx s) {
    return std::exp(-s / 2.0 * std::log(kPi)) * gamma(s / 2.0) * zeta(s);
}

cplx known_scattering(KnownSurface k, cplx s) {
    const cplx ratio = completed_zeta(2.0 * s - 1.0) / completed_zeta(2.0 * s);
    switch (k) {
        case KnownSurface::Modular:
        case KnownSurface::HeckeQ3:
            return ratio;
        case KnownSurface::HeckeQ4:
            return prime_factor(2.0, s) * ratio;
        case KnownSurface::HeckeQ6:
            return prime_factor(3.0, s) * ratio;
        case KnownSurface::TorusAcosh2:
            return width_factor(2.0, s) * prime_factor(2.0, s) * prime_factor(3.0, s) * ratio;
        case KnownSurface::TorusAcosh3:
            return width_factor(4.0, s) * prime_factor(2.0, s) * ratio;
        case KnownSurface::TorusAcosh9:
            return width_factor(2.0, s) * prime_factor(5.0, s) * ratio;
        case KnownSurface::TorusHalfTwist:
            return width_factor(6.0, s) * ratio;
    }
    throw std::invalid_argument("known_scattering: unknown surface");
}

Eigen::Matrix3cd known_scattering_threecusp(cplx s) {
    const cplx ratio = completed_zeta(2.0 * s - 1.0) / completed_zeta(2.0 * s);
    const cplx two2s = std::exp(2.0 * s * std::log(2.0));       // 2^{2s}
    const cplx d = 2.0 / two2s;                                 // 2^{1-2s}
    const cplx c = ratio / (two2s - 1.0);
    Eigen::Matrix3cd M;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) M(i, j) = c * (i == j ? d : 1.0 - d);
    return M;
}

Eigen::Matrix2cd eisenstein_mq(int q, cplx s) {
    if (q < 2) throw std::invalid_argument("eisenstein_mq: q must be a prime >= 2");
    const double qd = static_cast<double>(q);
    const cplx qs = std::exp(s * std::log(qd));          // q^s
    const cplx q1s = qd / qs;                            // q^{1-s}
    const cplx denom = qs * qs - 1.0;                    // q^{2s}-1
    Eigen::Matrix2cd M;
    M(0, 0) = M(1, 1) = (qd - 1.0) / denom;
    M(0, 1) = M(1, 0) = (qs - q1s) / denom;
    return M;
}

const std::array<double, 30>& zeta_zero_ordinates() {
    static const std::array<double, 30> z = {
        14.13472514173469,  21.02203963877155, 25.01085758014569, 30.42487612585951,
        32.93506158773919,  37.58617815882567, 40.9187190121475,  43.327073280915,
        48.00515088116716,  49.7738324776723,  52.97032147771446, 56.44624769706339,
        59.34704400260235,  60.83177852460981, 65.11254404808161, 67.07981052949417,
        69.54640171117398,  72.06715767448191, 75.70469069908393, 77.14484006887481,
        79.33737502024937,  82.91038085408603, 84.73549298051705, 87.42527461312523,
        88.80911120763447,  92.49189927055848, 94.65134404051989, 95.87063422824531,
        98.83119421819369,  101.3178510057314,
    };
    return z;
}

} // namespace hsurf
