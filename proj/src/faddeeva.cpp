#include "wigct/faddeeva.hpp"

#include <array>
#include <cmath>
#include <mutex>

namespace wigct {

namespace {

// Weideman's rational approximation of w(z) on the closed upper half-plane.
// The polynomial coefficients are Fourier coefficients of a mapped Gaussian;
// they are computed once with a direct DFT in long double.
constexpr int kN = 64;

struct WeidemanTable {
    long double L;
    std::array<long double, kN> a; // descending powers for Horner
};

const WeidemanTable& table() {
    static WeidemanTable t;
    static std::once_flag flag;
    std::call_once(flag, [] {
        const int m = 2 * kN;
        const int m2 = 4 * kN;
        const long double pi = 3.14159265358979323846264338327950288L;
        t.L = std::sqrt(kN / std::sqrt(2.0L));

        // Samples of exp(-x^2)(L^2 + x^2) on the tangent grid, index-shifted
        // so that g[j] matches fftshift([0, f]) of the reference construction.
        std::array<long double, 4 * kN> g{};
        for (int k = -m + 1; k <= m - 1; ++k) {
            const long double theta = k * pi / m;
            const long double x = t.L * std::tan(theta / 2.0L);
            const long double f = std::exp(-x * x) * (t.L * t.L + x * x);
            const int src = k + m; // position in [0, f...] layout
            const int dst = (src + m2 / 2) % m2;
            g[dst] = f;
        }
        for (int j = 1; j <= kN; ++j) {
            long double acc = 0.0L;
            for (int i = 0; i < m2; ++i)
                acc += g[i] * std::cos(2.0L * pi * j * i / m2);
            t.a[kN - j] = acc / m2; // a[0] multiplies Z^(kN-1)
        }
    });
    return t;
}

} // namespace

std::complex<double> faddeeva_w(std::complex<double> z) {
    const WeidemanTable& t = table();
    const std::complex<long double> zl(z.real(), z.imag());
    const std::complex<long double> iz(-zl.imag(), zl.real());
    const std::complex<long double> denom = t.L - iz;
    const std::complex<long double> Z = (t.L + iz) / denom;

    std::complex<long double> p = t.a[0];
    for (int i = 1; i < kN; ++i) p = p * Z + t.a[i];

    const long double inv_sqrt_pi = 0.564189583547756286948079451560772586L;
    const std::complex<long double> w = 2.0L * p / (denom * denom) + inv_sqrt_pi / denom;
    return {static_cast<double>(w.real()), static_cast<double>(w.imag())};
}

std::complex<double> erfcx(std::complex<double> z) {
    if (z.real() >= 0.0) return faddeeva_w(std::complex<double>(-z.imag(), z.real()));
    // erfc(-z) = 2 - erfc(z); may overflow for large |z| in the left half-plane.
    const std::complex<double> zz = z * z;
    return 2.0 * std::exp(zz) - erfcx(-z);
}

double erfcx(double x) {
    if (x >= 0.0) return faddeeva_w(std::complex<double>(0.0, x)).real();
    return 2.0 * std::exp(x * x) - erfcx(-x);
}

} // namespace wigct
