#pragma once

#include <complex>

namespace wigct {

/// Scaled complementary error function erfcx(z) = exp(z^2) erfc(z) for
/// complex z with Re(z) >= 0 (left half-plane handled by reflection).
std::complex<double> erfcx(std::complex<double> z);

double erfcx(double x);

/// Faddeeva function w(z) = erfcx(-i z), valid for Im(z) >= 0.
std::complex<double> faddeeva_w(std::complex<double> z);

} // namespace wigct
