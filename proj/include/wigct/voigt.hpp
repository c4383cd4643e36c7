#pragma once

#include <complex>
#include <vector>

#include "wigct/gaussian.hpp"

namespace wigct {

/// Thermometer lineshape parameters. Rates are stored in Hz; the reflection
/// model converts to angular units internally.
struct VoigtParams {
    double mu_hz = 0.0;       // resonance frequency
    double sigma2 = 0.0;      // Gaussian broadening (Hz^2)
    double gamma_hz = 0.0;    // total decay rate
    double gamma_c_hz = 0.0;  // external decay rate
    double asym_rad = 0.0;    // circuit asymmetry phase
    Complex baseline{0.0, 0.0};

    void validate() const; // gamma >= gamma_c > 0, sigma2 >= 0
};

/// Averaged complex reflection of the thermometer. Falls back to the analytic
/// Lorentzian branch when sigma2 is negligible against (gamma/2)^2.
Complex voigt_reflection(const VoigtParams& p, double f_probe_hz);

struct SpectrumPoint {
    double f_hz = 0.0;
    Complex s11{0.0, 0.0};
};
using Spectrum = std::vector<SpectrumPoint>;

Spectrum synth_spectrum(const VoigtParams& p, double f_lo_hz, double f_hi_hz, int points);

struct VoigtFit {
    VoigtParams params;
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nonlinear least squares on real+imag parts jointly.
struct FitError : NumericalError {
    VoigtFit best;
    FitError(const std::string& msg, VoigtFit best_) : NumericalError(msg), best(std::move(best_)) {}
};

VoigtFit fit_voigt(const Spectrum& spectrum);

} // namespace wigct
