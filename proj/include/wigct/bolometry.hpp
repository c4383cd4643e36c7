#pragma once

#include <array>
#include <vector>

#include "wigct/gaussian.hpp"
#include "wigct/voigt.hpp"

namespace wigct {

/// Detector-chain constants: beam-splitter transmissivity, dB power
/// corrections, and the input filter band.
struct ChainConfig {
    double gamma_t = 0.49;   // transmissivity
    double eta0_db = -6.5;   // radiator -> splitter insertion loss (power dB)
    double eta1_db = -3.4;   // homodyne power correction (power dB)
    double f0_hz = 8.43e9;   // filter center
    double fwhm_hz = 1.33e8; // filter linewidth

    void validate() const;
};

struct PhotonStats {
    double mean = 0.0;
    double variance = 0.0;
};

/// dB -> linear power ratio.
inline double db_to_power(double db) { return std::pow(10.0, db / 10.0); }

/// Leading-order photon statistics of the combined field. `quad` holds the
/// quadrature stats at the measured angle (homodyne phase + 90).
PhotonStats combined_stats_approx(const QuadratureStats& quad, double n_a, double gamma_t,
                                  double beta2);

/// Full photon statistics of the combined field, no large-|beta| approximation.
PhotonStats combined_stats_exact(const MomentSet& m, double gamma_t, Complex beta);

/// Bose-Einstein occupation at the filter center, scaled by the eta0 power factor.
double thermal_occupation(double t_kelvin, const ChainConfig& cfg);

/// Homodyne photon number |beta|^2 from power in dBm.
double homodyne_photon_number(double p_h_dbm, const ChainConfig& cfg);

struct CalibrationSample {
    VoigtParams voigt;
    PhotonStats stats;
};

/// Cubic <n_c>(mu) and affine <(dn_c)^2>(sigma2) maps with their fit
/// diagnostics and calibrated ranges.
struct CalibrationCurves {
    std::array<double, 4> n_of_mu{};       // c0 + c1 mu + c2 mu^2 + c3 mu^3
    std::array<double, 2> var_of_sigma2{}; // s0 + s1 sigma2
    double mu_min = 0.0, mu_max = 0.0;
    double sigma2_min = 0.0, sigma2_max = 0.0;
    double n_residual = 0.0, var_residual = 0.0;
    bool monotone = true;

    double eval_n(double mu) const;
    double eval_var(double sigma2) const;
    /// Invert the cubic on the calibrated range (bisection; the curve is
    /// expected monotone there). Throws NumericalError if n is unreachable.
    double invert_n(double n) const;
    double invert_var(double var) const;
};

CalibrationCurves calibrate(const std::vector<CalibrationSample>& samples);

struct CalibratedStats {
    PhotonStats stats;
    bool extrapolated = false; // mu or sigma2 outside the calibrated range
};

CalibratedStats apply_calibration(const VoigtParams& p, const CalibrationCurves& c);

struct AngleStats {
    double angle_deg = 0.0; // homodyne phase
    PhotonStats stats;
};

/// Invert the leading-order statistics into per-angle quadrature stats.
/// Requires a uniform sweep covering a full 360 degrees (mean subtraction);
/// output angles are relabeled to the measured quadrature (phase + 90).
std::vector<QuadratureStats> extract_quadratures(const std::vector<AngleStats>& series,
                                                 const ChainConfig& cfg, double beta2);

} // namespace wigct
