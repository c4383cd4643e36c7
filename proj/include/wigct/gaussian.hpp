#pragma once

#include <complex>
#include <Eigen/Dense>

#include "wigct/errors.hpp"

namespace wigct {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Squeezing parameter zeta = r * exp(i*theta).
struct SqueezeParam {
    double r = 0.0;     // magnitude, >= 0
    double theta = 0.0; // radians, normalized to [0, 2*pi)

    SqueezeParam() = default;
    SqueezeParam(double r_, double theta_);

    static SqueezeParam from_complex(Complex zeta);
    Complex to_complex() const { return std::polar(r, theta); }
};

/// Squeezed displaced thermal state: displacement applied after squeezing,
/// so <a> equals alpha exactly.
struct GaussianParams {
    double n_thermal = 0.0;
    SqueezeParam squeeze;
    Complex alpha{0.0, 0.0};

    GaussianParams() = default;
    GaussianParams(double n_thermal_, SqueezeParam squeeze_, Complex alpha_)
        : n_thermal(n_thermal_), squeeze(squeeze_), alpha(alpha_) {}

    void validate() const; // throws ValidationError on non-finite or negative fields
};

struct QuadratureStats {
    double angle_deg = 0.0;
    double mean = 0.0;
    double variance = 0.0;
};

/// The eight field moments entering the exact photon-number statistics.
struct MomentSet {
    Complex a;      // <a>
    Complex ad;     // <a+>
    Complex aa;     // <a a>
    Complex adad;   // <a+ a+>
    double n = 0.0; // <a+ a>
    Complex adada;  // <a+ a+ a>
    Complex adaa;   // <a+ a a>
    double adadaa = 0.0; // <a+ a+ a a>

    double photon_variance() const { return adadaa + n - n * n; }
};

struct Marginal {
    double mean = 0.0;
    double variance = 0.0;
};

/// Phase-space mean vector and 2x2 covariance (hbar = 1, vacuum variance 1/2).
struct PhaseSpaceGaussian {
    Eigen::Vector2d mean;
    Eigen::Matrix2d cov;
};

double quad_mean(const GaussianParams& params, double angle_deg);
double quad_var(const GaussianParams& params, double angle_deg);

MomentSet moments(const GaussianParams& params);

Marginal marginal(const GaussianParams& params, double angle_deg);

PhaseSpaceGaussian covariance(const GaussianParams& params);

/// Inverse of covariance(): recovers (n_thermal, zeta, alpha) from mean/cov.
/// Throws NumericalError if cov is not symmetric positive definite.
GaussianParams params_from_covariance(const PhaseSpaceGaussian& g);

/// Uhlmann fidelity between two single-mode Gaussian states.
double gaussian_fidelity(const GaussianParams& a, const GaussianParams& b);

} // namespace wigct
