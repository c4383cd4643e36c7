#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "wigct/wigner.hpp"

namespace wigct {

/// Stack of 1D projections, either sampled density profiles or per-angle
/// Gaussian sufficient statistics.
struct Sinogram {
    std::vector<double> angles_deg; // in [0, 180)
    int bins = 0;
    double range = 0.0; // half-width of the quadrature axis
    bool gaussian_mode = false;
    Eigen::MatrixXd profiles;      // rows = angles, cols = bins (density samples)
    std::vector<Marginal> stats;   // gaussian mode
    std::vector<std::string> warnings;

    double cell() const { return 2.0 * range / bins; }
    double coord(int j) const { return (j - (bins - 1) / 2) * cell(); }
    /// Density profiles for either mode (samples the Gaussians on demand).
    Eigen::MatrixXd sampled_profiles() const;
};

/// Visits the (ix, ip, weight) entries of the ray integral for projection bin
/// `t_index` at `angle_deg`. One interpolated crossing per grid line, so at
/// most 2*M entries; weights carry the arclength step along the ray.
template <typename Visitor>
void radon_ray(double angle_deg, int t_index, int size_m, double extent, Visitor&& visit) {
    const double phi = deg2rad(angle_deg);
    const double c = std::cos(phi);
    const double s = std::sin(phi);
    const double cell = 2.0 * extent / size_m;
    const int h = (size_m - 1) / 2;
    const double t = (t_index - h) * cell;

    if (std::abs(s) >= std::abs(c)) {
        const double ds = cell / std::abs(s);
        for (int i = 0; i < size_m; ++i) {
            const double x = (i - h) * cell;
            const double pidx = (t - x * c) / s / cell + h;
            const int k = static_cast<int>(std::floor(pidx));
            const double f = pidx - k;
            if (k >= 0 && k < size_m) visit(i, k, (1.0 - f) * ds);
            if (k + 1 >= 0 && k + 1 < size_m) visit(i, k + 1, f * ds);
        }
    } else {
        const double ds = cell / std::abs(c);
        for (int j = 0; j < size_m; ++j) {
            const double p = (j - h) * cell;
            const double xidx = (t - p * s) / c / cell + h;
            const int k = static_cast<int>(std::floor(xidx));
            const double f = xidx - k;
            if (k >= 0 && k < size_m) visit(k, j, (1.0 - f) * ds);
            if (k + 1 >= 0 && k + 1 < size_m) visit(k + 1, j, f * ds);
        }
    }
}

Sinogram radon(const WignerGrid& grid, const std::vector<double>& angles_deg);

Sinogram gaussian_sinogram(const GaussianParams& params, const std::vector<double>& angles_deg,
                           int bins, double range);

/// Build a sinogram from measured quadrature statistics (angles already in
/// [0, 180)). `sampled` selects density profiles vs sufficient statistics.
Sinogram sinogram_from_stats(const std::vector<QuadratureStats>& stats, int bins, double range,
                             bool sampled = true);

/// Fold quadrature angles spanning 360 degrees into [0, 180): the mirrored
/// profile at angle+180 is the same marginal with the axis reversed, so the
/// mean flips sign and duplicates are averaged.
std::vector<QuadratureStats> fold_to_half_circle(const std::vector<QuadratureStats>& stats);

struct FbpOptions {
    bool normalize = true;         // rescale to unit discrete mass
    double window_flat_frac = 0.5; // raised-cosine rolloff start, fraction of Nyquist
    int pad_factor = 16;           // FFT length >= pad_factor * bins; >= 2 avoids wraparound,
                                   // larger values refine the low-k ramp sampling
};

WignerGrid fbp(const Sinogram& sinogram, int size_m, double extent, const FbpOptions& opts = {});

} // namespace wigct
