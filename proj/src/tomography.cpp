#include "wigct/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

#include <unsupported/Eigen/FFT>

namespace wigct {

namespace {

double gaussian_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(2.0 * kPi * var);
}

void check_angles(const std::vector<double>& angles_deg) {
    if (angles_deg.empty()) throw ValidationError("tomography: empty angle list");
    for (double a : angles_deg)
        if (!(a >= 0.0) || !(a < 180.0))
            throw ValidationError("tomography: projection angles must lie in [0, 180)");
}

int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

} // namespace

Eigen::MatrixXd Sinogram::sampled_profiles() const {
    if (!gaussian_mode) return profiles;
    Eigen::MatrixXd out(static_cast<int>(angles_deg.size()), bins);
    for (size_t i = 0; i < angles_deg.size(); ++i)
        for (int j = 0; j < bins; ++j)
            out(static_cast<int>(i), j) = gaussian_pdf(coord(j), stats[i].mean, stats[i].variance);
    return out;
}

Sinogram radon(const WignerGrid& grid, const std::vector<double>& angles_deg) {
    check_angles(angles_deg);
    Sinogram s;
    s.angles_deg = angles_deg;
    s.bins = grid.size_m;
    s.range = grid.extent;
    s.profiles = Eigen::MatrixXd::Zero(static_cast<int>(angles_deg.size()), s.bins);
    for (size_t a = 0; a < angles_deg.size(); ++a) {
        for (int j = 0; j < s.bins; ++j) {
            double acc = 0.0;
            radon_ray(angles_deg[a], j, grid.size_m, grid.extent,
                      [&](int ix, int ip, double w) { acc += w * grid.values(ix, ip); });
            s.profiles(static_cast<int>(a), j) = acc;
        }
    }
    return s;
}

Sinogram gaussian_sinogram(const GaussianParams& params, const std::vector<double>& angles_deg,
                           int bins, double range) {
    check_angles(angles_deg);
    if (bins < 3 || !(range > 0.0))
        throw ValidationError("gaussian_sinogram: bad bins/range");
    Sinogram s;
    s.angles_deg = angles_deg;
    s.bins = bins;
    s.range = range;
    s.gaussian_mode = true;
    for (double a : angles_deg) {
        const Marginal m = marginal(params, a);
        if (range < std::abs(m.mean) + 5.0 * std::sqrt(m.variance))
            s.warnings.push_back("profile at " + std::to_string(a) + " deg clipped by the range");
        s.stats.push_back(m);
    }
    return s;
}

Sinogram sinogram_from_stats(const std::vector<QuadratureStats>& stats, int bins, double range,
                             bool sampled) {
    std::vector<double> angles;
    angles.reserve(stats.size());
    for (const auto& q : stats) angles.push_back(q.angle_deg);
    check_angles(angles);
    Sinogram s;
    s.angles_deg = angles;
    s.bins = bins;
    s.range = range;
    s.gaussian_mode = true;
    for (const auto& q : stats) {
        if (!(q.variance > 0.0))
            throw ValidationError("sinogram_from_stats: non-positive variance");
        if (range < std::abs(q.mean) + 5.0 * std::sqrt(q.variance))
            s.warnings.push_back("profile at " + std::to_string(q.angle_deg) + " deg clipped by the range");
        s.stats.push_back(Marginal{q.mean, q.variance});
    }
    if (sampled) {
        s.profiles = s.sampled_profiles();
        s.gaussian_mode = false;
        s.stats.clear();
    }
    return s;
}

std::vector<QuadratureStats> fold_to_half_circle(const std::vector<QuadratureStats>& stats) {
    std::map<long long, QuadratureStats> merged;
    std::map<long long, int> counts;
    for (const auto& q : stats) {
        double a = std::fmod(q.angle_deg, 360.0);
        if (a < 0.0) a += 360.0;
        const bool mirrored = a >= 180.0;
        if (mirrored) a -= 180.0;
        const long long key = llround(a * 1e6);
        auto [it, fresh] = merged.try_emplace(key);
        if (fresh) {
            it->second.angle_deg = a;
            it->second.mean = 0.0;
            it->second.variance = 0.0;
        }
        it->second.mean += mirrored ? -q.mean : q.mean;
        it->second.variance += q.variance;
        counts[key] += 1;
    }
    std::vector<QuadratureStats> out;
    out.reserve(merged.size());
    for (auto& [key, q] : merged) {
        q.mean /= counts[key];
        q.variance /= counts[key];
        out.push_back(q);
    }
    return out;
}

WignerGrid fbp(const Sinogram& sinogram, int size_m, double extent, const FbpOptions& opts) {
    const int n_angles = static_cast<int>(sinogram.angles_deg.size());
    if (n_angles < 2) throw ValidationError("fbp: need at least 2 projection angles");
    check_angles(sinogram.angles_deg);
    const Eigen::MatrixXd profiles = sinogram.sampled_profiles();
    if (profiles.cols() != sinogram.bins || profiles.rows() != n_angles)
        throw ValidationError("fbp: bins/range inconsistent across angles");

    const int bins = sinogram.bins;
    const double cell = sinogram.cell();
    const int padded = next_pow2(std::max(2, opts.pad_factor) * bins);
    const int offset = (padded - bins) / 2;
    const int h = (bins - 1) / 2;

    Eigen::FFT<double> fft;
    const double k_nyq = kPi / cell;

    // Ramp filter with a raised-cosine rolloff at the Nyquist edge.
    std::vector<double> filter(padded);
    for (int m = 0; m < padded; ++m) {
        const int ms = m <= padded / 2 ? m : m - padded;
        const double k = 2.0 * kPi * std::abs(ms) / (padded * cell);
        const double nu = k / k_nyq;
        double window = 1.0;
        if (nu > opts.window_flat_frac) {
            const double u = (nu - opts.window_flat_frac) / (1.0 - opts.window_flat_frac);
            window = 0.5 * (1.0 + std::cos(kPi * std::min(u, 1.0)));
        }
        filter[m] = k * window;
    }

    Eigen::MatrixXd filtered(n_angles, padded);
    std::vector<std::complex<double>> freq(padded);
    std::vector<double> line(padded);
    for (int a = 0; a < n_angles; ++a) {
        std::fill(line.begin(), line.end(), 0.0);
        for (int j = 0; j < bins; ++j) line[offset + j] = profiles(a, j);
        fft.fwd(freq, line);
        for (int m = 0; m < padded; ++m) freq[m] *= filter[m];
        fft.inv(line, freq);
        for (int m = 0; m < padded; ++m) filtered(a, m) = line[m];
    }

    WignerGrid grid(size_m, extent);
    const double weight = 1.0 / (2.0 * n_angles);
    for (int a = 0; a < n_angles; ++a) {
        const double phi = deg2rad(sinogram.angles_deg[a]);
        const double c = std::cos(phi);
        const double s = std::sin(phi);
        for (int i = 0; i < size_m; ++i) {
            const double x = grid.coord(i);
            for (int j = 0; j < size_m; ++j) {
                const double r = x * c + grid.coord(j) * s;
                const double u = r / cell + offset + h;
                const int k = static_cast<int>(std::floor(u));
                if (k < 0 || k + 1 >= padded) continue;
                const double f = u - k;
                grid.values(i, j) += weight * ((1.0 - f) * filtered(a, k) + f * filtered(a, k + 1));
            }
        }
    }

    if (opts.normalize) {
        const double mass = grid.mass();
        if (!(mass > 0.0)) throw NumericalError("fbp: non-positive reconstruction mass");
        grid.values /= mass;
    }
    return grid;
}

} // namespace wigct
