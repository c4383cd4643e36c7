#include "wigct/bolometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

namespace wigct {

namespace {
constexpr double kPlanck = 6.62607015e-34;    // J s
constexpr double kBoltzmann = 1.380649e-23;   // J / K
} // namespace

void ChainConfig::validate() const {
    if (!(gamma_t > 0.0) || !(gamma_t < 1.0))
        throw ValidationError("ChainConfig: gamma_t must be in (0, 1)");
    if (!(f0_hz > 0.0) || !(fwhm_hz > 0.0))
        throw ValidationError("ChainConfig: f0 and FWHM must be positive");
    if (!std::isfinite(eta0_db) || !std::isfinite(eta1_db))
        throw ValidationError("ChainConfig: non-finite dB correction");
}

PhotonStats combined_stats_approx(const QuadratureStats& quad, double n_a, double gamma_t,
                                  double beta2) {
    if (!(beta2 > 0.0)) throw ValidationError("combined_stats_approx: beta2 must be positive");
    const double g = 1.0 - gamma_t;
    PhotonStats out;
    out.mean = gamma_t * n_a + g * beta2 + std::sqrt(2.0 * gamma_t * g * beta2) * quad.mean;
    out.variance = g * beta2 * (g + 2.0 * gamma_t * quad.variance);
    return out;
}

PhotonStats combined_stats_exact(const MomentSet& m, double gamma_t, Complex beta) {
    if (!(gamma_t > 0.0) || !(gamma_t < 1.0))
        throw ValidationError("combined_stats_exact: gamma_t must be in (0, 1)");
    const double G = gamma_t;
    const double g = 1.0 - gamma_t;
    const double b2 = std::norm(beta);
    const double babs = std::abs(beta);
    const double phi = std::arg(beta);
    const Complex rot = std::polar(1.0, -phi);

    // Quadrature stats at the measured angle phi + 90.
    const double x_mean = std::sqrt(2.0) * std::imag(m.a * rot);
    const Complex m_central = m.aa - m.a * m.a;
    const double n_central = m.n - std::norm(m.a);
    const double x_var = 0.5 * (-2.0 * std::real(m_central * rot * rot) + 2.0 * n_central + 1.0);

    PhotonStats out;
    out.mean = G * m.n + g * b2 + std::sqrt(2.0 * G * g) * babs * x_mean;
    out.variance = g * b2 * (g + 2.0 * G * x_var) + G * G * m.photon_variance() +
                   G * g * m.n +
                   std::sqrt(G * g) * babs *
                       (4.0 * G * std::imag(m.adaa * rot) +
                        std::sqrt(2.0) * (1.0 - 2.0 * G * m.n) * x_mean);
    return out;
}

double thermal_occupation(double t_kelvin, const ChainConfig& cfg) {
    cfg.validate();
    if (!(t_kelvin > 0.0)) throw ValidationError("thermal_occupation: temperature must be positive");
    const double x = kPlanck * cfg.f0_hz / (kBoltzmann * t_kelvin);
    return db_to_power(cfg.eta0_db) / std::expm1(x);
}

double homodyne_photon_number(double p_h_dbm, const ChainConfig& cfg) {
    cfg.validate();
    if (std::isnan(p_h_dbm)) throw ValidationError("homodyne_photon_number: NaN power");
    const double watts = 1e-3 * db_to_power(p_h_dbm);
    return db_to_power(cfg.eta1_db) * watts / (cfg.fwhm_hz * kPlanck * cfg.f0_hz);
}

double CalibrationCurves::eval_n(double mu) const {
    return ((n_of_mu[3] * mu + n_of_mu[2]) * mu + n_of_mu[1]) * mu + n_of_mu[0];
}

double CalibrationCurves::eval_var(double sigma2) const {
    return var_of_sigma2[0] + var_of_sigma2[1] * sigma2;
}

double CalibrationCurves::invert_n(double n) const {
    const double margin = 0.1 * (mu_max - mu_min);
    double lo = mu_min - margin, hi = mu_max + margin;
    double flo = eval_n(lo) - n, fhi = eval_n(hi) - n;
    if (flo * fhi > 0.0) {
        std::ostringstream msg;
        msg << "calibration: photon number " << n << " outside the invertible range ["
            << std::min(eval_n(lo), eval_n(hi)) << ", " << std::max(eval_n(lo), eval_n(hi)) << "]";
        throw NumericalError(msg.str());
    }
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = eval_n(mid) - n;
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    return 0.5 * (lo + hi);
}

double CalibrationCurves::invert_var(double var) const {
    if (var_of_sigma2[1] == 0.0) throw NumericalError("calibration: zero variance slope");
    return (var - var_of_sigma2[0]) / var_of_sigma2[1];
}

CalibrationCurves calibrate(const std::vector<CalibrationSample>& samples) {
    if (samples.size() < 8)
        throw ValidationError("calibrate: need at least 8 samples spanning the range");

    const size_t n = samples.size();
    double mu_min = samples[0].voigt.mu_hz, mu_max = mu_min;
    double s2_min = samples[0].voigt.sigma2, s2_max = s2_min;
    for (const auto& s : samples) {
        mu_min = std::min(mu_min, s.voigt.mu_hz);
        mu_max = std::max(mu_max, s.voigt.mu_hz);
        s2_min = std::min(s2_min, s.voigt.sigma2);
        s2_max = std::max(s2_max, s.voigt.sigma2);
    }

    // Fit the cubic in a centered, scaled variable, then expand back to raw
    // polynomial coefficients.
    const double mu_c = 0.5 * (mu_min + mu_max);
    const double mu_s = std::max(0.5 * (mu_max - mu_min), 1e-300);
    Eigen::MatrixXd design(n, 4);
    Eigen::VectorXd rhs_n(n);
    for (size_t i = 0; i < n; ++i) {
        const double u = (samples[i].voigt.mu_hz - mu_c) / mu_s;
        design(i, 0) = 1.0;
        design(i, 1) = u;
        design(i, 2) = u * u;
        design(i, 3) = u * u * u;
        rhs_n(i) = samples[i].stats.mean;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < 4)
        throw ValidationError("calibrate: rank-deficient design matrix (mu range too narrow)");
    const Eigen::Vector4d cu = qr.solve(rhs_n);

    Eigen::MatrixXd vdesign(n, 2);
    Eigen::VectorXd rhs_v(n);
    const double s2_scale = std::max(s2_max - s2_min, 1e-300);
    for (size_t i = 0; i < n; ++i) {
        vdesign(i, 0) = 1.0;
        vdesign(i, 1) = samples[i].voigt.sigma2 / s2_scale;
        rhs_v(i) = samples[i].stats.variance;
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> vqr(vdesign);
    vqr.setThreshold(1e-10);
    if (vqr.rank() < 2)
        throw ValidationError("calibrate: rank-deficient variance design (sigma2 range too narrow)");
    const Eigen::Vector2d sv = vqr.solve(rhs_v);

    CalibrationCurves c;
    // (c0 + c1 u + c2 u^2 + c3 u^3) with u = (mu - mu_c)/mu_s -> powers of mu.
    const double a = -mu_c / mu_s, b = 1.0 / mu_s;
    c.n_of_mu[0] = cu(0) + cu(1) * a + cu(2) * a * a + cu(3) * a * a * a;
    c.n_of_mu[1] = b * (cu(1) + 2.0 * cu(2) * a + 3.0 * cu(3) * a * a);
    c.n_of_mu[2] = b * b * (cu(2) + 3.0 * cu(3) * a);
    c.n_of_mu[3] = b * b * b * cu(3);
    c.var_of_sigma2[0] = sv(0);
    c.var_of_sigma2[1] = sv(1) / s2_scale;
    c.mu_min = mu_min;
    c.mu_max = mu_max;
    c.sigma2_min = s2_min;
    c.sigma2_max = s2_max;
    c.n_residual = (design * cu - rhs_n).norm() / std::sqrt(static_cast<double>(n));
    c.var_residual = (vdesign * sv - rhs_v).norm() / std::sqrt(static_cast<double>(n));

    // Monotonicity of the cubic over the calibrated range (derivative sign).
    c.monotone = true;
    const int probes = 257;
    double prev = c.eval_n(mu_min);
    bool increasing = c.eval_n(mu_max) > prev;
    for (int i = 1; i < probes; ++i) {
        const double mu = mu_min + (mu_max - mu_min) * i / (probes - 1);
        const double val = c.eval_n(mu);
        if ((increasing && val < prev) || (!increasing && val > prev)) {
            c.monotone = false;
            break;
        }
        prev = val;
    }
    return c;
}

CalibratedStats apply_calibration(const VoigtParams& p, const CalibrationCurves& c) {
    CalibratedStats out;
    out.stats.mean = c.eval_n(p.mu_hz);
    out.stats.variance = c.eval_var(p.sigma2);
    const double mu_margin = 0.02 * (c.mu_max - c.mu_min);
    const double s2_margin = 0.02 * (c.sigma2_max - c.sigma2_min);
    out.extrapolated = p.mu_hz < c.mu_min - mu_margin || p.mu_hz > c.mu_max + mu_margin ||
                       p.sigma2 < c.sigma2_min - s2_margin || p.sigma2 > c.sigma2_max + s2_margin;
    if (out.stats.variance < 0.0) {
        std::ostringstream msg;
        msg << "apply_calibration: negative calibrated variance " << out.stats.variance
            << " at sigma2=" << p.sigma2;
        throw NumericalError(msg.str());
    }
    return out;
}

std::vector<QuadratureStats> extract_quadratures(const std::vector<AngleStats>& series,
                                                 const ChainConfig& cfg, double beta2) {
    cfg.validate();
    if (!(beta2 > 0.0)) throw ValidationError("extract_quadratures: beta2 must be positive");
    if (series.size() < 3)
        throw ValidationError("extract_quadratures: need at least 3 angles over a full period");

    // Mean subtraction presumes a uniform sweep of the full 360-degree period.
    std::vector<double> sorted;
    sorted.reserve(series.size());
    for (const auto& s : series) {
        double a = std::fmod(s.angle_deg, 360.0);
        if (a < 0.0) a += 360.0;
        sorted.push_back(a);
    }
    std::sort(sorted.begin(), sorted.end());
    const double step = 360.0 / static_cast<double>(series.size());
    for (size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (std::abs(sorted[i + 1] - sorted[i] - step) > 1e-6)
            throw ValidationError("extract_quadratures: non-uniform angle grid rejected");
    }

    double avg = 0.0;
    for (const auto& s : series) avg += s.stats.mean;
    avg /= static_cast<double>(series.size());

    const double G = cfg.gamma_t;
    const double g = 1.0 - G;
    const double mean_scale = std::sqrt(2.0 * G * g * beta2);

    std::vector<QuadratureStats> out;
    out.reserve(series.size());
    for (const auto& s : series) {
        QuadratureStats q;
        double psi = std::fmod(s.angle_deg + 90.0, 360.0);
        if (psi < 0.0) psi += 360.0;
        q.angle_deg = psi;
        q.mean = (s.stats.mean - avg) / mean_scale;
        q.variance = (s.stats.variance / (g * beta2) - g) / (2.0 * G);
        if (!(q.variance > 0.0)) {
            std::ostringstream msg;
            msg << "extract_quadratures: non-positive variance " << q.variance
                << " at homodyne angle " << s.angle_deg;
            throw NumericalError(msg.str());
        }
        out.push_back(q);
    }
    std::sort(out.begin(), out.end(),
              [](const QuadratureStats& a, const QuadratureStats& b) { return a.angle_deg < b.angle_deg; });
    return out;
}

} // namespace wigct
