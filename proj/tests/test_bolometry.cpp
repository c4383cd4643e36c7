#include <doctest.h>

#include <random>

#include "wigct/bolometry.hpp"
#include "wigct/fock.hpp"
#include "wigct/rng.hpp"
#include "wigct/tomography.hpp"

using namespace wigct;

namespace {

std::vector<AngleStats> exact_sweep(const GaussianParams& p, double gamma_t, double beta2,
                                    int count) {
    const MomentSet m = moments(p);
    std::vector<AngleStats> out;
    for (int i = 0; i < count; ++i) {
        const double phi = 360.0 * i / count;
        out.push_back(AngleStats{
            phi, combined_stats_exact(m, gamma_t, std::polar(std::sqrt(beta2), deg2rad(phi)))});
    }
    return out;
}

} // namespace

TEST_CASE("thermal occupation anchors") {
    const ChainConfig cfg;
    CHECK(thermal_occupation(1.0, cfg) == doctest::Approx(0.45).epsilon(0.0112)); // 0.45 +- 0.005
    CHECK(thermal_occupation(1.0, cfg) == doctest::Approx(0.4489409094101185).epsilon(1e-12));

    // direct evaluation with CODATA constants, written out independently
    const double h = 6.62607015e-34, kb = 1.380649e-23;
    const double direct = std::pow(10.0, -0.65) / std::expm1(h * 8.43e9 / (kb * 0.05));
    CHECK(direct == doctest::Approx(6.855337203031155e-05).epsilon(1e-12));
    CHECK(thermal_occupation(0.05, cfg) == doctest::Approx(direct).epsilon(1e-12));

    CHECK(thermal_occupation(1e-4, cfg) < 1e-100); // T -> 0+
    CHECK_THROWS_AS(thermal_occupation(0.0, cfg), ValidationError);
    CHECK_THROWS_AS(thermal_occupation(-1.0, cfg), ValidationError);
}

TEST_CASE("homodyne photon number anchors") {
    const ChainConfig cfg;
    CHECK(homodyne_photon_number(-112.0, cfg) == doctest::Approx(3.8820824501621263).epsilon(1e-12));
    CHECK(homodyne_photon_number(-std::numeric_limits<double>::infinity(), cfg) == 0.0);
    const double base = homodyne_photon_number(-120.0, cfg);
    CHECK(homodyne_photon_number(-110.0, cfg) == doctest::Approx(10.0 * base).epsilon(1e-13));
}

TEST_CASE("combined_stats_approx anchors") {
    const QuadratureStats vac{90.0, 0.0, 0.5};
    const PhotonStats a = combined_stats_approx(vac, 0.0, 0.5, 10.0);
    CHECK(a.mean == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(a.variance == doctest::Approx(5.0).epsilon(1e-14));

    const QuadratureStats th{90.0, 0.0, 0.95};
    const PhotonStats b = combined_stats_approx(th, 0.45, 0.49, 15.3);
    CHECK(b.variance == doctest::Approx(11.244123).epsilon(1e-12));

    CHECK_THROWS_AS(combined_stats_approx(vac, 0.0, 0.5, 0.0), ValidationError);
}

TEST_CASE("approx mean oscillation amplitude") {
    // Eq.-(1) prefactor sqrt(2 G (1-G) |beta|^2) times the quadrature-mean
    // swing sqrt(2)|alpha|.
    const GaussianParams p(0.0, SqueezeParam(), Complex(-0.06, -0.36));
    const double amp_expected =
        std::sqrt(2.0 * 0.49 * 0.51 * 15.3) * std::sqrt(2.0) * std::abs(p.alpha);
    double lo = 1e18, hi = -1e18;
    for (int k = 0; k < 72; ++k) {
        const double phi = 5.0 * k;
        const QuadratureStats q{std::fmod(phi + 90.0, 360.0),
                                quad_mean(p, phi + 90.0), quad_var(p, phi + 90.0)};
        const PhotonStats s = combined_stats_approx(q, moments(p).n, 0.49, 15.3);
        lo = std::min(lo, s.mean);
        hi = std::max(hi, s.mean);
    }
    CHECK(0.5 * (hi - lo) == doctest::Approx(amp_expected).epsilon(1e-3));
}

TEST_CASE("combined_stats_exact on vacuum collapses to (1-G)|beta|^2") {
    const MomentSet vac = moments(GaussianParams(0.0, SqueezeParam(), 0.0));
    for (double g : {0.2, 0.49, 0.9})
        for (double b2 : {0.5, 4.0, 15.3}) {
            const PhotonStats s = combined_stats_exact(vac, g, std::polar(std::sqrt(b2), 0.7));
            CHECK(s.variance == doctest::Approx((1.0 - g) * b2).epsilon(1e-12));
            CHECK(s.mean == doctest::Approx((1.0 - g) * b2).epsilon(1e-12));
        }
}

TEST_CASE("exact formula agrees with the Fock-space beam splitter") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const GaussianParams p(u(rng), SqueezeParam(0.3 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(0.8 * u(rng), 2.0 * kPi * u(rng)));
        const FockState s = make_gaussian_state(p, 70);
        const Complex beta = std::polar(1.0 + 3.0 * u(rng), 2.0 * kPi * u(rng));
        const double g = 0.3 + 0.4 * u(rng);
        const PhotonStats closed = combined_stats_exact(moments(p), g, beta);
        const PhotonStats fock = beam_split(s, beta, g);
        CHECK(closed.mean == doctest::Approx(fock.mean).epsilon(1e-7));
        CHECK(closed.variance == doctest::Approx(fock.variance).epsilon(1e-6));
    }
}

TEST_CASE("coherent-state exact variance oscillates with 360-degree period") {
    const GaussianParams p(0.22, SqueezeParam(), Complex(-0.06, -0.36));
    const MomentSet m = moments(p);
    std::vector<double> vars;
    for (int k = 0; k < 36; ++k)
        vars.push_back(
            combined_stats_exact(m, 0.49, std::polar(std::sqrt(15.3), deg2rad(10.0 * k))).variance);
    // first harmonic dominates over the second
    double c1 = 0.0, s1 = 0.0, c2 = 0.0, s2 = 0.0;
    for (int k = 0; k < 36; ++k) {
        c1 += vars[k] * std::cos(deg2rad(10.0 * k));
        s1 += vars[k] * std::sin(deg2rad(10.0 * k));
        c2 += vars[k] * std::cos(2.0 * deg2rad(10.0 * k));
        s2 += vars[k] * std::sin(2.0 * deg2rad(10.0 * k));
    }
    CHECK(std::hypot(c1, s1) > 5.0 * std::hypot(c2, s2));
    CHECK(std::hypot(c1, s1) > 1.0);
}

TEST_CASE("exact-to-approx convergence in |beta|^2 (property)") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const GaussianParams p(u(rng), SqueezeParam(0.3 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(u(rng), 2.0 * kPi * u(rng)));
        const MomentSet m = moments(p);
        const double g = 0.49;
        // worst relative deviation over a uniform angle sweep, per |beta|^2
        const auto worst_rel = [&](double b2) {
            double worst = 0.0;
            for (int k = 0; k < 12; ++k) {
                const double phi = 30.0 * k;
                const QuadratureStats q{std::fmod(phi + 90.0, 360.0), quad_mean(p, phi + 90.0),
                                        quad_var(p, phi + 90.0)};
                const double ve =
                    combined_stats_exact(m, g, std::polar(std::sqrt(b2), deg2rad(phi))).variance;
                const double va = combined_stats_approx(q, m.n, g, b2).variance;
                worst = std::max(worst, std::abs(ve - va) / va);
            }
            return worst;
        };
        double prev = 1e18;
        double fitted_c = 0.0;
        for (double b2 : {4.0, 16.0, 64.0, 256.0}) {
            const double rel = worst_rel(b2);
            CHECK(rel < prev + 1e-12); // monotone decrease of the envelope
            prev = rel;
            fitted_c = std::max(fitted_c, rel * std::sqrt(b2));
        }
        CHECK(prev <= fitted_c / std::sqrt(256.0) + 1e-12); // C / sqrt(|beta|^2)
    }
}

TEST_CASE("extract_quadratures inverts the approximate chain exactly") {
    std::mt19937_64 rng(15);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const ChainConfig cfg;
    for (int trial = 0; trial < 20; ++trial) {
        const GaussianParams p(u(rng), SqueezeParam(0.3 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(u(rng), 2.0 * kPi * u(rng)));
        const double beta2 = 2.0 + 20.0 * u(rng);
        const MomentSet m = moments(p);
        std::vector<AngleStats> series;
        for (int k = 0; k < 12; ++k) {
            const double phi = 30.0 * k;
            const QuadratureStats q{std::fmod(phi + 90.0, 360.0), quad_mean(p, phi + 90.0),
                                    quad_var(p, phi + 90.0)};
            series.push_back(AngleStats{phi, combined_stats_approx(q, m.n, cfg.gamma_t, beta2)});
        }
        const auto extracted = extract_quadratures(series, cfg, beta2);
        for (const auto& q : extracted) {
            CHECK(q.mean == doctest::Approx(quad_mean(p, q.angle_deg)).epsilon(1e-12));
            CHECK(q.variance == doctest::Approx(quad_var(p, q.angle_deg)).epsilon(1e-12));
        }
    }
}

TEST_CASE("extraction from the exact chain reproduces the coherent-state anchor") {
    // Truth variance 0.72 (thermal population 0.22); the raw inversion of the
    // exact statistics carries a small positive systematic at |beta|^2 = 15.3.
    const GaussianParams p(0.22, SqueezeParam(), Complex(-0.06, -0.36));
    const ChainConfig cfg;
    const auto extracted = extract_quadratures(exact_sweep(p, cfg.gamma_t, 15.3, 18), cfg, 15.3);
    double avg = 0.0;
    for (const auto& q : extracted) avg += q.variance;
    avg /= extracted.size();
    CHECK(avg == doctest::Approx(0.72).epsilon(0.045));
    CHECK(avg - 0.5 == doctest::Approx(0.22).epsilon(0.15)); // thermal population
    CHECK(avg >= 0.72);                                      // bias is upward
}

TEST_CASE("extraction recovers the squeezed-state extrema and squeeze level") {
    // theta = pi: variance minimized along the 90-degree quadrature.
    const GaussianParams p(0.7334909809155477, SqueezeParam(0.18618363733760965, kPi), 0.0);
    CHECK(quad_var(p, 0.0) == doctest::Approx(1.79).epsilon(1e-3));
    CHECK(quad_var(p, 90.0) == doctest::Approx(0.85).epsilon(1e-3));

    const ChainConfig cfg;
    const auto extracted = extract_quadratures(exact_sweep(p, cfg.gamma_t, 15.3, 36), cfg, 15.3);
    const auto folded = fold_to_half_circle(extracted);
    double vmax = -1e18, vmin = 1e18;
    for (const auto& q : folded) {
        vmax = std::max(vmax, q.variance);
        vmin = std::min(vmin, q.variance);
    }
    CHECK(vmax == doctest::Approx(1.79).epsilon(0.06));
    CHECK(vmin == doctest::Approx(0.85).epsilon(0.12));
    const double r = 0.25 * std::log(vmax / vmin);
    CHECK(r == doctest::Approx(0.19).epsilon(0.12));
    CHECK(10.0 * std::log10(vmax / vmin) / 2.0 == doctest::Approx(1.6).epsilon(0.15)); // dB
}

TEST_CASE("extract_quadratures rejects bad inputs") {
    const ChainConfig cfg;
    std::vector<AngleStats> series;
    for (int k = 0; k < 8; ++k) series.push_back(AngleStats{45.0 * k, PhotonStats{8.0, 8.0}});

    auto skewed = series;
    skewed[3].angle_deg += 5.0;
    CHECK_THROWS_AS(extract_quadratures(skewed, cfg, 15.3), ValidationError);
    CHECK_THROWS_AS(extract_quadratures({series[0], series[1]}, cfg, 15.3), ValidationError);

    auto negative = series;
    for (auto& s : negative) s.stats.variance = 0.1; // below the (1-G)^2 |beta|^2 floor
    CHECK_THROWS_WITH_AS(extract_quadratures(negative, cfg, 15.3),
                         doctest::Contains("angle 0"), NumericalError);
}

TEST_CASE("calibrate recovers a known cubic and affine pair") {
    // ground truth curves
    const std::array<double, 4> nc{3.0, -2.0e-8, 4.0e-17, -1.5e-26};
    const std::array<double, 2> vc{0.4, 8.0e-12};
    auto rng = named_stream(77, "calib");
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double noise_n = 0.02, noise_v = 0.02;
    std::vector<CalibrationSample> samples;
    for (int i = 0; i < 40; ++i) {
        CalibrationSample s;
        s.voigt.mu_hz = 5.05e8 + 4.0e7 * i / 39.0;
        s.voigt.sigma2 = 3.0e12 * i / 39.0;
        s.voigt.gamma_hz = s.voigt.gamma_c_hz = 1.0;
        const double mu = s.voigt.mu_hz;
        s.stats.mean = ((nc[3] * mu + nc[2]) * mu + nc[1]) * mu + nc[0] + noise_n * gauss(rng);
        s.stats.variance = vc[0] + vc[1] * s.voigt.sigma2 + noise_v * gauss(rng);
        samples.push_back(s);
    }
    const CalibrationCurves fit = calibrate(samples);
    CHECK(fit.n_residual < 3.0 * noise_n);
    CHECK(fit.var_residual < 3.0 * noise_v);
    // compare on values, not raw coefficients
    for (double mu : {5.06e8, 5.2e8, 5.4e8}) {
        const double truth = ((nc[3] * mu + nc[2]) * mu + nc[1]) * mu + nc[0];
        CHECK(fit.eval_n(mu) == doctest::Approx(truth).epsilon(0.02));
    }
    CHECK(fit.eval_var(1e12) == doctest::Approx(vc[0] + vc[1] * 1e12).epsilon(0.02));
}

TEST_CASE("calibrate rejects a degenerate sample set") {
    std::vector<CalibrationSample> samples;
    for (int i = 0; i < 8; ++i) {
        CalibrationSample s;
        s.voigt.mu_hz = (i % 2) ? 5.2e8 : 5.3e8; // two distinct mu only
        s.voigt.sigma2 = 1e11 * i;
        s.stats.mean = 1.0 + i;
        s.stats.variance = 1.0 + 0.1 * i;
        samples.push_back(s);
    }
    CHECK_THROWS_AS(calibrate(samples), ValidationError);
    samples.resize(5);
    CHECK_THROWS_AS(calibrate(samples), ValidationError);
}

TEST_CASE("non-monotone cubic flagged but returned") {
    std::vector<CalibrationSample> samples;
    for (int i = 0; i < 30; ++i) {
        CalibrationSample s;
        const double u = -1.0 + 2.0 * i / 29.0;
        s.voigt.mu_hz = 5.25e8 + 2.0e7 * u;
        s.voigt.sigma2 = 1e11 * i;
        s.stats.mean = u * u * u - 0.7 * u; // genuinely non-monotone on [-1, 1]
        s.stats.variance = 0.5 + 1e-12 * s.voigt.sigma2;
        samples.push_back(s);
    }
    const CalibrationCurves fit = calibrate(samples);
    CHECK_FALSE(fit.monotone);
    CHECK(fit.n_residual < 0.05);
}

TEST_CASE("apply_calibration passthrough, warnings and errors") {
    CalibrationCurves identity;
    identity.n_of_mu = {0.0, 1.0, 0.0, 0.0};
    identity.var_of_sigma2 = {0.0, 1.0};
    identity.mu_min = 0.0;
    identity.mu_max = 10.0;
    identity.sigma2_min = 0.0;
    identity.sigma2_max = 10.0;

    VoigtParams p;
    p.mu_hz = 4.0;
    p.sigma2 = 2.5;
    p.gamma_hz = p.gamma_c_hz = 1.0;
    const CalibratedStats out = apply_calibration(p, identity);
    CHECK(out.stats.mean == doctest::Approx(4.0));
    CHECK(out.stats.variance == doctest::Approx(2.5));
    CHECK_FALSE(out.extrapolated);

    p.mu_hz = 14.0;
    CHECK(apply_calibration(p, identity).extrapolated);

    CalibrationCurves down = identity;
    down.var_of_sigma2 = {-1.0, 0.1};
    p.mu_hz = 4.0;
    p.sigma2 = 0.5;
    CHECK_THROWS_AS(apply_calibration(p, down), NumericalError);
}

TEST_CASE("calibration curve inversion round trip") {
    CalibrationCurves c;
    c.n_of_mu = {40.0, -7.0e-8, 3.0e-17, -1.0e-26};
    c.var_of_sigma2 = {0.5, 9.0e-12};
    c.mu_min = 5.05e8;
    c.mu_max = 5.45e8;
    c.sigma2_min = 0.0;
    c.sigma2_max = 3.0e12;
    for (double mu : {5.1e8, 5.25e8, 5.4e8})
        CHECK(c.invert_n(c.eval_n(mu)) == doctest::Approx(mu).epsilon(1e-9));
    for (double s2 : {1e11, 2e12})
        CHECK(c.invert_var(c.eval_var(s2)) == doctest::Approx(s2).epsilon(1e-12));
    CHECK_THROWS_AS(c.invert_n(1e9), NumericalError);
}
