#include "wigct/voigt.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "wigct/faddeeva.hpp"

namespace wigct {

void VoigtParams::validate() const {
    if (!(gamma_c_hz > 0.0) || !(gamma_hz >= gamma_c_hz))
        throw ValidationError("VoigtParams: require gamma >= gamma_c > 0");
    if (!(sigma2 >= 0.0)) throw ValidationError("VoigtParams: sigma2 must be non-negative");
    if (!std::isfinite(mu_hz) || !std::isfinite(asym_rad) || !std::isfinite(baseline.real()) ||
        !std::isfinite(baseline.imag()))
        throw ValidationError("VoigtParams: non-finite field");
}

Complex voigt_reflection(const VoigtParams& p, double f_probe_hz) {
    p.validate();
    const Complex phase = std::polar(1.0, p.asym_rad);
    const double det = p.mu_hz - f_probe_hz;
    const double half = 0.5 * p.gamma_hz;
    // Lorentzian branch once the Gaussian broadening is negligible; the Voigt
    // kernel limits to exactly this expression as sigma -> 0.
    if (p.sigma2 < 1e-6 * half * half)
        return p.baseline + 1.0 - phase * p.gamma_c_hz / Complex(half, det);
    const double sigma = std::sqrt(p.sigma2);
    const Complex z = Complex(half, det) / (std::sqrt(2.0) * sigma);
    const double prefactor = std::sqrt(kPi / 2.0) * p.gamma_c_hz / sigma;
    return p.baseline + 1.0 - phase * prefactor * erfcx(z);
}

Spectrum synth_spectrum(const VoigtParams& p, double f_lo_hz, double f_hi_hz, int points) {
    if (points < 2 || !(f_hi_hz > f_lo_hz))
        throw ValidationError("synth_spectrum: need points >= 2 and f_hi > f_lo");
    Spectrum s(points);
    for (int i = 0; i < points; ++i) {
        const double f = f_lo_hz + (f_hi_hz - f_lo_hz) * i / (points - 1);
        s[i] = SpectrumPoint{f, voigt_reflection(p, f)};
    }
    return s;
}

namespace {

// Internal smooth parametrization keeps every iterate physical without flat
// clamped regions: sigma = u^2? no -- sigma itself, squared into sigma2;
// gamma through a square; gamma_c as a sigmoid fraction of gamma.
constexpr int kNumParams = 7; // mu, sigma, sqrt(gamma), logit(gc/g), asym, Re/Im baseline

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

Eigen::VectorXd pack(const VoigtParams& p) {
    Eigen::VectorXd v(kNumParams);
    const double frac = std::clamp(p.gamma_c_hz / p.gamma_hz, 1e-4, 1.0 - 1e-4);
    v << p.mu_hz, std::sqrt(std::max(p.sigma2, 0.0)), std::sqrt(p.gamma_hz), logit(frac),
        p.asym_rad, p.baseline.real(), p.baseline.imag();
    return v;
}

VoigtParams unpack(const Eigen::VectorXd& v) {
    VoigtParams p;
    p.mu_hz = v(0);
    p.sigma2 = v(1) * v(1);
    p.gamma_hz = std::max(v(2) * v(2), 1e-12);
    p.gamma_c_hz = p.gamma_hz * std::clamp(sigmoid(v(3)), 1e-9, 1.0);
    p.asym_rad = v(4);
    p.baseline = Complex(v(5), v(6));
    return p;
}

Eigen::VectorXd residuals(const Eigen::VectorXd& v, const Spectrum& spec) {
    const VoigtParams p = unpack(v);
    Eigen::VectorXd r(2 * spec.size());
    for (size_t i = 0; i < spec.size(); ++i) {
        const Complex model = voigt_reflection(p, spec[i].f_hz);
        r(2 * i) = model.real() - spec[i].s11.real();
        r(2 * i + 1) = model.imag() - spec[i].s11.imag();
    }
    return r;
}

VoigtParams initial_guess(const Spectrum& spec) {
    const size_t n = spec.size();
    const size_t edge = std::max<size_t>(3, n / 20);
    Complex base(0.0, 0.0);
    for (size_t i = 0; i < edge; ++i) base += spec[i].s11 + spec[n - 1 - i].s11;
    base /= static_cast<double>(2 * edge);

    size_t dip = 0;
    double best = -1.0;
    for (size_t i = 0; i < n; ++i) {
        const double depth = std::abs(spec[i].s11 - base);
        if (depth > best) {
            best = depth;
            dip = i;
        }
    }

    // Half-depth crossing width around the dip.
    const double half_depth = 0.5 * best;
    size_t lo = dip, hi = dip;
    while (lo > 0 && std::abs(spec[lo].s11 - base) > half_depth) --lo;
    while (hi + 1 < n && std::abs(spec[hi].s11 - base) > half_depth) ++hi;
    const double width = std::max(std::abs(spec[hi].f_hz - spec[lo].f_hz),
                                  2.0 * std::abs(spec[1].f_hz - spec[0].f_hz));

    VoigtParams p;
    p.mu_hz = spec[dip].f_hz;
    p.gamma_hz = width;
    p.gamma_c_hz = std::clamp(0.5 * width * std::min(best, 2.0), 1e-3 * width, width); // depth = 2 gc / g
    p.sigma2 = std::pow(width / 10.0, 2);
    p.asym_rad = std::arg(base - spec[dip].s11 + 1e-300); // dip direction from the background
    p.baseline = base - 1.0;
    return p;
}

} // namespace

VoigtFit fit_voigt(const Spectrum& spectrum) {
    if (spectrum.size() < 50)
        throw ValidationError("fit_voigt: need at least 50 frequency points");

    // Reject spectra with no resonance above the edge noise before iterating.
    {
        const size_t n = spectrum.size();
        const size_t edge = std::max<size_t>(3, n / 10);
        Complex mean(0.0, 0.0);
        for (size_t i = 0; i < edge; ++i) mean += spectrum[i].s11 + spectrum[n - 1 - i].s11;
        mean /= static_cast<double>(2 * edge);
        double noise2 = 0.0;
        for (size_t i = 0; i < edge; ++i)
            noise2 += std::norm(spectrum[i].s11 - mean) + std::norm(spectrum[n - 1 - i].s11 - mean);
        const double noise = std::sqrt(noise2 / (2 * edge));
        double depth = 0.0;
        for (const auto& pt : spectrum) depth = std::max(depth, std::abs(pt.s11 - mean));
        if (depth < 6.0 * noise + 1e-9) {
            VoigtFit flat;
            flat.converged = false;
            throw FitError("fit_voigt: no resonance found above the noise floor", flat);
        }
    }

    Eigen::VectorXd v = pack(initial_guess(spectrum));
    Eigen::VectorXd r = residuals(v, spectrum);
    double cost = r.squaredNorm();

    double lambda = 1e-3;
    int iter = 0;
    bool converged = false;
    int stall = 0;
    const int max_iters = 200;

    for (; iter < max_iters; ++iter) {
        // Forward-difference Jacobian with per-parameter relative steps.
        Eigen::MatrixXd jac(r.size(), kNumParams);
        for (int j = 0; j < kNumParams; ++j) {
            const double step = std::max(std::abs(v(j)) * 1e-7, 1e-9);
            Eigen::VectorXd vj = v;
            vj(j) += step;
            jac.col(j) = (residuals(vj, spectrum) - r) / step;
        }
        const Eigen::MatrixXd jtj = jac.transpose() * jac;
        const Eigen::VectorXd jtr = jac.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 16; ++attempt) {
            Eigen::MatrixXd damped = jtj;
            damped.diagonal() += lambda * jtj.diagonal().cwiseMax(1e-30);
            const Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
            const Eigen::VectorXd vn = v + delta;
            const Eigen::VectorXd rn = residuals(vn, spectrum);
            const double cn = rn.squaredNorm();
            if (std::isfinite(cn) && cn < cost) {
                const double rel = (cost - cn) / std::max(cost, 1e-300);
                v = vn;
                r = rn;
                cost = cn;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                stall = rel < 1e-12 ? stall + 1 : 0;
                break;
            }
            lambda *= 8.0;
        }
        if (!stepped || stall >= 3) {
            // No descent direction left, or three negligible improvements in
            // a row: stationary to numerical precision.
            converged = true;
            break;
        }
    }
    if (iter >= max_iters) converged = cost < 1e-12 * static_cast<double>(r.size());

    VoigtFit fit;
    fit.params = unpack(v);
    fit.residual_norm = std::sqrt(cost);
    fit.iterations = iter + 1;
    fit.converged = converged;

    if (!fit.converged) {
        std::ostringstream msg;
        msg << "fit_voigt: no convergence after " << fit.iterations
            << " iterations; best residual " << fit.residual_norm << ", mu=" << fit.params.mu_hz
            << ", sigma2=" << fit.params.sigma2;
        throw FitError(msg.str(), fit);
    }
    return fit;
}

} // namespace wigct
