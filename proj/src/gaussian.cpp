#include "wigct/gaussian.hpp"

#include <cmath>

namespace wigct {

namespace {

double wrap_angle(double theta) {
    double t = std::fmod(theta, 2.0 * kPi);
    if (t < 0.0) t += 2.0 * kPi;
    return t;
}

// Central second moments of the squeezed thermal core (before displacement):
//   n_c = <a+ a> = n_T cosh(2r) + sinh^2 r
//   m_c = <a a>  = -e^{i theta} (n_T + 1/2) sinh(2r)
struct CentralMoments {
    double n;
    Complex m;
};

CentralMoments central_moments(const GaussianParams& p) {
    const double r = p.squeeze.r;
    const double ch2 = std::cosh(2.0 * r);
    const double sh2 = std::sinh(2.0 * r);
    const double sh = std::sinh(r);
    CentralMoments c;
    c.n = p.n_thermal * ch2 + sh * sh;
    c.m = -std::polar(1.0, p.squeeze.theta) * (p.n_thermal + 0.5) * sh2;
    return c;
}

} // namespace

SqueezeParam::SqueezeParam(double r_, double theta_) : r(r_), theta(wrap_angle(theta_)) {
    if (!std::isfinite(r) || r < 0.0 || !std::isfinite(theta))
        throw ValidationError("SqueezeParam: r must be finite and non-negative, theta finite");
}

SqueezeParam SqueezeParam::from_complex(Complex zeta) {
    return SqueezeParam(std::abs(zeta), std::arg(zeta));
}

void GaussianParams::validate() const {
    if (!std::isfinite(n_thermal) || n_thermal < 0.0)
        throw ValidationError("GaussianParams: n_thermal must be finite and non-negative");
    if (!std::isfinite(squeeze.r) || squeeze.r < 0.0 || !std::isfinite(squeeze.theta))
        throw ValidationError("GaussianParams: invalid squeeze parameter");
    if (!std::isfinite(alpha.real()) || !std::isfinite(alpha.imag()))
        throw ValidationError("GaussianParams: alpha must be finite");
}

double quad_mean(const GaussianParams& params, double angle_deg) {
    params.validate();
    if (!std::isfinite(angle_deg)) throw ValidationError("quad_mean: non-finite angle");
    const double phi = deg2rad(angle_deg);
    return std::sqrt(2.0) * std::real(params.alpha * std::polar(1.0, -phi));
}

double quad_var(const GaussianParams& params, double angle_deg) {
    params.validate();
    if (!std::isfinite(angle_deg)) throw ValidationError("quad_var: non-finite angle");
    const double phi = deg2rad(angle_deg);
    const CentralMoments c = central_moments(params);
    return std::real(c.m * std::polar(1.0, -2.0 * phi)) + c.n + 0.5;
}

MomentSet moments(const GaussianParams& params) {
    params.validate();
    const CentralMoments c = central_moments(params);
    const Complex al = params.alpha;
    const Complex alc = std::conj(al);
    const double a2 = std::norm(al);

    MomentSet m;
    m.a = al;
    m.ad = alc;
    m.aa = c.m + al * al;
    m.adad = std::conj(m.aa);
    m.n = c.n + a2;
    // Third and fourth moments of a displaced zero-mean Gaussian (Wick).
    m.adaa = al * a2 + alc * c.m + 2.0 * al * c.n;
    m.adada = std::conj(m.adaa);
    m.adadaa = a2 * a2 + 4.0 * a2 * c.n + 2.0 * std::real(alc * alc * c.m) +
               std::norm(c.m) + 2.0 * c.n * c.n;
    return m;
}

Marginal marginal(const GaussianParams& params, double angle_deg) {
    return Marginal{quad_mean(params, angle_deg), quad_var(params, angle_deg)};
}

PhaseSpaceGaussian covariance(const GaussianParams& params) {
    params.validate();
    const CentralMoments c = central_moments(params);
    PhaseSpaceGaussian g;
    g.mean << std::sqrt(2.0) * params.alpha.real(), std::sqrt(2.0) * params.alpha.imag();
    const double diag = c.n + 0.5;
    g.cov << diag + c.m.real(), c.m.imag(),
             c.m.imag(), diag - c.m.real();
    return g;
}

GaussianParams params_from_covariance(const PhaseSpaceGaussian& g) {
    if ((g.cov - g.cov.transpose()).norm() > 1e-9 * (1.0 + g.cov.norm()))
        throw NumericalError("params_from_covariance: covariance not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.cov);
    const double lo = es.eigenvalues()(0);
    const double hi = es.eigenvalues()(1);
    if (lo <= 0.0)
        throw NumericalError("params_from_covariance: covariance not positive definite");

    const double det = lo * hi;
    double n_thermal = std::sqrt(det) - 0.5;
    if (n_thermal < 0.0) {
        if (n_thermal < -1e-6)
            throw NumericalError("params_from_covariance: det(cov) below the Heisenberg floor");
        n_thermal = 0.0;
    }
    const double r = 0.25 * std::log(hi / lo);

    double theta = 0.0;
    if (r > 1e-14) {
        // Variance minimized along angle theta/2: theta from the small-eigenvalue axis.
        const Eigen::Vector2d v = es.eigenvectors().col(0);
        theta = 2.0 * std::atan2(v(1), v(0));
    }
    const Complex alpha(g.mean(0) / std::sqrt(2.0), g.mean(1) / std::sqrt(2.0));
    return GaussianParams(n_thermal, SqueezeParam(r, theta), alpha);
}

double gaussian_fidelity(const GaussianParams& pa, const GaussianParams& pb) {
    const PhaseSpaceGaussian a = covariance(pa);
    const PhaseSpaceGaussian b = covariance(pb);
    // Scutaru's single-mode formula in the V = 2*Sigma convention (vacuum V = I).
    const Eigen::Matrix2d A = 2.0 * a.cov;
    const Eigen::Matrix2d B = 2.0 * b.cov;
    const Eigen::Matrix2d S = A + B;
    const double delta = (A.determinant() - 1.0) * (B.determinant() - 1.0);
    const double Delta = S.determinant();
    const Eigen::Vector2d d = a.mean - b.mean;
    const double expo = -d.dot(S.inverse() * d);
    const double denom = std::sqrt(Delta + delta) - std::sqrt(std::max(delta, 0.0));
    return 2.0 / denom * std::exp(expo);
}

} // namespace wigct
