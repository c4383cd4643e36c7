#include "wigct/fock.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

namespace wigct {

Eigen::MatrixXcd annihilation_op(int dim) {
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(dim, dim);
    for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
    return a;
}

FockState make_thermal(double n_thermal, int dim) {
    if (!(n_thermal >= 0.0) || !std::isfinite(n_thermal))
        throw ValidationError("make_thermal: n_thermal must be finite and non-negative");
    if (dim < 2) throw ValidationError("make_thermal: dim must be >= 2");

    FockState s;
    s.dim = dim;
    s.rho = Eigen::MatrixXcd::Zero(dim, dim);
    if (n_thermal == 0.0) {
        s.rho(0, 0) = 1.0;
        return s;
    }
    const double q = n_thermal / (n_thermal + 1.0);
    double norm = 0.0;
    for (int n = 0; n < dim; ++n) norm += std::pow(q, n);
    for (int n = 0; n < dim; ++n) s.rho(n, n) = std::pow(q, n) / norm;
    s.trunc.tail_mass = std::pow(q, dim); // untruncated weight beyond the basis
    return s;
}

namespace {

// Conjugate on a padded basis and crop back, so the retained block carries the
// infinite-space values rather than truncation-edge artifacts. The cropped
// trace deficit is the honest leakage above the basis.
template <typename GeneratorAt>
FockState apply_unitary(const FockState& state, GeneratorAt&& generator_at) {
    const int pad = std::max(12, state.dim / 4);
    const int big = state.dim + pad;
    Eigen::MatrixXcd rho_big = Eigen::MatrixXcd::Zero(big, big);
    rho_big.topLeftCorner(state.dim, state.dim) = state.rho;
    const Eigen::MatrixXcd u = generator_at(big).exp();
    const Eigen::MatrixXcd moved = u * rho_big * u.adjoint();
    FockState out;
    out.dim = state.dim;
    out.rho = moved.topLeftCorner(state.dim, state.dim);
    out.trunc = state.trunc;
    out.trunc.trace_error +=
        std::abs(1.0 - out.rho.trace().real()) + std::abs(out.rho.trace().imag());
    return out;
}

} // namespace

FockState apply_displacement(const FockState& state, Complex alpha) {
    return apply_unitary(state, [&](int dim) {
        const Eigen::MatrixXcd a = annihilation_op(dim);
        return Eigen::MatrixXcd(alpha * a.adjoint() - std::conj(alpha) * a);
    });
}

FockState apply_squeeze(const FockState& state, SqueezeParam zeta) {
    return apply_unitary(state, [&](int dim) {
        const Eigen::MatrixXcd a = annihilation_op(dim);
        const Complex z = zeta.to_complex();
        return Eigen::MatrixXcd(0.5 * (std::conj(z) * a * a - z * a.adjoint() * a.adjoint()));
    });
}

FockState make_gaussian_state(const GaussianParams& params, int dim) {
    params.validate();
    // Compose on a padded basis and crop once at the end.
    const int big = dim + std::max(12, dim / 4);
    FockState s = make_thermal(params.n_thermal, big);
    s = apply_squeeze(s, params.squeeze);
    s = apply_displacement(s, params.alpha);
    FockState out;
    out.dim = dim;
    out.rho = s.rho.topLeftCorner(dim, dim);
    out.trunc = s.trunc;
    out.trunc.trace_error =
        std::abs(1.0 - out.rho.trace().real()) + std::abs(out.rho.trace().imag());
    return out;
}

Moment moment_from_string(const std::string& name) {
    if (name == "a") return Moment::A;
    if (name == "ad") return Moment::Ad;
    if (name == "aa") return Moment::AA;
    if (name == "adad") return Moment::AdAd;
    if (name == "n") return Moment::N;
    if (name == "adada") return Moment::AdAdA;
    if (name == "adaa") return Moment::AdAA;
    if (name == "adadaa") return Moment::AdAdAA;
    throw ValidationError("unknown moment id: " + name);
}

Complex expect(const FockState& state, Moment which) {
    const Eigen::MatrixXcd a = annihilation_op(state.dim);
    const Eigen::MatrixXcd ad = a.adjoint();
    Eigen::MatrixXcd op;
    switch (which) {
        case Moment::A: op = a; break;
        case Moment::Ad: op = ad; break;
        case Moment::AA: op = a * a; break;
        case Moment::AdAd: op = ad * ad; break;
        case Moment::N: op = ad * a; break;
        case Moment::AdAdA: op = ad * ad * a; break;
        case Moment::AdAA: op = ad * a * a; break;
        case Moment::AdAdAA: op = ad * ad * a * a; break;
    }
    return (op * state.rho).trace();
}

MomentSet all_moments(const FockState& state) {
    MomentSet m;
    m.a = expect(state, Moment::A);
    m.ad = expect(state, Moment::Ad);
    m.aa = expect(state, Moment::AA);
    m.adad = expect(state, Moment::AdAd);
    m.n = expect(state, Moment::N).real();
    m.adada = expect(state, Moment::AdAdA);
    m.adaa = expect(state, Moment::AdAA);
    m.adadaa = expect(state, Moment::AdAdAA).real();
    return m;
}

PhotonStats beam_split(const FockState& a_state, Complex beta, double gamma_t) {
    if (!(gamma_t > 0.0) || !(gamma_t < 1.0))
        throw ValidationError("beam_split: gamma_t must be in (0, 1)");

    const Eigen::MatrixXcd a = annihilation_op(a_state.dim);
    const Eigen::MatrixXcd ad = a.adjoint();
    const Eigen::MatrixXcd nop = ad * a;
    const auto tr = [&](const Eigen::MatrixXcd& op) { return (op * a_state.rho).trace(); };

    const Complex ma = tr(a);
    const Complex maa = tr(a * a);
    const Complex madaa = tr(ad * a * a);
    const double n = tr(nop).real();
    const double n2 = tr(nop * nop).real();

    const double G = gamma_t;
    const double g = 1.0 - gamma_t;
    const double s = std::sqrt(G * g);
    const double b2 = std::norm(beta);
    const Complex bc = std::conj(beta);
    const Complex I(0.0, 1.0);

    // interference term i*s*(<a+> beta - conj(beta) <a>)
    const double inter = std::real(I * s * (std::conj(ma) * beta - bc * ma));
    const double mean = G * n + g * b2 + inter;

    // <n_c^2> assembled term by term from the mode expansion, with the
    // homodyne mode entering through coherent-state moments only.
    const double j2 = std::real(
        -G * g * (std::conj(maa) * beta * beta + maa * bc * bc
                  - Complex(n * (b2 + 1.0) + (n + 1.0) * b2)));
    const double t5 = std::real(
        I * s * G * ((2.0 * std::conj(madaa) + std::conj(ma)) * beta - (2.0 * madaa + ma) * bc));
    const double t6 = std::real(
        I * s * g * (std::conj(ma) * (2.0 * beta * b2 + beta) - ma * (2.0 * bc * b2 + bc)));
    const double nc2 = G * G * n2 + g * g * (b2 * b2 + b2) + j2 + 2.0 * G * g * n * b2 + t5 + t6;

    PhotonStats out;
    out.mean = mean;
    out.variance = nc2 - mean * mean;
    return out;
}

} // namespace wigct
