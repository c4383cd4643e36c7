#pragma once

#include <Eigen/Dense>

#include "wigct/bolometry.hpp"
#include "wigct/gaussian.hpp"

namespace wigct {

struct TruncationReport {
    double tail_mass = 0.0;   // Boltzmann weight beyond the truncated basis
    double trace_error = 0.0; // |1 - tr(rho)| accumulated through unitaries
    bool ok(double tol = 1e-6) const { return tail_mass <= tol && trace_error <= tol; }
};

/// Density matrix on a truncated Fock basis.
struct FockState {
    int dim = 0;
    Eigen::MatrixXcd rho;
    TruncationReport trunc;
};

Eigen::MatrixXcd annihilation_op(int dim);

FockState make_thermal(double n_thermal, int dim);
FockState apply_displacement(const FockState& state, Complex alpha);
FockState apply_squeeze(const FockState& state, SqueezeParam zeta);

/// D(alpha) S(zeta) rho_T S+ D+ at the given truncation.
FockState make_gaussian_state(const GaussianParams& params, int dim);

enum class Moment { A, Ad, AA, AdAd, N, AdAdA, AdAA, AdAdAA };

Moment moment_from_string(const std::string& name); // throws ValidationError on unknown id

Complex expect(const FockState& state, Moment which);

MomentSet all_moments(const FockState& state);

/// Exact photon statistics after mixing with a coherent homodyne field on a
/// beam splitter of transmissivity gamma_t. The homodyne mode is handled
/// analytically; only single-mode operator traces of the input enter.
PhotonStats beam_split(const FockState& a, Complex beta, double gamma_t);

} // namespace wigct
