#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "wigct/io.hpp"
#include "wigct/sparse.hpp"

namespace wigct {

struct SweepSpec {
    double start_deg = 0.0;
    double stop_deg = 360.0; // exclusive
    int count = 72;
    std::vector<double> angles() const; // uniform, endpoint excluded
};

struct GridSpec {
    int size_m = 101;
    double extent = 0.0; // <= 0: derived from the data (mean + 5 sigma, floor 4)
};

struct NoiseSpec {
    double spectrum_sigma = 0.0; // additive complex Gaussian per frequency point
};

struct SpectrumGrid {
    double f_lo_hz = 5.0e8;
    double f_hi_hz = 5.5e8;
    int points = 1001;
};

struct ThermometerSpec {
    double gamma_hz = 2.5e6;
    double gamma_c_hz = 1.0e6;
    double asym_rad = 0.08;
    Complex baseline{0.0, 0.0};
};

struct ExperimentConfig {
    GaussianParams state;
    ChainConfig chain;
    double beta2 = 15.3;
    SweepSpec angles;     // homodyne phases
    GridSpec grid;
    NoiseSpec noise;
    SpectrumGrid spectrum;
    ThermometerSpec thermometer;
    CalibrationCurves calibration; // defaults to the built-in synthetic curves
    std::uint64_t seed = 1;
    std::string method = "fbp";

    void validate() const;
};

ExperimentConfig config_from_json(const Json& j);
Json config_to_json(const ExperimentConfig& cfg);

/// Synthetic calibration curves used when the config carries none.
CalibrationCurves default_calibration();

struct SimulateResult {
    std::filesystem::path manifest_path;
    int n_angles = 0;
};

/// state -> moments -> exact chain statistics -> (mu, sigma2) via the inverse
/// calibration -> thermometer spectra (+ optional noise) + manifest.
SimulateResult simulate(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

enum class Method { Fbp, CsDct, CsWavelet, Lls, Nn };
Method method_from_string(const std::string& name);
std::string method_to_string(Method m);

struct ReconstructOptions {
    Method method = Method::Fbp;
    int num_projections = 0;      // 0: every folded angle
    bool exact_correction = true; // model-based removal of the finite-|beta| terms
    SolverConfig::Kind solver = SolverConfig::Kind::L1Min;
    double solver_lambda = 0.0; // 0: built-in defaults
    int solver_iters = 0;
    double solver_tol = 0.0;
    std::string model_path; // nn method
    int size_m = 0;         // 0: manifest grid
    double extent = 0.0;    // 0: manifest grid, else derived
};

struct ExtractionResult {
    std::vector<QuadratureStats> raw;       // plain algebraic inversion
    std::vector<QuadratureStats> corrected; // after self-consistent refinement
    GaussianParams fit;                     // trig-LLS state behind the correction
    int iterations = 0;
};

/// Defect-correction loop: estimate the state, push it through the exact
/// forward model, subtract the difference between its raw extraction and its
/// analytic quadrature stats. Fixed point: the state whose exact statistics
/// reproduce the measurement.
ExtractionResult refine_extraction(const std::vector<AngleStats>& series, const ChainConfig& cfg,
                                   double beta2, int max_iters = 16);

struct ReconstructReport {
    Method method = Method::Fbp;
    WignerGrid grid;
    GaussianParams params;                 // refit (fbp/cs) or direct (lls/nn)
    std::vector<QuadratureStats> stats;    // extraction used downstream
    int n_projections = 0;
    double nrmse_vs_truth = -1.0;          // < 0 when the manifest has no truth
    double fidelity_vs_truth = -1.0;
    Json details;
};

ReconstructReport reconstruct(const std::filesystem::path& spectra_dir,
                              const ReconstructOptions& opts,
                              const std::filesystem::path& out_dir);

/// Synthetic thermal-sweep calibration samples (cmd_calibrate demos/tests).
std::vector<CalibrationSample> synth_calibration_samples(int count, std::uint64_t seed,
                                                         double noise = 0.0);

} // namespace wigct
