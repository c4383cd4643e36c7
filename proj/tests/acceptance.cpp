// Acceptance suite: runs every criterion end to end and prints one
// pass/fail line each. Exit code 0 only if all criteria hold.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "wigct/faddeeva.hpp"
#include "wigct/pipeline.hpp"

using namespace wigct;
namespace fs = std::filesystem;

namespace {

const GaussianParams kFig4State(0.71, SqueezeParam::from_complex(Complex(0.16, -0.13)),
                                Complex(0.55, 0.25));

struct Outcome {
    bool pass = false;
    std::string detail;
};

int g_failures = 0;

void run(const std::string& id, const std::function<Outcome()>& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
        out = fn();
    } catch (const std::exception& e) {
        out.pass = false;
        out.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %-3s (%6.1f s) %s\n", out.pass ? "PASS" : "FAIL", id.c_str(), secs,
                out.detail.c_str());
    std::fflush(stdout);
    if (!out.pass) ++g_failures;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

// Shared between A5/A6/A7/A8.
struct PipelineArtifacts {
    fs::path sim_dir;
    bool ready = false;
    double nrmse_fbp36 = -1.0;
} g_pipe;

ExperimentConfig a5_config() {
    ExperimentConfig cfg;
    cfg.state = kFig4State;
    cfg.chain = ChainConfig{};
    cfg.beta2 = 15.3;
    cfg.angles = SweepSpec{0.0, 360.0, 72}; // 36 distinct projections after folding
    cfg.grid = GridSpec{101, 0.0};
    cfg.spectrum = SpectrumGrid{};
    cfg.seed = 1;
    cfg.calibration = default_calibration();
    return cfg;
}

Outcome a1_thermal_occupation() {
    const double n = thermal_occupation(1.0, ChainConfig{});
    return {std::abs(n - 0.45) <= 0.005,
            fmt("thermal_occupation(1 K) = %.4f, bound 0.45 +- 0.005", n)};
}

Outcome a2_coherent_inference() {
    const double variance = 0.72;
    const double n = variance - 0.5; // Heisenberg gap is the thermal population
    const bool pass = std::abs(n - 0.22) <= 0.005;
    return {pass, fmt("variance 0.72 => n_thermal = %.4f (gap vs 0.5 = %.4f), bound 0.22 +- 0.005",
                      n, variance - 0.5)};
}

Outcome a3_squeezed_inference() {
    const double vmax = 1.79, vmin = 0.85;
    const double r = 0.25 * std::log(vmax / vmin);
    const double db = 10.0 * std::log10(vmax / vmin) / 2.0;
    const double n = std::sqrt(vmax * vmin) - 0.5;
    const bool pass =
        std::abs(r - 0.19) <= 0.005 && std::abs(db - 1.6) <= 0.05 && std::abs(n - 0.73) <= 0.01;
    return {pass, fmt("r = %.4f (0.19 +- 0.005), %.3f dB (1.6 +- 0.05), n_thermal = %.4f "
                      "(0.73 +- 0.01)",
                      r, db, n)};
}

Outcome a4_large_beta_convergence() {
    const ChainConfig cfg;
    const std::vector<GaussianParams> states = {
        GaussianParams(0.45, SqueezeParam(), 0.0),
        GaussianParams(0.22, SqueezeParam(), Complex(-0.06, -0.36)),
        GaussianParams(0.7334909809155477, SqueezeParam(0.18618363733760965, kPi), 0.0)};
    std::ostringstream detail;
    for (const auto& state : states) {
        const MomentSet m = moments(state);
        double prev = 1e18;
        double dev_at_10n = -1.0;
        for (double b2 : {1.0, 2.0, 4.0, 8.0, 15.3, 30.0, 60.0}) {
            std::vector<AngleStats> series;
            for (int k = 0; k < 18; ++k) {
                const double phi = 20.0 * k;
                series.push_back(AngleStats{
                    phi, combined_stats_exact(m, cfg.gamma_t,
                                              std::polar(std::sqrt(b2), deg2rad(phi)))});
            }
            const auto folded = fold_to_half_circle(extract_quadratures(series, cfg, b2));
            double dev = 0.0;
            for (const auto& q : folded)
                dev = std::max(dev, std::abs(q.variance - quad_var(state, q.angle_deg)));
            if (dev > prev * (1.0 + 1e-9))
                return {false, fmt("deviation not monotone at |beta|^2 = %.1f (%.4f > %.4f)", b2,
                                   dev, prev)};
            prev = dev;
            if (b2 >= 10.0 * state.n_thermal && dev > 0.2)
                return {false, fmt("deviation %.3f > 0.2 at |beta|^2 = %.1f >= 10 n_thermal", dev,
                                   b2)};
            if (dev_at_10n < 0.0 && b2 >= 10.0 * state.n_thermal) dev_at_10n = dev;
        }
        detail << fmt("n=%.2f: dev(first |b|^2 >= 10n) = %.3f; ", state.n_thermal, dev_at_10n);
    }
    return {true, detail.str() + "all monotone, <= 0.2 beyond 10 n_thermal"};
}

Outcome a5_end_to_end_fbp() {
    g_pipe.sim_dir = fs::temp_directory_path() / "wigct_acceptance" / "a5_sim";
    fs::remove_all(g_pipe.sim_dir);
    simulate(a5_config(), g_pipe.sim_dir);
    g_pipe.ready = true;

    ReconstructOptions opts;
    opts.method = Method::Fbp;
    const ReconstructReport rep =
        reconstruct(g_pipe.sim_dir, opts, g_pipe.sim_dir.parent_path() / "a5_fbp");
    g_pipe.nrmse_fbp36 = rep.nrmse_vs_truth;

    const double r_true = kFig4State.squeeze.r;
    const bool pass = rep.n_projections == 36 && rep.nrmse_vs_truth <= 0.05 &&
                      std::abs(rep.params.n_thermal - 0.71) <= 0.05 * 0.71 &&
                      std::abs(rep.params.squeeze.r - r_true) <= 0.05 * r_true &&
                      std::abs(rep.params.alpha.real() - 0.55) <= 0.03 &&
                      std::abs(rep.params.alpha.imag() - 0.25) <= 0.03;
    return {pass,
            fmt("N=%d, NRMSE = %.4f (<= 0.05), n=%.4f (0.71 +- 5%%), r=%.4f (%.4f +- 5%%), "
                "alpha=(%.3f,%.3f) (+- 0.03)",
                rep.n_projections, rep.nrmse_vs_truth, rep.params.n_thermal, rep.params.squeeze.r,
                r_true, rep.params.alpha.real(), rep.params.alpha.imag())};
}

Outcome a6_saturation() {
    if (!g_pipe.ready) return {false, "A5 dataset unavailable"};
    std::ostringstream detail;
    double prev = 1e18;
    double e12 = -1.0, e36 = -1.0;
    for (int n : {2, 4, 6, 9, 12, 18, 36}) {
        ReconstructOptions opts;
        opts.method = Method::Fbp;
        opts.num_projections = n;
        const ReconstructReport rep = reconstruct(
            g_pipe.sim_dir, opts, g_pipe.sim_dir.parent_path() / ("a6_" + std::to_string(n)));
        const double e = rep.nrmse_vs_truth;
        detail << fmt("N=%d:%.4f ", n, e);
        if (e > prev * (1.0 + 1e-9)) return {false, detail.str() + "- not monotone"};
        prev = e;
        if (n == 12) e12 = e;
        if (n == 36) e36 = e;
    }
    const bool pass = e12 <= 1.1 * e36;
    return {pass, detail.str() + fmt("; NRMSE(12) = %.4f <= 1.1 x NRMSE(36) = %.4f", e12, 1.1 * e36)};
}

Outcome a7_compressed_sensing() {
    if (!g_pipe.ready || g_pipe.nrmse_fbp36 < 0.0) return {false, "A5 dataset unavailable"};
    const double bound = 2.0 * g_pipe.nrmse_fbp36;
    std::ostringstream detail;

    for (const auto solver : {SolverConfig::Kind::L1Min, SolverConfig::Kind::IterativeThreshold}) {
        ReconstructOptions opts;
        opts.method = Method::CsDct;
        opts.num_projections = 9;
        opts.solver = solver;
        const char* name = solver == SolverConfig::Kind::L1Min ? "l1" : "ist";
        const ReconstructReport rep = reconstruct(
            g_pipe.sim_dir, opts, g_pipe.sim_dir.parent_path() / (std::string("a7_") + name));
        detail << fmt("%s: NRMSE %.4f (<= %.4f); ", name, rep.nrmse_vs_truth, bound);
        if (rep.nrmse_vs_truth > bound) return {false, detail.str() + "- over budget"};
    }

    // exact-sparsity synthetic: 20 DCT atoms recovered from 9 projections
    const int m = 101;
    const double extent = 4.5;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick(0, 14);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < 20; ++k) coeffs(pick(rng), pick(rng)) += gauss(rng);
    const Eigen::MatrixXd truth = dct2_synthesis(coeffs);

    std::vector<double> angles(9);
    for (int i = 0; i < 9; ++i) angles[i] = 20.0 * i;
    MeasurementSystem sys = build_measurement(angles, m, extent);
    Eigen::VectorXd vec(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) vec(i * m + j) = truth(i, j);
    sys.rhs = sys.matrix * vec;

    SparseBasis dct;
    SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, dct.kind);
    cfg.tol = 1e-7;
    const SolveResult sol = solve(sys, dct, cfg);
    const double range = truth.maxCoeff() - truth.minCoeff();
    const double err = std::sqrt((sol.grid.values - truth).squaredNorm() / (m * m)) / range;
    detail << fmt("exact-sparsity NRMSE %.2e (<= 1e-3)", err);
    return {err <= 1e-3, detail.str()};
}

Outcome a8_ultra_sparse() {
    // lls exactness at N = 3
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::vector<double> angles{0.0, 60.0, 120.0};
    for (int trial = 0; trial < 50; ++trial) {
        const GaussianParams p(u(rng), SqueezeParam(0.5 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(1.5 * u(rng), 2.0 * kPi * u(rng)));
        std::vector<QuadratureStats> stats;
        for (double a : angles) stats.push_back(QuadratureStats{a, quad_mean(p, a), quad_var(p, a)});
        const LlsResult fit = lls_fit(stats);
        if (std::abs(fit.params.n_thermal - p.n_thermal) > 1e-9 ||
            std::abs(fit.params.squeeze.r - p.squeeze.r) > 1e-9 ||
            std::abs(fit.params.alpha - p.alpha) > 1e-9)
            return {false, "lls N=3 noiseless recovery missed 1e-9"};
    }

    // 32768-state training run
    const Dataset ds = gen_dataset(32768, 7, ParamBox{}, angles);
    NNConfig cfg;
    cfg.hidden = 64;
    cfg.epochs = 160;
    cfg.batch = 256;
    cfg.lr = 0.08;
    cfg.momentum = 0.9;
    cfg.lr_decay = 0.975;
    cfg.seed = 1;
    const TrainResult tr = nn_train(ds, cfg);
    const double mae = tr.val_mae.maxCoeff();
    if (!(mae <= 0.02))
        return {false, fmt("validation MAE %.4f > 0.02", mae)};

    if (!g_pipe.ready) return {false, "A5 dataset unavailable"};
    const fs::path out = g_pipe.sim_dir.parent_path();
    write_model_json(out / "a8_model.json", tr.model);

    ReconstructOptions lls_opts;
    lls_opts.method = Method::Lls;
    lls_opts.num_projections = 3;
    const ReconstructReport lls_rep = reconstruct(g_pipe.sim_dir, lls_opts, out / "a8_lls");

    ReconstructOptions nn_opts;
    nn_opts.method = Method::Nn;
    nn_opts.model_path = (out / "a8_model.json").string();
    const ReconstructReport nn_rep = reconstruct(g_pipe.sim_dir, nn_opts, out / "a8_nn");

    const Eigen::VectorXd a = encode_label(lls_rep.params);
    const Eigen::VectorXd b = encode_label(nn_rep.params);
    double worst = 0.0;
    for (int i = 0; i < 5; ++i)
        worst = std::max(worst, std::abs(a(i) - b(i)) / std::max(std::abs(a(i)), 0.2));
    const bool pass = worst <= 0.10;
    return {pass, fmt("val MAE = %.4f (<= 0.02); NN vs LLS on the A5 state: worst relative "
                      "difference %.3f (<= 0.10)",
                      mae, worst)};
}

Outcome a9_oracle_equivalence() {
    std::mt19937_64 rng(20260809);
    std::uniform_real_distribution<double> u(0.0, 1.0);

    // Gate: the box the module invariants state for dim-60 / 1e-6 agreement.
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const GaussianParams p(u(rng), SqueezeParam(0.3 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(u(rng), 2.0 * kPi * u(rng)));
        const MomentSet f = all_moments(make_gaussian_state(p, 60));
        const MomentSet c = moments(p);
        for (double d : {std::abs(f.a - c.a), std::abs(f.aa - c.aa), std::abs(f.n - c.n),
                         std::abs(f.adaa - c.adaa), std::abs(f.adadaa - c.adadaa)})
            worst = std::max(worst, d);
    }

    // Diagnostic only: the wider training box exceeds what any dim-60 basis
    // can represent at its hot corner (see the decisions ledger).
    double worst_d26 = 0.0;
    for (int i = 0; i < 200; ++i) {
        const GaussianParams p(u(rng), SqueezeParam(0.5 * u(rng), 2.0 * kPi * u(rng)),
                               std::polar(1.5 * u(rng), 2.0 * kPi * u(rng)));
        const MomentSet f = all_moments(make_gaussian_state(p, 60));
        const MomentSet c = moments(p);
        for (double d : {std::abs(f.a - c.a), std::abs(f.aa - c.aa), std::abs(f.n - c.n),
                         std::abs(f.adaa - c.adaa), std::abs(f.adadaa - c.adadaa)})
            worst_d26 = std::max(worst_d26, d);
    }
    return {worst <= 1e-6,
            fmt("200 states, dim 60: worst |closed - oracle| = %.2e (<= 1e-6 over the validated "
                "box); wider training box diagnostic: %.2e (truncation-limited)",
                worst, worst_d26)};
}

Outcome a10_numerical_kernels() {
    // complex erfcx vs the series/continued-fraction oracle
    double worst_erfcx = 0.0;
    for (int ir = 0; ir < 10; ++ir) {
        const double r = 0.01 * std::pow(10.0, 5.0 * ir / 9.0);
        for (int ia = 0; ia < 10; ++ia) {
            const double arg = (-89.5 + 179.0 * ia / 9.0) * kPi / 180.0;
            const Complex z = std::polar(r, arg);
            const Complex mine = wigct::erfcx(z);
            const Complex ref = oracles::erfcx(z);
            worst_erfcx = std::max(worst_erfcx, std::abs(mine - ref) / std::abs(ref));
        }
    }
    if (worst_erfcx > 1e-10) return {false, fmt("erfcx relative error %.2e > 1e-10", worst_erfcx)};

    // NN gradient vs central finite differences
    const Dataset ds = gen_dataset(64, 3, ParamBox{}, {0.0, 60.0, 120.0});
    NNConfig cfg;
    cfg.hidden = 8;
    cfg.epochs = 1;
    cfg.batch = 16;
    cfg.lr = 1e-3;
    const NNModel model = nn_train(ds, cfg).model;
    Eigen::MatrixXd x(6, 2), t(5, 2);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int j = 0; j < 2; ++j) {
        for (int i = 0; i < 6; ++i) x(i, j) = gauss(rng);
        for (int i = 0; i < 5; ++i) t(i, j) = gauss(rng);
    }
    Eigen::VectorXd grad;
    nn_loss_and_grad(model, x, t, grad);
    const Eigen::VectorXd theta = nn_pack(model);
    double worst_grad = 0.0;
    std::uniform_int_distribution<int> pick(0, static_cast<int>(theta.size()) - 1);
    for (int probe = 0; probe < 80; ++probe) {
        const int k = pick(rng);
        const double h = 1e-6 * std::max(1.0, std::abs(theta(k)));
        Eigen::VectorXd tp = theta, tm = theta;
        tp(k) += h;
        tm(k) -= h;
        NNModel mp = model, mm = model;
        nn_unpack(mp, tp);
        nn_unpack(mm, tm);
        Eigen::VectorXd dummy;
        const double fd = (nn_loss_and_grad(mp, x, t, dummy) - nn_loss_and_grad(mm, x, t, dummy)) /
                          (2.0 * h);
        worst_grad = std::max(worst_grad, std::abs(fd - grad(k)) / std::max(1e-8, std::abs(fd)));
    }
    if (worst_grad > 1e-5) return {false, fmt("NN gradient error %.2e > 1e-5", worst_grad)};

    // Wigner normalization
    for (const auto& p : {GaussianParams(0.0, SqueezeParam(), 0.0), kFig4State}) {
        const double mass = wigner_eval(p, 101, default_extent(p)).mass();
        if (std::abs(mass - 1.0) > 1e-3) return {false, fmt("Wigner mass %.5f off unity", mass)};
    }

    // Parseval for both bases
    std::mt19937_64 prng(5);
    Eigen::MatrixXd noise(128, 128);
    for (int i = 0; i < 128; ++i)
        for (int j = 0; j < 128; ++j) noise(i, j) = gauss(prng);
    const double dct_gap =
        std::abs(dct2_analysis(noise.topLeftCorner(101, 101)).squaredNorm() -
                 noise.topLeftCorner(101, 101).squaredNorm());
    const double dwt_gap = std::abs(dwt2_analysis(noise, 4, 3).squaredNorm() - noise.squaredNorm());
    if (dct_gap / noise.topLeftCorner(101, 101).squaredNorm() > 1e-10 ||
        dwt_gap / noise.squaredNorm() > 1e-10)
        return {false, "basis Parseval identity broken"};

    return {true, fmt("erfcx %.1e; grad %.1e; mass ok; Parseval ok", worst_erfcx, worst_grad)};
}

} // namespace

int main() {
    std::printf("acceptance criteria\n-------------------\n");
    run("A1", a1_thermal_occupation);
    run("A2", a2_coherent_inference);
    run("A3", a3_squeezed_inference);
    run("A4", a4_large_beta_convergence);
    run("A5", a5_end_to_end_fbp);
    run("A6", a6_saturation);
    run("A7", a7_compressed_sensing);
    run("A8", a8_ultra_sparse);
    run("A9", a9_oracle_equivalence);
    run("A10", a10_numerical_kernels);
    std::printf("-------------------\n%s (%d failure%s)\n", g_failures ? "FAILURE" : "SUCCESS",
                g_failures, g_failures == 1 ? "" : "s");
    return g_failures ? 1 : 0;
}
