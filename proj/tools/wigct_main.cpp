#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wigct/pipeline.hpp"

namespace fs = std::filesystem;
using namespace wigct;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

int run_simulate(const std::string& config_path, const std::string& out,
                 std::uint64_t seed, bool seed_set) {
    ExperimentConfig cfg = config_from_json(read_json_file(config_path));
    if (seed_set) cfg.seed = seed;
    const SimulateResult res = simulate(cfg, out);
    std::cout << "simulate: wrote " << res.n_angles << " spectra and "
              << res.manifest_path.string() << "\n";
    return 0;
}

int run_reconstruct(const std::string& dir, const std::string& out, const ReconstructOptions& opts) {
    const ReconstructReport rep = reconstruct(dir, opts, out);
    std::cout << "reconstruct: method=" << method_to_string(rep.method)
              << " projections=" << rep.n_projections << "\n";
    const auto& p = rep.params;
    std::cout << "  params: n_thermal=" << p.n_thermal << " r=" << p.squeeze.r
              << " theta=" << p.squeeze.theta << " alpha=(" << p.alpha.real() << ","
              << p.alpha.imag() << ")\n";
    if (rep.nrmse_vs_truth >= 0.0)
        std::cout << "  nrmse_vs_truth=" << rep.nrmse_vs_truth
                  << " fidelity=" << rep.fidelity_vs_truth << "\n";
    std::cout << "  report: " << (fs::path(out) / "report.json").string() << "\n";
    return 0;
}

int run_calibrate(const std::string& samples_path, const std::string& out) {
    const auto samples = read_calibration_samples_csv(samples_path);
    const CalibrationCurves curves = calibrate(samples);
    fs::create_directories(out);
    write_json_file(fs::path(out) / "calibration.json", calibration_to_json(curves));
    std::cout << "calibrate: " << samples.size() << " samples, residuals n=" << curves.n_residual
              << " var=" << curves.var_residual << (curves.monotone ? "" : " [non-monotone cubic]")
              << "\n";
    return 0;
}

int run_train(const std::string& config_path, const std::string& out,
              std::uint64_t seed, bool seed_set) {
    const Json j = read_json_file(config_path);
    const int count = j.value("count", 32768);
    std::uint64_t data_seed = j.value("seed", std::uint64_t{7});
    if (seed_set) data_seed = seed;
    std::vector<double> angles = j.value("angles_deg", std::vector<double>{0.0, 60.0, 120.0});
    ParamBox box;
    if (j.contains("box")) {
        box.n_max = j.at("box").value("n_max", box.n_max);
        box.r_max = j.at("box").value("r_max", box.r_max);
        box.alpha_max = j.at("box").value("alpha_max", box.alpha_max);
    }
    double noise_mean = 0.0, noise_var = 0.0;
    if (j.contains("noise")) {
        noise_mean = j.at("noise").value("mean_sigma", 0.0);
        noise_var = j.at("noise").value("var_sigma", 0.0);
    }
    NNConfig nn;
    if (j.contains("nn")) {
        const auto& n = j.at("nn");
        nn.hidden = n.value("hidden", nn.hidden);
        nn.epochs = n.value("epochs", nn.epochs);
        nn.batch = n.value("batch", nn.batch);
        nn.lr = n.value("lr", nn.lr);
        nn.momentum = n.value("momentum", nn.momentum);
        nn.lr_decay = n.value("lr_decay", nn.lr_decay);
        nn.val_fraction = n.value("val_fraction", nn.val_fraction);
        nn.seed = n.value("seed", nn.seed);
    }

    const Dataset ds = gen_dataset(count, data_seed, box, angles, noise_mean, noise_var);
    const TrainResult tr = nn_train(ds, nn);

    fs::create_directories(out);
    write_model_json(fs::path(out) / "model.json", tr.model);
    if (j.value("write_dataset", false)) write_dataset(fs::path(out) / "dataset.bin", ds);

    std::cout << "train: " << count << " states, " << nn.epochs << " epochs\n";
    std::cout << "  final train loss " << tr.train_loss.back() << ", val loss "
              << tr.val_loss.back() << "\n";
    std::cout << "  val MAE per output:";
    for (int i = 0; i < tr.val_mae.size(); ++i) std::cout << ' ' << tr.val_mae(i);
    std::cout << "\n  model: " << (fs::path(out) / "model.json").string() << "\n";
    return 0;
}

int run_render(const std::string& grid_path, const std::string& out) {
    const WignerGrid grid = read_grid_csv(grid_path);
    fs::create_directories(out);
    const fs::path img = fs::path(out) / (fs::path(grid_path).stem().string() + ".pgm");
    write_grid_pgm16(img, grid);
    std::cout << "render: " << img.string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homodyne-assisted bolometric quadrature tomography of Gaussian microwave states"};
    app.require_subcommand(1);

    std::string config_path, dir, out = "out", samples_path, grid_path;
    std::uint64_t seed = 0;
    bool seed_set = false;
    ReconstructOptions ropts;
    std::string method = "fbp", solver = "l1";
    bool raw_extraction = false;

    auto* sim = app.add_subcommand("simulate", "Synthesize thermometer spectra for a Gaussian state");
    sim->add_option("--config", config_path, "experiment config JSON")->required();
    sim->add_option("--out", out, "output directory");
    sim->add_option("--seed", seed, "override the config seed")->each([&](const std::string&) {
        seed_set = true;
    });

    auto* rec = app.add_subcommand("reconstruct", "Reconstruct the Wigner function from spectra");
    rec->add_option("--dir", dir, "directory with spectra + manifest.json")->required();
    rec->add_option("--out", out, "output directory");
    rec->add_option("--method", method, "fbp|cs-dct|cs-wavelet|lls|nn");
    rec->add_option("--projections", ropts.num_projections, "number of folded projections to use");
    rec->add_option("--model", ropts.model_path, "trained model file (nn)");
    rec->add_option("--solver", solver, "cs solver: l1|ist");
    rec->add_option("--lambda", ropts.solver_lambda, "cs solver threshold/regularization");
    rec->add_option("--iters", ropts.solver_iters, "cs solver iteration cap");
    rec->add_option("--size-m", ropts.size_m, "grid pixels per axis (odd)");
    rec->add_option("--extent", ropts.extent, "grid half-width");
    rec->add_flag("--raw-extraction", raw_extraction,
                  "skip the finite-|beta| correction of the extracted variances");

    auto* cal = app.add_subcommand("calibrate", "Fit calibration curves from samples");
    cal->add_option("--samples", samples_path, "CSV: mu_hz,sigma2,n_mean,n_var")->required();
    cal->add_option("--out", out, "output directory");

    auto* trn = app.add_subcommand("train", "Generate states and train the inference network");
    trn->add_option("--config", config_path, "training config JSON")->required();
    trn->add_option("--out", out, "output directory");
    trn->add_option("--seed", seed, "override the dataset seed")->each([&](const std::string&) {
        seed_set = true;
    });

    auto* ren = app.add_subcommand("render", "Export a Wigner grid CSV as a 16-bit PGM");
    ren->add_option("--grid", grid_path, "grid CSV file")->required();
    ren->add_option("--out", out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(config_path, out, seed, seed_set);
        if (rec->parsed()) {
            ropts.method = method_from_string(method);
            ropts.exact_correction = !raw_extraction;
            if (solver == "l1")
                ropts.solver = SolverConfig::Kind::L1Min;
            else if (solver == "ist")
                ropts.solver = SolverConfig::Kind::IterativeThreshold;
            else
                throw ValidationError("unknown solver '" + solver + "' (l1|ist)");
            return run_reconstruct(dir, out, ropts);
        }
        if (cal->parsed()) return run_calibrate(samples_path, out);
        if (trn->parsed()) return run_train(config_path, out, seed, seed_set);
        if (ren->parsed()) return run_render(grid_path, out);
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
