#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "wigct/gaussian.hpp"

namespace wigct {

/// Trigonometric regression coefficients of the quadrature sweep:
/// mean = c cos(phi) + s sin(phi); variance = a0 + a2c cos(2phi) + a2s sin(2phi).
struct TrigFit {
    double mean_c = 0.0, mean_s = 0.0;
    double var_a0 = 0.0, var_a2c = 0.0, var_a2s = 0.0;
};

struct UnphysicalFitError : NumericalError {
    TrigFit trig;
    UnphysicalFitError(const std::string& msg, TrigFit t) : NumericalError(msg), trig(t) {}
};

struct LlsResult {
    GaussianParams params;
    TrigFit trig;
    double mean_residual = 0.0;
    double var_residual = 0.0;
};

/// Closed-form linear least squares on the two decoupled systems, mapped back
/// to (n_thermal, zeta, alpha). Needs >= 3 angles, distinct mod 360 for the
/// mean system and mod 180 for the variance system.
LlsResult lls_fit(const std::vector<QuadratureStats>& stats);

struct ParamBox {
    double n_max = 1.0;
    double r_max = 0.5;
    double alpha_max = 1.5;
};

struct Dataset {
    std::vector<double> angles_deg;
    Eigen::MatrixXd features; // count x 2N: (mean, variance) per angle
    Eigen::MatrixXd labels;   // count x 5: n_thermal, r, theta, Re alpha, Im alpha
    std::uint64_t seed = 0;
    double noise_mean_sigma = 0.0;
    double noise_var_sigma = 0.0;
};

Dataset gen_dataset(int count, std::uint64_t seed, const ParamBox& box,
                    const std::vector<double>& angles_deg, double noise_mean_sigma = 0.0,
                    double noise_var_sigma = 0.0);

struct NNConfig {
    int hidden = 64; // both hidden widths
    int epochs = 300;
    int batch = 128;
    double lr = 0.05;
    double momentum = 0.9;
    double lr_decay = 0.99; // per epoch
    double val_fraction = 0.125;
    std::uint64_t seed = 1;
};

/// Three dense layers, tanh hidden activations. Outputs are the wrap-free
/// encoding (n_thermal, r cos theta, r sin theta, Re alpha, Im alpha),
/// trained and stored in normalized feature/label space.
struct NNModel {
    std::vector<double> angles_deg;
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;
    Eigen::VectorXd feat_mean, feat_std;
    Eigen::VectorXd label_mean, label_std;
    std::string config_hash;
};

struct TrainResult {
    NNModel model;
    std::vector<double> train_loss; // per epoch, normalized MSE
    std::vector<double> val_loss;
    Eigen::VectorXd val_mae; // per output, denormalized units
};

TrainResult nn_train(const Dataset& dataset, const NNConfig& cfg);

/// Forward pass in normalized space (exposed for gradient checking).
Eigen::MatrixXd nn_forward(const NNModel& model, const Eigen::MatrixXd& x_norm);

/// Loss and flat parameter gradient on a normalized batch (gradient oracle hook).
double nn_loss_and_grad(const NNModel& model, const Eigen::MatrixXd& x_norm,
                        const Eigen::MatrixXd& t_norm, Eigen::VectorXd& grad);

Eigen::VectorXd nn_pack(const NNModel& model);
void nn_unpack(NNModel& model, const Eigen::VectorXd& flat);

GaussianParams nn_infer(const NNModel& model, const std::vector<QuadratureStats>& stats);

/// Label transform used by the network.
Eigen::VectorXd encode_label(const GaussianParams& p);
GaussianParams decode_label(const Eigen::VectorXd& y);

} // namespace wigct
