#include "wigct/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "wigct/rng.hpp"

namespace wigct {

LlsResult lls_fit(const std::vector<QuadratureStats>& stats) {
    const int n = static_cast<int>(stats.size());
    if (n < 3) throw ValidationError("lls_fit: need at least 3 angles");

    Eigen::MatrixXd dm(n, 2), dv(n, 3);
    Eigen::VectorXd ym(n), yv(n);
    for (int i = 0; i < n; ++i) {
        const double phi = deg2rad(stats[i].angle_deg);
        dm(i, 0) = std::cos(phi);
        dm(i, 1) = std::sin(phi);
        dv(i, 0) = 1.0;
        dv(i, 1) = std::cos(2.0 * phi);
        dv(i, 2) = std::sin(2.0 * phi);
        ym(i) = stats[i].mean;
        yv(i) = stats[i].variance;
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qm(dm), qv(dv);
    qm.setThreshold(1e-9);
    qv.setThreshold(1e-9);
    if (qm.rank() < 2 || qv.rank() < 3)
        throw ValidationError("lls_fit: degenerate angle set (singular design matrix)");

    const Eigen::Vector2d cm = qm.solve(ym);
    const Eigen::Vector3d cv = qv.solve(yv);

    LlsResult out;
    out.trig = TrigFit{cm(0), cm(1), cv(0), cv(1), cv(2)};
    out.mean_residual = (dm * cm - ym).norm();
    out.var_residual = (dv * cv - yv).norm();

    const double mod = std::hypot(cv(1), cv(2)); // (n+1/2) sinh 2r
    const double a0 = cv(0);                     // (n+1/2) cosh 2r
    if (!(a0 > mod))
        throw UnphysicalFitError("lls_fit: variance modulation exceeds its mean (unphysical)",
                                 out.trig);
    const double half_n = std::sqrt(a0 * a0 - mod * mod); // n + 1/2
    double n_thermal = half_n - 0.5;
    if (n_thermal < 0.0 && n_thermal > -1e-9) n_thermal = 0.0;
    if (n_thermal < 0.0)
        throw UnphysicalFitError("lls_fit: fitted variance below the Heisenberg floor", out.trig);
    const double r = 0.25 * std::log((a0 + mod) / (a0 - mod));
    const double theta = mod > 1e-14 ? std::atan2(-cv(2), -cv(1)) : 0.0;

    out.params = GaussianParams(n_thermal, SqueezeParam(r, theta),
                                Complex(cm(0), cm(1)) / std::sqrt(2.0));
    return out;
}

Eigen::VectorXd encode_label(const GaussianParams& p) {
    Eigen::VectorXd y(5);
    y << p.n_thermal, p.squeeze.r * std::cos(p.squeeze.theta),
        p.squeeze.r * std::sin(p.squeeze.theta), p.alpha.real(), p.alpha.imag();
    return y;
}

GaussianParams decode_label(const Eigen::VectorXd& y) {
    const double r = std::hypot(y(1), y(2));
    const double theta = r > 1e-12 ? std::atan2(y(2), y(1)) : 0.0;
    return GaussianParams(std::max(y(0), 0.0), SqueezeParam(r, theta), Complex(y(3), y(4)));
}

Dataset gen_dataset(int count, std::uint64_t seed, const ParamBox& box,
                    const std::vector<double>& angles_deg, double noise_mean_sigma,
                    double noise_var_sigma) {
    if (count < 0) throw ValidationError("gen_dataset: negative count");
    if (angles_deg.empty()) throw ValidationError("gen_dataset: empty angle list");
    if (!(box.n_max >= 0.0) || !(box.r_max >= 0.0) || !(box.alpha_max >= 0.0))
        throw ValidationError("gen_dataset: empty parameter box");

    const int nf = 2 * static_cast<int>(angles_deg.size());
    Dataset ds;
    ds.angles_deg = angles_deg;
    ds.seed = seed;
    ds.noise_mean_sigma = noise_mean_sigma;
    ds.noise_var_sigma = noise_var_sigma;
    ds.features.resize(count, nf);
    ds.labels.resize(count, 5);

    auto rng = named_stream(seed, "dataset");
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (int i = 0; i < count; ++i) {
        const double n_t = box.n_max * uniform(rng);
        const double r = box.r_max * uniform(rng);
        const double theta = 2.0 * kPi * uniform(rng);
        const double amag = box.alpha_max * uniform(rng);
        const double aarg = 2.0 * kPi * uniform(rng);
        const GaussianParams p(n_t, SqueezeParam(r, theta), std::polar(amag, aarg));

        ds.labels(i, 0) = n_t;
        ds.labels(i, 1) = p.squeeze.r;
        ds.labels(i, 2) = p.squeeze.theta;
        ds.labels(i, 3) = p.alpha.real();
        ds.labels(i, 4) = p.alpha.imag();

        for (size_t a = 0; a < angles_deg.size(); ++a) {
            double mean = quad_mean(p, angles_deg[a]);
            double var = quad_var(p, angles_deg[a]);
            if (noise_mean_sigma > 0.0) mean += noise_mean_sigma * gauss(rng);
            if (noise_var_sigma > 0.0)
                var = std::max(var + noise_var_sigma * gauss(rng), 1e-3);
            ds.features(i, 2 * static_cast<int>(a)) = mean;
            ds.features(i, 2 * static_cast<int>(a) + 1) = var;
        }
    }
    return ds;
}

Eigen::MatrixXd nn_forward(const NNModel& m, const Eigen::MatrixXd& x_norm) {
    const Eigen::MatrixXd h1 =
        ((m.w1 * x_norm).colwise() + m.b1).array().tanh().matrix();
    const Eigen::MatrixXd h2 = ((m.w2 * h1).colwise() + m.b2).array().tanh().matrix();
    return (m.w3 * h2).colwise() + m.b3;
}

Eigen::VectorXd nn_pack(const NNModel& m) {
    Eigen::VectorXd v(m.w1.size() + m.b1.size() + m.w2.size() + m.b2.size() + m.w3.size() +
                      m.b3.size());
    int o = 0;
    const auto put = [&](const Eigen::MatrixXd& a) {
        std::copy(a.data(), a.data() + a.size(), v.data() + o);
        o += static_cast<int>(a.size());
    };
    put(m.w1);
    put(m.b1);
    put(m.w2);
    put(m.b2);
    put(m.w3);
    put(m.b3);
    return v;
}

void nn_unpack(NNModel& m, const Eigen::VectorXd& v) {
    int o = 0;
    const auto take = [&](Eigen::MatrixXd& a) {
        std::copy(v.data() + o, v.data() + o + a.size(), a.data());
        o += static_cast<int>(a.size());
    };
    Eigen::MatrixXd b1 = m.b1, b2 = m.b2, b3 = m.b3;
    take(m.w1);
    take(b1);
    take(m.w2);
    take(b2);
    take(m.w3);
    take(b3);
    m.b1 = b1.col(0);
    m.b2 = b2.col(0);
    m.b3 = b3.col(0);
}

double nn_loss_and_grad(const NNModel& m, const Eigen::MatrixXd& x, const Eigen::MatrixXd& t,
                        Eigen::VectorXd& grad) {
    const int batch = static_cast<int>(x.cols());
    const Eigen::MatrixXd z1 = (m.w1 * x).colwise() + m.b1;
    const Eigen::MatrixXd h1 = z1.array().tanh().matrix();
    const Eigen::MatrixXd z2 = (m.w2 * h1).colwise() + m.b2;
    const Eigen::MatrixXd h2 = z2.array().tanh().matrix();
    const Eigen::MatrixXd y = (m.w3 * h2).colwise() + m.b3;

    const Eigen::MatrixXd diff = y - t;
    const double loss = 0.5 * diff.squaredNorm() / batch;

    const Eigen::MatrixXd d3 = diff / batch;
    const Eigen::MatrixXd d2 =
        (m.w3.transpose() * d3).array() * (1.0 - h2.array().square());
    const Eigen::MatrixXd d1 =
        (m.w2.transpose() * d2.matrix()).array() * (1.0 - h1.array().square());

    NNModel g = m;
    g.w3 = d3 * h2.transpose();
    g.b3 = d3.rowwise().sum();
    g.w2 = d2.matrix() * h1.transpose();
    g.b2 = d2.matrix().rowwise().sum();
    g.w1 = d1.matrix() * x.transpose();
    g.b1 = d1.matrix().rowwise().sum();
    grad = nn_pack(g);
    return loss;
}

namespace {

NNModel init_model(int n_in, int hidden, int n_out, std::uint64_t seed,
                   const std::vector<double>& angles) {
    NNModel m;
    m.angles_deg = angles;
    auto rng = named_stream(seed, "nn-init");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const auto fill = [&](Eigen::MatrixXd& w, int rows, int cols) {
        w.resize(rows, cols);
        const double scale = std::sqrt(1.0 / cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < rows; ++i) w(i, j) = scale * gauss(rng);
    };
    fill(m.w1, hidden, n_in);
    fill(m.w2, hidden, hidden);
    fill(m.w3, n_out, hidden);
    m.b1 = Eigen::VectorXd::Zero(hidden);
    m.b2 = Eigen::VectorXd::Zero(hidden);
    m.b3 = Eigen::VectorXd::Zero(n_out);
    return m;
}

GaussianParams decode_from_row(const Dataset& ds, int row) {
    return GaussianParams(ds.labels(row, 0),
                          SqueezeParam(ds.labels(row, 1), ds.labels(row, 2)),
                          Complex(ds.labels(row, 3), ds.labels(row, 4)));
}

std::string hash_config(const NNConfig& cfg, const Dataset& ds) {
    std::ostringstream os;
    os << cfg.hidden << ':' << cfg.epochs << ':' << cfg.batch << ':' << cfg.lr << ':'
       << cfg.momentum << ':' << cfg.lr_decay << ':' << cfg.seed << ':' << ds.seed << ':'
       << ds.features.rows();
    for (double a : ds.angles_deg) os << ':' << a;
    std::ostringstream hex;
    hex << std::hex << fnv1a64(os.str());
    return hex.str();
}

} // namespace

TrainResult nn_train(const Dataset& ds, const NNConfig& cfg) {
    const int count = static_cast<int>(ds.features.rows());
    if (count < 16) throw ValidationError("nn_train: dataset too small");
    if (cfg.hidden < 1 || cfg.epochs < 1 || cfg.batch < 1 || !(cfg.lr > 0.0))
        throw ValidationError("nn_train: bad training configuration");

    const int n_in = static_cast<int>(ds.features.cols());
    const int n_out = 5;

    // Deterministic split, then per-feature/label affine normalization frozen
    // from the training part.
    std::vector<int> perm(count);
    std::iota(perm.begin(), perm.end(), 0);
    auto rng = named_stream(cfg.seed, "nn-split");
    std::shuffle(perm.begin(), perm.end(), rng);
    const int n_val = std::max(1, static_cast<int>(count * cfg.val_fraction));
    const int n_train = count - n_val;
    if (n_train < 8) throw ValidationError("nn_train: not enough training rows after the split");

    Eigen::MatrixXd xt(n_in, n_train), tt(n_out, n_train);
    Eigen::MatrixXd xv(n_in, n_val), tv(n_out, n_val);
    for (int i = 0; i < n_train; ++i) {
        xt.col(i) = ds.features.row(perm[i]).transpose();
        tt.col(i) = encode_label(decode_from_row(ds, perm[i]));
    }
    for (int i = 0; i < n_val; ++i) {
        xv.col(i) = ds.features.row(perm[n_train + i]).transpose();
        tv.col(i) = encode_label(decode_from_row(ds, perm[n_train + i]));
    }

    NNModel model = init_model(n_in, cfg.hidden, n_out, cfg.seed, ds.angles_deg);
    model.feat_mean = xt.rowwise().mean();
    model.feat_std = ((xt.colwise() - model.feat_mean).array().square().rowwise().sum() /
                      std::max(n_train - 1, 1))
                         .sqrt()
                         .matrix()
                         .cwiseMax(1e-9);
    model.label_mean = tt.rowwise().mean();
    model.label_std = ((tt.colwise() - model.label_mean).array().square().rowwise().sum() /
                       std::max(n_train - 1, 1))
                          .sqrt()
                          .matrix()
                          .cwiseMax(1e-9);
    model.config_hash = hash_config(cfg, ds);

    const auto normalize_x = [&](const Eigen::MatrixXd& x) {
        return ((x.colwise() - model.feat_mean).array().colwise() / model.feat_std.array())
            .matrix();
    };
    const auto normalize_t = [&](const Eigen::MatrixXd& t) {
        return ((t.colwise() - model.label_mean).array().colwise() / model.label_std.array())
            .matrix();
    };
    const Eigen::MatrixXd xtn = normalize_x(xt), ttn = normalize_t(tt);
    const Eigen::MatrixXd xvn = normalize_x(xv), tvn = normalize_t(tv);

    TrainResult out;
    Eigen::VectorXd velocity = Eigen::VectorXd::Zero(nn_pack(model).size());
    double lr = cfg.lr;
    auto shuffle_rng = named_stream(cfg.seed, "nn-shuffle");
    std::vector<int> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double epoch_loss = 0.0;
        int batches = 0;
        for (int start = 0; start < n_train; start += cfg.batch) {
            const int bs = std::min(cfg.batch, n_train - start);
            Eigen::MatrixXd xb(n_in, bs), tb(n_out, bs);
            for (int i = 0; i < bs; ++i) {
                xb.col(i) = xtn.col(order[start + i]);
                tb.col(i) = ttn.col(order[start + i]);
            }
            Eigen::VectorXd grad;
            const double loss = nn_loss_and_grad(model, xb, tb, grad);
            if (!std::isfinite(loss)) {
                std::ostringstream msg;
                msg << "nn_train: NaN loss at epoch " << epoch << ", lr " << lr;
                throw NumericalError(msg.str());
            }
            velocity = cfg.momentum * velocity - lr * grad;
            nn_unpack(model, nn_pack(model) + velocity);
            epoch_loss += loss;
            ++batches;
        }
        out.train_loss.push_back(epoch_loss / std::max(batches, 1));
        const Eigen::MatrixXd yv = nn_forward(model, xvn);
        out.val_loss.push_back(0.5 * (yv - tvn).squaredNorm() / n_val);
        lr *= cfg.lr_decay;
    }

    const Eigen::MatrixXd yv = nn_forward(model, xvn);
    const Eigen::MatrixXd err =
        (yv - tvn).array().colwise() * model.label_std.array(); // denormalized
    out.val_mae = err.cwiseAbs().rowwise().mean();
    out.model = std::move(model);
    return out;
}

GaussianParams nn_infer(const NNModel& model, const std::vector<QuadratureStats>& stats) {
    if (stats.size() != model.angles_deg.size())
        throw ValidationError("nn_infer: angle set does not match the trained configuration");
    Eigen::VectorXd x(2 * stats.size());
    std::vector<QuadratureStats> sorted = stats;
    std::sort(sorted.begin(), sorted.end(),
              [](const QuadratureStats& a, const QuadratureStats& b) { return a.angle_deg < b.angle_deg; });
    for (size_t i = 0; i < sorted.size(); ++i) {
        if (std::abs(sorted[i].angle_deg - model.angles_deg[i]) > 1e-6)
            throw ValidationError("nn_infer: angle set does not match the trained configuration");
        x(2 * i) = sorted[i].mean;
        x(2 * i + 1) = sorted[i].variance;
    }
    const Eigen::VectorXd xn =
        (x - model.feat_mean).array() / model.feat_std.array();
    const Eigen::VectorXd yn = nn_forward(model, xn);
    const Eigen::VectorXd y =
        (yn.array() * model.label_std.array()).matrix() + model.label_mean;
    return decode_label(y);
}

} // namespace wigct
