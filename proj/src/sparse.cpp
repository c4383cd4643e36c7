#include "wigct/sparse.hpp"

#include <algorithm>
#include <cmath>

namespace wigct {

MeasurementSystem build_measurement(const std::vector<double>& angles_deg, int size_m,
                                    double extent) {
    if (size_m % 2 == 0 || size_m < 3)
        throw ValidationError("build_measurement: size_m must be odd and >= 3");
    if (angles_deg.empty()) throw ValidationError("build_measurement: empty angle list");

    MeasurementSystem sys;
    sys.angles_deg = angles_deg;
    sys.size_m = size_m;
    sys.extent = extent;

    const int n_rows = static_cast<int>(angles_deg.size()) * size_m;
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<size_t>(n_rows) * 2 * size_m);
    for (size_t a = 0; a < angles_deg.size(); ++a) {
        for (int j = 0; j < size_m; ++j) {
            const int row = static_cast<int>(a) * size_m + j;
            radon_ray(angles_deg[a], j, size_m, extent, [&](int ix, int ip, double w) {
                triplets.emplace_back(row, ix * size_m + ip, w);
            });
        }
    }
    sys.matrix.resize(n_rows, size_m * size_m);
    sys.matrix.setFromTriplets(triplets.begin(), triplets.end());
    sys.rhs = Eigen::VectorXd::Zero(n_rows);
    return sys;
}

void set_rhs(MeasurementSystem& sys, const Sinogram& sinogram) {
    if (sinogram.bins != sys.size_m || std::abs(sinogram.range - sys.extent) > 1e-12)
        throw ValidationError("set_rhs: sinogram bins/range do not match the system");
    if (sinogram.angles_deg.size() != sys.angles_deg.size())
        throw ValidationError("set_rhs: angle count mismatch");
    for (size_t a = 0; a < sys.angles_deg.size(); ++a)
        if (std::abs(sinogram.angles_deg[a] - sys.angles_deg[a]) > 1e-9)
            throw ValidationError("set_rhs: angle mismatch");
    const Eigen::MatrixXd profiles = sinogram.sampled_profiles();
    for (size_t a = 0; a < sys.angles_deg.size(); ++a)
        for (int j = 0; j < sys.size_m; ++j)
            sys.rhs(static_cast<int>(a) * sys.size_m + j) = profiles(static_cast<int>(a), j);
}

Eigen::MatrixXd dct_matrix(int n) {
    Eigen::MatrixXd c(n, n);
    const double s0 = std::sqrt(1.0 / n);
    const double sk = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < n; ++j)
            c(k, j) = (k == 0 ? s0 : sk) * std::cos(kPi * (2 * j + 1) * k / (2.0 * n));
    return c;
}

Eigen::MatrixXd dct2_analysis(const Eigen::MatrixXd& grid) {
    const Eigen::MatrixXd c = dct_matrix(static_cast<int>(grid.rows()));
    return c * grid * c.transpose();
}

Eigen::MatrixXd dct2_synthesis(const Eigen::MatrixXd& coeffs) {
    const Eigen::MatrixXd c = dct_matrix(static_cast<int>(coeffs.rows()));
    return c.transpose() * coeffs * c;
}

std::vector<double> daubechies_filter(int order) {
    // Spectral-factorization values at full double precision.
    switch (order) {
        case 1:
            return {0.70710678118654752, 0.70710678118654752};
        case 2:
            return {0.48296291314453414, 0.83651630373780791, 0.22414386804201338,
                    -0.12940952255126038};
        case 3:
            return {0.33267055295008262, 0.80689150931109258, 0.45987750211849157,
                    -0.13501102001025459, -0.085441273882026662, 0.035226291885709537};
        case 4:
            return {0.23037781330889650, 0.71484657055291565, 0.63088076792985891,
                    -0.027983769416859854, -0.18703481171909308, 0.030841381835560764,
                    0.032883011666885200, -0.010597401785069032};
        default:
            throw ValidationError("daubechies_filter: order must be 1..4");
    }
}

namespace {

// One analysis level on the first n entries (periodic wrapping): first half
// approximation, second half detail.
void dwt_step(Eigen::VectorXd& x, int n, const std::vector<double>& h) {
    const int half = n / 2;
    const int taps = static_cast<int>(h.size());
    Eigen::VectorXd out(n);
    for (int j = 0; j < half; ++j) {
        double a = 0.0, d = 0.0;
        for (int k = 0; k < taps; ++k) {
            const double v = x((2 * j + k) % n);
            a += h[k] * v;
            d += (k % 2 == 0 ? 1.0 : -1.0) * h[taps - 1 - k] * v;
        }
        out(j) = a;
        out(half + j) = d;
    }
    x.head(n) = out;
}

// Adjoint of dwt_step (the transform is orthogonal).
void idwt_step(Eigen::VectorXd& x, int n, const std::vector<double>& h) {
    const int half = n / 2;
    const int taps = static_cast<int>(h.size());
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int j = 0; j < half; ++j) {
        const double a = x(j);
        const double d = x(half + j);
        for (int k = 0; k < taps; ++k) {
            const double g = (k % 2 == 0 ? 1.0 : -1.0) * h[taps - 1 - k];
            out((2 * j + k) % n) += h[k] * a + g * d;
        }
    }
    x.head(n) = out;
}

void check_dwt_size(int n, int levels) {
    if (levels < 1) throw ValidationError("dwt2: levels must be >= 1");
    int s = n;
    for (int l = 0; l < levels; ++l) {
        if (s % 2 != 0) throw ValidationError("dwt2: size must be divisible by 2^levels");
        s /= 2;
    }
    if (s < 1) throw ValidationError("dwt2: too many levels for this size");
}

} // namespace

Eigen::MatrixXd dwt2_analysis(const Eigen::MatrixXd& grid, int order, int levels) {
    const auto h = daubechies_filter(order);
    const int n = static_cast<int>(grid.rows());
    if (grid.cols() != n) throw ValidationError("dwt2: square input required");
    check_dwt_size(n, levels);

    Eigen::MatrixXd out = grid;
    Eigen::VectorXd buf(n);
    for (int level = 0, s = n; level < levels; ++level, s /= 2) {
        for (int i = 0; i < s; ++i) { // rows
            buf.head(s) = out.row(i).head(s);
            dwt_step(buf, s, h);
            out.row(i).head(s) = buf.head(s);
        }
        for (int j = 0; j < s; ++j) { // columns
            buf.head(s) = out.col(j).head(s);
            dwt_step(buf, s, h);
            out.col(j).head(s) = buf.head(s);
        }
    }
    return out;
}

Eigen::MatrixXd dwt2_synthesis(const Eigen::MatrixXd& coeffs, int order, int levels) {
    const auto h = daubechies_filter(order);
    const int n = static_cast<int>(coeffs.rows());
    if (coeffs.cols() != n) throw ValidationError("dwt2: square input required");
    check_dwt_size(n, levels);

    Eigen::MatrixXd out = coeffs;
    Eigen::VectorXd buf(n);
    for (int level = levels - 1; level >= 0; --level) {
        const int s = n >> level;
        for (int j = 0; j < s; ++j) {
            buf.head(s) = out.col(j).head(s);
            idwt_step(buf, s, h);
            out.col(j).head(s) = buf.head(s);
        }
        for (int i = 0; i < s; ++i) {
            buf.head(s) = out.row(i).head(s);
            idwt_step(buf, s, h);
            out.row(i).head(s) = buf.head(s);
        }
    }
    return out;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double lambda) {
    if (lambda < 0.0) throw ValidationError("soft_threshold: lambda must be non-negative");
    return v.array().sign() * (v.array().abs() - lambda).max(0.0);
}

SolverConfig SolverConfig::defaults(Kind kind, SparseBasis::Kind basis) {
    SolverConfig cfg;
    cfg.kind = kind;
    if (kind == Kind::L1Min) {
        cfg.max_iters = 4000;
        cfg.lambda = basis == SparseBasis::Kind::Dct2d ? 2e-6 : 4e-6;
        cfg.tol = 2e-3;
    } else {
        cfg.max_iters = 600;
        cfg.lambda = basis == SparseBasis::Kind::Dct2d ? 1e-4 : 2e-4;
        cfg.tol = 2e-3;
    }
    return cfg;
}

namespace {

// Orthonormal basis wiring between the coefficient domain and the grid the
// measurement matrix sees. The wavelet path runs on a dyadic frame with the
// grid embedded in the center; crop/embed are mutually adjoint.
struct BasisOps {
    SparseBasis basis;
    int grid_m;
    int frame_n; // coefficient frame size (grid_m for DCT, padded for DWT)
    int off;

    explicit BasisOps(const SparseBasis& b, int grid_m_) : basis(b), grid_m(grid_m_) {
        if (b.kind == SparseBasis::Kind::Dct2d) {
            frame_n = grid_m;
            off = 0;
        } else {
            frame_n = 1;
            while (frame_n < grid_m) frame_n <<= 1;
            check_size();
            off = (frame_n - grid_m) / 2;
        }
    }
    void check_size() const {
        int s = frame_n;
        for (int l = 0; l < basis.levels; ++l) s /= 2;
        if (s < static_cast<int>(daubechies_filter(basis.order).size()))
            throw ValidationError("solve: too many wavelet levels for this grid");
    }

    Eigen::MatrixXd synthesize(const Eigen::MatrixXd& coeffs) const {
        Eigen::MatrixXd frame = basis.kind == SparseBasis::Kind::Dct2d
                                    ? dct2_synthesis(coeffs)
                                    : dwt2_synthesis(coeffs, basis.order, basis.levels);
        return frame.block(off, off, grid_m, grid_m);
    }
    Eigen::MatrixXd analyze_embedded(const Eigen::MatrixXd& grid) const {
        if (basis.kind == SparseBasis::Kind::Dct2d) return dct2_analysis(grid);
        Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(frame_n, frame_n);
        frame.block(off, off, grid_m, grid_m) = grid;
        return dwt2_analysis(frame, basis.order, basis.levels);
    }
};

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v(m.size());
    const int n = static_cast<int>(m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < n; ++j) v(i * n + j) = m(i, j);
    return v;
}

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, int n) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = v(i * n + j);
    return m;
}

double estimate_lipschitz(const MeasurementSystem& sys) {
    // Largest eigenvalue of A^T A by power iteration (basis is orthonormal,
    // so it bounds the composed operator too).
    const int n = static_cast<int>(sys.matrix.cols());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(n) / std::sqrt(static_cast<double>(n));
    double lam = 1.0;
    for (int i = 0; i < 30; ++i) {
        Eigen::VectorXd w = sys.matrix.transpose() * (sys.matrix * v);
        lam = w.norm();
        if (lam <= 0.0) break;
        v = w / lam;
    }
    return std::max(lam, 1e-12);
}

} // namespace

SolveResult solve(const MeasurementSystem& sys, const SparseBasis& basis,
                  const SolverConfig& cfg) {
    if (cfg.max_iters < 1 || cfg.tol <= 0.0 || cfg.lambda < 0.0)
        throw ValidationError("solve: iteration/tolerance/lambda must be positive");
    const int m = sys.size_m;
    if (sys.rhs.size() != sys.matrix.rows())
        throw ValidationError("solve: rhs not populated");
    const double rhs_norm = sys.rhs.norm();
    if (!(rhs_norm > 0.0)) throw ValidationError("solve: empty rhs");

    BasisOps ops(basis, m);
    const double L = estimate_lipschitz(sys);
    const double lambda = cfg.lambda > 0.0
                              ? cfg.lambda
                              : SolverConfig::defaults(cfg.kind, basis.kind).lambda;

    const auto residual = [&](const Eigen::MatrixXd& coeffs, Eigen::VectorXd& res) {
        res = sys.matrix * flatten(ops.synthesize(coeffs)) - sys.rhs;
    };
    const auto grad_from_res = [&](const Eigen::VectorXd& res) {
        return ops.analyze_embedded(unflatten(sys.matrix.transpose() * res, m));
    };

    SolveResult out;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(ops.frame_n, ops.frame_n);
    Eigen::VectorXd res;

    // Least-squares polish on the identified support, applied only when the
    // support is small enough to be well-posed against the measurements.
    const auto debias = [&](Eigen::MatrixXd& coeffs) {
        std::vector<std::pair<int, int>> support;
        for (int i = 0; i < coeffs.rows(); ++i)
            for (int j = 0; j < coeffs.cols(); ++j)
                if (coeffs(i, j) != 0.0) support.emplace_back(i, j);
        const size_t cap = std::min<size_t>(sys.matrix.rows() / 2, 400);
        if (support.empty() || support.size() > cap) return;
        Eigen::MatrixXd cols(sys.matrix.rows(), support.size());
        Eigen::MatrixXd unit = Eigen::MatrixXd::Zero(ops.frame_n, ops.frame_n);
        for (size_t s = 0; s < support.size(); ++s) {
            unit(support[s].first, support[s].second) = 1.0;
            cols.col(s) = sys.matrix * flatten(ops.synthesize(unit));
            unit(support[s].first, support[s].second) = 0.0;
        }
        const Eigen::VectorXd w = cols.colPivHouseholderQr().solve(sys.rhs);
        for (size_t s = 0; s < support.size(); ++s)
            coeffs(support[s].first, support[s].second) = w(s);
    };

    if (cfg.kind == SolverConfig::Kind::L1Min) {
        // Monotone FISTA on  F(c) = ||c||_1 + (1/2 w) ||A B c - H||^2,
        // warm-started through a fixed geometric continuation in w down to the
        // target lambda (a small target makes the smooth term too stiff for a
        // cold proximal-gradient start).
        // ||Op^T H||_inf is the weight above which the solution is identically 0.
        const double lambda_max = grad_from_res(Eigen::VectorXd(-sys.rhs)).cwiseAbs().maxCoeff();
        std::vector<double> schedule;
        for (double w = 0.25 * lambda_max; w > lambda; w *= 0.1) schedule.push_back(w);
        schedule.push_back(lambda);
        const bool fixed_step = cfg.step > 0.0;
        int step_violations = 0;
        int iters_left = cfg.max_iters;

        for (size_t stage = 0; stage < schedule.size(); ++stage) {
            const double w = schedule[stage];
            const bool final_stage = stage + 1 == schedule.size();
            const int stage_budget =
                final_stage ? iters_left
                            : std::min(iters_left, std::max(40, cfg.max_iters /
                                                                    (2 * static_cast<int>(
                                                                             schedule.size()))));
            const auto fval = [&](const Eigen::MatrixXd& coeffs, double res2) {
                return coeffs.cwiseAbs().sum() + res2 / (2.0 * w);
            };
            double step = fixed_step ? cfg.step : w / L;

            Eigen::MatrixXd y = x, x_prev = x;
            residual(x, res);
            double fx = fval(x, res.squaredNorm());
            double t = 1.0;

            for (int it = 0; it < stage_budget; ++it) {
                Eigen::VectorXd res_y;
                residual(y, res_y);
                const double fy_smooth = res_y.squaredNorm() / (2.0 * w);
                const Eigen::MatrixXd grad = grad_from_res(res_y) / w;

                Eigen::MatrixXd z;
                double res2_z = 0.0;
                for (int bt = 0;; ++bt) {
                    z = unflatten(soft_threshold(flatten(y - step * grad), step), ops.frame_n);
                    Eigen::VectorXd res_z;
                    residual(z, res_z);
                    res2_z = res_z.squaredNorm();
                    const double fz_smooth = res2_z / (2.0 * w);
                    const Eigen::MatrixXd d = z - y;
                    const double quad = fy_smooth + (grad.array() * d.array()).sum() +
                                        d.squaredNorm() / (2.0 * step);
                    if (fz_smooth <= quad + 1e-12 * std::abs(quad)) break;
                    if (fixed_step) {
                        if (++step_violations > 10)
                            throw NumericalError(
                                "solve: step exceeds the Lipschitz bound, diverging");
                        break;
                    }
                    if (bt > 60) break;
                    step *= 0.5;
                }

                const double fz = fval(z, res2_z);
                const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
                const Eigen::MatrixXd x_next = fz <= fx ? z : x; // monotone safeguard
                const double fx_next = std::min(fz, fx);
                y = x_next + (t / t_next) * (z - x_next) + ((t - 1.0) / t_next) * (x_next - x_prev);
                x_prev = x;
                x = x_next;
                const double fx_old = fx;
                fx = fx_next;
                t = t_next;
                --iters_left;

                if (final_stage) {
                    out.objective_trace.push_back(fx);
                    out.iterations = cfg.max_iters - iters_left;
                }
                const double rel_drop = (fx_old - fx) / std::max(std::abs(fx_old), 1e-300);
                if (!final_stage && rel_drop < 1e-8 && it > 4) break;
                if (final_stage && rel_drop < 1e-11 && it > 5) {
                    residual(x, res);
                    if (res.norm() / rhs_norm <= cfg.tol) {
                        out.converged = true;
                        break;
                    }
                }
                if (iters_left <= 0) break;
            }
            if (iters_left <= 0) break;
        }
        debias(x);
        residual(x, res);
        out.converged = out.converged || res.norm() / rhs_norm <= cfg.tol;
    } else {
        // Iterative thresholding: gradient data-consistency step, then keep
        // the significant components under a geometrically decreasing cut.
        const double step = cfg.step > 0.0 ? cfg.step : 1.0 / L;
        double tau = 0.0;
        int bad_streak = 0;
        double prev_obj = std::numeric_limits<double>::infinity();
        for (int it = 0; it < cfg.max_iters; ++it) {
            residual(x, res);
            const Eigen::MatrixXd c = x - step * grad_from_res(res);
            if (it == 0) tau = 0.5 * c.cwiseAbs().maxCoeff();
            tau = std::max(tau * 0.97, lambda);
            x = (c.cwiseAbs().array() >= tau).select(c, 0.0);

            residual(x, res);
            const double obj = 0.5 * res.squaredNorm();
            out.objective_trace.push_back(obj);
            out.iterations = it + 1;
            if (obj > prev_obj * (1.0 + 0.1)) {
                if (++bad_streak > 20) throw NumericalError("solve: thresholding diverging");
            } else {
                bad_streak = 0;
            }
            prev_obj = obj;
            if (res.norm() / rhs_norm <= cfg.tol && tau <= lambda * (1.0 + 1e-12)) {
                out.converged = true;
                break;
            }
        }
        debias(x);
        residual(x, res);
        out.converged = out.converged || res.norm() / rhs_norm <= cfg.tol;
    }

    residual(x, res);
    out.final_residual = res.norm() / rhs_norm;
    out.grid = WignerGrid(m, sys.extent);
    out.grid.values = ops.synthesize(x);
    return out;
}

} // namespace wigct
