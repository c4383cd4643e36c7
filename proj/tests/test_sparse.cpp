#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include "wigct/sparse.hpp"

using namespace wigct;

namespace {

const GaussianParams kFig4State(0.71, SqueezeParam::from_complex(Complex(0.16, -0.13)),
                                Complex(0.55, 0.25));

std::vector<double> uniform_angles(int n) {
    std::vector<double> a(n);
    for (int i = 0; i < n; ++i) a[i] = 180.0 * i / n;
    return a;
}

int coeffs_for_energy(const Eigen::MatrixXd& c, double frac) {
    std::vector<double> e;
    e.reserve(c.size());
    for (int i = 0; i < c.rows(); ++i)
        for (int j = 0; j < c.cols(); ++j) e.push_back(c(i, j) * c(i, j));
    std::sort(e.rbegin(), e.rend());
    double total = 0.0;
    for (double v : e) total += v;
    double acc = 0.0;
    int n = 0;
    for (double v : e) {
        acc += v;
        ++n;
        if (acc >= frac * total) break;
    }
    return n;
}

} // namespace

TEST_CASE("dct basics") {
    Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(33, 33, 0.7);
    const Eigen::MatrixXd c = dct2_analysis(flat);
    CHECK(c(0, 0) == doctest::Approx(0.7 * 33.0).epsilon(1e-12));
    Eigen::MatrixXd rest = c;
    rest(0, 0) = 0.0;
    CHECK(rest.cwiseAbs().maxCoeff() < 1e-12);

    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd noise(33, 33);
    for (int i = 0; i < 33; ++i)
        for (int j = 0; j < 33; ++j) noise(i, j) = gauss(rng);
    const Eigen::MatrixXd coeffs = dct2_analysis(noise);
    CHECK(coeffs.squaredNorm() == doctest::Approx(noise.squaredNorm()).epsilon(1e-12)); // Parseval
    CHECK((dct2_synthesis(coeffs) - noise).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("fig-4 state is sparse in the dct basis") {
    const WignerGrid g = wigner_eval(kFig4State, 101, default_extent(kFig4State));
    const Eigen::MatrixXd c = dct2_analysis(g.values);
    const double low = c.block(0, 0, 10, 10).squaredNorm();
    CHECK(low / c.squaredNorm() >= 0.99);
}

TEST_CASE("daubechies filters are orthonormal quadrature mirrors") {
    for (int order : {1, 2, 3, 4}) {
        const auto h = daubechies_filter(order);
        REQUIRE(static_cast<int>(h.size()) == 2 * order);
        double sum = 0.0, norm = 0.0;
        for (double v : h) {
            sum += v;
            norm += v * v;
        }
        CHECK(sum == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
        // even-shift self-orthogonality
        for (size_t shift = 2; shift < h.size(); shift += 2) {
            double dot = 0.0;
            for (size_t k = 0; k + shift < h.size(); ++k) dot += h[k] * h[k + shift];
            CHECK(std::abs(dot) < 1e-12);
        }
    }
    CHECK_THROWS_AS(daubechies_filter(5), ValidationError);
}

TEST_CASE("haar level on a constant block") {
    const Eigen::MatrixXd ones = Eigen::MatrixXd::Constant(4, 4, 1.0);
    const Eigen::MatrixXd c = dwt2_analysis(ones, 1, 1);
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(c(i, j) == doctest::Approx(2.0).epsilon(1e-14));
    Eigen::MatrixXd details = c;
    details.topLeftCorner(2, 2).setZero();
    CHECK(details.cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("db4 perfect reconstruction and Parseval on random 128x128") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd x(128, 128);
    for (int i = 0; i < 128; ++i)
        for (int j = 0; j < 128; ++j) x(i, j) = gauss(rng);
    const Eigen::MatrixXd c = dwt2_analysis(x, 4, 3);
    CHECK(c.squaredNorm() == doctest::Approx(x.squaredNorm()).epsilon(1e-12));
    CHECK((dwt2_synthesis(c, 4, 3) - x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK_THROWS_AS(dwt2_analysis(x, 4, 8), ValidationError);
    CHECK_THROWS_AS(dwt2_analysis(Eigen::MatrixXd::Zero(100, 100), 4, 3), ValidationError);
}

TEST_CASE("wavelet energy compaction is within a factor 2 of dct") {
    const WignerGrid g = wigner_eval(kFig4State, 101, default_extent(kFig4State));
    const int n_dct = coeffs_for_energy(dct2_analysis(g.values), 0.99);
    Eigen::MatrixXd frame = Eigen::MatrixXd::Zero(128, 128);
    frame.block(13, 13, 101, 101) = g.values;
    const int n_dwt = coeffs_for_energy(dwt2_analysis(frame, 4, 3), 0.99);
    // measured: dwt needs ~16, dct ~68; the bound is one-sided by a margin
    CHECK(n_dwt <= 2 * n_dct);
}

TEST_CASE("soft threshold") {
    Eigen::VectorXd v(3);
    v << 3.0, -0.5, 0.0;
    const Eigen::VectorXd t = soft_threshold(v, 1.0);
    CHECK(t(0) == doctest::Approx(2.0));
    CHECK(t(1) == doctest::Approx(0.0));
    CHECK(t(2) == doctest::Approx(0.0));
    CHECK((soft_threshold(v, 0.0) - v).cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(soft_threshold(v, -0.1), ValidationError);
}

TEST_CASE("measurement matrix matches radon and stays sparse") {
    const int m = 101;
    const double extent = 4.5;
    const GaussianParams p(0.4, SqueezeParam(0.2, 1.2), Complex(0.4, -0.3));
    const WignerGrid g = wigner_eval(p, m, extent);

    Eigen::VectorXd vec(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) vec(i * m + j) = g.values(i, j);

    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 180.0);
    std::vector<double> angles;
    for (int k = 0; k < 10; ++k) angles.push_back(u(rng));

    const MeasurementSystem sys = build_measurement(angles, m, extent);
    const Sinogram ref = radon(g, angles);
    const Eigen::VectorXd h = sys.matrix * vec;
    double worst = 0.0;
    for (size_t a = 0; a < angles.size(); ++a)
        for (int j = 0; j < m; ++j)
            worst = std::max(worst,
                             std::abs(h(static_cast<int>(a) * m + j) - ref.profiles(static_cast<int>(a), j)));
    CHECK(worst < 1e-10);

    for (int row = 0; row < sys.matrix.rows(); ++row) {
        int nnz = 0;
        for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(sys.matrix, row); it;
             ++it)
            ++nnz;
        CHECK(nnz <= 2 * m);
    }
}

TEST_CASE("zero-degree rows sum columns") {
    const int m = 41;
    const WignerGrid g = wigner_eval(GaussianParams(0.0, SqueezeParam(), 0.0), m, 4.0);
    Eigen::VectorXd vec(m * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) vec(i * m + j) = g.values(i, j);
    const MeasurementSystem sys = build_measurement({0.0}, m, 4.0);
    const Eigen::VectorXd h = sys.matrix * vec;
    for (int i = 0; i < m; ++i) {
        // the 0-degree marginal integrates over p at fixed x
        const double column_sum = g.values.row(i).sum() * g.cell();
        CHECK(h(i) == doctest::Approx(column_sum).epsilon(1e-12));
    }
}

TEST_CASE("exact-sparsity recovery at N = 9") {
    const int m = 101;
    const double extent = 4.5;
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> pick(0, 14); // low-frequency atoms
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd coeffs = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < 20; ++k) coeffs(pick(rng), pick(rng)) += gauss(rng);
    const Eigen::MatrixXd truth = dct2_synthesis(coeffs);

    MeasurementSystem sys = build_measurement(uniform_angles(9), m, extent);
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
    CHECK(err < 1e-3);
    CHECK(sol.final_residual <= cfg.tol * 10.0);
}

TEST_CASE("solver objective is monotone after the first iterations") {
    const int m = 101;
    const double extent = default_extent(kFig4State);
    const Sinogram sino = gaussian_sinogram(kFig4State, uniform_angles(9), m, extent);
    MeasurementSystem sys = build_measurement(sino.angles_deg, m, extent);
    set_rhs(sys, sino);

    SparseBasis dct;
    SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, dct.kind);
    cfg.max_iters = 400;
    const SolveResult sol = solve(sys, dct, cfg);
    for (size_t i = 6; i < sol.objective_trace.size(); ++i)
        CHECK(sol.objective_trace[i] <= sol.objective_trace[i - 1] * (1.0 + 1e-12));
}

TEST_CASE("cs at full sampling matches fbp") {
    const int m = 101;
    const double extent = default_extent(kFig4State);
    const Sinogram sino = gaussian_sinogram(kFig4State, uniform_angles(36), m, extent);
    MeasurementSystem sys = build_measurement(sino.angles_deg, m, extent);
    set_rhs(sys, sino);

    SparseBasis dct;
    SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, dct.kind);
    SolveResult sol = solve(sys, dct, cfg);
    WignerGrid cs = std::move(sol.grid);
    cs.values /= cs.mass();

    const WignerGrid fb = fbp(sino, m, extent);
    CHECK(nrmse(cs, fb) < 0.05);
}

TEST_CASE("cs at N = 9 recovers the fig-4 state parameters within 10 percent") {
    const int m = 101;
    const double extent = default_extent(kFig4State);
    const Sinogram sino = gaussian_sinogram(kFig4State, uniform_angles(9), m, extent);
    MeasurementSystem sys = build_measurement(sino.angles_deg, m, extent);
    set_rhs(sys, sino);

    for (const auto kind : {SolverConfig::Kind::L1Min, SolverConfig::Kind::IterativeThreshold}) {
        SparseBasis dct;
        const SolverConfig cfg = SolverConfig::defaults(kind, dct.kind);
        SolveResult sol = solve(sys, dct, cfg);
        WignerGrid grid = std::move(sol.grid);
        grid.values /= grid.mass();
        const GaussianParams back = refit_gaussian(grid);
        CHECK(back.n_thermal == doctest::Approx(0.71).epsilon(0.10));
        CHECK(back.squeeze.r == doctest::Approx(kFig4State.squeeze.r).epsilon(0.10));
        CHECK(std::abs(back.alpha - kFig4State.alpha) < 0.06);
    }
}

TEST_CASE("wavelet-basis solve also reconstructs the fig-4 state") {
    const int m = 101;
    const double extent = default_extent(kFig4State);
    const Sinogram sino = gaussian_sinogram(kFig4State, uniform_angles(9), m, extent);
    MeasurementSystem sys = build_measurement(sino.angles_deg, m, extent);
    set_rhs(sys, sino);

    SparseBasis wav;
    wav.kind = SparseBasis::Kind::Daubechies;
    const SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, wav.kind);
    SolveResult sol = solve(sys, wav, cfg);
    WignerGrid grid = std::move(sol.grid);
    grid.values /= grid.mass();
    const GaussianParams back = refit_gaussian(grid);
    CHECK(back.n_thermal == doctest::Approx(0.71).epsilon(0.15));
    CHECK(std::abs(back.alpha - kFig4State.alpha) < 0.08);
}

TEST_CASE("a fixed oversized step is reported as divergence") {
    const int m = 41;
    const Sinogram sino = gaussian_sinogram(kFig4State, uniform_angles(5), m, 5.0);
    MeasurementSystem sys = build_measurement(sino.angles_deg, m, 5.0);
    set_rhs(sys, sino);
    SparseBasis dct;
    SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, dct.kind);
    cfg.step = 1e6; // far beyond 1/L
    CHECK_THROWS_AS(solve(sys, dct, cfg), NumericalError);
}

TEST_CASE("solve validates its configuration") {
    MeasurementSystem sys = build_measurement(uniform_angles(3), 41, 4.0);
    SparseBasis dct;
    SolverConfig cfg = SolverConfig::defaults(SolverConfig::Kind::L1Min, dct.kind);
    CHECK_THROWS_AS(solve(sys, dct, cfg), ValidationError); // empty rhs
    sys.rhs = Eigen::VectorXd::Ones(sys.matrix.rows());
    cfg.max_iters = 0;
    CHECK_THROWS_AS(solve(sys, dct, cfg), ValidationError);
}
