#pragma once

#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "wigct/tomography.hpp"

namespace wigct {

/// Stacked projection system H = A vec(W). Grid vectorization is x-major:
/// idx = ix * M + ip; rows are ordered angle-major (row = angle * M + bin).
struct MeasurementSystem {
    std::vector<double> angles_deg;
    int size_m = 0;
    double extent = 0.0;
    Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
    Eigen::VectorXd rhs;
};

MeasurementSystem build_measurement(const std::vector<double>& angles_deg, int size_m,
                                    double extent);

/// Fill rhs from a sinogram with matching angles/bins/range.
void set_rhs(MeasurementSystem& sys, const Sinogram& sinogram);

struct SparseBasis {
    enum class Kind { Dct2d, Daubechies };
    Kind kind = Kind::Dct2d;
    int order = 4;  // Daubechies vanishing moments (1..4)
    int levels = 3; // decomposition levels
};

/// Orthonormal DCT-II matrix (rows are basis functions).
Eigen::MatrixXd dct_matrix(int n);
Eigen::MatrixXd dct2_analysis(const Eigen::MatrixXd& grid);
Eigen::MatrixXd dct2_synthesis(const Eigen::MatrixXd& coeffs);

/// Orthonormal Daubechies scaling filter (sum = sqrt(2)).
std::vector<double> daubechies_filter(int order);

/// Separable 2D periodic DWT; the input size must be divisible by 2^levels.
Eigen::MatrixXd dwt2_analysis(const Eigen::MatrixXd& grid, int order, int levels);
Eigen::MatrixXd dwt2_synthesis(const Eigen::MatrixXd& coeffs, int order, int levels);

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double lambda);

struct SolverConfig {
    enum class Kind { L1Min, IterativeThreshold };
    Kind kind = Kind::L1Min;
    int max_iters = 3000;
    double step = 0.0;    // <= 0: derive from a power-iteration Lipschitz estimate
    double lambda = 0.0;  // l1 weight / final hard threshold
    double tol = 1e-3;    // relative data-residual target

    // Frozen from a one-time grid search on synthetic Gaussian states; the
    // solvers never auto-tune these.
    static SolverConfig defaults(Kind kind, SparseBasis::Kind basis);
};

struct SolveResult {
    WignerGrid grid;
    std::vector<double> objective_trace;
    double final_residual = 0.0; // relative data residual
    int iterations = 0;
    bool converged = false;
};

SolveResult solve(const MeasurementSystem& sys, const SparseBasis& basis,
                  const SolverConfig& cfg);

} // namespace wigct
