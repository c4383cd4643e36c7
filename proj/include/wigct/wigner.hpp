#pragma once

#include <Eigen/Dense>

#include "wigct/gaussian.hpp"

namespace wigct {

/// M x M phase-space samples at cell centers of the window [-extent, extent]^2.
/// values(ix, ip) = W(x_i, p_j) with x_i = (i - (M-1)/2) * cell().
struct WignerGrid {
    int size_m = 101;
    double extent = 4.0;
    Eigen::MatrixXd values;
    bool extent_warning = false; // 5-sigma ellipse of the source state clipped

    WignerGrid() = default;
    WignerGrid(int size_m_, double extent_);

    double cell() const { return 2.0 * extent / size_m; }
    double coord(int i) const { return (i - (size_m - 1) / 2) * cell(); }
    double mass() const { return values.sum() * cell() * cell(); }
};

WignerGrid wigner_eval(const GaussianParams& params, int size_m, double extent);

/// Window half-width covering mean + 5 sigma, floored at 4.
double default_extent(const GaussianParams& params);

/// RMS difference divided by the peak-to-peak range of the reference.
double nrmse(const WignerGrid& test, const WignerGrid& reference);

/// Grid moments -> (n_thermal, zeta, alpha). Throws NumericalError when the
/// sample covariance is not positive definite.
GaussianParams refit_gaussian(const WignerGrid& grid);

} // namespace wigct
