#include "wigct/wigner.hpp"

#include <cmath>

namespace wigct {

WignerGrid::WignerGrid(int size_m_, double extent_) : size_m(size_m_), extent(extent_) {
    if (size_m < 3 || size_m % 2 == 0)
        throw ValidationError("WignerGrid: size_m must be odd and >= 3");
    if (!(extent > 0.0) || !std::isfinite(extent))
        throw ValidationError("WignerGrid: extent must be positive");
    values = Eigen::MatrixXd::Zero(size_m, size_m);
}

double default_extent(const GaussianParams& params) {
    const PhaseSpaceGaussian g = covariance(params);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.cov);
    const double max_var = es.eigenvalues()(1);
    return std::max(4.0, g.mean.norm() + 5.0 * std::sqrt(max_var));
}

WignerGrid wigner_eval(const GaussianParams& params, int size_m, double extent) {
    params.validate();
    WignerGrid grid(size_m, extent);

    const PhaseSpaceGaussian g = covariance(params);
    const Eigen::Matrix2d prec = g.cov.inverse();
    const double norm = 1.0 / (2.0 * kPi * std::sqrt(g.cov.determinant()));

    for (int i = 0; i < size_m; ++i) {
        const double x = grid.coord(i) - g.mean(0);
        for (int j = 0; j < size_m; ++j) {
            const double p = grid.coord(j) - g.mean(1);
            const double q = prec(0, 0) * x * x + 2.0 * prec(0, 1) * x * p + prec(1, 1) * p * p;
            grid.values(i, j) = norm * std::exp(-0.5 * q);
        }
    }

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g.cov);
    const double reach = g.mean.norm() + 5.0 * std::sqrt(es.eigenvalues()(1));
    grid.extent_warning = reach > extent;
    return grid;
}

double nrmse(const WignerGrid& test, const WignerGrid& reference) {
    if (test.size_m != reference.size_m)
        throw ValidationError("nrmse: grid sizes differ");
    const double range = reference.values.maxCoeff() - reference.values.minCoeff();
    if (!(range > 0.0)) throw NumericalError("nrmse: flat reference grid");
    const double rms = std::sqrt((test.values - reference.values).squaredNorm() /
                                 static_cast<double>(test.values.size()));
    return rms / range;
}

GaussianParams refit_gaussian(const WignerGrid& grid) {
    const int m = grid.size_m;
    const double d2 = grid.cell() * grid.cell();

    double mass = 0.0, mx = 0.0, mp = 0.0;
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            const double w = grid.values(i, j) * d2;
            mass += w;
            mx += w * grid.coord(i);
            mp += w * grid.coord(j);
        }
    if (!(mass > 0.0)) throw NumericalError("refit_gaussian: non-positive grid mass");
    mx /= mass;
    mp /= mass;

    double sxx = 0.0, spp = 0.0, sxp = 0.0;
    for (int i = 0; i < m; ++i) {
        const double x = grid.coord(i) - mx;
        for (int j = 0; j < m; ++j) {
            const double p = grid.coord(j) - mp;
            const double w = grid.values(i, j) * d2;
            sxx += w * x * x;
            spp += w * p * p;
            sxp += w * x * p;
        }
    }

    PhaseSpaceGaussian g;
    g.mean << mx, mp;
    g.cov << sxx / mass, sxp / mass, sxp / mass, spp / mass;
    if (g.cov(0, 0) <= 0.0 || g.cov.determinant() <= 0.0)
        throw NumericalError("refit_gaussian: sample covariance not positive definite");
    return params_from_covariance(g);
}

} // namespace wigct
