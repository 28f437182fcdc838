#include "subsphere/asymptotics.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <string>

namespace subsphere {

namespace {

constexpr double kConditionLimit = 1e12;

Eigen::MatrixXd invert_checked(const Eigen::MatrixXd& a, const char* what) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success)
        throw std::runtime_error(std::string(what) + ": eigendecomposition failed");
    const auto& ev = solver.eigenvalues();
    const double largest = ev.cwiseAbs().maxCoeff();
    const double smallest = ev.cwiseAbs().minCoeff();
    if (!(smallest > 0.0) || largest / smallest > kConditionLimit)
        throw SingularHessianError(std::string(what) +
                                   ": Hessian singular: model unidentified or degenerate data");
    return a.inverse();
}

}  // namespace

AsymptoticEstimate estimate_asymptotics(const PolysphereSample& data, const SubsphereClass& fitted,
                                        LossKind kind) {
    return estimate_asymptotics(data, fitted.representative(), kind);
}

AsymptoticEstimate estimate_asymptotics(const PolysphereSample& data,
                                        const SubsphereParams& anchor, LossKind kind) {
    if (data.m() != anchor.m() || data.K() != anchor.K())
        throw std::invalid_argument("estimate_asymptotics: dimension or K mismatch");
    const Eigen::Index n = data.n();
    const Eigen::Index nu = anchor.m() + anchor.K();
    if (n < nu + 1)
        throw std::invalid_argument("estimate_asymptotics: need n >= nu + 1 observations");

    AsymptoticEstimate est(chart_at(anchor));
    est.n = n;
    est.K = anchor.K();

    Eigen::MatrixXd gradients(nu, n);
    Eigen::MatrixXd hessian_sum = Eigen::MatrixXd::Zero(nu, nu);
    for (Eigen::Index i = 0; i < n; ++i) {
        gradients.col(i) = observation_gradient(kind, data, i, est.chart);
        hessian_sum += observation_hessian(kind, data, i, est.chart);
    }
    est.A_hat = hessian_sum / static_cast<double>(n);

    const Eigen::VectorXd mean = gradients.rowwise().mean();
    Eigen::MatrixXd centered = gradients.colwise() - mean;
    est.Sigma_hat = (centered * centered.transpose()) / static_cast<double>(n - 1);

    const Eigen::MatrixXd a_inv = invert_checked(est.A_hat, "estimate_asymptotics");
    est.sandwich = (a_inv * est.Sigma_hat * a_inv.transpose()) / static_cast<double>(n);
    est.sandwich = 0.5 * (est.sandwich + est.sandwich.transpose());
    return est;
}

ConfidenceRegion axis_confidence_region(const AsymptoticEstimate& est, double level) {
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("axis_confidence_region: level must lie in (0, 1)");
    const Eigen::Index m = est.m();
    const Eigen::MatrixXd axis_cov = est.sandwich.topLeftCorner(m, m);

    ConfidenceRegion region;
    region.level = level;
    region.chi2_quantile = chi_squared_quantile(level, static_cast<int>(m));
    region.shape = invert_checked(axis_cov, "axis_confidence_region");

    const double scale = std::sqrt(region.chi2_quantile);
    const UnitVector& center = est.chart.anchor().center();
    if (m == 2) {
        const Eigen::MatrixXd half = Eigen::LLT<Eigen::MatrixXd>(axis_cov).matrixL();
        constexpr int kArcPoints = 128;
        for (int s = 0; s <= kArcPoints; ++s) {
            const double phi = 2.0 * kPi * static_cast<double>(s) / kArcPoints;
            Eigen::VectorXd u(2);
            u << std::cos(phi), std::sin(phi);
            region.boundary_points.push_back(exp_map(center, scale * (half * u)).coords());
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(axis_cov);
        for (Eigen::Index k = 0; k < m; ++k) {
            const Eigen::VectorXd axis =
                std::sqrt(std::max(0.0, solver.eigenvalues()(k))) * solver.eigenvectors().col(k);
            region.boundary_points.push_back(exp_map(center, scale * axis).coords());
            region.boundary_points.push_back(exp_map(center, -scale * axis).coords());
        }
    }
    return region;
}

TestResult axis_wald_test(const AsymptoticEstimate& est, const UnitVector& c0) {
    const UnitVector& fitted_axis = est.chart.anchor().center();
    if (c0.ambient_dim() != fitted_axis.ambient_dim())
        throw std::invalid_argument("axis_wald_test: dimension mismatch");
    const UnitVector aligned = fitted_axis.dot(c0) < 0.0 ? -c0 : c0;
    if (!(geodesic_distance(fitted_axis, aligned) < kPi / 2.0))
        throw std::domain_error("axis_wald_test: hypothesized axis outside the chart domain");

    const Eigen::Index m = est.m();
    const Eigen::VectorXd u0 = est.chart.axis_to_chart(aligned);
    const Eigen::MatrixXd shape = invert_checked(est.sandwich.topLeftCorner(m, m), "axis_wald_test");

    TestResult result;
    result.statistic = u0.dot(shape * u0);
    result.dof = static_cast<int>(m);
    result.p_value = 1.0 - chi_squared_cdf(result.statistic, result.dof);
    return result;
}

BlockDecomposition block_decomposition(const AsymptoticEstimate& est) {
    const Eigen::Index m = est.m();
    const Eigen::Index K = est.K;
    const double invK = 1.0 / static_cast<double>(K);

    BlockDecomposition blocks;
    blocks.Sigma_axis = invK * est.Sigma_hat.topLeftCorner(m, m);
    blocks.Sigma_cross = est.Sigma_hat.topRightCorner(m, K);
    blocks.Sigma_radius = est.Sigma_hat.bottomRightCorner(K, K);
    blocks.A_axis = invK * est.A_hat.topLeftCorner(m, m);
    blocks.A_cross = est.A_hat.topRightCorner(m, K);
    blocks.A_radius = est.A_hat.bottomRightCorner(K, K);

    auto max_offdiag = [](const Eigen::MatrixXd& a) {
        double worst = 0.0;
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            for (Eigen::Index c = 0; c < a.cols(); ++c)
                if (r != c) worst = std::max(worst, std::abs(a(r, c)));
        return worst;
    };
    blocks.sigma_radius_max_offdiag = max_offdiag(blocks.Sigma_radius);
    blocks.a_radius_max_offdiag = max_offdiag(blocks.A_radius);
    return blocks;
}

}  // namespace subsphere
