#pragma once

#include <vector>

#include "subsphere/chart.hpp"
#include "subsphere/chi_squared.hpp"
#include "subsphere/fitter.hpp"

namespace subsphere {

/// Raised when the plug-in Hessian is numerically singular (condition
/// number beyond 1e12): the model is unidentified or the data degenerate.
struct SingularHessianError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Plug-in estimates of the large-sample machinery at a fitted class:
/// A_hat is the mean per-observation chart Hessian, Sigma_hat the sample
/// covariance of the per-observation chart gradients, and sandwich the
/// estimated covariance A^-1 Sigma A^-T / n of the chart coordinates of
/// the fitted parameters.
struct AsymptoticEstimate {
    ProductChart chart;
    Eigen::MatrixXd A_hat;      // nu x nu
    Eigen::MatrixXd Sigma_hat;  // nu x nu, symmetric PSD
    Eigen::MatrixXd sandwich;   // nu x nu, symmetric PSD
    Eigen::Index n = 0;
    Eigen::Index K = 0;

    Eigen::Index m() const { return chart.m(); }
    Eigen::Index nu() const { return chart.nu(); }

    explicit AsymptoticEstimate(ProductChart c) : chart(std::move(c)) {}
};

AsymptoticEstimate estimate_asymptotics(const PolysphereSample& data, const SubsphereClass& fitted,
                                        LossKind kind);

/// Anchor at an explicit representative instead of the canonical one.
AsymptoticEstimate estimate_asymptotics(const PolysphereSample& data,
                                        const SubsphereParams& anchor, LossKind kind);

/// Wald ellipsoid {u in R^m : u^T shape u <= chi2_quantile} for the axis
/// block of the chart, plus boundary points mapped back to the sphere for
/// reporting (a polyline for m = 2, principal-axis endpoints otherwise).
struct ConfidenceRegion {
    double level = 0.0;
    double chi2_quantile = 0.0;
    Eigen::MatrixXd shape;  // m x m, inverse of the axis block of sandwich
    std::vector<Eigen::VectorXd> boundary_points;  // ambient coordinates

    bool contains(const Eigen::VectorXd& u) const {
        return u.dot(shape * u) <= chi2_quantile;
    }
};

ConfidenceRegion axis_confidence_region(const AsymptoticEstimate& est, double level);

struct TestResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 0.0;
};

/// Wald test of the class hypothesis [axis] = [c0]. c0 is first flipped to
/// the hemisphere of the fitted axis; it must land strictly inside the
/// chart domain.
TestResult axis_wald_test(const AsymptoticEstimate& est, const UnitVector& c0);

/// The A and Sigma sub-blocks split at the axis/radius boundary. The
/// leading m x m blocks are reported divided by K (the shared-axis
/// normalization under which they stabilize as K grows); trailing blocks
/// are reported as-is together with their largest off-diagonal magnitude.
struct BlockDecomposition {
    Eigen::MatrixXd Sigma_axis;    // m x m, leading Sigma block / K
    Eigen::MatrixXd Sigma_cross;   // m x K
    Eigen::MatrixXd Sigma_radius;  // K x K
    Eigen::MatrixXd A_axis;        // m x m, leading A block / K
    Eigen::MatrixXd A_cross;       // m x K
    Eigen::MatrixXd A_radius;      // K x K
    double sigma_radius_max_offdiag = 0.0;
    double a_radius_max_offdiag = 0.0;
};

BlockDecomposition block_decomposition(const AsymptoticEstimate& est);

}  // namespace subsphere
