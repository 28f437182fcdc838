#pragma once

#include <string>

#include "subsphere/chart.hpp"
#include "subsphere/polysphere_sample.hpp"

namespace subsphere {

/// The four residual notions used by the fitter.
///
///   Intrinsic       |arccos(x.c) - r|            arc length to the subsphere
///   Extrinsic       |x - P x|                    chord to the projection
///   Slicing         |c.x - cos r|                offset from the cutting hyperplane
///   NaiveExtrinsic  ||x - c| - 2 sin(r/2)|       chord-to-axis minus chordal radius
enum class LossKind { Intrinsic, Extrinsic, Slicing, NaiveExtrinsic };

std::string to_string(LossKind kind);
LossKind parse_loss_kind(const std::string& name);

/// Squared-residual grid and its mean, normalized by 1/(nK).
struct ObjectiveValue {
    double total = 0.0;
    Eigen::MatrixXd per_point;  // n x K squared residuals
};

/// Residual distance from x to the subsphere with axis c and radius r.
/// The extrinsic kind is undefined at x = +-c and throws there.
double residual_distance(LossKind kind, const UnitVector& x, const UnitVector& c, double r);

/// Unchecked kernel: residual as a function of the inner product t = x.c.
/// Callers on hot paths (grid oracles, Monte Carlo) are responsible for the
/// extrinsic pole exclusion themselves.
double residual_from_dot(LossKind kind, double t, double r);

/// Number of data points within epsilon (geodesic) of either pole of c.
/// Nonzero counts signal configurations where the non-slicing losses lose
/// smoothness.
Eigen::Index count_near_axis(const PolysphereSample& data, const UnitVector& c, double epsilon);

/// Mean squared residual over the n x K grid, accumulated in fixed index
/// order (Kahan) so the total is identical across runs and thread counts.
ObjectiveValue objective(LossKind kind, const PolysphereSample& data, const SubsphereParams& p);

/// Gradient and Hessian, in the chart at `p`, of the per-observation mean
/// squared residual rho^2(X_i, .) = (1/K) sum_j d^2(x_ij, .) at the chart
/// origin. Analytic for Slicing and Intrinsic; central finite differences
/// for Extrinsic and NaiveExtrinsic. The non-slicing kinds throw when a
/// data point sits at a pole of the anchor axis.
Eigen::VectorXd observation_gradient(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                                     const ProductChart& chart);
Eigen::MatrixXd observation_hessian(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                                    const ProductChart& chart);

/// Chart gradient/Hessian of the full objective (mean over observations).
Eigen::VectorXd objective_gradient(LossKind kind, const PolysphereSample& data,
                                   const SubsphereParams& p);
Eigen::MatrixXd objective_hessian(LossKind kind, const PolysphereSample& data,
                                  const SubsphereParams& p);

Eigen::VectorXd objective_gradient(LossKind kind, const PolysphereSample& data,
                                   const ProductChart& chart);
Eigen::MatrixXd objective_hessian(LossKind kind, const PolysphereSample& data,
                                  const ProductChart& chart);

}  // namespace subsphere
