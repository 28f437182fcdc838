#pragma once

#include "subsphere/parameter_space.hpp"

namespace subsphere {

/// Tangent chart of the parameter space S^m x (0,pi)^K at an anchor point.
///
/// The first m coordinates are tangent coordinates of the axis (exp/log map
/// in the deterministic basis at the anchor axis); the trailing K
/// coordinates are plain radius offsets. The chart maps the anchor to zero.
class ProductChart {
public:
    explicit ProductChart(SubsphereParams anchor)
        : anchor_(std::move(anchor)), basis_(tangent_basis_at(anchor_.center())) {}

    const SubsphereParams& anchor() const { return anchor_; }
    /// m x (m+1) orthonormal rows spanning the tangent space at the anchor axis.
    const Eigen::MatrixXd& basis() const { return basis_; }
    Eigen::Index m() const { return anchor_.m(); }
    Eigen::Index K() const { return anchor_.K(); }
    Eigen::Index nu() const { return anchor_.m() + anchor_.K(); }

    /// Chart coordinates of p (length nu). Requires p.center away from the
    /// anchor's antipode.
    Eigen::VectorXd to_chart(const SubsphereParams& p) const;

    /// Inverse chart. The radius block must keep all radii inside (0, pi).
    SubsphereParams from_chart(const Eigen::VectorXd& u) const;

    /// Axis-only chart coordinates (length m) of a point on S^m.
    Eigen::VectorXd axis_to_chart(const UnitVector& c) const;

private:
    SubsphereParams anchor_;
    Eigen::MatrixXd basis_;
};

inline ProductChart chart_at(const SubsphereParams& p) { return ProductChart(p); }

}  // namespace subsphere
