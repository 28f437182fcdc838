#pragma once

#include "subsphere/sphere_geometry.hpp"

namespace subsphere {

/// One representative (c, r) of a set of K concentric subspheres: an axis
/// c in S^m and geodesic radii r_1..r_K, each strictly inside (0, pi).
///
/// (c, r) and (-c, pi - r) describe the same point set; SubsphereClass
/// below identifies the two.
class SubsphereParams {
public:
    SubsphereParams(UnitVector center, Eigen::VectorXd radii)
        : center_(std::move(center)), radii_(std::move(radii)) {
        if (radii_.size() < 1)
            throw std::invalid_argument("SubsphereParams: need at least one radius");
        for (Eigen::Index j = 0; j < radii_.size(); ++j)
            if (!(radii_(j) > 0.0 && radii_(j) < kPi))
                throw std::invalid_argument("SubsphereParams: radii must lie strictly in (0, pi)");
    }

    const UnitVector& center() const { return center_; }
    const Eigen::VectorXd& radii() const { return radii_; }
    Eigen::Index m() const { return center_.m(); }
    Eigen::Index K() const { return radii_.size(); }

    /// The equivalent representative (-c, pi - r).
    SubsphereParams flipped() const {
        return SubsphereParams(-center_, Eigen::VectorXd::Constant(radii_.size(), kPi) - radii_);
    }

private:
    UnitVector center_;
    Eigen::VectorXd radii_;
};

/// The equivalence class of a SubsphereParams, stored via its canonical
/// representative: radius sum <= K*pi/2, ties broken by requiring the first
/// nonzero coordinate of the axis to be positive.
class SubsphereClass {
public:
    explicit SubsphereClass(const SubsphereParams& p);

    const SubsphereParams& representative() const { return rep_; }
    Eigen::Index m() const { return rep_.m(); }
    Eigen::Index K() const { return rep_.K(); }

private:
    SubsphereParams rep_;
};

/// Canonical representative of the class of p. Idempotent.
SubsphereClass canonicalize(const SubsphereParams& p);

/// Quotient metric min(d1, d2) where d1 compares representatives directly
/// and d2 compares against the flip of the second argument. Zero exactly on
/// equivalent parameters; a pseudo-metric on representatives and a metric
/// on classes.
double param_distance(const SubsphereParams& p1, const SubsphereParams& p2);

double param_distance(const SubsphereClass& p1, const SubsphereClass& p2);

}  // namespace subsphere
