#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <utility>

namespace subsphere {

inline constexpr double kPi = 3.14159265358979323846;

/// arccos with the argument clamped to [-1, 1] so that inner products a few
/// ulp outside the interval cannot produce NaN.
inline double clamped_acos(double dot) {
    if (dot > 1.0) dot = 1.0;
    if (dot < -1.0) dot = -1.0;
    return std::acos(dot);
}

/// A point on the unit sphere S^m, stored as its ambient vector in R^{m+1}.
/// Renormalized on construction; the ambient dimension must be >= 2.
class UnitVector {
public:
    explicit UnitVector(Eigen::VectorXd coords) : coords_(std::move(coords)) {
        if (coords_.size() < 2)
            throw std::invalid_argument("UnitVector: ambient dimension must be at least 2");
        const double norm = coords_.norm();
        if (!(norm > 0.0) || !std::isfinite(norm))
            throw std::invalid_argument("UnitVector: cannot normalize zero or non-finite vector");
        coords_ /= norm;
    }

    const Eigen::VectorXd& coords() const { return coords_; }
    Eigen::Index ambient_dim() const { return coords_.size(); }
    /// Intrinsic dimension m (ambient dimension minus one).
    Eigen::Index m() const { return coords_.size() - 1; }

    double dot(const UnitVector& other) const { return coords_.dot(other.coords_); }

    UnitVector operator-() const {
        UnitVector flipped(*this);
        flipped.coords_ = -flipped.coords_;
        return flipped;
    }

private:
    Eigen::VectorXd coords_;
};

/// A tangent vector at `base`, expressed in the m chart coordinates of the
/// deterministic tangent basis at the base point (see tangent_basis_at).
struct TangentVector {
    UnitVector base;
    Eigen::VectorXd components;  // length m, norm < pi

    TangentVector(UnitVector base_point, Eigen::VectorXd comps)
        : base(std::move(base_point)), components(std::move(comps)) {
        if (components.size() != base.m())
            throw std::invalid_argument("TangentVector: component count must equal m");
        if (!(components.norm() < kPi))
            throw std::invalid_argument("TangentVector: norm must be below pi");
    }
};

/// Orthonormal basis of the tangent space at c, as an m x (m+1) matrix whose
/// rows are the basis vectors. Built by the Householder reflection that maps
/// e_{m+1} to c, so the basis is a deterministic function of c.
Eigen::MatrixXd tangent_basis_at(const UnitVector& c);

/// Arc length arccos(x.y) in [0, pi].
double geodesic_distance(const UnitVector& x, const UnitVector& y);

/// Chordal distance |x - y| in [0, 2].
double extrinsic_distance(const UnitVector& x, const UnitVector& y);

/// Geodesic exponential map. Accepts the tangent vector's components
/// directly; exp_map(c, 0) = c.
UnitVector exp_map(const UnitVector& c, const Eigen::VectorXd& components);

/// Overload checking that the tangent vector is anchored at c.
UnitVector exp_map(const UnitVector& c, const TangentVector& v);

/// Inverse of exp_map. Undefined at the antipode of c (throws).
TangentVector log_map(const UnitVector& c, const UnitVector& x);

/// Closest point to x on the subsphere {y : y.c = cos(r)}. Undefined when
/// x is at either pole of the axis c (throws).
UnitVector project_to_subsphere(const UnitVector& x, const UnitVector& c, double r);

/// An element of SO(m+1) that fixes c and rotates by theta. For m = 2 this
/// is the Rodrigues rotation about the axis c; for m > 2 the rotation acts
/// in a seeded uniformly-random 2-plane orthogonal to c.
Eigen::MatrixXd rotation_fixing_axis(const UnitVector& c, double theta, std::uint64_t seed);

}  // namespace subsphere
