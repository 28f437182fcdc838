#include "subsphere/sphere_geometry.hpp"

#include <string>

#include "subsphere/rng.hpp"

namespace subsphere {

namespace {

void check_same_dim(const UnitVector& x, const UnitVector& y, const char* op) {
    if (x.ambient_dim() != y.ambient_dim())
        throw std::invalid_argument(std::string(op) + ": dimension mismatch");
}

}  // namespace

Eigen::MatrixXd tangent_basis_at(const UnitVector& c) {
    const Eigen::Index d = c.ambient_dim();
    const Eigen::Index m = d - 1;
    Eigen::VectorXd pole = Eigen::VectorXd::Zero(d);
    pole(d - 1) = 1.0;
    Eigen::VectorXd u = pole - c.coords();
    const double uu = u.squaredNorm();
    Eigen::MatrixXd basis(m, d);
    if (uu < 1e-28) {
        // c is (numerically) the pole itself; the reflection degenerates to
        // the identity and the basis is e_1..e_m.
        basis.setZero();
        for (Eigen::Index k = 0; k < m; ++k) basis(k, k) = 1.0;
        return basis;
    }
    // Row k is H e_k with H = I - 2 u u^T / (u^T u).
    const Eigen::VectorXd scaled = (2.0 / uu) * u;
    for (Eigen::Index k = 0; k < m; ++k) {
        Eigen::VectorXd row = -u(k) * scaled;
        row(k) += 1.0;
        basis.row(k) = row.transpose();
    }
    return basis;
}

double geodesic_distance(const UnitVector& x, const UnitVector& y) {
    check_same_dim(x, y, "geodesic_distance");
    return clamped_acos(x.dot(y));
}

double extrinsic_distance(const UnitVector& x, const UnitVector& y) {
    check_same_dim(x, y, "extrinsic_distance");
    return (x.coords() - y.coords()).norm();
}

UnitVector exp_map(const UnitVector& c, const Eigen::VectorXd& components) {
    if (components.size() != c.m())
        throw std::invalid_argument("exp_map: component count must equal m");
    const double theta = components.norm();
    if (theta == 0.0) return c;
    const Eigen::MatrixXd basis = tangent_basis_at(c);
    const Eigen::VectorXd direction = basis.transpose() * (components / theta);
    return UnitVector(std::cos(theta) * c.coords() + std::sin(theta) * direction);
}

UnitVector exp_map(const UnitVector& c, const TangentVector& v) {
    if ((v.base.coords() - c.coords()).norm() > 1e-12)
        throw std::invalid_argument("exp_map: tangent vector not anchored at c");
    return exp_map(c, v.components);
}

TangentVector log_map(const UnitVector& c, const UnitVector& x) {
    check_same_dim(c, x, "log_map");
    const double t = x.dot(c);
    if (t <= -1.0 + 1e-14)
        throw std::domain_error("log map undefined at cut locus");
    const double theta = clamped_acos(t);
    Eigen::VectorXd residual = x.coords() - t * c.coords();
    const double s = residual.norm();
    const Eigen::MatrixXd basis = tangent_basis_at(c);
    if (s < 1e-15)
        return TangentVector(c, Eigen::VectorXd::Zero(c.m()));
    return TangentVector(c, basis * residual * (theta / s));
}

UnitVector project_to_subsphere(const UnitVector& x, const UnitVector& c, double r) {
    check_same_dim(x, c, "project_to_subsphere");
    if (!(r > 0.0 && r < kPi))
        throw std::invalid_argument("project_to_subsphere: radius must lie in (0, pi)");
    const double t = x.dot(c);
    Eigen::VectorXd perp = x.coords() - t * c.coords();
    const double s = perp.norm();
    if (s < 1e-12)
        throw std::domain_error("projection non-unique at poles");
    return UnitVector(std::cos(r) * c.coords() + (std::sin(r) / s) * perp);
}

Eigen::MatrixXd rotation_fixing_axis(const UnitVector& c, double theta, std::uint64_t seed) {
    const Eigen::Index d = c.ambient_dim();
    if (d < 3)
        throw std::invalid_argument("rotation_fixing_axis: requires m >= 2");
    if (d == 3) {
        // Rodrigues rotation about c; maps e1 to e2 for c = e3, theta = pi/2.
        const Eigen::Vector3d axis = c.coords();
        Eigen::Matrix3d cross;
        cross << 0, -axis(2), axis(1), axis(2), 0, -axis(0), -axis(1), axis(0), 0;
        return Eigen::Matrix3d::Identity() + std::sin(theta) * cross +
               (1.0 - std::cos(theta)) * cross * cross;
    }
    // Rotation by theta in a uniformly-random 2-plane inside the tangent
    // space of c, leaving the orthogonal complement of the plane fixed.
    Rng rng(seed);
    Eigen::VectorXd u(d), w(d);
    for (;;) {
        for (Eigen::Index i = 0; i < d; ++i) u(i) = rng.normal();
        u -= u.dot(c.coords()) * c.coords();
        if (u.norm() > 1e-8) break;
    }
    u.normalize();
    for (;;) {
        for (Eigen::Index i = 0; i < d; ++i) w(i) = rng.normal();
        w -= w.dot(c.coords()) * c.coords();
        w -= w.dot(u) * u;
        if (w.norm() > 1e-8) break;
    }
    w.normalize();
    Eigen::MatrixXd rot = Eigen::MatrixXd::Identity(d, d);
    rot += (std::cos(theta) - 1.0) * (u * u.transpose() + w * w.transpose());
    rot += std::sin(theta) * (w * u.transpose() - u * w.transpose());
    return rot;
}

}  // namespace subsphere
