#pragma once

#include "subsphere/parameter_space.hpp"
#include "subsphere/polysphere_sample.hpp"
#include "subsphere/rng.hpp"

namespace subsphere::testutil {

inline UnitVector random_unit(Rng& rng, Eigen::Index ambient_dim) {
    Eigen::VectorXd v(ambient_dim);
    for (;;) {
        for (Eigen::Index i = 0; i < ambient_dim; ++i) v(i) = rng.normal();
        if (v.norm() > 1e-6) return UnitVector(v);
    }
}

inline SubsphereParams random_params(Rng& rng, Eigen::Index m, Eigen::Index K,
                                     double radius_lo = 0.05, double radius_hi = kPi - 0.05) {
    Eigen::VectorXd radii(K);
    for (Eigen::Index j = 0; j < K; ++j) radii(j) = rng.uniform(radius_lo, radius_hi);
    return SubsphereParams(random_unit(rng, m + 1), radii);
}

inline UnitVector basis_vector(Eigen::Index ambient_dim, Eigen::Index k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ambient_dim);
    v(k) = 1.0;
    return UnitVector(v);
}

/// Point at angle `radius` from the axis, at longitude psi in the tangent
/// basis at the axis.
inline UnitVector point_on_subsphere(const UnitVector& axis, double radius, double psi) {
    const Eigen::MatrixXd basis = tangent_basis_at(axis);
    const Eigen::VectorXd dir =
        std::cos(psi) * basis.row(0).transpose() + std::sin(psi) * basis.row(1).transpose();
    return UnitVector(std::cos(radius) * axis.coords() + std::sin(radius) * dir);
}

/// Exact noiseless sample on the concentric subspheres of `truth`.
inline PolysphereSample noiseless_sample(const SubsphereParams& truth, Eigen::Index n,
                                         std::uint64_t seed) {
    Rng rng(seed);
    PolysphereSample sample(truth.m(), truth.K());
    for (Eigen::Index i = 0; i < n; ++i) {
        std::vector<UnitVector> tuple;
        for (Eigen::Index j = 0; j < truth.K(); ++j)
            tuple.push_back(
                point_on_subsphere(truth.center(), truth.radii()(j), rng.uniform(0.0, 2.0 * kPi)));
        sample.add_observation(std::move(tuple));
    }
    return sample;
}

}  // namespace subsphere::testutil
