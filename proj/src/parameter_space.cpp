#include "subsphere/parameter_space.hpp"

namespace subsphere {

namespace {

constexpr double kTieTol = 1e-12;

bool is_canonical(const SubsphereParams& p) {
    const double sum = p.radii().sum();
    const double target = 0.5 * kPi * static_cast<double>(p.K());
    if (sum < target - kTieTol) return true;
    if (sum > target + kTieTol) return false;
    for (Eigen::Index i = 0; i < p.center().coords().size(); ++i) {
        const double v = p.center().coords()(i);
        if (std::abs(v) > 1e-15) return v > 0.0;
    }
    return true;
}

}  // namespace

SubsphereClass::SubsphereClass(const SubsphereParams& p)
    : rep_(is_canonical(p) ? p : p.flipped()) {}

SubsphereClass canonicalize(const SubsphereParams& p) { return SubsphereClass(p); }

double param_distance(const SubsphereParams& p1, const SubsphereParams& p2) {
    if (p1.m() != p2.m() || p1.K() != p2.K())
        throw std::invalid_argument("param_distance: dimension or K mismatch");
    // arccos(c1.c2) evaluated as 2 atan2(|c1 - c2|, |c1 + c2|): the same
    // angle, but exact at 0 and pi where arccos of a rounded inner product
    // loses eight digits.
    const double diff = (p1.center().coords() - p2.center().coords()).norm();
    const double sum = (p1.center().coords() + p2.center().coords()).norm();
    const double axis1 = 2.0 * std::atan2(diff, sum);
    const double axis2 = 2.0 * std::atan2(sum, diff);
    const Eigen::VectorXd flip2 =
        Eigen::VectorXd::Constant(p2.radii().size(), kPi) - p2.radii();
    const double d1 = std::sqrt(axis1 * axis1 + (p1.radii() - p2.radii()).squaredNorm());
    const double d2 = std::sqrt(axis2 * axis2 + (p1.radii() - flip2).squaredNorm());
    return std::min(d1, d2);
}

double param_distance(const SubsphereClass& p1, const SubsphereClass& p2) {
    return param_distance(p1.representative(), p2.representative());
}

}  // namespace subsphere
