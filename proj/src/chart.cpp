#include "subsphere/chart.hpp"

namespace subsphere {

Eigen::VectorXd ProductChart::to_chart(const SubsphereParams& p) const {
    if (p.m() != m() || p.K() != K())
        throw std::invalid_argument("ProductChart: dimension or K mismatch");
    Eigen::VectorXd u(nu());
    u.head(m()) = axis_to_chart(p.center());
    u.tail(K()) = p.radii() - anchor_.radii();
    return u;
}

SubsphereParams ProductChart::from_chart(const Eigen::VectorXd& u) const {
    if (u.size() != nu())
        throw std::invalid_argument("ProductChart: coordinate vector has wrong length");
    UnitVector center = exp_map(anchor_.center(), u.head(m()));
    return SubsphereParams(std::move(center), anchor_.radii() + u.tail(K()));
}

Eigen::VectorXd ProductChart::axis_to_chart(const UnitVector& c) const {
    return log_map(anchor_.center(), c).components;
}

}  // namespace subsphere
