#include "subsphere/loss_functions.hpp"

namespace subsphere {

namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kFdStepGradient = 1e-6;
constexpr double kFdStepHessian = 1e-4;

double sq(double x) { return x * x; }

bool needs_smoothness(LossKind kind) { return kind != LossKind::Slicing; }

/// sin(theta) for theta = arccos(t), guarded against rounding below zero.
double sin_from_dot(double t) { return std::sqrt(std::max(0.0, 1.0 - t * t)); }

/// rho^2(X_i, from_chart(u)) with the 1/K product weighting.
double observation_loss_at(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                           const ProductChart& chart, const Eigen::VectorXd& u) {
    const SubsphereParams q = chart.from_chart(u);
    const Eigen::Index K = data.K();
    double acc = 0.0;
    for (Eigen::Index j = 0; j < K; ++j) {
        const double t = data.point(i, j).dot(q.center());
        acc += sq(residual_from_dot(kind, t, q.radii()(j)));
    }
    return acc / static_cast<double>(K);
}

void check_observation_smooth(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                              const ProductChart& chart) {
    if (!needs_smoothness(kind)) return;
    for (Eigen::Index j = 0; j < data.K(); ++j) {
        const double t = data.point(i, j).dot(chart.anchor().center());
        if (sin_from_dot(t) < kPoleTol)
            throw std::domain_error("loss derivatives undefined: data point at a pole of the axis");
    }
}

Eigen::VectorXd analytic_observation_gradient(LossKind kind, const PolysphereSample& data,
                                              Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index m = chart.m();
    const Eigen::Index K = chart.K();
    const double invK = 1.0 / static_cast<double>(K);
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(chart.nu());
    for (Eigen::Index j = 0; j < K; ++j) {
        const UnitVector& x = data.point(i, j);
        const double t = x.dot(chart.anchor().center());
        const double r = chart.anchor().radii()(j);
        const Eigen::VectorXd g = chart.basis() * x.coords();  // d(x.c)/dv
        if (kind == LossKind::Slicing) {
            const double e = t - std::cos(r);
            grad.head(m) += invK * 2.0 * e * g;
            grad(m + j) = invK * 2.0 * e * std::sin(r);
        } else {  // Intrinsic
            const double s = sin_from_dot(t);
            const double e = clamped_acos(t) - r;
            grad.head(m) += invK * 2.0 * e * (-g / s);
            grad(m + j) = invK * (-2.0) * e;
        }
    }
    return grad;
}

Eigen::MatrixXd analytic_observation_hessian(LossKind kind, const PolysphereSample& data,
                                             Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index m = chart.m();
    const Eigen::Index K = chart.K();
    const double invK = 1.0 / static_cast<double>(K);
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(chart.nu(), chart.nu());
    for (Eigen::Index j = 0; j < K; ++j) {
        const UnitVector& x = data.point(i, j);
        const double t = x.dot(chart.anchor().center());
        const double r = chart.anchor().radii()(j);
        const Eigen::VectorXd g = chart.basis() * x.coords();
        if (kind == LossKind::Slicing) {
            const double e = t - std::cos(r);
            const double sr = std::sin(r);
            // Second derivative of the axis uses d^2 c / dv_k dv_l = -c delta_kl.
            hess.topLeftCorner(m, m) += invK * (2.0 * g * g.transpose() -
                                                2.0 * e * t * Eigen::MatrixXd::Identity(m, m));
            hess.block(0, m + j, m, 1) += invK * 2.0 * sr * g;
            hess.block(m + j, 0, 1, m) += invK * 2.0 * sr * g.transpose();
            hess(m + j, m + j) = invK * (2.0 * sr * sr + 2.0 * e * std::cos(r));
        } else {  // Intrinsic
            const double s = sin_from_dot(t);
            const double theta = clamped_acos(t);
            const double e = theta - r;
            const Eigen::VectorXd dtheta = -g / s;
            const Eigen::MatrixXd d2theta =
                (t / s) * Eigen::MatrixXd::Identity(m, m) - (t / (s * s * s)) * (g * g.transpose());
            hess.topLeftCorner(m, m) +=
                invK * (2.0 * dtheta * dtheta.transpose() + 2.0 * e * d2theta);
            hess.block(0, m + j, m, 1) += invK * (-2.0) * dtheta;
            hess.block(m + j, 0, 1, m) += invK * (-2.0) * dtheta.transpose();
            hess(m + j, m + j) = invK * 2.0;
        }
    }
    return hess;
}

Eigen::VectorXd fd_observation_gradient(LossKind kind, const PolysphereSample& data,
                                        Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index nu = chart.nu();
    const double h = kFdStepGradient;
    Eigen::VectorXd grad(nu);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nu);
    for (Eigen::Index k = 0; k < nu; ++k) {
        u(k) = h;
        const double fp = observation_loss_at(kind, data, i, chart, u);
        u(k) = -h;
        const double fm = observation_loss_at(kind, data, i, chart, u);
        u(k) = 0.0;
        grad(k) = (fp - fm) / (2.0 * h);
    }
    return grad;
}

Eigen::MatrixXd fd_observation_hessian(LossKind kind, const PolysphereSample& data,
                                       Eigen::Index i, const ProductChart& chart) {
    const Eigen::Index nu = chart.nu();
    const double h = kFdStepHessian;
    const double f0 = observation_loss_at(kind, data, i, chart, Eigen::VectorXd::Zero(nu));
    Eigen::MatrixXd hess(nu, nu);
    Eigen::VectorXd u = Eigen::VectorXd::Zero(nu);
    for (Eigen::Index k = 0; k < nu; ++k) {
        u(k) = h;
        const double fp = observation_loss_at(kind, data, i, chart, u);
        u(k) = -h;
        const double fm = observation_loss_at(kind, data, i, chart, u);
        u(k) = 0.0;
        hess(k, k) = (fp - 2.0 * f0 + fm) / (h * h);
        for (Eigen::Index l = k + 1; l < nu; ++l) {
            u(k) = h;
            u(l) = h;
            const double fpp = observation_loss_at(kind, data, i, chart, u);
            u(l) = -h;
            const double fpm = observation_loss_at(kind, data, i, chart, u);
            u(k) = -h;
            u(l) = h;
            const double fmp = observation_loss_at(kind, data, i, chart, u);
            u(l) = -h;
            const double fmm = observation_loss_at(kind, data, i, chart, u);
            u(k) = 0.0;
            u(l) = 0.0;
            const double cross = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            hess(k, l) = cross;
            hess(l, k) = cross;
        }
    }
    return hess;
}

}  // namespace

std::string to_string(LossKind kind) {
    switch (kind) {
        case LossKind::Intrinsic: return "intrinsic";
        case LossKind::Extrinsic: return "extrinsic";
        case LossKind::Slicing: return "slicing";
        case LossKind::NaiveExtrinsic: return "naive";
    }
    throw std::logic_error("unreachable");
}

LossKind parse_loss_kind(const std::string& name) {
    if (name == "intrinsic") return LossKind::Intrinsic;
    if (name == "extrinsic") return LossKind::Extrinsic;
    if (name == "slicing") return LossKind::Slicing;
    if (name == "naive") return LossKind::NaiveExtrinsic;
    throw std::invalid_argument("unknown loss kind: " + name);
}

double residual_from_dot(LossKind kind, double t, double r) {
    switch (kind) {
        case LossKind::Intrinsic:
            return std::abs(clamped_acos(t) - r);
        case LossKind::Extrinsic:
            return std::sqrt(
             std::max(0.0, 2.0 - 2.0 * (t * std::cos(r) + sin_from_dot(t) * std::sin(r))));
        case LossKind::Slicing:
            return std::abs(t - std::cos(r));
        case LossKind::NaiveExtrinsic:
            return std::abs(std::sqrt(std::max(0.0, 2.0 - 2.0 * t)) - 2.0 * std::sin(0.5 * r));
    }
    throw std::logic_error("unreachable");
}

double residual_distance(LossKind kind, const UnitVector& x, const UnitVector& c, double r) {
    if (x.ambient_dim() != c.ambient_dim())
        throw std::invalid_argument("residual_distance: dimension mismatch");
    if (!(r > 0.0 && r < kPi))
        throw std::invalid_argument("residual_distance: radius must lie in (0, pi)");
    const double t = x.dot(c);
    if (kind == LossKind::Extrinsic && sin_from_dot(t) < kPoleTol)
        throw std::domain_error("extrinsic residual undefined at poles of the axis");
    return residual_from_dot(kind, t, r);
}

Eigen::Index count_near_axis(const PolysphereSample& data, const UnitVector& c, double epsilon) {
    const double threshold = std::cos(epsilon);
    Eigen::Index count = 0;
    for (Eigen::Index i = 0; i < data.n(); ++i)
        for (Eigen::Index j = 0; j < data.K(); ++j)
            if (std::abs(data.point(i, j).dot(c)) > threshold) ++count;
    return count;
}

ObjectiveValue objective(LossKind kind, const PolysphereSample& data, const SubsphereParams& p) {
    if (data.m() != p.m() || data.K() != p.K())
        throw std::invalid_argument("objective: dimension or K mismatch");
    ObjectiveValue value;
    value.per_point.resize(data.n(), data.K());
    double sum = 0.0, comp = 0.0;  // Kahan, fixed (i, j) order
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.K(); ++j) {
            const double d = residual_distance(kind, data.point(i, j), p.center(), p.radii()(j));
            const double d2 = d * d;
            value.per_point(i, j) = d2;
            const double y = d2 - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    value.total = sum / static_cast<double>(data.n() * data.K());
    return value;
}

Eigen::VectorXd observation_gradient(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                                     const ProductChart& chart) {
    check_observation_smooth(kind, data, i, chart);
    if (kind == LossKind::Slicing || kind == LossKind::Intrinsic)
        return analytic_observation_gradient(kind, data, i, chart);
    return fd_observation_gradient(kind, data, i, chart);
}

Eigen::MatrixXd observation_hessian(LossKind kind, const PolysphereSample& data, Eigen::Index i,
                                    const ProductChart& chart) {
    check_observation_smooth(kind, data, i, chart);
    if (kind == LossKind::Slicing || kind == LossKind::Intrinsic)
        return analytic_observation_hessian(kind, data, i, chart);
    return fd_observation_hessian(kind, data, i, chart);
}

Eigen::VectorXd objective_gradient(LossKind kind, const PolysphereSample& data,
                                   const ProductChart& chart) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(chart.nu());
    for (Eigen::Index i = 0; i < data.n(); ++i)
        grad += observation_gradient(kind, data, i, chart);
    return grad / static_cast<double>(data.n());
}

Eigen::MatrixXd objective_hessian(LossKind kind, const PolysphereSample& data,
                                  const ProductChart& chart) {
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(chart.nu(), chart.nu());
    for (Eigen::Index i = 0; i < data.n(); ++i)
        hess += observation_hessian(kind, data, i, chart);
    return hess / static_cast<double>(data.n());
}

Eigen::VectorXd objective_gradient(LossKind kind, const PolysphereSample& data,
                                   const SubsphereParams& p) {
    return objective_gradient(kind, data, chart_at(p));
}

Eigen::MatrixXd objective_hessian(LossKind kind, const PolysphereSample& data,
                                  const SubsphereParams& p) {
    return objective_hessian(kind, data, chart_at(p));
}

}  // namespace subsphere
