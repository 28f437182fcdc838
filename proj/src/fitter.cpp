#include "subsphere/fitter.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <numeric>

#include "subsphere/rng.hpp"

namespace subsphere {

namespace {

constexpr double kRadiusFloor = 1e-6;
constexpr double kEigenTieTol = 1e-10;
constexpr double kRestartSigma = 0.3;  // radians, chart-Gaussian perturbation scale

double clamp_radius(double r) { return std::clamp(r, kRadiusFloor, kPi - kRadiusFloor); }

/// Reorder observations lexicographically by their coordinate tuples. Every
/// accumulation inside the fitter runs over this ordering, which makes the
/// fitted parameters bit-identical under any permutation of the input.
PolysphereSample canonical_reorder(const PolysphereSample& data) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(data.n()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto less = [&data](Eigen::Index a, Eigen::Index b) {
        for (Eigen::Index j = 0; j < data.K(); ++j) {
            const auto& xa = data.point(a, j).coords();
            const auto& xb = data.point(b, j).coords();
            for (Eigen::Index k = 0; k < xa.size(); ++k) {
                if (xa(k) < xb(k)) return true;
                if (xa(k) > xb(k)) return false;
            }
        }
        return false;
    };
    std::stable_sort(order.begin(), order.end(), less);
    PolysphereSample sorted(data.m(), data.K());
    for (const Eigen::Index i : order) {
        std::vector<UnitVector> tuple;
        tuple.reserve(static_cast<std::size_t>(data.K()));
        for (Eigen::Index j = 0; j < data.K(); ++j) tuple.push_back(data.point(i, j));
        sorted.add_observation(std::move(tuple));
    }
    return sorted;
}

/// Pick the lexicographically larger of v and -v.
void canonical_sign(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-15) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

struct EigenAxis {
    UnitVector center;
    bool tie = false;
};

/// Smallest eigenvector of the pooled scatter; `centered` subtracts the
/// per-group means first.
EigenAxis pooled_scatter_axis(const PolysphereSample& data, bool centered) {
    const Eigen::Index d = data.m() + 1;
    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < data.K(); ++j) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
        if (centered) {
            for (Eigen::Index i = 0; i < data.n(); ++i) mean += data.point(i, j).coords();
            mean /= static_cast<double>(data.n());
        }
        for (Eigen::Index i = 0; i < data.n(); ++i) {
            const Eigen::VectorXd centered_point = data.point(i, j).coords() - mean;
            scatter += centered_point * centered_point.transpose();
        }
    }
    scatter /= static_cast<double>(data.n() * data.K());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(scatter);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("fit: eigendecomposition failed");
    Eigen::VectorXd axis = solver.eigenvectors().col(0);
    canonical_sign(axis);
    const auto& ev = solver.eigenvalues();
    const double scale = std::max(1.0, std::abs(ev(d - 1)));
    EigenAxis result{UnitVector(axis), false};
    result.tie = d >= 2 && (ev(1) - ev(0)) <= kEigenTieTol * scale;
    return result;
}

Eigen::VectorXd profile_all_radii(LossKind kind, const PolysphereSample& data,
                                  const UnitVector& c) {
    Eigen::VectorXd radii(data.K());
    for (Eigen::Index j = 0; j < data.K(); ++j) radii(j) = profile_radius(kind, data, j, c);
    return radii;
}

/// Mean squared residual, totals-only fast path over the fitter's ordering.
double objective_total(LossKind kind, const PolysphereSample& data, const UnitVector& c,
                       const Eigen::VectorXd& radii) {
    double sum = 0.0, comp = 0.0;
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < data.K(); ++j) {
            const double d = residual_from_dot(kind, data.point(i, j).dot(c), radii(j));
            const double y = d * d - comp;
            const double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
    }
    return sum / static_cast<double>(data.n() * data.K());
}

struct DescentOutcome {
    UnitVector center;
    Eigen::VectorXd radii;
    double objective = 0.0;
    int iterations = 0;
    bool converged = false;
    double gradient_norm = 0.0;
    std::vector<double> trace;
};

DescentOutcome run_descent(LossKind kind, const PolysphereSample& data, const UnitVector& start,
                           const FitConfig& config) {
    const Eigen::Index m = data.m();
    DescentOutcome out{start, profile_all_radii(kind, data, start), 0.0, 0, false, 0.0, {}};
    out.objective = objective_total(kind, data, out.center, out.radii);
    out.trace.push_back(out.objective);

    for (int iter = 0; iter < config.max_iters; ++iter) {
        out.iterations = iter + 1;
        const ProductChart chart(SubsphereParams(out.center, out.radii));
        Eigen::VectorXd grad;
        try {
            grad = objective_gradient(kind, data, chart);
        } catch (const std::domain_error&) {
            break;  // a data point reached a pole; report the best iterate
        }
        out.gradient_norm = grad.norm();
        if (out.gradient_norm <= config.grad_tol) {
            out.converged = true;
            break;
        }
        const Eigen::VectorXd direction = -grad.head(m);
        const double dir_norm = direction.norm();
        if (dir_norm < 1e-18) break;

        double step = std::min(1.0, (kPi / 2.0) / dir_norm);
        bool accepted = false;
        UnitVector next = out.center;
        Eigen::VectorXd next_radii = out.radii;
        double next_objective = out.objective;
        while (step * dir_norm > 1e-16) {
            try {
                UnitVector candidate = exp_map(out.center, step * direction);
                Eigen::VectorXd candidate_radii = profile_all_radii(kind, data, candidate);
                const double f = objective_total(kind, data, candidate, candidate_radii);
                if (f <= out.objective - 1e-4 * step * dir_norm * dir_norm) {
                    next = std::move(candidate);
                    next_radii = std::move(candidate_radii);
                    next_objective = f;
                    accepted = true;
                    break;
                }
            } catch (const std::domain_error&) {
                // candidate put a data point at a pole; shrink and retry
            }
            step *= 0.5;
        }

        bool polished = false;
        if (!accepted && out.gradient_norm < 1e-6) {
            // Near the optimum the Armijo decrease falls below objective
            // rounding noise and the line search stalls. Polish with Newton
            // steps judged by gradient-norm decrease instead.
            try {
                const Eigen::MatrixXd hess = objective_hessian(kind, data, chart);
                const Eigen::VectorXd delta = hess.ldlt().solve(-grad);
                if (delta.allFinite() && delta.norm() < kPi / 4.0) {
                    UnitVector candidate = exp_map(out.center, delta.head(m));
                    Eigen::VectorXd candidate_radii = out.radii + delta.tail(data.K());
                    for (Eigen::Index j = 0; j < candidate_radii.size(); ++j)
                        candidate_radii(j) = clamp_radius(candidate_radii(j));
                    const ProductChart polish_chart(
                        SubsphereParams(candidate, candidate_radii));
                    const double polished_norm =
                        objective_gradient(kind, data, polish_chart).norm();
                    if (polished_norm < out.gradient_norm) {
                        next = std::move(candidate);
                        next_radii = std::move(candidate_radii);
                        next_objective = objective_total(kind, data, next, next_radii);
                        accepted = true;
                        polished = true;
                    }
                }
            } catch (const std::domain_error&) {
            }
        }
        if (!accepted) break;

        const double moved = param_distance(SubsphereParams(out.center, out.radii),
                                            SubsphereParams(next, next_radii));
        out.center = std::move(next);
        out.radii = std::move(next_radii);
        out.objective = next_objective;
        out.trace.push_back(out.objective);
        if (moved < config.step_tol && !polished && out.gradient_norm >= 1e-6) break;
    }

    if (!out.converged) {
        try {
            const ProductChart chart(SubsphereParams(out.center, out.radii));
            out.gradient_norm = objective_gradient(kind, data, chart).norm();
            out.converged = out.gradient_norm <= config.grad_tol;
        } catch (const std::domain_error&) {
            out.converged = false;
        }
    }
    return out;
}

}  // namespace

double profile_radius(LossKind kind, const PolysphereSample& data, Eigen::Index j,
                      const UnitVector& c) {
    const Eigen::Index n = data.n();
    switch (kind) {
        case LossKind::Intrinsic: {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                sum += clamped_acos(data.point(i, j).dot(c));
            return clamp_radius(sum / static_cast<double>(n));
        }
        case LossKind::Extrinsic: {
            double sin_sum = 0.0, cos_sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double t = data.point(i, j).dot(c);
                sin_sum += std::sqrt(std::max(0.0, 1.0 - t * t));
                cos_sum += t;
            }
            return clamp_radius(std::atan2(sin_sum, cos_sum));
        }
        case LossKind::Slicing: {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) sum += data.point(i, j).dot(c);
            return clamp_radius(clamped_acos(sum / static_cast<double>(n)));
        }
        case LossKind::NaiveExtrinsic: {
            double sum = 0.0;
            for (Eigen::Index i = 0; i < n; ++i)
                sum += std::sqrt(std::max(0.0, 2.0 - 2.0 * data.point(i, j).dot(c)));
            const double half = std::clamp(0.5 * sum / static_cast<double>(n), 0.0, 1.0);
            return clamp_radius(2.0 * std::asin(half));
        }
    }
    throw std::logic_error("unreachable");
}

FitResult fit_slicing(const PolysphereSample& data) {
    if (data.n() < 1) throw std::invalid_argument("fit_slicing: empty sample");
    const PolysphereSample sorted = canonical_reorder(data);
    const EigenAxis axis = pooled_scatter_axis(sorted, /*centered=*/true);
    const Eigen::VectorXd radii = profile_all_radii(LossKind::Slicing, sorted, axis.center);
    const SubsphereParams found(axis.center, radii);

    FitResult result(canonicalize(found));
    result.objective = objective(LossKind::Slicing, data, found);
    result.iterations = 1;
    result.converged = true;
    result.eigen_tie = axis.tie;
    result.initializer = InitializerKind::Eigen;
    result.near_axis_warnings = count_near_axis(data, axis.center, 1e-3);
    result.final_gradient_norm = objective_gradient(LossKind::Slicing, sorted, found).norm();
    result.objective_trace.push_back(result.objective.total);
    return result;
}

FitResult fit_great_subsphere(const PolysphereSample& data) {
    if (data.n() < 1) throw std::invalid_argument("fit_great_subsphere: empty sample");
    const PolysphereSample sorted = canonical_reorder(data);
    const EigenAxis axis = pooled_scatter_axis(sorted, /*centered=*/false);
    const Eigen::VectorXd radii = Eigen::VectorXd::Constant(data.K(), kPi / 2.0);
    const SubsphereParams found(axis.center, radii);

    FitResult result(canonicalize(found));
    result.objective = objective(LossKind::Slicing, data, found);
    result.iterations = 1;
    result.converged = true;
    result.eigen_tie = axis.tie;
    result.initializer = InitializerKind::Eigen;
    result.near_axis_warnings = count_near_axis(data, axis.center, 1e-3);
    result.objective_trace.push_back(result.objective.total);
    return result;
}

FitResult fit(const PolysphereSample& data, const FitConfig& config) {
    config.validate();
    if (data.n() < 1) throw std::invalid_argument("fit: empty sample");

    if (config.loss == LossKind::Slicing) {
        FitResult result = fit_slicing(data);
        result.near_axis_warnings =
            count_near_axis(data, result.params.representative().center(), config.near_axis_epsilon);
        return result;
    }

    const PolysphereSample sorted = canonical_reorder(data);
    const EigenAxis warm = pooled_scatter_axis(sorted, /*centered=*/true);

    std::vector<UnitVector> starts;
    starts.push_back(warm.center);
    for (int s = 0; s < config.restarts; ++s) {
        Rng rng(Rng::derive(config.seed, static_cast<std::uint64_t>(s) + 1));
        Eigen::VectorXd v(data.m());
        for (Eigen::Index k = 0; k < v.size(); ++k) v(k) = kRestartSigma * rng.normal();
        const double norm = v.norm();
        if (norm >= kPi / 2.0) v *= (kPi / 2.0 - 1e-6) / norm;
        starts.push_back(exp_map(warm.center, v));
    }

    std::vector<DescentOutcome> outcomes;
    outcomes.reserve(starts.size());
    for (const auto& start : starts)
        outcomes.push_back(run_descent(config.loss, sorted, start, config));

    std::size_t best = 0;
    for (std::size_t s = 1; s < outcomes.size(); ++s)
        if (outcomes[s].objective < outcomes[best].objective) best = s;
    const DescentOutcome& winner = outcomes[best];

    const SubsphereParams found(winner.center, winner.radii);
    FitResult result(canonicalize(found));
    result.objective = objective(config.loss, data, found);
    result.iterations = winner.iterations;
    result.converged = winner.converged;
    result.initializer = best == 0 ? InitializerKind::Eigen : InitializerKind::Restart;
    result.restart_index = best == 0 ? -1 : static_cast<int>(best - 1);
    result.eigen_tie = warm.tie;
    result.final_gradient_norm = winner.gradient_norm;
    result.near_axis_warnings = count_near_axis(data, winner.center, config.near_axis_epsilon);
    result.objective_trace = winner.trace;
    return result;
}

}  // namespace subsphere
