#pragma once

#include <cstdint>
#include <vector>

#include "subsphere/loss_functions.hpp"

namespace subsphere {

struct FitConfig {
    LossKind loss = LossKind::Intrinsic;
    int max_iters = 200;
    double grad_tol = 1e-9;     // on the chart-gradient norm
    double step_tol = 1e-12;    // on the per-iteration param_distance decrease
    int restarts = 3;           // random restarts beyond the eigen initializer
    std::uint64_t seed = 0;
    double near_axis_epsilon = 1e-3;  // diagnostic radius around the fitted poles

    void validate() const {
        if (max_iters < 1) throw std::invalid_argument("FitConfig: max_iters must be >= 1");
        if (!(grad_tol > 0.0) || !(step_tol > 0.0))
            throw std::invalid_argument("FitConfig: tolerances must be positive");
        if (restarts < 0) throw std::invalid_argument("FitConfig: restarts must be >= 0");
    }
};

enum class InitializerKind { Eigen, Restart };

struct FitResult {
    SubsphereClass params;            // canonical class of the best fit
    ObjectiveValue objective;         // evaluated at the representative found
    int iterations = 0;
    bool converged = false;
    InitializerKind initializer = InitializerKind::Eigen;
    int restart_index = -1;           // meaningful when initializer == Restart
    Eigen::Index near_axis_warnings = 0;
    bool eigen_tie = false;           // smallest eigenvalue not simple
    double final_gradient_norm = 0.0;
    std::vector<double> objective_trace;  // objective after each accepted iteration

    explicit FitResult(SubsphereClass p) : params(std::move(p)) {}
};

/// Exact minimizer of the slicing objective: the axis is the smallest
/// eigenvector of the pooled centered scatter sum_j X_j (I - 11^T/n) X_j^T
/// and each radius is arccos of the mean projection onto the axis.
FitResult fit_slicing(const PolysphereSample& data);

/// Slicing fit constrained to great subspheres (all radii pi/2): smallest
/// eigenvector of the pooled uncentered second-moment matrix.
FitResult fit_great_subsphere(const PolysphereSample& data);

/// Least-squares fit under any of the four losses. Slicing delegates to
/// fit_slicing; the other losses run block descent from the eigen warm
/// start (plus seeded restarts): exact radius profiling given the axis,
/// then a backtracking step along the chart gradient in the axis, with the
/// chart re-anchored every iteration.
FitResult fit(const PolysphereSample& data, const FitConfig& config);

/// Exact 1-d minimizer of the group-j objective over the radius, for a
/// fixed axis. Exposed so tests can audit it against a grid scan.
double profile_radius(LossKind kind, const PolysphereSample& data, Eigen::Index j,
                      const UnitVector& c);

}  // namespace subsphere
