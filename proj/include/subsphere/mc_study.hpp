#pragma once

#include <string>
#include <vector>

#include "subsphere/asymptotics.hpp"
#include "subsphere/synthetic_data.hpp"

namespace subsphere {

struct McConfig {
    int replicates = 500;
    std::vector<Eigen::Index> n_grid;
    std::vector<Eigen::Index> K_grid;
    LossKind loss = LossKind::Intrinsic;
    double level = 0.95;
    std::uint64_t seed = 0;
    int threads = 1;
    int fit_restarts = 0;  // eigen warm start alone is enough near the truth
    /// Sample size of the per-cell reference fit that stands in for the
    /// population minimizer of the chosen loss. Consistency is convergence
    /// to that minimizer; for the losses whose radii are biased under
    /// noise, distance to the generator truth plateaus instead.
    Eigen::Index population_reference_n = 100000;
    /// Template for the per-replicate generator; n, K and seed are
    /// overridden per cell and replicate, and the truth radii are truncated
    /// to the cell's K (so they must cover max(K_grid)).
    GeneratorSpec base_spec;

    void validate() const;
};

/// One replicate of one (n, K) cell. phi1 holds the tangent coordinates of
/// the fitted axis in the chart at the true axis, flip-aligned.
struct ReplicateRecord {
    Eigen::Index n = 0;
    Eigen::Index K = 0;
    int replicate = 0;
    bool fit_ok = false;
    bool asym_ok = false;
    double param_dist = 0.0;      // to the generator truth
    double param_dist_pop = 0.0;  // to the cell's large-sample reference fit
    double objective = 0.0;
    bool covered = false;
    double wald_p = 0.0;
    double sandwich_axis_trace = 0.0;
    Eigen::VectorXd phi1;
};

struct CellSummary {
    Eigen::Index n = 0;
    Eigen::Index K = 0;
    int replicates = 0;
    int failures = 0;
    bool valid = false;  // failures within 5%
    double dist_q10 = 0.0, dist_q25 = 0.0, dist_median = 0.0, dist_q75 = 0.0, dist_q90 = 0.0;
    double dist_pop_median = 0.0;      // against the population reference
    double coverage = 0.0;             // axis region at the nominal level
    double wald_rejection_rate = 0.0;  // under H0, at alpha = 1 - level
    double phi1_trace_variance = 0.0;  // across-replicate variance of phi1
    double mean_sandwich_axis_trace = 0.0;
};

struct McReport {
    McConfig config;
    std::vector<CellSummary> cells;
    std::vector<ReplicateRecord> records;  // cell-major, replicate order
};

McReport mc_study(const McConfig& config);

/// Deterministic serializations (no timestamps, fixed ordering).
std::string report_to_json(const McReport& report);
std::string report_to_csv(const McReport& report);

}  // namespace subsphere
