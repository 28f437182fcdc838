#include "subsphere/mc_study.hpp"

#include <algorithm>
#include <cstdio>

#include <json.hpp>

#include "subsphere/parallel.hpp"
#include "subsphere/rng.hpp"

namespace subsphere {

namespace {

double quantile_of_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return std::numeric_limits<double>::quiet_NaN();
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

GeneratorSpec cell_spec(const McConfig& config, Eigen::Index n, Eigen::Index K,
                        std::uint64_t seed) {
    GeneratorSpec spec = config.base_spec;
    spec.n = n;
    spec.K = K;
    spec.seed = seed;
    const SubsphereParams& truth = *config.base_spec.truth;
    spec.truth = SubsphereParams(truth.center(), truth.radii().head(K));
    if (spec.base_longitudes.size() != 0) spec.base_longitudes = spec.base_longitudes.head(K);
    return spec;
}

/// Fit of one very large sample: the Monte Carlo stand-in for the
/// population minimizer of the configured loss.
SubsphereClass population_reference(const McConfig& config, Eigen::Index K, std::uint64_t seed) {
    const GeneratorSpec spec = cell_spec(config, config.population_reference_n, K, seed);
    FitConfig fit_config;
    fit_config.loss = config.loss;
    fit_config.restarts = 0;
    return fit(generate(spec).sample, fit_config).params;
}

ReplicateRecord run_replicate(const McConfig& config, Eigen::Index n, Eigen::Index K,
                              int replicate, std::uint64_t seed,
                              const SubsphereClass& reference) {
    ReplicateRecord rec;
    rec.n = n;
    rec.K = K;
    rec.replicate = replicate;

    const GeneratorSpec spec = cell_spec(config, n, K, seed);
    const GeneratedSample drawn = generate(spec);
    const SubsphereParams& truth = drawn.truth;
    const UnitVector& true_axis = truth.center();

    FitConfig fit_config;
    fit_config.loss = config.loss;
    fit_config.restarts = config.fit_restarts;
    fit_config.seed = Rng::derive(seed, 0xF17, 0);

    try {
        const FitResult fitted = fit(drawn.sample, fit_config);
        rec.fit_ok = fitted.converged;
        rec.param_dist = param_distance(fitted.params.representative(), truth);
        rec.param_dist_pop = param_distance(fitted.params, reference);
        rec.objective = fitted.objective.total;

        const UnitVector& fitted_axis = fitted.params.representative().center();
        const UnitVector aligned =
            true_axis.dot(fitted_axis) < 0.0 ? -fitted_axis : fitted_axis;
        rec.phi1 = log_map(true_axis, aligned).components;

        if (rec.fit_ok) {
            const AsymptoticEstimate est =
                estimate_asymptotics(drawn.sample, fitted.params, config.loss);
            const ConfidenceRegion region = axis_confidence_region(est, config.level);
            const UnitVector hyp_aligned =
                fitted_axis.dot(true_axis) < 0.0 ? -true_axis : true_axis;
            rec.covered = region.contains(est.chart.axis_to_chart(hyp_aligned));
            rec.wald_p = axis_wald_test(est, true_axis).p_value;
            rec.sandwich_axis_trace = est.sandwich.topLeftCorner(est.m(), est.m()).trace();
            rec.asym_ok = true;
        }
    } catch (const std::exception&) {
        // recorded as a failed replicate; the cell validity check accounts for it
    }
    return rec;
}

CellSummary summarize_cell(const McConfig& config, Eigen::Index n, Eigen::Index K,
                           const ReplicateRecord* records, int count) {
    CellSummary cell;
    cell.n = n;
    cell.K = K;
    cell.replicates = count;

    std::vector<double> distances;
    std::vector<double> pop_distances;
    Eigen::Index m = 0;
    std::vector<const ReplicateRecord*> with_fit;
    int covered = 0, rejected = 0, asym_count = 0;
    double sandwich_sum = 0.0;
    const double alpha = 1.0 - config.level;
    for (int r = 0; r < count; ++r) {
        const ReplicateRecord& rec = records[r];
        if (!rec.fit_ok) {
            ++cell.failures;
            continue;
        }
        distances.push_back(rec.param_dist);
        pop_distances.push_back(rec.param_dist_pop);
        with_fit.push_back(&rec);
        m = rec.phi1.size();
        if (rec.asym_ok) {
            ++asym_count;
            if (rec.covered) ++covered;
            if (rec.wald_p < alpha) ++rejected;
            sandwich_sum += rec.sandwich_axis_trace;
        }
    }
    cell.valid = cell.failures <= static_cast<int>(0.05 * count);

    std::sort(distances.begin(), distances.end());
    std::sort(pop_distances.begin(), pop_distances.end());
    cell.dist_q10 = quantile_of_sorted(distances, 0.10);
    cell.dist_q25 = quantile_of_sorted(distances, 0.25);
    cell.dist_median = quantile_of_sorted(distances, 0.50);
    cell.dist_q75 = quantile_of_sorted(distances, 0.75);
    cell.dist_q90 = quantile_of_sorted(distances, 0.90);
    cell.dist_pop_median = quantile_of_sorted(pop_distances, 0.50);
    cell.coverage = asym_count > 0 ? static_cast<double>(covered) / asym_count : 0.0;
    cell.wald_rejection_rate = asym_count > 0 ? static_cast<double>(rejected) / asym_count : 0.0;
    cell.mean_sandwich_axis_trace = asym_count > 0 ? sandwich_sum / asym_count : 0.0;

    if (with_fit.size() >= 2 && m > 0) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(m);
        for (const auto* rec : with_fit) mean += rec->phi1;
        mean /= static_cast<double>(with_fit.size());
        double trace = 0.0;
        for (const auto* rec : with_fit) trace += (rec->phi1 - mean).squaredNorm();
        cell.phi1_trace_variance = trace / static_cast<double>(with_fit.size() - 1);
    }
    return cell;
}

void append_double(std::string& out, double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    out += buffer;
}

}  // namespace

void McConfig::validate() const {
    if (replicates < 1) throw std::invalid_argument("McConfig: need at least 1 replicate");
    if (n_grid.empty() || K_grid.empty())
        throw std::invalid_argument("McConfig: n_grid and K_grid must be non-empty");
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("McConfig: level must lie in (0, 1)");
    if (threads < 1) throw std::invalid_argument("McConfig: threads must be >= 1");
    if (!base_spec.truth) throw std::invalid_argument("McConfig: base_spec.truth is required");
    const Eigen::Index max_k = *std::max_element(K_grid.begin(), K_grid.end());
    if (base_spec.truth->K() < max_k)
        throw std::invalid_argument("McConfig: truth radii must cover max(K_grid)");
    if (!base_spec.iid_across_j && K_grid.size() > 1)
        throw std::invalid_argument("McConfig: per-group noise requires a single K");
}

McReport mc_study(const McConfig& config) {
    config.validate();
    McReport report;
    report.config = config;

    struct Cell {
        Eigen::Index n, K;
    };
    std::vector<Cell> cells;
    for (const Eigen::Index n : config.n_grid)
        for (const Eigen::Index K : config.K_grid) cells.push_back({n, K});

    // One reference fit per distinct K; cells sharing K share the target.
    std::vector<SubsphereClass> references;
    references.reserve(cells.size());
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        bool reused = false;
        for (std::size_t prev = 0; prev < ci; ++prev) {
            if (cells[prev].K == cells[ci].K) {
                references.push_back(references[prev]);
                reused = true;
                break;
            }
        }
        if (!reused)
            references.push_back(population_reference(
                config, cells[ci].K,
                Rng::derive(config.seed, 0xBEEF, static_cast<std::uint64_t>(cells[ci].K))));
    }

    const std::size_t total = cells.size() * static_cast<std::size_t>(config.replicates);
    report.records.resize(total);
    parallel_for(total, config.threads, [&](std::size_t idx) {
        const std::size_t ci = idx / static_cast<std::size_t>(config.replicates);
        const int rep = static_cast<int>(idx % static_cast<std::size_t>(config.replicates));
        const std::uint64_t seed =
            Rng::derive(config.seed, ci + 1, static_cast<std::uint64_t>(rep) + 1);
        report.records[idx] =
            run_replicate(config, cells[ci].n, cells[ci].K, rep, seed, references[ci]);
    });

    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const ReplicateRecord* first =
            report.records.data() + ci * static_cast<std::size_t>(config.replicates);
        report.cells.push_back(
            summarize_cell(config, cells[ci].n, cells[ci].K, first, config.replicates));
    }
    return report;
}

std::string report_to_json(const McReport& report) {
    nlohmann::json doc;
    doc["schema_version"] = "1.0";
    doc["replicates"] = report.config.replicates;
    doc["loss"] = to_string(report.config.loss);
    doc["level"] = report.config.level;
    doc["seed"] = report.config.seed;

    nlohmann::json cells = nlohmann::json::array();
    for (const CellSummary& cell : report.cells) {
        nlohmann::json c;
        c["n"] = cell.n;
        c["K"] = cell.K;
        c["replicates"] = cell.replicates;
        c["failures"] = cell.failures;
        c["valid"] = cell.valid;
        c["distance"] = {{"q10", cell.dist_q10},
                         {"q25", cell.dist_q25},
                         {"median", cell.dist_median},
                         {"q75", cell.dist_q75},
                         {"q90", cell.dist_q90}};
        c["distance_to_population_median"] = cell.dist_pop_median;
        c["coverage"] = cell.coverage;
        c["wald_rejection_rate"] = cell.wald_rejection_rate;
        c["phi1_trace_variance"] = cell.phi1_trace_variance;
        c["mean_sandwich_axis_trace"] = cell.mean_sandwich_axis_trace;
        cells.push_back(c);
    }
    doc["cells"] = cells;
    return doc.dump(2) + "\n";
}

std::string report_to_csv(const McReport& report) {
    const Eigen::Index m = report.config.base_spec.m;
    std::string out = "n,K,replicate,fit_ok,asym_ok,param_dist,param_dist_pop,objective,covered,"
                      "wald_p,sandwich_axis_trace";
    for (Eigen::Index k = 0; k < m; ++k) out += ",phi1_" + std::to_string(k);
    out += "\n";
    for (const ReplicateRecord& rec : report.records) {
        out += std::to_string(rec.n) + "," + std::to_string(rec.K) + "," +
               std::to_string(rec.replicate) + ",";
        out += rec.fit_ok ? "1," : "0,";
        out += rec.asym_ok ? "1," : "0,";
        append_double(out, rec.param_dist);
        out += ",";
        append_double(out, rec.param_dist_pop);
        out += ",";
        append_double(out, rec.objective);
        out += ",";
        out += rec.covered ? "1," : "0,";
        append_double(out, rec.wald_p);
        out += ",";
        append_double(out, rec.sandwich_axis_trace);
        for (Eigen::Index k = 0; k < m; ++k) {
            out += ",";
            append_double(out, rec.phi1.size() > k ? rec.phi1(k) : 0.0);
        }
        out += "\n";
    }
    return out;
}

}  // namespace subsphere
