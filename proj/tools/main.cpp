// Command-line front end: fit concentric subspheres to polysphere data,
// report large-sample uncertainty for the fitted axis, and drive synthetic
// data generation and Monte Carlo studies.
//
// Exit codes: 0 success, 2 input error, 3 best-effort non-convergence,
// 4 numerical degeneracy.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

#include "subsphere/dataset_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitNotConverged = 3;
constexpr int kExitDegenerate = 4;

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << content;
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    return nlohmann::json::parse(in);
}

Eigen::VectorXd parse_axis(const std::string& text) {
    std::vector<double> values;
    std::stringstream ss(text);
    std::string field;
    while (std::getline(ss, field, ',')) values.push_back(std::stod(field));
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Eigen::Index>(i)) = values[i];
    return v;
}

int run_fit(const std::string& input, const std::string& loss_name, int restarts,
            std::uint64_t seed, const std::string& out_path) {
    const subsphere::LossKind loss = subsphere::parse_loss_kind(loss_name);
    const auto loaded = subsphere::load_dataset_csv_file(input);
    for (const auto& warning : loaded.warnings) std::cerr << "warning: " << warning << "\n";

    subsphere::FitConfig config;
    config.loss = loss;
    config.restarts = restarts;
    config.seed = seed;
    const subsphere::FitResult result = subsphere::fit(loaded.sample, config);

    write_file(out_path,
               subsphere::fit_result_to_json(result, loss, loaded.sample.n()).dump(2) + "\n");
    if (!result.converged) {
        std::cerr << "fit did not converge; best iterate written to " << out_path << "\n";
        return kExitNotConverged;
    }
    return kExitOk;
}

int run_asym(const std::string& input, const std::string& fit_path, double level,
             const std::optional<std::string>& test_axis, const std::string& out_path) {
    const auto loaded = subsphere::load_dataset_csv_file(input);
    const nlohmann::json fit_doc = read_json_file(fit_path);
    subsphere::check_schema_version(fit_doc, "fit result");
    const subsphere::SubsphereClass fitted = subsphere::class_from_json(fit_doc.at("params"));
    if (fitted.m() != loaded.sample.m() || fitted.K() != loaded.sample.K())
        throw std::runtime_error("fit result does not match dataset dimensions");
    if (fit_doc.contains("n") && fit_doc["n"].get<Eigen::Index>() != loaded.sample.n())
        throw std::runtime_error("fit result was produced from a different sample size");
    const subsphere::LossKind loss =
        subsphere::parse_loss_kind(fit_doc.at("loss").get<std::string>());

    const subsphere::AsymptoticEstimate est =
        subsphere::estimate_asymptotics(loaded.sample, fitted, loss);
    nlohmann::json doc = subsphere::asymptotics_to_json(est);
    doc["confidence_region"] =
        subsphere::region_to_json(subsphere::axis_confidence_region(est, level));
    if (test_axis) {
        const subsphere::UnitVector c0(parse_axis(*test_axis));
        doc["axis_test"] = subsphere::test_to_json(subsphere::axis_wald_test(est, c0));
    }
    write_file(out_path, doc.dump(2) + "\n");
    return kExitOk;
}

int run_simulate(const std::string& spec_path, const std::optional<std::uint64_t>& seed,
                 const std::string& out_path) {
    nlohmann::json doc = read_json_file(spec_path);
    subsphere::check_schema_version(doc, "generator spec");
    subsphere::GeneratorSpec spec = subsphere::generator_spec_from_json(doc);
    if (seed) spec.seed = *seed;
    const subsphere::GeneratedSample drawn = subsphere::generate(spec);
    write_file(out_path, subsphere::dataset_to_csv(drawn.sample));
    return kExitOk;
}

int run_mc(const std::string& config_path, const std::optional<std::uint64_t>& seed,
           std::optional<int> threads, const std::string& out_path,
           std::optional<std::string> csv_path) {
    nlohmann::json doc = read_json_file(config_path);
    subsphere::check_schema_version(doc, "mc config");
    subsphere::McConfig config = subsphere::mc_config_from_json(doc);
    if (seed) config.seed = *seed;
    if (threads) config.threads = *threads;
    const subsphere::McReport report = subsphere::mc_study(config);
    write_file(out_path, subsphere::report_to_json(report));
    if (!csv_path) {
        std::string derived = out_path;
        const auto dot = derived.rfind('.');
        if (dot != std::string::npos) derived.resize(dot);
        csv_path = derived + ".csv";
    }
    write_file(*csv_path, subsphere::report_to_csv(report));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least-squares fitting of concentric subspheres on the polysphere"};
    app.require_subcommand(1);

    std::string input, fit_path, out_path, loss_name = "intrinsic", spec_path, config_path;
    std::string test_axis_text;
    int restarts = 3;
    std::uint64_t seed_value = 0;
    bool seed_given = false;
    double level = 0.95;
    int threads_value = 1;
    bool threads_given = false;
    std::string csv_path;

    auto* fit_cmd = app.add_subcommand("fit", "Fit concentric subspheres to a dataset");
    fit_cmd->add_option("input", input, "Dataset CSV")->required();
    fit_cmd->add_option("--loss", loss_name, "intrinsic | extrinsic | slicing | naive");
    fit_cmd->add_option("--restarts", restarts, "Random restarts beyond the eigen warm start");
    fit_cmd->add_option("--seed", seed_value, "Seed for restart perturbations");
    fit_cmd->add_option("--out", out_path, "Result JSON path")->required();

    auto* asym_cmd = app.add_subcommand("asym", "Sandwich covariance, region and axis test");
    asym_cmd->add_option("input", input, "Dataset CSV")->required();
    asym_cmd->add_option("fit", fit_path, "Fit result JSON")->required();
    asym_cmd->add_option("--level", level, "Confidence level (default 0.95)");
    asym_cmd->add_option("--test-axis", test_axis_text, "Comma-separated axis to test");
    asym_cmd->add_option("--out", out_path, "Output JSON path")->required();

    auto* sim_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset");
    sim_cmd->add_option("--spec", spec_path, "Generator spec JSON")->required();
    sim_cmd->add_option("--seed", seed_value, "Override the spec seed")
        ->each([&](const std::string&) { seed_given = true; });
    sim_cmd->add_option("--out", out_path, "Dataset CSV path")->required();

    auto* mc_cmd = app.add_subcommand("mc", "Run a Monte Carlo study");
    mc_cmd->add_option("--config", config_path, "Study config JSON")->required();
    mc_cmd->add_option("--seed", seed_value, "Override the config seed")
        ->each([&](const std::string&) { seed_given = true; });
    mc_cmd->add_option("--threads", threads_value, "Worker threads")
        ->each([&](const std::string&) { threads_given = true; });
    mc_cmd->add_option("--out", out_path, "Report JSON path")->required();
    mc_cmd->add_option("--csv", csv_path, "Per-replicate CSV path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit_cmd->parsed())
            return run_fit(input, loss_name, restarts, seed_value, out_path);
        if (asym_cmd->parsed())
            return run_asym(input, fit_path, level,
                            test_axis_text.empty() ? std::nullopt
                                                   : std::optional<std::string>(test_axis_text),
                            out_path);
        if (sim_cmd->parsed())
            return run_simulate(spec_path,
                                seed_given ? std::optional<std::uint64_t>(seed_value)
                                           : std::nullopt,
                                out_path);
        if (mc_cmd->parsed())
            return run_mc(config_path,
                          seed_given ? std::optional<std::uint64_t>(seed_value) : std::nullopt,
                          threads_given ? std::optional<int>(threads_value) : std::nullopt,
                          out_path,
                          csv_path.empty() ? std::nullopt : std::optional<std::string>(csv_path));
    } catch (const subsphere::SingularHessianError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const subsphere::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInputError;
    }
    return kExitInputError;
}
