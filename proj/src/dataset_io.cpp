#include "subsphere/dataset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace subsphere {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        fields.push_back(first == std::string::npos ? "" : field.substr(first, last - first + 1));
    }
    return fields;
}

double parse_double(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected a number, got '" + s + "'");
    }
}

long parse_long(const std::string& s, int line) {
    try {
        std::size_t used = 0;
        const long v = std::stol(s, &used);
        if (used != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError(line, "expected an integer, got '" + s + "'");
    }
}

std::string format_double(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", v);
    return buffer;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& arr, const char* what) {
    if (!arr.is_array() || arr.empty())
        throw std::runtime_error(std::string(what) + ": expected a non-empty array");
    Eigen::VectorXd v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    return v;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& a) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r)
        for (Eigen::Index c = 0; c < a.cols(); ++c) arr.push_back(a(r, c));
    return arr;
}

}  // namespace

void check_schema_version(const nlohmann::json& doc, const char* what) {
    if (!doc.contains("schema_version"))
        throw std::runtime_error(std::string(what) + ": missing schema_version");
    const std::string version = doc["schema_version"].get<std::string>();
    const std::string major = version.substr(0, version.find('.'));
    const std::string ours(kSchemaVersion);
    if (major != ours.substr(0, ours.find('.')))
        throw std::runtime_error(std::string(what) + ": unsupported schema_version " + version);
}

DatasetLoadResult load_dataset_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    auto next_content_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            const auto first = line.find_first_not_of(" \t\r");
            if (first == std::string::npos) continue;
            if (line[first] == '#') continue;
            return true;
        }
        return false;
    };

    if (!next_content_line()) throw ParseError(line_no, "empty dataset");
    {
        const auto header = split_csv(line);
        if (header.size() != 3 || header[0] != "m" || header[1] != "K" || header[2] != "n")
            throw ParseError(line_no, "expected header 'm,K,n'");
    }
    if (!next_content_line()) throw ParseError(line_no, "missing dimension row");
    const auto dims = split_csv(line);
    if (dims.size() != 3) throw ParseError(line_no, "dimension row must have three fields");
    const long m = parse_long(dims[0], line_no);
    const long K = parse_long(dims[1], line_no);
    const long n = parse_long(dims[2], line_no);
    if (m < 1 || K < 1 || n < 1) throw ParseError(line_no, "m, K, n must be positive");

    if (!next_content_line()) throw ParseError(line_no, "missing column header row");
    {
        const auto columns = split_csv(line);
        if (columns.size() != static_cast<std::size_t>(m + 3) || columns[0] != "obs_id" ||
            columns[1] != "group_j")
            throw ParseError(line_no, "expected columns 'obs_id,group_j,coord_0..coord_" +
                                          std::to_string(m) + "'");
    }

    DatasetLoadResult result{PolysphereSample(m, K), {}};
    std::vector<std::vector<Eigen::VectorXd>> grid(
        static_cast<std::size_t>(n), std::vector<Eigen::VectorXd>(static_cast<std::size_t>(K)));
    std::vector<std::vector<bool>> seen(static_cast<std::size_t>(n),
                                        std::vector<bool>(static_cast<std::size_t>(K), false));
    long rows = 0;
    while (next_content_line()) {
        const auto fields = split_csv(line);
        if (fields.size() != static_cast<std::size_t>(m + 3))
            throw ParseError(line_no, "expected " + std::to_string(m + 3) + " fields, got " +
                                          std::to_string(fields.size()));
        const long i = parse_long(fields[0], line_no);
        const long j = parse_long(fields[1], line_no);
        if (i < 0 || i >= n) throw ParseError(line_no, "obs_id out of range");
        if (j < 0 || j >= K) throw ParseError(line_no, "group_j out of range");
        if (seen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
            throw ParseError(line_no, "duplicate (obs_id, group_j) pair");
        Eigen::VectorXd coords(m + 1);
        for (long k = 0; k <= m; ++k)
            coords(k) = parse_double(fields[static_cast<std::size_t>(k + 2)], line_no);
        const double deviation = std::abs(coords.norm() - 1.0);
        if (deviation > 1e-6)
            throw ParseError(line_no, "coordinates deviate from unit norm by " +
                                          format_double(deviation));
        if (deviation > 1e-9)
            result.warnings.push_back("line " + std::to_string(line_no) +
                                      ": renormalized (deviation " + format_double(deviation) +
                                      ")");
        grid[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::move(coords);
        seen[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = true;
        ++rows;
    }
    if (rows != n * K)
        throw ParseError(line_no, "expected " + std::to_string(n * K) + " data rows, got " +
                                      std::to_string(rows));

    for (long i = 0; i < n; ++i) {
        std::vector<UnitVector> tuple;
        tuple.reserve(static_cast<std::size_t>(K));
        for (long j = 0; j < K; ++j)
            tuple.push_back(UnitVector(std::move(grid[static_cast<std::size_t>(i)]
                                                      [static_cast<std::size_t>(j)])));
        result.sample.add_observation(std::move(tuple));
    }
    return result;
}

DatasetLoadResult load_dataset_csv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset file: " + path);
    return load_dataset_csv(in);
}

std::string dataset_to_csv(const PolysphereSample& sample) {
    std::string out = "m,K,n\n";
    out += std::to_string(sample.m()) + "," + std::to_string(sample.K()) + "," +
           std::to_string(sample.n()) + "\n";
    out += "obs_id,group_j";
    for (Eigen::Index k = 0; k <= sample.m(); ++k) out += ",coord_" + std::to_string(k);
    out += "\n";
    for (Eigen::Index i = 0; i < sample.n(); ++i) {
        for (Eigen::Index j = 0; j < sample.K(); ++j) {
            out += std::to_string(i) + "," + std::to_string(j);
            const auto& coords = sample.point(i, j).coords();
            for (Eigen::Index k = 0; k < coords.size(); ++k)
                out += "," + format_double(coords(k));
            out += "\n";
        }
    }
    return out;
}

nlohmann::json class_to_json(const SubsphereClass& cls) {
    return {{"center", vector_to_json(cls.representative().center().coords())},
            {"radii", vector_to_json(cls.representative().radii())}};
}

SubsphereClass class_from_json(const nlohmann::json& j) {
    const Eigen::VectorXd center = vector_from_json(j.at("center"), "params.center");
    const Eigen::VectorXd radii = vector_from_json(j.at("radii"), "params.radii");
    return canonicalize(SubsphereParams(UnitVector(center), radii));
}

nlohmann::json fit_result_to_json(const FitResult& result, LossKind loss, Eigen::Index n) {
    const auto& rep = result.params.representative();
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["loss"] = to_string(loss);
    j["m"] = rep.m();
    j["K"] = rep.K();
    j["n"] = n;
    j["params"] = class_to_json(result.params);
    j["objective_total"] = result.objective.total;
    nlohmann::json rms = nlohmann::json::array();
    for (Eigen::Index g = 0; g < result.objective.per_point.cols(); ++g)
        rms.push_back(std::sqrt(result.objective.per_point.col(g).mean()));
    j["residual_rms_per_group"] = rms;
    j["residual_max"] = std::sqrt(result.objective.per_point.maxCoeff());
    j["converged"] = result.converged;
    j["iterations"] = result.iterations;
    j["initializer"] = result.initializer == InitializerKind::Eigen
                           ? std::string("eigen")
                           : "restart:" + std::to_string(result.restart_index);
    j["eigen_tie"] = result.eigen_tie;
    j["near_axis_warnings"] = result.near_axis_warnings;
    j["final_gradient_norm"] = result.final_gradient_norm;
    return j;
}

nlohmann::json asymptotics_to_json(const AsymptoticEstimate& est) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["nu"] = est.nu();
    j["m"] = est.m();
    j["K"] = est.K;
    j["n"] = est.n;
    j["anchor"] = {{"center", vector_to_json(est.chart.anchor().center().coords())},
                   {"radii", vector_to_json(est.chart.anchor().radii())}};
    j["A_hat"] = matrix_to_json(est.A_hat);
    j["Sigma_hat"] = matrix_to_json(est.Sigma_hat);
    j["sandwich"] = matrix_to_json(est.sandwich);
    return j;
}

nlohmann::json region_to_json(const ConfidenceRegion& region) {
    nlohmann::json boundary = nlohmann::json::array();
    for (const auto& point : region.boundary_points) boundary.push_back(vector_to_json(point));
    return {{"level", region.level},
            {"chi2_quantile", region.chi2_quantile},
            {"ellipsoid_matrix", matrix_to_json(region.shape)},
            {"boundary_points_on_sphere", boundary}};
}

nlohmann::json test_to_json(const TestResult& result) {
    return {{"statistic", result.statistic}, {"dof", result.dof}, {"p_value", result.p_value}};
}

GeneratorSpec generator_spec_from_json(const nlohmann::json& j) {
    GeneratorSpec spec;
    spec.m = j.at("m").get<Eigen::Index>();
    spec.K = j.at("K").get<Eigen::Index>();
    spec.n = j.value("n", Eigen::Index{100});
    const auto& truth = j.at("truth");
    spec.truth = SubsphereParams(UnitVector(vector_from_json(truth.at("center"), "truth.center")),
                                 vector_from_json(truth.at("radii"), "truth.radii"));
    const std::string mode = j.value("mode", std::string("rotational"));
    if (mode == "rotational")
        spec.mode = GeneratorMode::RotationalModel;
    else if (mode == "noisy_subsphere")
        spec.mode = GeneratorMode::NoisySubsphere;
    else
        throw std::runtime_error("generator spec: unknown mode '" + mode + "'");
    const auto& noise = j.at("noise");
    const std::string family = noise.at("family").get<std::string>();
    if (family == "tangent_gaussian") {
        spec.noise = NoiseFamily::TangentGaussian;
        if (noise.contains("sigma")) spec.sigma = noise["sigma"].get<double>();
    } else if (family == "vmf") {
        spec.noise = NoiseFamily::VonMisesFisher;
        if (noise.contains("kappa")) spec.kappa = noise["kappa"].get<double>();
    } else {
        throw std::runtime_error("generator spec: unknown noise family '" + family + "'");
    }
    spec.iid_across_j = j.value("iid_across_j", true);
    if (j.contains("sigma_per_j")) spec.sigma_per_j = vector_from_json(j["sigma_per_j"], "sigma_per_j");
    if (j.contains("kappa_per_j")) spec.kappa_per_j = vector_from_json(j["kappa_per_j"], "kappa_per_j");
    if (j.contains("exclusion_radius")) spec.exclusion_radius = j["exclusion_radius"].get<double>();
    spec.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("base_longitudes"))
        spec.base_longitudes = vector_from_json(j["base_longitudes"], "base_longitudes");
    spec.validate();
    return spec;
}

nlohmann::json generator_spec_to_json(const GeneratorSpec& spec) {
    nlohmann::json j;
    j["schema_version"] = kSchemaVersion;
    j["m"] = spec.m;
    j["K"] = spec.K;
    j["n"] = spec.n;
    j["truth"] = {{"center", vector_to_json(spec.truth->center().coords())},
                  {"radii", vector_to_json(spec.truth->radii())}};
    j["mode"] = spec.mode == GeneratorMode::RotationalModel ? "rotational" : "noisy_subsphere";
    if (spec.noise == NoiseFamily::TangentGaussian)
        j["noise"] = {{"family", "tangent_gaussian"}, {"sigma", spec.sigma}};
    else
        j["noise"] = {{"family", "vmf"}, {"kappa", spec.kappa}};
    j["iid_across_j"] = spec.iid_across_j;
    if (spec.sigma_per_j.size() > 0) j["sigma_per_j"] = vector_to_json(spec.sigma_per_j);
    if (spec.kappa_per_j.size() > 0) j["kappa_per_j"] = vector_to_json(spec.kappa_per_j);
    if (spec.exclusion_radius) j["exclusion_radius"] = *spec.exclusion_radius;
    j["seed"] = spec.seed;
    if (spec.base_longitudes.size() > 0)
        j["base_longitudes"] = vector_to_json(spec.base_longitudes);
    return j;
}

McConfig mc_config_from_json(const nlohmann::json& j) {
    McConfig config;
    config.replicates = j.at("replicates").get<int>();
    for (const auto& v : j.at("n_grid")) config.n_grid.push_back(v.get<Eigen::Index>());
    for (const auto& v : j.at("K_grid")) config.K_grid.push_back(v.get<Eigen::Index>());
    config.loss = parse_loss_kind(j.value("loss", std::string("intrinsic")));
    config.level = j.value("level", 0.95);
    config.seed = j.value("seed", std::uint64_t{0});
    config.threads = j.value("threads", 1);
    config.fit_restarts = j.value("fit_restarts", 0);
    config.population_reference_n =
        j.value("population_reference_n", config.population_reference_n);
    config.base_spec = generator_spec_from_json(j.at("template"));
    config.validate();
    return config;
}

}  // namespace subsphere
