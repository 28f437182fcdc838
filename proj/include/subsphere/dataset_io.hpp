#pragma once

#include <istream>
#include <string>
#include <vector>

#include <json.hpp>

#include "subsphere/asymptotics.hpp"
#include "subsphere/mc_study.hpp"

namespace subsphere {

inline constexpr const char* kSchemaVersion = "1.0";

/// Input error with the offending line number baked into the message.
struct ParseError : public std::runtime_error {
    int line;
    ParseError(int line_number, const std::string& message)
        : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}
};

/// Throws if the document carries a schema_version with a different major
/// version than ours.
void check_schema_version(const nlohmann::json& doc, const char* what);

/// Long-format CSV dataset:
///   m,K,n
///   2,4,100
///   obs_id,group_j,coord_0,coord_1,coord_2
///   0,0,...
/// Rows may appear in any order but every (obs_id, group_j) pair must
/// appear exactly once. Coordinates are renormalized on load; deviations
/// above 1e-9 produce a warning, above 1e-6 an error.
struct DatasetLoadResult {
    PolysphereSample sample;
    std::vector<std::string> warnings;
};

DatasetLoadResult load_dataset_csv(std::istream& in);
DatasetLoadResult load_dataset_csv_file(const std::string& path);
std::string dataset_to_csv(const PolysphereSample& sample);

nlohmann::json class_to_json(const SubsphereClass& cls);
SubsphereClass class_from_json(const nlohmann::json& j);

nlohmann::json fit_result_to_json(const FitResult& result, LossKind loss, Eigen::Index n);
nlohmann::json asymptotics_to_json(const AsymptoticEstimate& est);
nlohmann::json region_to_json(const ConfidenceRegion& region);
nlohmann::json test_to_json(const TestResult& result);

GeneratorSpec generator_spec_from_json(const nlohmann::json& j);
nlohmann::json generator_spec_to_json(const GeneratorSpec& spec);
McConfig mc_config_from_json(const nlohmann::json& j);

}  // namespace subsphere
