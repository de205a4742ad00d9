#pragma once

#include <json.hpp>
#include <string>

#include "assemblage/estimators.hpp"
#include "assemblage/evaluation.hpp"

namespace assemblage {

nlohmann::json spec_to_json(const EstimatorSpec& spec);
EstimatorSpec spec_from_json(const nlohmann::json& j);

nlohmann::json fit_to_json(const AssemblageFit& fit);
AssemblageFit fit_from_json(const nlohmann::json& j);

nlohmann::json oos_run_to_json(const OosRun& run);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

}  // namespace assemblage
