#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "qconserve/scenarios.hpp"

namespace qconserve::cli {

using ScenarioSpec = std::variant<MachZehnderSpec, GaussianPacketSpec, SternGerlachSpec, APRBoxSpec>;

struct RunConfig {
  std::string scenario;
  ScenarioSpec spec;
  std::uint64_t seed = 0;
  std::string output_dir = ".";
  std::vector<std::string> formats{"json"};
};

struct ScenarioInfo {
  std::string name;
  std::string description;
  std::vector<std::string> parameters;
};

const std::vector<ScenarioInfo>& scenario_catalog();

/// Parses and fully validates a RunConfig document. Throws ValidationError
/// (or NumericalGuardError for specs that would trip a guard) before any
/// scenario work happens.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(const std::string& text);

std::vector<std::string> parse_formats(const std::string& csv);

/// Resolved parameters, defaults included, as echoed in the report.
nlohmann::json parameters_json(const ScenarioSpec& spec);

}  // namespace qconserve::cli
