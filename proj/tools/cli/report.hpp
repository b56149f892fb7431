#pragma once

#include <string>

#include "cli/config.hpp"
#include "json.hpp"

namespace qconserve::cli {

inline constexpr const char* report_schema = "qconserve.report/1";

struct ScenarioOutput {
  nlohmann::json report;
  ConservationReport ledger;
};

ScenarioOutput run_scenario(const RunConfig& config);

nlohmann::json ledger_json(const ConservationReport& ledger);

/// Sorted keys, two-space indent, every float printed with %.17g.
std::string dump_deterministic(const nlohmann::json& value);

/// Header "t" then one column per entry and per entry:factor, rows by sample.
std::string timeseries_csv(const ConservationReport& ledger);

/// Throws ValidationError unless `doc` has the report shape.
void check_report_schema(const nlohmann::json& doc);

}  // namespace qconserve::cli
