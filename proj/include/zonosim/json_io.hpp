#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "zonosim/simulation.hpp"

namespace zonosim {

/// Serialization is value-exact: doubles survive a dump/parse round trip
/// bit for bit, so logged runs can be replayed and compared exactly.

nlohmann::json to_json(const Zonotope& z);
Zonotope zonotope_from_json(const nlohmann::json& j);

nlohmann::json to_json(const FaultStatus& status);
nlohmann::json to_json(const NodeEstimate& estimate);
NodeEstimate node_estimate_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ScenarioConfig& config);
/// Strict parse: unknown keys and type mismatches are rejected with the
/// offending field named in the message. Missing keys keep their defaults.
ScenarioConfig scenario_config_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario_config(const std::string& path);
void save_scenario_config(const ScenarioConfig& config, const std::string& path);

nlohmann::json to_json(const StepRecord& record);
StepRecord step_record_from_json(const nlohmann::json& j);

/// One JSON object per line, in step order.
void write_step_log(std::ostream& out, const std::vector<StepRecord>& steps);
std::vector<StepRecord> read_step_log(std::istream& in);

std::string summary_csv_header();
std::string summary_csv_row(const SimSummary& summary);
/// Recovers the columns of summary_csv_row; everything else keeps defaults.
SimSummary summary_from_csv_row(const std::string& line);

std::string speed_trace_csv(const std::vector<StepRecord>& steps);
std::string hull_trace_csv(const std::vector<StepRecord>& steps);

}  // namespace zonosim
