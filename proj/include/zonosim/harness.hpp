#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zonosim/simulation.hpp"

namespace zonosim {

/// One requested run. Unset options keep whatever the configuration says;
/// the built-in scenarios are used when no config file is given.
struct RunSpec {
    std::string config_path;
    int scenario_id = 1;
    std::optional<std::uint64_t> seed;
    std::optional<bool> pedestrian;
    bool mild_speeds = false;
    std::optional<FaultInjection> fault;
    std::string out_dir;  // artifacts written here when set
};

/// Materializes and validates the configuration a RunSpec describes.
ScenarioConfig resolve(const RunSpec& spec);

/// Accepts "sensor=rsu1,bias=10,onset=5" in any key order.
FaultInjection parse_fault_spec(const std::string& text);

/// resolved_config.json, steps.ndjson, summary.csv, speed_trace.csv and
/// hull_trace.csv. Output depends only on the report, never on wall time.
void write_artifacts(const SimReport& report, const std::string& dir);

SimReport run(const RunSpec& spec);

/// The six cells: scenarios 1..3, each with and without the pedestrian.
std::vector<SimSummary> run_matrix(const RunSpec& base);

/// Same run across seeds lo..hi inclusive, computed in parallel but
/// returned in seed order.
std::vector<SimSummary> run_seeds(const RunSpec& base, std::uint64_t lo, std::uint64_t hi);

std::string format_table(const std::vector<SimSummary>& rows);

}  // namespace zonosim
