#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zonosim/fusion.hpp"
#include "zonosim/scenario.hpp"

namespace zonosim {

/// Everything observable about one simulation step, written to the run log.
struct StepRecord {
    int step = 0;
    double time = 0.0;
    double ego_x = 0.0;  // pose after this step's motion
    double ego_y = 0.0;
    double ego_speed = 0.0;  // speed applied during this step's motion
    SpeedLevel level = SpeedLevel::nominal;
    bool emergency = false;
    bool occlusion_on_sidewalk = false;
    bool confirmed_empty = false;
    bool zebra_ahead = false;
    std::optional<Eigen::Vector4d> pedestrian_truth;  // state the sensors measured
    std::map<std::string, bool> visibility;           // sensor id -> saw the pedestrian
    std::vector<NodeEstimate> broadcasts;             // local estimates exchanged
    std::optional<Zonotope> fused;                    // ego's decision set
    std::vector<FaultStatus> faults;                  // ego's sensor fault table
    double fused_position_volume = 0.0;
    double fused_size = 0.0;
    double sense_separation = -1.0;  // ego-pedestrian distance when sensing
    double min_separation = -1.0;    // closest approach during the motion
};

struct SimSummary {
    int scenario_id = 1;
    bool pedestrian = false;
    std::string sensors;  // sensor ids joined with '+'
    double distance = 0.0;
    double elapsed = 0.0;
    double average_speed = 0.0;
    double detection_distance = -1.0;  // separation when the first fused set appeared
    double min_separation = -1.0;
    int collisions = 0;
    int emergency_events = 0;
    std::vector<std::string> failed_sensors;
};

struct SimReport {
    ScenarioConfig config;
    std::vector<StepRecord> steps;
    SimSummary summary;
};

SimSummary summarize(const ScenarioConfig& config, const std::vector<StepRecord>& steps);

/// Deterministic closed-loop run: ground truth, visibility-gated
/// measurements, per-node set-membership tracking, estimate exchange and
/// fusion at the ego vehicle, fault checks, and the speed policy.
SimReport run_scenario(const ScenarioConfig& config);

}  // namespace zonosim
