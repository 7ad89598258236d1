#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "zonosim/estimator.hpp"
#include "zonosim/models.hpp"
#include "zonosim/zonotope.hpp"

namespace zonosim {

/// Axis-aligned obstacle footprint (the parked truck).
struct RectObstacle {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 0.0;
    double max_y = 0.0;

    bool contains(double x, double y) const {
        return x >= min_x && x <= max_x && y >= min_y && y <= max_y;
    }
};

/// True when the open segment from a to b passes through the rectangle.
bool segment_intersects_rect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                             const RectObstacle& rect);

/// Range and bearing test against the sensor's field-of-view sector.
bool in_fov(const SensorModel& sensor, const Eigen::Vector2d& target);

/// In the sector and with a clear line of sight past every obstacle.
bool visible(const SensorModel& sensor, const std::vector<RectObstacle>& obstacles,
             const Eigen::Vector2d& target);

/// Two-lane road along the x axis, ego lane below y = 0, sidewalks outside.
struct RoadGeometry {
    double lane_width = 3.5;
    double sidewalk_width = 2.0;
    double crossing_x = 80.0;
    double crossing_half_width = 2.0;
    double route_end_x = 160.0;
};

/// Probe points on the south sidewalk next to the crossing; the region a
/// pedestrian would cross from, and the region the speed policy watches.
std::vector<Eigen::Vector2d> sidewalk_watch_points(const RoadGeometry& road,
                                                   double spacing = 0.25);

/// True when some watch point lies inside the sensor's sector but an
/// obstacle blocks the line of sight to it.
bool sidewalk_occluded(const SensorModel& sensor, const std::vector<RectObstacle>& obstacles,
                       const std::vector<Eigen::Vector2d>& watch_points);

enum class SpeedLevel { nominal, cautious, slow, very_slow };

const char* to_string(SpeedLevel level);

/// Speed levels as fractions of the nominal speed plus the lookahead
/// geometry of the decision rules.
struct SpeedPolicy {
    double cautious_multiplier = 0.45;
    double slow_multiplier = 0.5;
    double very_slow_multiplier = 0.2;
    double slow_lookahead = 35.0;       // pedestrian on the road ahead
    double very_slow_lookahead = 20.0;  // pedestrian in the ego corridor
    double zebra_lookahead = 25.0;
    double occlusion_lookahead = 50.0;  // distance at which occlusion matters
    double lateral_margin = 0.3;

    double multiplier(SpeedLevel level) const;

    /// Milder profile that keeps the corridor speed near nominal. Severity
    /// and multiplier are then non-monotone; the default mapping is monotone.
    static SpeedPolicy mild();
};

/// Everything the speed decision looks at in one step.
struct PerceptionInputs {
    Pose ego;
    std::optional<IntervalBox> pedestrian_hull;  // position bounds of fused set
    bool occlusion_on_sidewalk = false;
    bool confirmed_empty = false;  // watch region covered clean by others
    bool zebra_ahead = false;
};

/// Most restrictive applicable level: a tracked pedestrian in the corridor
/// forces very_slow, on the road ahead slow; a confirmed-empty watch region
/// releases to nominal; otherwise occlusion demands caution and an upcoming
/// crossing slow speed.
SpeedLevel speed_decision(const PerceptionInputs& inputs, const SpeedPolicy& policy,
                          const RoadGeometry& road);

enum class Mount { ego_vehicle, connected_vehicle, roadside };

const char* to_string(Mount mount);

struct ScenarioSensor {
    SensorModel model;  // pose is absolute; overwritten per step when mounted
    Mount mount = Mount::roadside;
};

struct EgoConfig {
    Pose start{0.0, -1.75, 0.0};
    double nominal_speed = 20.0;
    double radius = 1.5;
};

struct ConnectedVehicleConfig {
    bool present = false;
    Pose start{140.0, 1.75, 3.141592653589793};
    double speed = 12.0;
};

struct PedestrianConfig {
    bool present = true;
    Eigen::Vector2d spawn{80.0, -5.0};
    double crossing_start_time = 2.5;
    double walk_speed = 1.4;
    double stop_y = 4.8;
    double radius = 0.3;
};

/// Pedestrian-tracker assumptions shared by every node: the bounds the true
/// pedestrian motion is simulated within.
struct TrackerConfig {
    Eigen::Vector2d position_noise{0.02, 0.02};
    Eigen::Vector2d velocity_noise{0.05, 0.20};
    double initial_velocity_radius = 1.6;
    double drop_width = 50.0;  // forget a track once this uncertain
};

struct FaultInjection {
    bool active = false;
    std::string sensor_id;
    double bias_multiple = 0.0;  // offset in units of the sensor noise radius
    int onset_step = 0;
};

struct ScenarioConfig {
    int scenario_id = 1;
    std::uint64_t seed = 1;
    double dt = 0.1;
    int horizon = 400;
    RoadGeometry road;
    std::vector<RectObstacle> obstacles;
    EgoConfig ego;
    ConnectedVehicleConfig connected_vehicle;
    PedestrianConfig pedestrian;
    std::vector<ScenarioSensor> sensors;
    TrackerConfig tracker;
    SpeedPolicy policy;
    EstimatorOptions estimator;
    FaultInjection fault;
    double emergency_radius = 2.2;
    double emergency_release = 3.0;
};

/// Built-in reconstruction of the three scenarios: 1 = ego sensor only,
/// 2 = ego plus a connected vehicle, 3 = ego plus two road-side units.
ScenarioConfig make_default_scenario(int scenario_id, bool pedestrian_present);

/// Rejects malformed configurations; error messages name the offending
/// field. Includes the observability gate on (F, H) for every sensor.
void validate(const ScenarioConfig& config);

}  // namespace zonosim
