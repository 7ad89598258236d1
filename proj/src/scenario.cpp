#include "zonosim/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace zonosim {

namespace {

constexpr double kPi = 3.141592653589793;

double wrap_angle(double a) {
    while (a > kPi) a -= 2.0 * kPi;
    while (a < -kPi) a += 2.0 * kPi;
    return a;
}

bool intervals_overlap(double lo_a, double hi_a, double lo_b, double hi_b) {
    return lo_a <= hi_b && lo_b <= hi_a;
}

}  // namespace

bool segment_intersects_rect(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                             const RectObstacle& rect) {
    // Liang-Barsky clipping of the parameterised segment a + t (b - a)
    // against the rectangle slabs; a hit needs some t strictly inside (0,1).
    double t_min = 0.0;
    double t_max = 1.0;
    const double lo[2] = {rect.min_x, rect.min_y};
    const double hi[2] = {rect.max_x, rect.max_y};
    for (int axis = 0; axis < 2; ++axis) {
        const double p = a(axis);
        const double d = b(axis) - a(axis);
        if (std::abs(d) < 1e-15) {
            if (p < lo[axis] || p > hi[axis]) return false;
            continue;
        }
        double t0 = (lo[axis] - p) / d;
        double t1 = (hi[axis] - p) / d;
        if (t0 > t1) std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max) return false;
    }
    return t_min < 1.0 && t_max > 0.0;
}

bool in_fov(const SensorModel& sensor, const Eigen::Vector2d& target) {
    const double dx = target.x() - sensor.pose.x;
    const double dy = target.y() - sensor.pose.y;
    const double dist = std::hypot(dx, dy);
    if (dist > sensor.fov_range) return false;
    if (dist < 1e-12) return true;
    const double bearing = std::atan2(dy, dx);
    return std::abs(wrap_angle(bearing - sensor.pose.heading)) <= sensor.fov_half_angle;
}

bool visible(const SensorModel& sensor, const std::vector<RectObstacle>& obstacles,
             const Eigen::Vector2d& target) {
    if (!in_fov(sensor, target)) return false;
    const Eigen::Vector2d origin(sensor.pose.x, sensor.pose.y);
    for (const RectObstacle& rect : obstacles) {
        if (segment_intersects_rect(origin, target, rect)) return false;
    }
    return true;
}

std::vector<Eigen::Vector2d> sidewalk_watch_points(const RoadGeometry& road, double spacing) {
    if (spacing <= 0.0) throw std::invalid_argument("watch point spacing must be positive");
    const double x_lo = road.crossing_x - 8.0;
    const double x_hi = road.crossing_x + 2.0;
    const double y = -(road.lane_width + 0.5 * road.sidewalk_width);
    std::vector<Eigen::Vector2d> points;
    for (double x = x_lo; x <= x_hi + 1e-9; x += spacing) {
        points.emplace_back(x, y);
    }
    return points;
}

bool sidewalk_occluded(const SensorModel& sensor, const std::vector<RectObstacle>& obstacles,
                       const std::vector<Eigen::Vector2d>& watch_points) {
    for (const Eigen::Vector2d& p : watch_points) {
        if (in_fov(sensor, p) && !visible(sensor, obstacles, p)) return true;
    }
    return false;
}

const char* to_string(SpeedLevel level) {
    switch (level) {
        case SpeedLevel::nominal: return "nominal";
        case SpeedLevel::cautious: return "cautious";
        case SpeedLevel::slow: return "slow";
        case SpeedLevel::very_slow: return "very_slow";
    }
    return "unknown";
}

double SpeedPolicy::multiplier(SpeedLevel level) const {
    switch (level) {
        case SpeedLevel::nominal: return 1.0;
        case SpeedLevel::cautious: return cautious_multiplier;
        case SpeedLevel::slow: return slow_multiplier;
        case SpeedLevel::very_slow: return very_slow_multiplier;
    }
    return 1.0;
}

SpeedPolicy SpeedPolicy::mild() {
    SpeedPolicy policy;
    policy.very_slow_multiplier = 0.8;
    return policy;
}

SpeedLevel speed_decision(const PerceptionInputs& inputs, const SpeedPolicy& policy,
                          const RoadGeometry& road) {
    const double ego_x = inputs.ego.x;
    if (inputs.pedestrian_hull) {
        const IntervalBox& hull = *inputs.pedestrian_hull;
        if (hull.dim() < 2) throw std::invalid_argument("pedestrian hull must bound a position");
        const double lo_x = hull.lower(0);
        const double hi_x = hull.upper(0);
        const double lo_y = hull.lower(1);
        const double hi_y = hull.upper(1);
        // In the ego corridor just ahead: crawl.
        const bool in_corridor =
            intervals_overlap(lo_x, hi_x, ego_x - 2.0, ego_x + policy.very_slow_lookahead) &&
            intervals_overlap(lo_y, hi_y, -road.lane_width - policy.lateral_margin,
                              policy.lateral_margin);
        if (in_corridor) return SpeedLevel::very_slow;
        // Anywhere on the roadway ahead: pass slowly.
        const bool on_road_ahead =
            intervals_overlap(lo_x, hi_x, ego_x - 2.0, ego_x + policy.slow_lookahead) &&
            intervals_overlap(lo_y, hi_y, -road.lane_width - policy.lateral_margin,
                              road.lane_width + policy.lateral_margin);
        if (on_road_ahead) return SpeedLevel::slow;
    }
    if (inputs.confirmed_empty) return SpeedLevel::nominal;
    // A tracked pedestrian answers the question the occlusion poses, so the
    // cautious level only applies while nothing is tracked.
    if (inputs.occlusion_on_sidewalk && !inputs.pedestrian_hull) return SpeedLevel::cautious;
    if (inputs.zebra_ahead) return SpeedLevel::slow;
    return SpeedLevel::nominal;
}

const char* to_string(Mount mount) {
    switch (mount) {
        case Mount::ego_vehicle: return "ego";
        case Mount::connected_vehicle: return "cv";
        case Mount::roadside: return "roadside";
    }
    return "unknown";
}

ScenarioConfig make_default_scenario(int scenario_id, bool pedestrian_present) {
    if (scenario_id < 1 || scenario_id > 3) {
        throw std::invalid_argument("scenario_id must be 1, 2 or 3");
    }
    ScenarioConfig config;
    config.scenario_id = scenario_id;
    config.pedestrian.present = pedestrian_present;
    config.obstacles.push_back(RectObstacle{62.0, -5.3, 70.0, -3.6});

    const double deg60 = 60.0 * kPi / 180.0;
    ScenarioSensor ego_sensor;
    // Full-ring coverage: occlusion still limits it through line of sight.
    ego_sensor.model = position_sensor("ego", Eigen::Vector2d(0.4, 0.4), config.ego.start,
                                       50.0, kPi);
    ego_sensor.mount = Mount::ego_vehicle;
    config.sensors.push_back(ego_sensor);

    if (scenario_id == 2) {
        config.connected_vehicle.present = true;
        ScenarioSensor cv_sensor;
        cv_sensor.model = position_sensor("cv", Eigen::Vector2d(0.8, 0.8),
                                          config.connected_vehicle.start, 60.0, deg60);
        cv_sensor.mount = Mount::connected_vehicle;
        config.sensors.push_back(cv_sensor);
    }
    if (scenario_id == 3) {
        ScenarioSensor rsu1;
        rsu1.model = position_sensor("rsu1", Eigen::Vector2d(0.6, 0.6),
                                     Pose{70.0, 6.0, -0.81}, 40.0, deg60);
        rsu1.mount = Mount::roadside;
        config.sensors.push_back(rsu1);
        ScenarioSensor rsu2;
        rsu2.model = position_sensor("rsu2", Eigen::Vector2d(0.6, 0.6),
                                     Pose{90.0, 6.0, -2.33}, 40.0, deg60);
        rsu2.mount = Mount::roadside;
        config.sensors.push_back(rsu2);
    }
    return config;
}

void validate(const ScenarioConfig& config) {
    if (config.scenario_id < 1 || config.scenario_id > 3) {
        throw std::invalid_argument("scenario_id must be 1, 2 or 3");
    }
    if (config.dt <= 0.0) throw std::invalid_argument("dt must be positive");
    if (config.horizon <= 0) throw std::invalid_argument("horizon must be positive");
    if (config.ego.nominal_speed <= 0.0) {
        throw std::invalid_argument("ego.nominal_speed must be positive");
    }
    if (config.ego.radius <= 0.0) throw std::invalid_argument("ego.radius must be positive");
    if (config.pedestrian.radius <= 0.0) {
        throw std::invalid_argument("pedestrian.radius must be positive");
    }
    if (config.pedestrian.walk_speed <= 0.0) {
        throw std::invalid_argument("pedestrian.walk_speed must be positive");
    }
    if (config.road.lane_width <= 0.0) {
        throw std::invalid_argument("road.lane_width must be positive");
    }
    if (config.road.sidewalk_width <= 0.0) {
        throw std::invalid_argument("road.sidewalk_width must be positive");
    }
    if (config.road.route_end_x <= config.ego.start.x) {
        throw std::invalid_argument("road.route_end_x must lie ahead of ego.start");
    }
    for (const RectObstacle& rect : config.obstacles) {
        if (rect.max_x <= rect.min_x || rect.max_y <= rect.min_y) {
            throw std::invalid_argument("obstacles: rectangle extents must be positive");
        }
    }
    if (config.sensors.empty()) throw std::invalid_argument("sensors must not be empty");
    bool has_ego = false;
    int roadside = 0;
    bool has_cv_sensor = false;
    for (const ScenarioSensor& s : config.sensors) {
        validate(s.model);
        if (s.mount == Mount::ego_vehicle) has_ego = true;
        if (s.mount == Mount::roadside) ++roadside;
        if (s.mount == Mount::connected_vehicle) has_cv_sensor = true;
    }
    if (!has_ego) throw std::invalid_argument("sensors: an ego_vehicle mount is required");
    if (config.scenario_id == 2 && !has_cv_sensor) {
        throw std::invalid_argument("sensors: scenario 2 requires a connected_vehicle mount");
    }
    if (has_cv_sensor && !config.connected_vehicle.present) {
        throw std::invalid_argument(
            "connected_vehicle.present: required by a connected_vehicle sensor mount");
    }
    if (config.scenario_id == 3 && roadside < 2) {
        throw std::invalid_argument("sensors: scenario 3 requires two roadside mounts");
    }
    if (config.tracker.position_noise.minCoeff() <= 0.0) {
        throw std::invalid_argument("tracker.position_noise must be positive");
    }
    if (config.tracker.velocity_noise.minCoeff() <= 0.0) {
        throw std::invalid_argument("tracker.velocity_noise must be positive");
    }
    if (config.tracker.initial_velocity_radius < config.pedestrian.walk_speed) {
        throw std::invalid_argument(
            "tracker.initial_velocity_radius must cover pedestrian.walk_speed");
    }
    if (config.tracker.drop_width <= 0.0) {
        throw std::invalid_argument("tracker.drop_width must be positive");
    }
    const SpeedPolicy& p = config.policy;
    for (double m : {p.cautious_multiplier, p.slow_multiplier, p.very_slow_multiplier}) {
        if (m <= 0.0 || m > 1.0) {
            throw std::invalid_argument("policy: speed multipliers must lie in (0, 1]");
        }
    }
    if (p.slow_lookahead <= 0.0 || p.very_slow_lookahead <= 0.0 || p.zebra_lookahead <= 0.0 ||
        p.occlusion_lookahead <= 0.0) {
        throw std::invalid_argument("policy: lookahead distances must be positive");
    }
    if (config.emergency_radius <= 0.0 || config.emergency_release <= config.emergency_radius) {
        throw std::invalid_argument(
            "emergency_release must exceed emergency_radius and both must be positive");
    }
    if (config.fault.active) {
        bool found = false;
        for (const ScenarioSensor& s : config.sensors) {
            if (s.model.id == config.fault.sensor_id) found = true;
        }
        if (!found) throw std::invalid_argument("fault.sensor_id: no such sensor");
        if (config.fault.onset_step < 0) {
            throw std::invalid_argument("fault.onset_step must be non-negative");
        }
    }
    const LinearSystem tracker = constant_velocity_system(
        config.dt, config.horizon, config.tracker.position_noise, config.tracker.velocity_noise);
    for (const ScenarioSensor& s : config.sensors) {
        if (!observable(tracker.F, s.model.H)) {
            throw std::invalid_argument("sensors: (" + s.model.id +
                                        ") pair (F, H) is not observable");
        }
    }
}

}  // namespace zonosim
