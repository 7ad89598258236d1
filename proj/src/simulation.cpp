#include "zonosim/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace zonosim {

namespace {

constexpr double kPi = 3.141592653589793;

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

/// Closest approach of two points moving linearly over one step.
double segment_min_distance(const Eigen::Vector2d& e0, const Eigen::Vector2d& e1,
                            const Eigen::Vector2d& p0, const Eigen::Vector2d& p1) {
    const Eigen::Vector2d d0 = e0 - p0;
    const Eigen::Vector2d dd = (e1 - e0) - (p1 - p0);
    const double a = dd.squaredNorm();
    const double t = a < 1e-15 ? 0.0 : clamp(-d0.dot(dd) / a, 0.0, 1.0);
    return (d0 + t * dd).norm();
}

IntervalBox position_hull(const Zonotope& z) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, z.dim());
    P(0, 0) = 1.0;
    P(1, 1) = 1.0;
    return interval_hull(linear_map(P, z));
}

bool boxes_overlap(const IntervalBox& b, double lo_x, double hi_x, double lo_y, double hi_y) {
    return b.lower(0) <= hi_x && lo_x <= b.upper(0) && b.lower(1) <= hi_y && lo_y <= b.upper(1);
}

}  // namespace

SimSummary summarize(const ScenarioConfig& config, const std::vector<StepRecord>& steps) {
    SimSummary summary;
    summary.scenario_id = config.scenario_id;
    summary.pedestrian = config.pedestrian.present;
    for (const ScenarioSensor& s : config.sensors) {
        if (!summary.sensors.empty()) summary.sensors += '+';
        summary.sensors += s.model.id;
    }
    if (steps.empty()) return summary;

    summary.distance = steps.back().ego_x - config.ego.start.x;
    summary.elapsed = steps.back().time;
    summary.average_speed = summary.elapsed > 0.0 ? summary.distance / summary.elapsed : 0.0;

    const double collision_distance = config.ego.radius + config.pedestrian.radius;
    bool was_colliding = false;
    bool was_emergency = false;
    for (const StepRecord& rec : steps) {
        if (summary.detection_distance < 0.0 && rec.fused) {
            summary.detection_distance = rec.sense_separation;
        }
        if (rec.min_separation >= 0.0 &&
            (summary.min_separation < 0.0 || rec.min_separation < summary.min_separation)) {
            summary.min_separation = rec.min_separation;
        }
        const bool colliding = rec.min_separation >= 0.0 && rec.min_separation < collision_distance;
        if (colliding && !was_colliding) ++summary.collisions;
        was_colliding = colliding;
        if (rec.emergency && !was_emergency) ++summary.emergency_events;
        was_emergency = rec.emergency;
    }
    for (const FaultStatus& f : steps.back().faults) {
        if (f.status == SensorHealth::failed) summary.failed_sensors.push_back(f.sensor_id);
    }
    return summary;
}

SimReport run_scenario(const ScenarioConfig& config) {
    validate(config);
    Rng rng(config.seed);
    const LinearSystem tracker =
        constant_velocity_system(config.dt, config.horizon, config.tracker.position_noise,
                                 config.tracker.velocity_noise);
    const std::vector<Eigen::Vector2d> watch = sidewalk_watch_points(config.road);

    double ego_x = config.ego.start.x;
    const double ego_y = config.ego.start.y;
    double cv_x = config.connected_vehicle.start.x;
    const double cv_y = config.connected_vehicle.start.y;

    Eigen::Vector4d ped;
    ped << config.pedestrian.spawn.x(), config.pedestrian.spawn.y(), 0.0, 0.0;
    const bool ped_active = config.pedestrian.present;

    std::vector<ScenarioSensor> sensors = config.sensors;
    std::vector<std::optional<EstimatorState>> tracks(sensors.size());
    std::size_t ego_sensor = 0;
    for (std::size_t i = 0; i < sensors.size(); ++i) {
        if (sensors[i].mount == Mount::ego_vehicle) ego_sensor = i;
    }

    EstimatorState decision;
    decision.node_id = "fusion";
    bool has_decision = false;
    bool emergency = false;

    SimReport report;
    report.config = config;
    report.steps.reserve(static_cast<std::size_t>(config.horizon));

    for (int k = 1; k <= config.horizon; ++k) {
        for (ScenarioSensor& s : sensors) {
            if (s.mount == Mount::ego_vehicle) s.model.pose = Pose{ego_x, ego_y, 0.0};
            if (s.mount == Mount::connected_vehicle) s.model.pose = Pose{cv_x, cv_y, kPi};
        }

        std::map<std::string, bool> vis;
        std::vector<SensorReading> readings;
        for (const ScenarioSensor& s : sensors) {
            const bool saw =
                ped_active && visible(s.model, config.obstacles, ped.head<2>());
            vis[s.model.id] = saw;
            if (!saw) continue;
            Eigen::VectorXd y = measure(s.model, ped, rng);
            if (config.fault.active && k >= config.fault.onset_step &&
                s.model.id == config.fault.sensor_id) {
                y += config.fault.bias_multiple * s.model.noise_radii;
            }
            readings.push_back(SensorReading{s.model.id, strips_from_measurement(s.model, y)});
        }

        std::vector<NodeEstimate> broadcasts;
        for (std::size_t i = 0; i < sensors.size(); ++i) {
            const std::string& id = sensors[i].model.id;
            const SensorReading* own = nullptr;
            for (const SensorReading& r : readings) {
                if (r.sensor_id == id) own = &r;
            }
            if (!tracks[i]) {
                if (own) {
                    // First sight: a box around the measurement, velocity
                    // bounded by the configured pedestrian envelope.
                    Eigen::Vector4d center;
                    center << own->strips[0].y, own->strips[1].y, 0.0, 0.0;
                    Eigen::Vector4d radii;
                    radii << sensors[i].model.noise_radii(0), sensors[i].model.noise_radii(1),
                        config.tracker.initial_velocity_radius,
                        config.tracker.initial_velocity_radius;
                    EstimatorState fresh;
                    fresh.node_id = id;
                    fresh.current_set = Zonotope::box(center, radii);
                    fresh.step = k;
                    tracks[i] = fresh;
                }
            } else {
                std::vector<SensorReading> own_readings;
                if (own) own_readings.push_back(*own);
                tracks[i] = estimate_step(*tracks[i], tracker, own_readings, config.estimator);
                const Eigen::VectorXd w = interval_hull(tracks[i]->current_set).widths();
                if (w(0) > config.tracker.drop_width || w(1) > config.tracker.drop_width) {
                    tracks[i].reset();
                }
            }
            if (tracks[i]) {
                broadcasts.push_back(NodeEstimate{id, tracks[i]->step, tracks[i]->current_set,
                                                  tracks[i]->fault_statuses()});
            }
        }

        // Decision fusion at the ego vehicle: consistency-check every
        // received measurement against the predicted decision set, then fuse
        // the estimates of nodes that are neither failed nor inconsistent.
        std::optional<Zonotope> predicted;
        if (has_decision) {
            predicted = predict(decision.current_set, tracker);
            check_consistency(*predicted, readings, decision, config.estimator);
        }
        std::vector<NodeEstimate> eligible;
        for (const NodeEstimate& b : broadcasts) {
            const auto it = decision.fault_counters.find(b.node_id);
            const bool failed = it != decision.fault_counters.end() && it->second.failed;
            const bool missed = predicted && it != decision.fault_counters.end() &&
                                it->second.consecutive_misses > 0;
            if (!failed && !missed) eligible.push_back(b);
        }
        std::optional<Zonotope> fused;
        if (!eligible.empty()) {
            fused = reduce_order(fuse_estimates(eligible, optimal_weights(eligible)),
                                 config.estimator.max_order);
            decision.current_set = *fused;
            decision.step = k;
            has_decision = true;
        } else if (predicted) {
            Zonotope coast = reduce_order(*predicted, config.estimator.max_order);
            const Eigen::VectorXd w = interval_hull(coast).widths();
            if (w(0) > config.tracker.drop_width || w(1) > config.tracker.drop_width) {
                has_decision = false;
            } else {
                decision.current_set = coast;
                decision.step = k;
                fused = coast;
            }
        }

        // Perception flags feeding the speed policy.
        double nearest_watch = std::numeric_limits<double>::infinity();
        for (const Eigen::Vector2d& p : watch) {
            nearest_watch = std::min(nearest_watch, std::hypot(p.x() - ego_x, p.y() - ego_y));
        }
        const bool occluded =
            nearest_watch <= config.policy.occlusion_lookahead &&
            sidewalk_occluded(sensors[ego_sensor].model, config.obstacles, watch);

        bool covered = true;
        for (const Eigen::Vector2d& p : watch) {
            bool seen = false;
            for (const ScenarioSensor& s : sensors) {
                if (s.mount == Mount::ego_vehicle) continue;
                const auto it = decision.fault_counters.find(s.model.id);
                if (it != decision.fault_counters.end() && it->second.failed) continue;
                if (visible(s.model, config.obstacles, p)) {
                    seen = true;
                    break;
                }
            }
            if (!seen) {
                covered = false;
                break;
            }
        }
        const double watch_lo_x = config.road.crossing_x - 8.0;
        const double watch_hi_x = config.road.crossing_x + 2.0;
        const double watch_lo_y = -(config.road.lane_width + config.road.sidewalk_width);
        const double watch_hi_y = -config.road.lane_width;
        std::optional<IntervalBox> hull;
        if (fused) hull = position_hull(*fused);
        const bool watch_detection =
            hull && boxes_overlap(*hull, watch_lo_x, watch_hi_x, watch_lo_y, watch_hi_y);
        const bool confirmed_empty = covered && !watch_detection;
        const bool zebra_ahead =
            ego_x <= config.road.crossing_x + config.road.crossing_half_width &&
            config.road.crossing_x - ego_x <= config.policy.zebra_lookahead;

        PerceptionInputs inputs;
        inputs.ego = Pose{ego_x, ego_y, 0.0};
        inputs.pedestrian_hull = hull;
        inputs.occlusion_on_sidewalk = occluded;
        inputs.confirmed_empty = confirmed_empty;
        inputs.zebra_ahead = zebra_ahead;
        const SpeedLevel level = speed_decision(inputs, config.policy, config.road);

        const double planned = config.ego.nominal_speed * config.policy.multiplier(level);
        const double sense_separation =
            ped_active ? std::hypot(ego_x - ped(0), ego_y - ped(1)) : -1.0;
        if (hull) {
            // Last-resort stop, keyed on the guaranteed set so it never
            // reacts later than it would on the true position. Bare
            // proximity uses the configured radius. When the set overlaps
            // the travel corridor ahead, the latch must additionally leave
            // room for one step of planned motion, since it only acts once
            // per step.
            const double contact = config.ego.radius + config.pedestrian.radius;
            const double gap_x = std::max({hull->lower(0) - ego_x, 0.0, ego_x - hull->upper(0)});
            const double gap_y = std::max({hull->lower(1) - ego_y, 0.0, ego_y - hull->upper(1)});
            const double gap = std::hypot(gap_x, gap_y);
            const double pad = config.pedestrian.walk_speed * config.dt + 0.1;
            const bool in_corridor = gap_y < contact + pad;
            const bool ahead = hull->upper(0) >= ego_x;
            const double step_envelope = contact + planned * config.dt + 0.3;
            const bool blocked = in_corridor && ahead && gap_x < step_envelope;
            const bool blocked_release = in_corridor && ahead && gap_x < step_envelope + 0.5;
            if (gap < config.emergency_radius || blocked) {
                emergency = true;
            } else if (emergency && gap > config.emergency_release && !blocked_release) {
                emergency = false;
            }
        }
        const double speed = emergency ? 0.0 : planned;

        // Advance the world.
        const Eigen::Vector2d ego0(ego_x, ego_y);
        const Eigen::Vector4d ped_sensed = ped;
        const Eigen::Vector2d ped0 = ped.head<2>();
        ego_x += config.dt * speed;
        if (config.connected_vehicle.present) {
            cv_x += config.dt * config.connected_vehicle.speed * std::cos(kPi);
        }
        if (ped_active) {
            const double t_next = k * config.dt;
            const bool walking = t_next >= config.pedestrian.crossing_start_time &&
                                 ped(1) < config.pedestrian.stop_y;
            const double desired_vy = walking ? config.pedestrian.walk_speed : 0.0;
            const Eigen::Vector2d qp = config.tracker.position_noise;
            const Eigen::Vector2d qv = config.tracker.velocity_noise;
            const double jpx = qp(0) * rng.symmetric();
            const double jpy = qp(1) * rng.symmetric();
            const double dvx =
                clamp(0.0 - ped(2), -0.9 * qv(0), 0.9 * qv(0)) + 0.1 * qv(0) * rng.symmetric();
            const double dvy = clamp(desired_vy - ped(3), -0.9 * qv(1), 0.9 * qv(1)) +
                               0.1 * qv(1) * rng.symmetric();
            ped(0) += config.dt * ped(2) + jpx;
            ped(1) += config.dt * ped(3) + jpy;
            ped(2) += dvx;
            ped(3) += dvy;
        }

        StepRecord rec;
        rec.step = k;
        rec.time = k * config.dt;
        rec.ego_x = ego_x;
        rec.ego_y = ego_y;
        rec.ego_speed = speed;
        rec.level = level;
        rec.emergency = emergency;
        rec.occlusion_on_sidewalk = occluded;
        rec.confirmed_empty = confirmed_empty;
        rec.zebra_ahead = zebra_ahead;
        if (ped_active) rec.pedestrian_truth = ped_sensed;
        rec.visibility = std::move(vis);
        rec.broadcasts = std::move(broadcasts);
        rec.fused = fused;
        rec.faults = decision.fault_statuses();
        if (fused) {
            Eigen::MatrixXd P = Eigen::MatrixXd::Zero(2, 4);
            P(0, 0) = 1.0;
            P(1, 1) = 1.0;
            rec.fused_position_volume = volume(linear_map(P, *fused));
            rec.fused_size = frobenius_size(*fused);
        }
        rec.sense_separation = sense_separation;
        rec.min_separation =
            ped_active ? segment_min_distance(ego0, Eigen::Vector2d(ego_x, ego_y), ped0,
                                              ped.head<2>())
                       : -1.0;
        report.steps.push_back(std::move(rec));
        if (ego_x >= config.road.route_end_x) break;
    }

    report.summary = summarize(config, report.steps);
    return report;
}

}  // namespace zonosim
