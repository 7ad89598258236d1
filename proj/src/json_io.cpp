#include "zonosim/json_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace zonosim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const char* what) {
    throw std::invalid_argument(path + ": " + what);
}

/// Tracks which keys were consumed so typos in hand-written configs are
/// reported instead of silently ignored.
class ObjectReader {
public:
    ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_, "expected an object");
    }

    const json* maybe(const char* key) {
        seen_.insert(key);
        const auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& child(const char* key) {
        const json* c = maybe(key);
        if (!c) fail(path_ + "." + key, "is missing");
        return *c;
    }

    double number(const char* key, double fallback) {
        const json* c = maybe(key);
        if (!c) return fallback;
        if (!c->is_number()) fail(path_ + "." + key, "expected a number");
        return c->get<double>();
    }

    int integer(const char* key, int fallback) {
        const json* c = maybe(key);
        if (!c) return fallback;
        if (!c->is_number_integer()) fail(path_ + "." + key, "expected an integer");
        return c->get<int>();
    }

    std::uint64_t unsigned64(const char* key, std::uint64_t fallback) {
        const json* c = maybe(key);
        if (!c) return fallback;
        if (!c->is_number_unsigned()) fail(path_ + "." + key, "expected a non-negative integer");
        return c->get<std::uint64_t>();
    }

    bool boolean(const char* key, bool fallback) {
        const json* c = maybe(key);
        if (!c) return fallback;
        if (!c->is_boolean()) fail(path_ + "." + key, "expected a boolean");
        return c->get<bool>();
    }

    std::string text(const char* key, const std::string& fallback) {
        const json* c = maybe(key);
        if (!c) return fallback;
        if (!c->is_string()) fail(path_ + "." + key, "expected a string");
        return c->get<std::string>();
    }

    const std::string& path() const { return path_; }

    std::string sub(const char* key) const { return path_ + "." + key; }

    void finish() const {
        for (const auto& [key, value] : j_.items()) {
            if (!seen_.count(key)) fail(path_ + "." + key, "is not a recognized field");
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json vec_to_json(const Eigen::VectorXd& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Eigen::VectorXd vec_from_json(const json& j, const std::string& path,
                              Eigen::Index expected = -1) {
    if (!j.is_array()) fail(path, "expected an array of numbers");
    if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected) {
        fail(path, "has the wrong length");
    }
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) fail(path, "expected an array of numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json mat_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd mat_from_json(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of rows");
    const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = -1;
    Eigen::MatrixXd m;
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::VectorXd row = vec_from_json(j[r], path);
        if (cols < 0) {
            cols = row.size();
            m.resize(rows, cols);
        } else if (row.size() != cols) {
            fail(path, "rows have inconsistent lengths");
        }
        m.row(r) = row;
    }
    if (rows == 0) m.resize(0, 0);
    return m;
}

json pose_to_json(const Pose& pose) {
    return json{{"x", pose.x}, {"y", pose.y}, {"heading", pose.heading}};
}

Pose pose_from_json(const json& j, const std::string& path, const Pose& fallback) {
    ObjectReader r(j, path);
    Pose pose;
    pose.x = r.number("x", fallback.x);
    pose.y = r.number("y", fallback.y);
    pose.heading = r.number("heading", fallback.heading);
    r.finish();
    return pose;
}

SpeedLevel speed_level_from_string(const std::string& name, const std::string& path) {
    if (name == "nominal") return SpeedLevel::nominal;
    if (name == "cautious") return SpeedLevel::cautious;
    if (name == "slow") return SpeedLevel::slow;
    if (name == "very_slow") return SpeedLevel::very_slow;
    fail(path, "is not a speed level");
}

SensorHealth sensor_health_from_string(const std::string& name, const std::string& path) {
    if (name == "healthy") return SensorHealth::healthy;
    if (name == "suspect") return SensorHealth::suspect;
    if (name == "failed") return SensorHealth::failed;
    fail(path, "is not a sensor health state");
}

Mount mount_from_string(const std::string& name, const std::string& path) {
    if (name == "ego") return Mount::ego_vehicle;
    if (name == "cv") return Mount::connected_vehicle;
    if (name == "roadside") return Mount::roadside;
    fail(path, "is not a mount");
}

FaultStatus fault_status_from_json(const json& j, const std::string& path) {
    ObjectReader r(j, path);
    FaultStatus status;
    status.sensor_id = r.text("sensor", "");
    status.status = sensor_health_from_string(r.text("status", "healthy"), r.sub("status"));
    status.consecutive_misses = r.integer("misses", 0);
    r.finish();
    return status;
}

/// Shortest representation that parses back to the same double.
std::string num(double x) { return json(x).dump(); }

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    return fields;
}

}  // namespace

json to_json(const Zonotope& z) {
    return json{{"center", vec_to_json(z.center())}, {"generators", mat_to_json(z.generators())}};
}

Zonotope zonotope_from_json(const json& j) {
    ObjectReader r(j, "zonotope");
    const Eigen::VectorXd c = vec_from_json(r.child("center"), "zonotope.center");
    Eigen::MatrixXd g = mat_from_json(r.child("generators"), "zonotope.generators");
    r.finish();
    if (g.size() == 0) g.resize(c.size(), 0);
    if (g.rows() != c.size()) fail("zonotope.generators", "row count differs from the center");
    return Zonotope(c, g);
}

json to_json(const FaultStatus& status) {
    return json{{"sensor", status.sensor_id},
                {"status", to_string(status.status)},
                {"misses", status.consecutive_misses}};
}

json to_json(const NodeEstimate& estimate) {
    json health = json::array();
    for (const auto& h : estimate.health) health.push_back(to_json(h));
    return json{{"node", estimate.node_id},
                {"step", estimate.step},
                {"estimate", to_json(estimate.estimate)},
                {"health", std::move(health)}};
}

NodeEstimate node_estimate_from_json(const json& j) {
    ObjectReader r(j, "estimate");
    NodeEstimate est;
    est.node_id = r.text("node", "");
    est.step = r.integer("step", 0);
    est.estimate = zonotope_from_json(r.child("estimate"));
    if (const json* health = r.maybe("health")) {
        if (!health->is_array()) fail("estimate.health", "expected an array");
        for (const auto& h : *health) {
            est.health.push_back(fault_status_from_json(h, "estimate.health"));
        }
    }
    r.finish();
    return est;
}

json to_json(const ScenarioConfig& config) {
    json sensors = json::array();
    for (const ScenarioSensor& s : config.sensors) {
        sensors.push_back(json{{"id", s.model.id},
                               {"mount", to_string(s.mount)},
                               {"H", mat_to_json(s.model.H)},
                               {"noise_radii", vec_to_json(s.model.noise_radii)},
                               {"pose", pose_to_json(s.model.pose)},
                               {"fov_range", s.model.fov_range},
                               {"fov_half_angle", s.model.fov_half_angle}});
    }
    json obstacles = json::array();
    for (const RectObstacle& o : config.obstacles) {
        obstacles.push_back(json{
            {"min_x", o.min_x}, {"min_y", o.min_y}, {"max_x", o.max_x}, {"max_y", o.max_y}});
    }
    return json{
        {"scenario_id", config.scenario_id},
        {"seed", config.seed},
        {"dt", config.dt},
        {"horizon", config.horizon},
        {"road",
         {{"lane_width", config.road.lane_width},
          {"sidewalk_width", config.road.sidewalk_width},
          {"crossing_x", config.road.crossing_x},
          {"crossing_half_width", config.road.crossing_half_width},
          {"route_end_x", config.road.route_end_x}}},
        {"obstacles", std::move(obstacles)},
        {"ego",
         {{"start", pose_to_json(config.ego.start)},
          {"nominal_speed", config.ego.nominal_speed},
          {"radius", config.ego.radius}}},
        {"connected_vehicle",
         {{"present", config.connected_vehicle.present},
          {"start", pose_to_json(config.connected_vehicle.start)},
          {"speed", config.connected_vehicle.speed}}},
        {"pedestrian",
         {{"present", config.pedestrian.present},
          {"spawn", vec_to_json(config.pedestrian.spawn)},
          {"crossing_start_time", config.pedestrian.crossing_start_time},
          {"walk_speed", config.pedestrian.walk_speed},
          {"stop_y", config.pedestrian.stop_y},
          {"radius", config.pedestrian.radius}}},
        {"sensors", std::move(sensors)},
        {"tracker",
         {{"position_noise", vec_to_json(config.tracker.position_noise)},
          {"velocity_noise", vec_to_json(config.tracker.velocity_noise)},
          {"initial_velocity_radius", config.tracker.initial_velocity_radius},
          {"drop_width", config.tracker.drop_width}}},
        {"policy",
         {{"cautious_multiplier", config.policy.cautious_multiplier},
          {"slow_multiplier", config.policy.slow_multiplier},
          {"very_slow_multiplier", config.policy.very_slow_multiplier},
          {"slow_lookahead", config.policy.slow_lookahead},
          {"very_slow_lookahead", config.policy.very_slow_lookahead},
          {"zebra_lookahead", config.policy.zebra_lookahead},
          {"occlusion_lookahead", config.policy.occlusion_lookahead},
          {"lateral_margin", config.policy.lateral_margin}}},
        {"estimator",
         {{"fault_threshold", config.estimator.fault_threshold},
          {"max_order", config.estimator.max_order}}},
        {"fault",
         {{"active", config.fault.active},
          {"sensor_id", config.fault.sensor_id},
          {"bias_multiple", config.fault.bias_multiple},
          {"onset_step", config.fault.onset_step}}},
        {"emergency_radius", config.emergency_radius},
        {"emergency_release", config.emergency_release},
    };
}

ScenarioConfig scenario_config_from_json(const json& j) {
    ObjectReader r(j, "config");
    ScenarioConfig config;
    config.scenario_id = r.integer("scenario_id", config.scenario_id);
    config.seed = r.unsigned64("seed", config.seed);
    config.dt = r.number("dt", config.dt);
    config.horizon = r.integer("horizon", config.horizon);

    if (const json* road = r.maybe("road")) {
        ObjectReader rr(*road, "config.road");
        config.road.lane_width = rr.number("lane_width", config.road.lane_width);
        config.road.sidewalk_width = rr.number("sidewalk_width", config.road.sidewalk_width);
        config.road.crossing_x = rr.number("crossing_x", config.road.crossing_x);
        config.road.crossing_half_width =
            rr.number("crossing_half_width", config.road.crossing_half_width);
        config.road.route_end_x = rr.number("route_end_x", config.road.route_end_x);
        rr.finish();
    }
    if (const json* obstacles = r.maybe("obstacles")) {
        if (!obstacles->is_array()) fail("config.obstacles", "expected an array");
        config.obstacles.clear();
        for (const auto& o : *obstacles) {
            ObjectReader ro(o, "config.obstacles");
            RectObstacle rect;
            rect.min_x = ro.number("min_x", 0.0);
            rect.min_y = ro.number("min_y", 0.0);
            rect.max_x = ro.number("max_x", 0.0);
            rect.max_y = ro.number("max_y", 0.0);
            ro.finish();
            config.obstacles.push_back(rect);
        }
    }
    if (const json* ego = r.maybe("ego")) {
        ObjectReader re(*ego, "config.ego");
        if (const json* start = re.maybe("start")) {
            config.ego.start = pose_from_json(*start, "config.ego.start", config.ego.start);
        }
        config.ego.nominal_speed = re.number("nominal_speed", config.ego.nominal_speed);
        config.ego.radius = re.number("radius", config.ego.radius);
        re.finish();
    }
    if (const json* cv = r.maybe("connected_vehicle")) {
        ObjectReader rc(*cv, "config.connected_vehicle");
        config.connected_vehicle.present =
            rc.boolean("present", config.connected_vehicle.present);
        if (const json* start = rc.maybe("start")) {
            config.connected_vehicle.start = pose_from_json(
                *start, "config.connected_vehicle.start", config.connected_vehicle.start);
        }
        config.connected_vehicle.speed = rc.number("speed", config.connected_vehicle.speed);
        rc.finish();
    }
    if (const json* ped = r.maybe("pedestrian")) {
        ObjectReader rp(*ped, "config.pedestrian");
        config.pedestrian.present = rp.boolean("present", config.pedestrian.present);
        if (const json* spawn = rp.maybe("spawn")) {
            config.pedestrian.spawn = vec_from_json(*spawn, "config.pedestrian.spawn", 2);
        }
        config.pedestrian.crossing_start_time =
            rp.number("crossing_start_time", config.pedestrian.crossing_start_time);
        config.pedestrian.walk_speed = rp.number("walk_speed", config.pedestrian.walk_speed);
        config.pedestrian.stop_y = rp.number("stop_y", config.pedestrian.stop_y);
        config.pedestrian.radius = rp.number("radius", config.pedestrian.radius);
        rp.finish();
    }
    if (const json* sensors = r.maybe("sensors")) {
        if (!sensors->is_array()) fail("config.sensors", "expected an array");
        config.sensors.clear();
        for (const auto& s : *sensors) {
            ObjectReader rs(s, "config.sensors");
            ScenarioSensor sensor;
            sensor.model.id = rs.text("id", "");
            sensor.mount = mount_from_string(rs.text("mount", "roadside"), rs.sub("mount"));
            sensor.model.H = mat_from_json(rs.child("H"), "config.sensors.H");
            sensor.model.noise_radii =
                vec_from_json(rs.child("noise_radii"), "config.sensors.noise_radii");
            if (const json* pose = rs.maybe("pose")) {
                sensor.model.pose = pose_from_json(*pose, "config.sensors.pose", Pose{});
            }
            sensor.model.fov_range = rs.number("fov_range", sensor.model.fov_range);
            sensor.model.fov_half_angle =
                rs.number("fov_half_angle", sensor.model.fov_half_angle);
            rs.finish();
            config.sensors.push_back(std::move(sensor));
        }
    }
    if (const json* tracker = r.maybe("tracker")) {
        ObjectReader rt(*tracker, "config.tracker");
        if (const json* p = rt.maybe("position_noise")) {
            config.tracker.position_noise = vec_from_json(*p, "config.tracker.position_noise", 2);
        }
        if (const json* v = rt.maybe("velocity_noise")) {
            config.tracker.velocity_noise = vec_from_json(*v, "config.tracker.velocity_noise", 2);
        }
        config.tracker.initial_velocity_radius =
            rt.number("initial_velocity_radius", config.tracker.initial_velocity_radius);
        config.tracker.drop_width = rt.number("drop_width", config.tracker.drop_width);
        rt.finish();
    }
    if (const json* policy = r.maybe("policy")) {
        ObjectReader rp(*policy, "config.policy");
        SpeedPolicy& p = config.policy;
        p.cautious_multiplier = rp.number("cautious_multiplier", p.cautious_multiplier);
        p.slow_multiplier = rp.number("slow_multiplier", p.slow_multiplier);
        p.very_slow_multiplier = rp.number("very_slow_multiplier", p.very_slow_multiplier);
        p.slow_lookahead = rp.number("slow_lookahead", p.slow_lookahead);
        p.very_slow_lookahead = rp.number("very_slow_lookahead", p.very_slow_lookahead);
        p.zebra_lookahead = rp.number("zebra_lookahead", p.zebra_lookahead);
        p.occlusion_lookahead = rp.number("occlusion_lookahead", p.occlusion_lookahead);
        p.lateral_margin = rp.number("lateral_margin", p.lateral_margin);
        rp.finish();
    }
    if (const json* estimator = r.maybe("estimator")) {
        ObjectReader re(*estimator, "config.estimator");
        config.estimator.fault_threshold =
            re.integer("fault_threshold", config.estimator.fault_threshold);
        config.estimator.max_order = re.number("max_order", config.estimator.max_order);
        re.finish();
    }
    if (const json* fault = r.maybe("fault")) {
        ObjectReader rf(*fault, "config.fault");
        config.fault.active = rf.boolean("active", config.fault.active);
        config.fault.sensor_id = rf.text("sensor_id", config.fault.sensor_id);
        config.fault.bias_multiple = rf.number("bias_multiple", config.fault.bias_multiple);
        config.fault.onset_step = rf.integer("onset_step", config.fault.onset_step);
        rf.finish();
    }
    config.emergency_radius = r.number("emergency_radius", config.emergency_radius);
    config.emergency_release = r.number("emergency_release", config.emergency_release);
    r.finish();
    return config;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& err) {
        throw std::invalid_argument(path + ": " + err.what());
    }
    return scenario_config_from_json(j);
}

void save_scenario_config(const ScenarioConfig& config, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write config file: " + path);
    out << to_json(config).dump(2) << '\n';
}

json to_json(const StepRecord& record) {
    json j{{"step", record.step},
           {"time", record.time},
           {"ego", json::array({record.ego_x, record.ego_y})},
           {"speed", record.ego_speed},
           {"level", to_string(record.level)},
           {"emergency", record.emergency},
           {"occlusion", record.occlusion_on_sidewalk},
           {"confirmed_empty", record.confirmed_empty},
           {"zebra_ahead", record.zebra_ahead},
           {"sense_separation", record.sense_separation},
           {"min_separation", record.min_separation}};
    if (record.pedestrian_truth) j["pedestrian_truth"] = vec_to_json(*record.pedestrian_truth);
    if (!record.visibility.empty()) j["visibility"] = record.visibility;
    if (!record.broadcasts.empty()) {
        json broadcasts = json::array();
        for (const auto& b : record.broadcasts) broadcasts.push_back(to_json(b));
        j["broadcasts"] = std::move(broadcasts);
    }
    if (record.fused) {
        j["fused"] = to_json(*record.fused);
        j["fused_position_volume"] = record.fused_position_volume;
        j["fused_size"] = record.fused_size;
    }
    if (!record.faults.empty()) {
        json faults = json::array();
        for (const auto& f : record.faults) faults.push_back(to_json(f));
        j["faults"] = std::move(faults);
    }
    return j;
}

StepRecord step_record_from_json(const json& j) {
    ObjectReader r(j, "step");
    StepRecord rec;
    rec.step = r.integer("step", 0);
    rec.time = r.number("time", 0.0);
    const Eigen::VectorXd ego = vec_from_json(r.child("ego"), "step.ego", 2);
    rec.ego_x = ego(0);
    rec.ego_y = ego(1);
    rec.ego_speed = r.number("speed", 0.0);
    rec.level = speed_level_from_string(r.text("level", "nominal"), "step.level");
    rec.emergency = r.boolean("emergency", false);
    rec.occlusion_on_sidewalk = r.boolean("occlusion", false);
    rec.confirmed_empty = r.boolean("confirmed_empty", false);
    rec.zebra_ahead = r.boolean("zebra_ahead", false);
    rec.sense_separation = r.number("sense_separation", -1.0);
    rec.min_separation = r.number("min_separation", -1.0);
    if (const json* truth = r.maybe("pedestrian_truth")) {
        rec.pedestrian_truth = vec_from_json(*truth, "step.pedestrian_truth", 4);
    }
    if (const json* vis = r.maybe("visibility")) {
        if (!vis->is_object()) fail("step.visibility", "expected an object");
        for (const auto& [id, seen] : vis->items()) {
            if (!seen.is_boolean()) fail("step.visibility", "expected booleans");
            rec.visibility[id] = seen.get<bool>();
        }
    }
    if (const json* broadcasts = r.maybe("broadcasts")) {
        if (!broadcasts->is_array()) fail("step.broadcasts", "expected an array");
        for (const auto& b : *broadcasts) rec.broadcasts.push_back(node_estimate_from_json(b));
    }
    if (const json* fused = r.maybe("fused")) {
        rec.fused = zonotope_from_json(*fused);
        rec.fused_position_volume = r.number("fused_position_volume", 0.0);
        rec.fused_size = r.number("fused_size", 0.0);
    }
    if (const json* faults = r.maybe("faults")) {
        if (!faults->is_array()) fail("step.faults", "expected an array");
        for (const auto& f : *faults) rec.faults.push_back(fault_status_from_json(f, "step.faults"));
    }
    r.finish();
    return rec;
}

void write_step_log(std::ostream& out, const std::vector<StepRecord>& steps) {
    for (const StepRecord& rec : steps) out << to_json(rec).dump() << '\n';
}

std::vector<StepRecord> read_step_log(std::istream& in) {
    std::vector<StepRecord> steps;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        steps.push_back(step_record_from_json(json::parse(line)));
    }
    return steps;
}

std::string summary_csv_header() {
    return "scenario,pedestrian,sensors,avg_speed,detection_distance,min_separation,collisions";
}

std::string summary_csv_row(const SimSummary& summary) {
    std::ostringstream out;
    out << summary.scenario_id << ',' << (summary.pedestrian ? "true" : "false") << ','
        << summary.sensors << ',' << num(summary.average_speed) << ','
        << num(summary.detection_distance) << ',' << num(summary.min_separation) << ','
        << summary.collisions;
    return out.str();
}

SimSummary summary_from_csv_row(const std::string& line) {
    const std::vector<std::string> fields = split_csv(line);
    if (fields.size() != 7) throw std::invalid_argument("summary row: expected 7 columns");
    SimSummary s;
    try {
        s.scenario_id = std::stoi(fields[0]);
        s.pedestrian = fields[1] == "true";
        s.sensors = fields[2];
        s.average_speed = std::stod(fields[3]);
        s.detection_distance = std::stod(fields[4]);
        s.min_separation = std::stod(fields[5]);
        s.collisions = std::stoi(fields[6]);
    } catch (const std::exception&) {
        throw std::invalid_argument("summary row: malformed number in: " + line);
    }
    return s;
}

std::string speed_trace_csv(const std::vector<StepRecord>& steps) {
    std::ostringstream out;
    out << "step,time,ego_x,level,speed,occlusion,confirmed_empty,zebra_ahead,emergency\n";
    for (const StepRecord& rec : steps) {
        out << rec.step << ',' << num(rec.time) << ',' << num(rec.ego_x) << ','
            << to_string(rec.level) << ',' << num(rec.ego_speed) << ','
            << rec.occlusion_on_sidewalk << ',' << rec.confirmed_empty << ','
            << rec.zebra_ahead << ',' << rec.emergency << '\n';
    }
    return out.str();
}

std::string hull_trace_csv(const std::vector<StepRecord>& steps) {
    std::ostringstream out;
    out << "step,time,x_lo,x_hi,y_lo,y_hi,position_volume,frobenius_size\n";
    for (const StepRecord& rec : steps) {
        if (!rec.fused) continue;
        const IntervalBox hull = interval_hull(*rec.fused);
        out << rec.step << ',' << num(rec.time) << ',' << num(hull.lower(0)) << ','
            << num(hull.upper(0)) << ',' << num(hull.lower(1)) << ',' << num(hull.upper(1))
            << ',' << num(rec.fused_position_volume) << ',' << num(rec.fused_size) << '\n';
    }
    return out.str();
}

}  // namespace zonosim
