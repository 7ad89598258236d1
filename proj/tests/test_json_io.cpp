#include <algorithm>
#include <sstream>
#include <stdexcept>

#include "doctest.h"
#include "oracles.hpp"
#include "zonosim/json_io.hpp"

using namespace zonosim;
using nlohmann::json;

namespace {

bool same_bits(const Zonotope& a, const Zonotope& b) {
    if (a.dim() != b.dim() || a.num_generators() != b.num_generators()) return false;
    for (Eigen::Index i = 0; i < a.dim(); ++i) {
        if (a.center()(i) != b.center()(i)) return false;
    }
    for (Eigen::Index r = 0; r < a.generators().rows(); ++r) {
        for (Eigen::Index c = 0; c < a.generators().cols(); ++c) {
            if (a.generators()(r, c) != b.generators()(r, c)) return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("zonotopes survive a dump and parse round trip bit for bit") {
    oracle::TestRng rng(92231);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform(0.0, 5.0));
        const int e = static_cast<int>(rng.uniform(0.0, 8.0));
        const Zonotope z = oracle::random_zonotope(rng, n, e, rng.uniform(0.01, 1000.0));
        const std::string text = to_json(z).dump();
        CHECK(same_bits(z, zonotope_from_json(json::parse(text))));
    }
    // Classic non-terminating binary fractions.
    const Zonotope nasty(Eigen::Vector2d(0.1 + 0.2, 1.0 / 3.0),
                         (Eigen::Matrix2d() << 1e-300, 0.7, -2.0 / 7.0, 1e300).finished());
    CHECK(same_bits(nasty, zonotope_from_json(json::parse(to_json(nasty).dump()))));
}

TEST_CASE("scenario configs round trip through JSON and disk") {
    for (int scenario = 1; scenario <= 3; ++scenario) {
        const ScenarioConfig config = make_default_scenario(scenario, true);
        const json j = to_json(config);
        const ScenarioConfig back = scenario_config_from_json(j);
        CHECK(to_json(back).dump() == j.dump());
        validate(back);

        const std::string path =
            "roundtrip_scenario" + std::to_string(scenario) + ".json";
        save_scenario_config(config, path);
        const ScenarioConfig loaded = load_scenario_config(path);
        CHECK(to_json(loaded).dump() == j.dump());

        // Identical configuration means an identical run.
        const SimReport a = run_scenario(config);
        const SimReport b = run_scenario(loaded);
        REQUIRE(a.steps.size() == b.steps.size());
        CHECK(a.summary.average_speed == b.summary.average_speed);
        CHECK(a.summary.detection_distance == b.summary.detection_distance);
        CHECK(a.summary.min_separation == b.summary.min_separation);
    }
}

TEST_CASE("config parsing names the offending field") {
    auto expect_error = [](const char* text, const char* needle) {
        try {
            scenario_config_from_json(json::parse(text));
            FAIL_CHECK("expected an error mentioning " << needle);
        } catch (const std::invalid_argument& err) {
            CHECK(std::string(err.what()).find(needle) != std::string::npos);
        }
    };
    expect_error(R"({"emergency_raduis": 2.0})", "emergency_raduis");
    expect_error(R"({"dt": "fast"})", "config.dt");
    expect_error(R"({"seed": -3})", "config.seed");
    expect_error(R"({"pedestrian": {"spawn": [1.0, 2.0, 3.0]}})", "pedestrian.spawn");
    expect_error(R"({"sensors": [{"id": "a", "noise_radii": [0.1]}]})", "sensors.H");
    expect_error(R"({"sensors": [{"id": "a", "H": [[1, 0], [0]], "noise_radii": [0.1]}]})",
                 "sensors.H");
    expect_error(R"({"policy": {"speed_multiplier": 0.5}})", "policy.speed_multiplier");
    expect_error(R"({"fault": {"active": 1}})", "fault.active");
    CHECK_THROWS_AS(load_scenario_config("does_not_exist.json"), std::invalid_argument);
}

TEST_CASE("step logs round trip through NDJSON") {
    ScenarioConfig cfg = make_default_scenario(3, true);
    cfg.seed = 2;
    cfg.fault.active = true;   // exercise the fault table fields
    cfg.fault.sensor_id = "rsu1";
    cfg.fault.bias_multiple = 10.0;
    cfg.fault.onset_step = 5;
    const SimReport report = run_scenario(cfg);

    std::stringstream stream;
    write_step_log(stream, report.steps);
    const std::vector<StepRecord> back = read_step_log(stream);
    REQUIRE(back.size() == report.steps.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(to_json(back[i]).dump() == to_json(report.steps[i]).dump());
    }

    // The recomputed summary of the parsed log matches the original run.
    const SimSummary summary = summarize(cfg, back);
    CHECK(summary.average_speed == report.summary.average_speed);
    CHECK(summary.detection_distance == report.summary.detection_distance);
    CHECK(summary.min_separation == report.summary.min_separation);
    CHECK(summary.failed_sensors == report.summary.failed_sensors);
}

TEST_CASE("logged fusion steps replay exactly from the logged broadcasts") {
    ScenarioConfig cfg = make_default_scenario(3, true);
    const SimReport report = run_scenario(cfg);

    std::stringstream stream;
    write_step_log(stream, report.steps);
    const std::vector<StepRecord> log = read_step_log(stream);

    int replayed = 0;
    for (const StepRecord& rec : log) {
        if (!rec.fused || rec.broadcasts.empty()) continue;
        bool clean = true;
        for (const FaultStatus& f : rec.faults) {
            clean = clean && f.status == SensorHealth::healthy && f.consecutive_misses == 0;
        }
        if (!clean) continue;
        const Zonotope again = reduce_order(
            fuse_estimates(rec.broadcasts, optimal_weights(rec.broadcasts)),
            cfg.estimator.max_order);
        CHECK(same_bits(again, *rec.fused));
        ++replayed;
    }
    CHECK(replayed > 30);
}

TEST_CASE("summary rows survive the CSV round trip") {
    ScenarioConfig cfg = make_default_scenario(2, true);
    cfg.seed = 9;
    const SimSummary s = run_scenario(cfg).summary;
    const SimSummary back = summary_from_csv_row(summary_csv_row(s));
    CHECK(back.scenario_id == s.scenario_id);
    CHECK(back.pedestrian == s.pedestrian);
    CHECK(back.sensors == s.sensors);
    CHECK(back.average_speed == s.average_speed);
    CHECK(back.detection_distance == s.detection_distance);
    CHECK(back.min_separation == s.min_separation);
    CHECK(back.collisions == s.collisions);

    CHECK_THROWS_AS(summary_from_csv_row("1,true,ego"), std::invalid_argument);
    CHECK_THROWS_AS(summary_from_csv_row("x,true,ego,1,1,1,0"), std::invalid_argument);
}

TEST_CASE("trace CSVs cover exactly the logged steps") {
    const SimReport report = run_scenario(make_default_scenario(1, true));

    const std::string speed = speed_trace_csv(report.steps);
    std::size_t speed_lines = std::count(speed.begin(), speed.end(), '\n');
    CHECK(speed_lines == report.steps.size() + 1);
    CHECK(speed.rfind("step,time,ego_x,level,speed", 0) == 0);

    std::size_t fused_steps = 0;
    for (const auto& rec : report.steps) fused_steps += rec.fused ? 1 : 0;
    const std::string hull = hull_trace_csv(report.steps);
    std::size_t hull_lines = std::count(hull.begin(), hull.end(), '\n');
    CHECK(hull_lines == fused_steps + 1);
}
