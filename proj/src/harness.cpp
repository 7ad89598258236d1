#include "zonosim/harness.hpp"

#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "zonosim/json_io.hpp"

namespace zonosim {

namespace {

std::string fixed2(double x) {
    if (x < 0.0) return "-";
    std::ostringstream out;
    out << std::fixed << std::setprecision(2) << x;
    return out.str();
}

}  // namespace

ScenarioConfig resolve(const RunSpec& spec) {
    ScenarioConfig config =
        spec.config_path.empty()
            ? make_default_scenario(spec.scenario_id, spec.pedestrian.value_or(true))
            : load_scenario_config(spec.config_path);
    if (!spec.config_path.empty() && spec.pedestrian) {
        config.pedestrian.present = *spec.pedestrian;
    }
    if (spec.seed) config.seed = *spec.seed;
    if (spec.mild_speeds) config.policy = SpeedPolicy::mild();
    if (spec.fault) config.fault = *spec.fault;
    validate(config);
    return config;
}

FaultInjection parse_fault_spec(const std::string& text) {
    FaultInjection fault;
    fault.active = true;
    bool have_sensor = false;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("fault spec: expected key=value, got: " + item);
        }
        const std::string key = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (key == "sensor") {
                fault.sensor_id = value;
                have_sensor = !value.empty();
            } else if (key == "bias") {
                fault.bias_multiple = std::stod(value);
            } else if (key == "onset") {
                fault.onset_step = std::stoi(value);
            } else {
                throw std::invalid_argument("fault spec: unknown key: " + key);
            }
        } catch (const std::invalid_argument&) {
            throw;
        } catch (const std::exception&) {
            throw std::invalid_argument("fault spec: malformed value for " + key);
        }
    }
    if (!have_sensor) throw std::invalid_argument("fault spec: sensor=<id> is required");
    return fault;
}

void write_artifacts(const SimReport& report, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    save_scenario_config(report.config, (fs::path(dir) / "resolved_config.json").string());

    std::ofstream steps(fs::path(dir) / "steps.ndjson");
    if (!steps) throw std::runtime_error("cannot write step log in " + dir);
    write_step_log(steps, report.steps);

    std::ofstream summary(fs::path(dir) / "summary.csv");
    summary << summary_csv_header() << '\n' << summary_csv_row(report.summary) << '\n';

    std::ofstream speed(fs::path(dir) / "speed_trace.csv");
    speed << speed_trace_csv(report.steps);

    std::ofstream hull(fs::path(dir) / "hull_trace.csv");
    hull << hull_trace_csv(report.steps);
}

SimReport run(const RunSpec& spec) {
    SimReport report = run_scenario(resolve(spec));
    if (!spec.out_dir.empty()) write_artifacts(report, spec.out_dir);
    return report;
}

std::vector<SimSummary> run_matrix(const RunSpec& base) {
    std::vector<SimSummary> rows;
    for (int scenario = 1; scenario <= 3; ++scenario) {
        for (bool ped : {true, false}) {
            RunSpec spec = base;
            spec.scenario_id = scenario;
            spec.pedestrian = ped;
            spec.out_dir.clear();
            rows.push_back(run(spec).summary);
        }
    }
    return rows;
}

std::vector<SimSummary> run_seeds(const RunSpec& base, std::uint64_t lo, std::uint64_t hi) {
    if (hi < lo) throw std::invalid_argument("seed range: expected lo <= hi");
    const std::size_t count = static_cast<std::size_t>(hi - lo + 1);
    std::vector<SimSummary> rows(count);
    const std::size_t workers =
        std::min<std::size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
    std::size_t next = 0;
    for (std::size_t start = 0; start < count; start += workers) {
        std::vector<std::future<SimSummary>> batch;
        for (std::size_t i = start; i < std::min(count, start + workers); ++i) {
            RunSpec spec = base;
            spec.seed = lo + i;
            spec.out_dir.clear();
            batch.push_back(
                std::async(std::launch::async, [spec] { return run(spec).summary; }));
        }
        for (auto& f : batch) rows[next++] = f.get();
    }
    return rows;
}

std::string format_table(const std::vector<SimSummary>& rows) {
    std::ostringstream out;
    out << std::left << std::setw(9) << "scenario" << std::setw(12) << "pedestrian"
        << std::setw(15) << "sensors" << std::right << std::setw(10) << "avg_speed"
        << std::setw(11) << "detection" << std::setw(9) << "min_sep" << std::setw(12)
        << "collisions" << '\n';
    for (const SimSummary& s : rows) {
        out << std::left << std::setw(9) << s.scenario_id << std::setw(12)
            << (s.pedestrian ? "yes" : "no") << std::setw(15) << s.sensors << std::right
            << std::setw(10) << fixed2(s.average_speed) << std::setw(11)
            << fixed2(s.detection_distance) << std::setw(9) << fixed2(s.min_separation)
            << std::setw(12) << s.collisions << '\n';
    }
    return out.str();
}

}  // namespace zonosim
