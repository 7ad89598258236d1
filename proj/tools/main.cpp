#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "zonosim/harness.hpp"
#include "zonosim/json_io.hpp"

namespace {

struct CompareArgs {
    std::uint64_t seed = 1;
    std::string seed_range;
    bool mild_speeds = false;
    std::string out_dir;
};

std::pair<std::uint64_t, std::uint64_t> parse_seed_range(const std::string& text) {
    const auto sep = text.find("..");
    if (sep == std::string::npos) {
        throw std::invalid_argument("--seeds: expected LO..HI, got: " + text);
    }
    try {
        const std::uint64_t lo = std::stoull(text.substr(0, sep));
        const std::uint64_t hi = std::stoull(text.substr(sep + 2));
        return {lo, hi};
    } catch (const std::exception&) {
        throw std::invalid_argument("--seeds: malformed bound in: " + text);
    }
}

void write_summary_rows(const std::string& dir, const std::vector<zonosim::SimSummary>& rows) {
    std::filesystem::create_directories(dir);
    std::ofstream out(std::filesystem::path(dir) / "summary.csv");
    if (!out) throw std::runtime_error("cannot write summary.csv in " + dir);
    out << zonosim::summary_csv_header() << '\n';
    for (const auto& row : rows) out << zonosim::summary_csv_row(row) << '\n';
}

int run_compare(const CompareArgs& args) {
    zonosim::RunSpec base;
    base.mild_speeds = args.mild_speeds;

    if (args.seed_range.empty()) {
        base.seed = args.seed;
        const std::vector<zonosim::SimSummary> rows = zonosim::run_matrix(base);
        std::cout << zonosim::format_table(rows);
        if (!args.out_dir.empty()) write_summary_rows(args.out_dir, rows);
        return 0;
    }

    const auto [lo, hi] = parse_seed_range(args.seed_range);
    std::vector<zonosim::SimSummary> all;
    std::cout << "scenario  seeds        mean_avg_speed  mean_detection  min_sep  collisions\n";
    for (int scenario = 1; scenario <= 3; ++scenario) {
        zonosim::RunSpec spec = base;
        spec.scenario_id = scenario;
        spec.pedestrian = true;
        const std::vector<zonosim::SimSummary> rows = zonosim::run_seeds(spec, lo, hi);
        double speed_sum = 0.0;
        double detection_sum = 0.0;
        double min_sep = std::numeric_limits<double>::infinity();
        int collisions = 0;
        for (const auto& row : rows) {
            speed_sum += row.average_speed;
            detection_sum += row.detection_distance;
            min_sep = std::min(min_sep, row.min_separation);
            collisions += row.collisions;
        }
        const double n = static_cast<double>(rows.size());
        std::cout << scenario << "         " << lo << ".." << hi << "        "
                  << speed_sum / n << "           " << detection_sum / n << "          "
                  << min_sep << "     " << collisions << '\n';
        all.insert(all.end(), rows.begin(), rows.end());
    }
    if (!args.out_dir.empty()) write_summary_rows(args.out_dir, all);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cooperative pedestrian perception with guaranteed set-membership tracking"};
    app.require_subcommand(1);

    zonosim::RunSpec spec;
    std::string fault_spec;
    std::string pedestrian_mode;
    CLI::App* run_cmd = app.add_subcommand("run", "Run one scenario and print its summary");
    run_cmd->add_option("--config", spec.config_path, "Scenario config file (JSON)")
        ->check(CLI::ExistingFile);
    run_cmd->add_option("--scenario", spec.scenario_id, "Built-in scenario id (1, 2 or 3)")
        ->check(CLI::Range(1, 3));
    std::uint64_t seed_value = 0;
    CLI::Option* seed_opt = run_cmd->add_option("--seed", seed_value, "Noise seed");
    run_cmd->add_option("--pedestrian", pedestrian_mode, "Override pedestrian presence")
        ->check(CLI::IsMember({"on", "off"}));
    run_cmd->add_flag("--mild-speeds", spec.mild_speeds,
                      "Milder speed profile (very_slow at 80% of nominal)");
    run_cmd->add_option("--fault", fault_spec, "Inject a bias: sensor=<id>,bias=<k>,onset=<step>");
    run_cmd->add_option("--out", spec.out_dir, "Directory for run artifacts");

    CompareArgs compare;
    CLI::App* compare_cmd =
        app.add_subcommand("compare", "Run all scenario cells and print a comparison");
    compare_cmd->add_option("--seed", compare.seed, "Noise seed for the six-cell comparison");
    compare_cmd->add_option("--seeds", compare.seed_range,
                            "Seed sweep LO..HI; reports per-scenario means");
    compare_cmd->add_flag("--mild-speeds", compare.mild_speeds, "Milder speed profile");
    compare_cmd->add_option("--out", compare.out_dir, "Directory for summary.csv");

    try {
        app.parse(argc, argv);
        if (*run_cmd) {
            if (*seed_opt) spec.seed = seed_value;
            if (!pedestrian_mode.empty()) spec.pedestrian = pedestrian_mode == "on";
            if (!fault_spec.empty()) spec.fault = zonosim::parse_fault_spec(fault_spec);
            const zonosim::SimReport report = zonosim::run(spec);
            std::cout << zonosim::format_table({report.summary});
            if (!report.summary.failed_sensors.empty()) {
                std::cout << "failed sensors:";
                for (const auto& id : report.summary.failed_sensors) std::cout << ' ' << id;
                std::cout << '\n';
            }
            return 0;
        }
        return run_compare(compare);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
