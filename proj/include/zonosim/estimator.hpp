#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "zonosim/models.hpp"
#include "zonosim/zonotope.hpp"

namespace zonosim {

struct EstimatorOptions {
    int fault_threshold = 3;   // consecutive misses before a sensor is failed
    double max_order = 10.0;   // generator budget applied after each correction
};

enum class SensorHealth { healthy, suspect, failed };

const char* to_string(SensorHealth health);

struct FaultStatus {
    std::string sensor_id;
    SensorHealth status = SensorHealth::healthy;
    int consecutive_misses = 0;
};

struct SensorFaultCounter {
    int consecutive_misses = 0;
    int consecutive_hits = 0;  // only tracked while failed, gates re-entry
    bool failed = false;
};

/// The strips one sensor produced this step.
struct SensorReading {
    std::string sensor_id;
    std::vector<Strip> strips;
};

/// Per-node filter state: the current corrected (or fused) set plus the
/// fault bookkeeping for every sensor seen so far.
struct EstimatorState {
    std::string node_id;
    Zonotope current_set;
    int step = 0;
    std::map<std::string, SensorFaultCounter> fault_counters;

    FaultStatus status_of(const std::string& sensor_id) const;
    std::vector<FaultStatus> fault_statuses() const;
};

/// What one estimate_step did, for logging and replay.
struct EstimateTrace {
    Zonotope predicted;
    std::vector<SensorReading> readings;       // everything offered
    std::vector<Strip> strips_used;            // what correct() consumed
    std::vector<Eigen::VectorXd> lambdas;      // one gain column per used strip
    Zonotope corrected;                        // before order reduction
    std::vector<FaultStatus> faults;
};

/// Propagates the set through the dynamics: F Z (+) Z_Q. Exact.
Zonotope predict(const Zonotope& z, const LinearSystem& sys);

/// Over-approximation of the intersection of the predicted set with the
/// given strips:
///   c_bar = c + sum_j lambda_j (y_j - h_j c)
///   G_bar = [(I - sum_j lambda_j h_j) G, lambda_1 r_1, ..., lambda_m r_m]
Zonotope correct(const Zonotope& predicted, const std::vector<Strip>& strips,
                 const std::vector<Eigen::VectorXd>& lambdas);

/// Gains minimizing the squared Frobenius norm of the corrected generator
/// matrix. Closed form: Lambda = P H' (H P H' + diag(r)^2)^-1 with P = G G'.
std::vector<Eigen::VectorXd> optimal_lambdas(const Zonotope& predicted,
                                             const std::vector<Strip>& strips);

/// The Frobenius objective that optimal_lambdas minimizes, exposed so tests
/// and the fusion layer can compare candidate gains.
double correction_objective(const Zonotope& predicted, const std::vector<Strip>& strips,
                            const std::vector<Eigen::VectorXd>& lambdas);

/// Updates each sensor's consecutive-miss counter against the predicted set
/// and escalates healthy -> suspect -> failed. Failed sensors re-enter after
/// fault_threshold consecutive consistent steps.
std::vector<FaultStatus> check_consistency(const Zonotope& predicted,
                                           const std::vector<SensorReading>& readings,
                                           EstimatorState& state,
                                           const EstimatorOptions& options = {});

/// Full filter step: predict, consistency-check, optimal gains, correct,
/// reduce order. Strips from failed sensors and strips inconsistent with the
/// predicted set are excluded from the correction.
EstimatorState estimate_step(EstimatorState state, const LinearSystem& sys,
                             const std::vector<SensorReading>& readings,
                             const EstimatorOptions& options = {},
                             EstimateTrace* trace = nullptr);

}  // namespace zonosim
