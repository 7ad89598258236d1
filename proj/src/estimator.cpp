#include "zonosim/estimator.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace zonosim {

const char* to_string(SensorHealth health) {
    switch (health) {
        case SensorHealth::healthy: return "healthy";
        case SensorHealth::suspect: return "suspect";
        case SensorHealth::failed: return "failed";
    }
    return "unknown";
}

namespace {

FaultStatus make_status(const std::string& sensor_id, const SensorFaultCounter& counter) {
    FaultStatus status;
    status.sensor_id = sensor_id;
    status.consecutive_misses = counter.consecutive_misses;
    if (counter.failed) {
        status.status = SensorHealth::failed;
    } else if (counter.consecutive_misses >= 1) {
        status.status = SensorHealth::suspect;
    } else {
        status.status = SensorHealth::healthy;
    }
    return status;
}

// Two measurement strips can only be disjoint when their rows are parallel;
// then they are slabs of the same direction and compatibility reduces to an
// interval overlap after rescaling the second onto the first.
bool strips_compatible(const Strip& a, const Strip& b) {
    const double denom = a.h.squaredNorm();
    if (denom == 0.0) return true;
    const double alpha = a.h.dot(b.h) / denom;
    if ((b.h - alpha * a.h).norm() > 1e-12 * b.h.norm()) return true;
    if (alpha == 0.0) return true;
    return std::abs(a.y - b.y / alpha) <= a.r + b.r / std::abs(alpha);
}

}  // namespace

FaultStatus EstimatorState::status_of(const std::string& sensor_id) const {
    auto it = fault_counters.find(sensor_id);
    if (it == fault_counters.end()) return FaultStatus{sensor_id, SensorHealth::healthy, 0};
    return make_status(sensor_id, it->second);
}

std::vector<FaultStatus> EstimatorState::fault_statuses() const {
    std::vector<FaultStatus> statuses;
    statuses.reserve(fault_counters.size());
    for (const auto& [id, counter] : fault_counters) {
        statuses.push_back(make_status(id, counter));
    }
    return statuses;
}

Zonotope predict(const Zonotope& z, const LinearSystem& sys) {
    if (z.dim() != sys.F.cols()) {
        throw std::invalid_argument("predict: set dimension must match dynamics");
    }
    return minkowski_sum(linear_map(sys.F, z), sys.process_noise);
}

Zonotope correct(const Zonotope& predicted, const std::vector<Strip>& strips,
                 const std::vector<Eigen::VectorXd>& lambdas) {
    if (strips.size() != lambdas.size()) {
        throw std::invalid_argument("correct: one lambda per strip required");
    }
    const Eigen::Index n = predicted.dim();
    const auto m = static_cast<Eigen::Index>(strips.size());

    Eigen::VectorXd center = predicted.center();
    Eigen::MatrixXd shrink = Eigen::MatrixXd::Identity(n, n);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Strip& strip = strips[static_cast<std::size_t>(j)];
        const Eigen::VectorXd& lambda = lambdas[static_cast<std::size_t>(j)];
        if (strip.h.size() != n || lambda.size() != n) {
            throw std::invalid_argument("correct: strip/lambda dimension mismatch");
        }
        center += lambda * (strip.y - strip.h.dot(predicted.center()));
        shrink -= lambda * strip.h;
    }

    Eigen::MatrixXd gens(n, predicted.num_generators() + m);
    gens.leftCols(predicted.num_generators()) = shrink * predicted.generators();
    for (Eigen::Index j = 0; j < m; ++j) {
        gens.col(predicted.num_generators() + j) =
            lambdas[static_cast<std::size_t>(j)] * strips[static_cast<std::size_t>(j)].r;
    }
    return Zonotope(std::move(center), std::move(gens));
}

std::vector<Eigen::VectorXd> optimal_lambdas(const Zonotope& predicted,
                                             const std::vector<Strip>& strips) {
    const Eigen::Index n = predicted.dim();
    const auto m = static_cast<Eigen::Index>(strips.size());
    if (m == 0) return {};

    Eigen::MatrixXd H(m, n);
    Eigen::VectorXd radii(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        const Strip& strip = strips[static_cast<std::size_t>(j)];
        if (strip.h.size() != n) {
            throw std::invalid_argument("optimal_lambdas: strip dimension mismatch");
        }
        H.row(j) = strip.h;
        radii(j) = strip.r;
    }

    // minimize ||(I - Lambda H) G||_F^2 + sum_j r_j^2 ||lambda_j||^2;
    // stationarity gives Lambda (H P H' + diag(r)^2) = P H' with P = G G'
    const Eigen::MatrixXd P = predicted.generators() * predicted.generators().transpose();
    Eigen::MatrixXd normal = H * P * H.transpose();
    normal += radii.cwiseProduct(radii).asDiagonal();
    const Eigen::MatrixXd gain =
        normal.ldlt().solve(H * P).transpose();  // n x m

    std::vector<Eigen::VectorXd> lambdas;
    lambdas.reserve(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) lambdas.push_back(gain.col(j));
    return lambdas;
}

double correction_objective(const Zonotope& predicted, const std::vector<Strip>& strips,
                            const std::vector<Eigen::VectorXd>& lambdas) {
    return frobenius_size(correct(predicted, strips, lambdas));
}

std::vector<FaultStatus> check_consistency(const Zonotope& predicted,
                                           const std::vector<SensorReading>& readings,
                                           EstimatorState& state,
                                           const EstimatorOptions& options) {
    std::vector<char> miss(readings.size(), 0);
    for (std::size_t i = 0; i < readings.size(); ++i) {
        for (const Strip& strip : readings[i].strips) {
            if (strip_intersection_empty(predicted, strip)) {
                miss[i] = 1;
                break;
            }
        }
    }

    // Strips from sensors that are in good standing this step; a failed
    // sensor must agree with these, not just with the (possibly wide)
    // predicted set, before it earns its way back in. Overlap alone is too
    // weak: once the faulty sensor is excluded the estimate grows and a
    // persistently biased strip would eventually intersect it again.
    std::vector<const Strip*> clean;
    for (std::size_t i = 0; i < readings.size(); ++i) {
        if (miss[i]) continue;
        const auto it = state.fault_counters.find(readings[i].sensor_id);
        if (it != state.fault_counters.end() && it->second.failed) continue;
        for (const Strip& strip : readings[i].strips) clean.push_back(&strip);
    }

    std::vector<FaultStatus> statuses;
    statuses.reserve(readings.size());
    for (std::size_t i = 0; i < readings.size(); ++i) {
        const auto& reading = readings[i];
        SensorFaultCounter& counter = state.fault_counters[reading.sensor_id];
        if (counter.failed) {
            bool hit = !miss[i];
            for (const Strip& strip : reading.strips) {
                if (!hit) break;
                for (const Strip* other : clean) {
                    if (!strips_compatible(strip, *other)) {
                        hit = false;
                        break;
                    }
                }
            }
            counter.consecutive_hits = hit ? counter.consecutive_hits + 1 : 0;
            if (counter.consecutive_hits >= options.fault_threshold) {
                counter = SensorFaultCounter{};  // re-entry after sustained consistency
            }
        } else {
            counter.consecutive_misses = miss[i] ? counter.consecutive_misses + 1 : 0;
            if (counter.consecutive_misses >= options.fault_threshold) {
                counter.failed = true;
                counter.consecutive_hits = 0;
            }
        }
        statuses.push_back(make_status(reading.sensor_id, counter));
    }
    return statuses;
}

EstimatorState estimate_step(EstimatorState state, const LinearSystem& sys,
                             const std::vector<SensorReading>& readings,
                             const EstimatorOptions& options, EstimateTrace* trace) {
    const Zonotope predicted = predict(state.current_set, sys);
    const std::vector<FaultStatus> statuses =
        check_consistency(predicted, readings, state, options);

    // Correct with strips from non-failed sensors that individually intersect
    // the predicted set; an empty intersection is inconsistent evidence and
    // must not steer the estimate.
    std::vector<Strip> used;
    for (const auto& reading : readings) {
        if (state.fault_counters[reading.sensor_id].failed) continue;
        for (const Strip& strip : reading.strips) {
            if (!strip_intersection_empty(predicted, strip)) used.push_back(strip);
        }
    }

    const std::vector<Eigen::VectorXd> lambdas = optimal_lambdas(predicted, used);
    const Zonotope corrected = correct(predicted, used, lambdas);

    state.current_set = reduce_order(corrected, options.max_order);
    state.step += 1;

    if (trace != nullptr) {
        trace->predicted = predicted;
        trace->readings = readings;
        trace->strips_used = used;
        trace->lambdas = lambdas;
        trace->corrected = corrected;
        trace->faults = statuses;
    }
    return state;
}

}  // namespace zonosim
