#pragma once

#include <string>
#include <vector>

#include "zonosim/estimator.hpp"

namespace zonosim {

/// A timestamped zonotopic estimate as exchanged between fusion nodes.
struct NodeEstimate {
    std::string node_id;
    int step = 0;
    Zonotope estimate;
    std::vector<FaultStatus> health;  // contributing sensors of that node
};

/// Over-approximation of the intersection of the given estimates:
///   c = sum_j w_j c_j / sum_j w_j
///   G = [w_1 G_1, ..., w_m G_m] / sum_j w_j
/// Weights are normalized before use, so scaling them all by a nonzero
/// constant leaves the result unchanged.
Zonotope fuse_estimates(const std::vector<NodeEstimate>& estimates,
                        const Eigen::VectorXd& weights);

/// Weights on the simplex minimizing the squared Frobenius norm of the fused
/// generator matrix: w_j proportional to 1 / ||G_j||_F^2, with all mass on
/// singleton inputs when present (their objective is exactly zero).
Eigen::VectorXd optimal_weights(const std::vector<NodeEstimate>& estimates);

/// Frobenius objective of fuse_estimates for the given weights.
double fusion_objective(const std::vector<NodeEstimate>& estimates,
                        const Eigen::VectorXd& weights);

/// Second fusion level: local estimate_step, then fusion of the node's own
/// corrected set with the peer estimates using optimal weights. Peers must
/// carry the node's post-step index. With no peers this is estimate_step.
EstimatorState two_level_step(EstimatorState state, const LinearSystem& sys,
                              const std::vector<SensorReading>& readings,
                              const std::vector<NodeEstimate>& peers,
                              const EstimatorOptions& options = {},
                              EstimateTrace* trace = nullptr);

}  // namespace zonosim
