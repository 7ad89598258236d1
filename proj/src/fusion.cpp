#include "zonosim/fusion.hpp"

#include <cmath>
#include <stdexcept>

namespace zonosim {

Zonotope fuse_estimates(const std::vector<NodeEstimate>& estimates,
                        const Eigen::VectorXd& weights) {
    const auto m = static_cast<Eigen::Index>(estimates.size());
    if (m == 0) {
        throw std::invalid_argument("fuse_estimates: no estimates");
    }
    if (weights.size() != m) {
        throw std::invalid_argument("fuse_estimates: one weight per estimate required");
    }
    const double weight_sum = weights.sum();
    if (weight_sum == 0.0) {
        throw std::invalid_argument("fuse_estimates: weights must not sum to zero");
    }
    const Eigen::Index n = estimates.front().estimate.dim();
    const int step = estimates.front().step;
    Eigen::Index total_gens = 0;
    for (const NodeEstimate& node : estimates) {
        if (node.estimate.dim() != n) {
            throw std::invalid_argument("fuse_estimates: estimate dimension mismatch");
        }
        if (node.step != step) {
            throw std::invalid_argument("fuse_estimates: estimates carry different steps");
        }
        total_gens += node.estimate.num_generators();
    }

    const Eigen::VectorXd normalized = weights / weight_sum;
    Eigen::VectorXd center = Eigen::VectorXd::Zero(n);
    Eigen::MatrixXd gens(n, total_gens);
    Eigen::Index col = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        const NodeEstimate& node = estimates[static_cast<std::size_t>(j)];
        center += normalized(j) * node.estimate.center();
        const Eigen::Index e = node.estimate.num_generators();
        gens.middleCols(col, e) = normalized(j) * node.estimate.generators();
        col += e;
    }
    return Zonotope(std::move(center), std::move(gens));
}

Eigen::VectorXd optimal_weights(const std::vector<NodeEstimate>& estimates) {
    const auto m = static_cast<Eigen::Index>(estimates.size());
    if (m == 0) {
        throw std::invalid_argument("optimal_weights: no estimates");
    }
    Eigen::VectorXd sizes(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        sizes(j) = frobenius_size(estimates[static_cast<std::size_t>(j)].estimate);
    }

    // minimize sum_j w_j^2 s_j over the simplex; singleton inputs (s_j = 0)
    // reach the global minimum 0 and take all the mass
    constexpr double kSingletonEps = 1e-300;
    Eigen::VectorXd weights = Eigen::VectorXd::Zero(m);
    Eigen::Index singletons = 0;
    for (Eigen::Index j = 0; j < m; ++j) {
        if (sizes(j) <= kSingletonEps) ++singletons;
    }
    if (singletons > 0) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (sizes(j) <= kSingletonEps) weights(j) = 1.0 / static_cast<double>(singletons);
        }
        return weights;
    }
    for (Eigen::Index j = 0; j < m; ++j) weights(j) = 1.0 / sizes(j);
    return weights / weights.sum();
}

double fusion_objective(const std::vector<NodeEstimate>& estimates,
                        const Eigen::VectorXd& weights) {
    return frobenius_size(fuse_estimates(estimates, weights));
}

EstimatorState two_level_step(EstimatorState state, const LinearSystem& sys,
                              const std::vector<SensorReading>& readings,
                              const std::vector<NodeEstimate>& peers,
                              const EstimatorOptions& options, EstimateTrace* trace) {
    state = estimate_step(std::move(state), sys, readings, options, trace);
    if (peers.empty()) return state;

    std::vector<NodeEstimate> inputs;
    inputs.reserve(peers.size() + 1);
    inputs.push_back(NodeEstimate{state.node_id, state.step, state.current_set,
                                  state.fault_statuses()});
    for (const NodeEstimate& peer : peers) {
        if (peer.step != state.step) {
            throw std::invalid_argument("two_level_step: peer estimate step mismatch");
        }
        inputs.push_back(peer);
    }
    const Eigen::VectorXd weights = optimal_weights(inputs);
    state.current_set = reduce_order(fuse_estimates(inputs, weights), options.max_order);
    return state;
}

}  // namespace zonosim
