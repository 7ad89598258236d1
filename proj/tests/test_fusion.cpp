#include "zonosim/fusion.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "zonosim/models.hpp"

using Eigen::MatrixXd;
using Eigen::VectorXd;
using zonosim::EstimatorState;
using zonosim::NodeEstimate;
using zonosim::SensorReading;
using zonosim::Zonotope;

namespace {

NodeEstimate node(std::string id, Zonotope z, int step = 0) {
    NodeEstimate n;
    n.node_id = std::move(id);
    n.step = step;
    n.estimate = std::move(z);
    return n;
}

VectorXd weights(std::initializer_list<double> w) {
    VectorXd v(static_cast<Eigen::Index>(w.size()));
    Eigen::Index i = 0;
    for (double x : w) v(i++) = x;
    return v;
}

}  // namespace

TEST_CASE("fusing identical zonotopes reproduces the set") {
    const Zonotope z(VectorXd::Zero(2), (MatrixXd(2, 3) << 1, 0, 0.5, 0, 1, 0.5).finished());
    const auto fused = zonosim::fuse_estimates({node("a", z), node("b", z)}, weights({0.25, 0.75}));
    CHECK(fused.center().isApprox(z.center()));
    // Same set: generators are the inputs' scaled by w_j, so supports agree.
    oracle::TestRng rng(1);
    for (int i = 0; i < 50; ++i) {
        VectorXd d = rng.beta(2);
        if (d.norm() < 1e-6) d(0) = 1.0;
        CHECK(zonosim::support(fused, d) == doctest::Approx(zonosim::support(z, d)).epsilon(1e-12));
    }
}

TEST_CASE("weight vector (1,0) returns the first input exactly") {
    oracle::TestRng rng(2);
    const Zonotope a = oracle::random_zonotope(rng, 3, 4);
    const Zonotope b = oracle::random_zonotope(rng, 3, 2);
    const auto fused = zonosim::fuse_estimates({node("a", a), node("b", b)}, weights({1, 0}));
    CHECK(fused.center().isApprox(a.center()));
    CHECK(fused.generators().leftCols(4).isApprox(a.generators()));
    CHECK(fused.generators().rightCols(2).isZero());
}

TEST_CASE("fusion covers rejection-sampled intersection points") {
    oracle::TestRng rng(3);
    int covered = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const Zonotope a = oracle::random_zonotope(rng, 2, 3);
        Zonotope b = oracle::random_zonotope(rng, 2, 3);
        // Park b near a so the intersection is usually nonempty.
        b = Zonotope(a.center() + 0.3 * rng.beta(2), b.generators());
        const auto fa = oracle::facet_form(a);
        const auto fb = oracle::facet_form(b);
        VectorXd w(2);
        w << rng.uniform(0.2, 2.0), rng.uniform(0.2, 2.0);
        const auto fused = zonosim::fuse_estimates({node("a", a), node("b", b)}, w);
        for (int s = 0; s < 400; ++s) {
            const VectorXd x = a.center() + a.generators() * rng.beta(3);
            if (!fb.contains(x) || !fa.contains(x)) continue;
            CHECK(zonosim::contains_point(fused, x, 1e-7));
            ++covered;
        }
    }
    CHECK(covered >= 10000);
}

TEST_CASE("scaling all weights by a constant leaves the fusion unchanged") {
    oracle::TestRng rng(4);
    const Zonotope a = oracle::random_zonotope(rng, 3, 4);
    const Zonotope b = oracle::random_zonotope(rng, 3, 3);
    const Zonotope c = oracle::random_zonotope(rng, 3, 2);
    const std::vector<NodeEstimate> inputs = {node("a", a), node("b", b), node("c", c)};
    const VectorXd base = weights({1.0, 2.0, 0.5});
    const auto reference = zonosim::fuse_estimates(inputs, base);
    for (const double scale : {2.0, 0.25, -1.0, 8.0, 0.5, -4.0, 16.0}) {
        const auto scaled = zonosim::fuse_estimates(inputs, scale * base);
        CHECK(scaled.center() == reference.center());
        CHECK(scaled.generators() == reference.generators());
    }
}

TEST_CASE("fusion input validation") {
    const Zonotope z(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    CHECK_THROWS_AS(zonosim::fuse_estimates({}, VectorXd()), std::invalid_argument);
    CHECK_THROWS_AS(zonosim::fuse_estimates({node("a", z)}, weights({1, 1})), std::invalid_argument);
    CHECK_THROWS_AS(zonosim::fuse_estimates({node("a", z), node("b", z)}, weights({1, -1})),
                    std::invalid_argument);
    CHECK_THROWS_AS(
        zonosim::fuse_estimates({node("a", z), node("b", Zonotope::singleton(VectorXd::Zero(3)))},
                                weights({1, 1})),
        std::invalid_argument);
    CHECK_THROWS_AS(zonosim::fuse_estimates({node("a", z, 3), node("b", z, 4)}, weights({1, 1})),
                    std::invalid_argument);
}

TEST_CASE("single estimate gets weight one") {
    const Zonotope z(VectorXd::Zero(2), MatrixXd::Identity(2, 2));
    const VectorXd w = zonosim::optimal_weights({node("a", z)});
    REQUIRE(w.size() == 1);
    CHECK(w(0) == doctest::Approx(1.0));
}

TEST_CASE("a singleton input absorbs all the weight") {
    oracle::TestRng rng(5);
    const Zonotope a = oracle::random_zonotope(rng, 2, 3);
    const Zonotope s = Zonotope::singleton((VectorXd(2) << 1, 1).finished());
    const VectorXd w = zonosim::optimal_weights({node("a", a), node("s", s)});
    CHECK(w(0) == doctest::Approx(0.0));
    CHECK(w(1) == doctest::Approx(1.0));
    CHECK(zonosim::fusion_objective({node("a", a), node("s", s)}, w) == doctest::Approx(0.0));
}

TEST_CASE("optimal weights dominate unit vectors and random simplex draws") {
    oracle::TestRng rng(6);
    for (int trial = 0; trial < 50; ++trial) {
        const int m = 2 + static_cast<int>(rng.next_u64() % 3);
        std::vector<NodeEstimate> inputs;
        for (int j = 0; j < m; ++j)
            inputs.push_back(node("n" + std::to_string(j), oracle::random_zonotope(rng, 3, 3 + j)));
        const VectorXd w = zonosim::optimal_weights(inputs);
        CHECK(w.minCoeff() >= 0.0);
        CHECK(w.sum() == doctest::Approx(1.0));
        const double obj = zonosim::fusion_objective(inputs, w);
        for (int j = 0; j < m; ++j) {
            VectorXd unit = VectorXd::Zero(m);
            unit(j) = 1.0;
            CHECK(obj <= zonosim::fusion_objective(inputs, unit) + 1e-8);
        }
        for (int draw = 0; draw < 1000; ++draw) {
            VectorXd cand(m);
            for (int j = 0; j < m; ++j) cand(j) = rng.uniform(1e-6, 1.0);
            cand /= cand.sum();
            CHECK(obj <= zonosim::fusion_objective(inputs, cand) + 1e-8);
        }
    }
}

TEST_CASE("two_level_step without peers equals estimate_step") {
    const auto sys = zonosim::constant_velocity_system(0.1, 100, {0.02, 0.02}, {0.05, 0.05});
    const auto sensor = zonosim::position_sensor("ego", {0.5, 0.5});
    zonosim::Rng rng(7);
    VectorXd x = (VectorXd(4) << 0, 0, 1, 0).finished();

    EstimatorState a;
    a.node_id = "ego";
    a.current_set =
        zonosim::minkowski_sum(Zonotope::singleton(x),
                               Zonotope::box(VectorXd::Zero(4), (VectorXd(4) << 1, 1, 0.5, 0.5).finished()));
    EstimatorState b = a;

    const std::vector<SensorReading> readings = {
        {"ego", zonosim::strips_from_measurement(sensor, zonosim::measure(sensor, x, rng))}};
    a = zonosim::estimate_step(a, sys, readings);
    b = zonosim::two_level_step(b, sys, readings, {});
    CHECK(a.current_set.center() == b.current_set.center());
    CHECK(a.current_set.generators() == b.current_set.generators());
}

TEST_CASE("two_level_step rejects peers from another step") {
    const auto sys = zonosim::constant_velocity_system(0.1, 100, {0.02, 0.02}, {0.05, 0.05});
    EstimatorState state;
    state.node_id = "ego";
    state.current_set = Zonotope::box(VectorXd::Zero(4), (VectorXd(4) << 1, 1, 1, 1).finished());
    const auto peer = node("peer", state.current_set, 5);
    CHECK_THROWS_AS(zonosim::two_level_step(state, sys, {}, {peer}), std::invalid_argument);
}

TEST_CASE("a tight peer shrinks the fused size metric") {
    const auto sys = zonosim::constant_velocity_system(0.1, 100, {0.02, 0.02}, {0.05, 0.05});
    const auto sensor = zonosim::position_sensor("ego", {0.5, 0.5});
    zonosim::Rng rng(8);
    VectorXd x = (VectorXd(4) << 0, 0, 1, 0).finished();

    EstimatorState own;
    own.node_id = "ego";
    own.current_set =
        zonosim::minkowski_sum(Zonotope::singleton(x),
                               Zonotope::box(VectorXd::Zero(4), (VectorXd(4) << 2, 2, 1, 1).finished()));

    const std::vector<SensorReading> readings = {
        {"ego", zonosim::strips_from_measurement(sensor, zonosim::measure(sensor, x, rng))}};

    EstimatorState alone = zonosim::estimate_step(own, sys, readings);

    const VectorXd x1 = sys.F * x;
    NodeEstimate peer = node("peer",
                             zonosim::minkowski_sum(Zonotope::singleton(x1),
                                                    Zonotope::box(VectorXd::Zero(4),
                                                                  (VectorXd(4) << 0.05, 0.05, 0.05, 0.05).finished())),
                             1);
    EstimatorState fused = zonosim::two_level_step(own, sys, readings, {peer});
    CHECK(zonosim::frobenius_size(fused.current_set) <=
          zonosim::frobenius_size(alone.current_set) + 1e-9);
}

TEST_CASE("true state stays inside the fused set across a cooperative run") {
    const auto sys = zonosim::constant_velocity_system(0.1, 300, {0.02, 0.02}, {0.05, 0.05});
    const auto s1 = zonosim::position_sensor("n1", {0.5, 0.5});
    const auto s2 = zonosim::position_sensor("n2", {0.8, 0.8});
    zonosim::Rng rng(9);

    VectorXd x = (VectorXd(4) << 0, 0, 1.2, -0.3).finished();
    const Zonotope init =
        zonosim::minkowski_sum(Zonotope::singleton(x),
                               Zonotope::box(VectorXd::Zero(4), (VectorXd(4) << 1, 1, 0.5, 0.5).finished()));
    EstimatorState n1{"n1", init, 0, {}};
    EstimatorState n2{"n2", init, 0, {}};

    for (int k = 0; k < 300; ++k) {
        x = zonosim::step_truth(sys, x, rng);
        const std::vector<SensorReading> r1 = {
            {"n1", zonosim::strips_from_measurement(s1, zonosim::measure(s1, x, rng))}};
        const std::vector<SensorReading> r2 = {
            {"n2", zonosim::strips_from_measurement(s2, zonosim::measure(s2, x, rng))}};
        // Local corrections first, then a synchronous exchange.
        EstimatorState local1 = zonosim::estimate_step(n1, sys, r1);
        EstimatorState local2 = zonosim::estimate_step(n2, sys, r2);
        const NodeEstimate p1 = {"n1", local1.step, local1.current_set, local1.fault_statuses()};
        const NodeEstimate p2 = {"n2", local2.step, local2.current_set, local2.fault_statuses()};
        n1 = zonosim::two_level_step(n1, sys, r1, {p2});
        n2 = zonosim::two_level_step(n2, sys, r2, {p1});
        REQUIRE(zonosim::contains_point(n1.current_set, x, 1e-7));
        REQUIRE(zonosim::contains_point(n2.current_set, x, 1e-7));
    }
}
