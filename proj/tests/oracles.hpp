// Independent reference implementations used only by the test suites.
// Everything here is deliberately brute force: grids over the generator
// coefficients, Monte Carlo sampling, and exhaustive facet enumeration.
// The library under test must agree with these within stated tolerances.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "zonosim/zonotope.hpp"

namespace oracle {

// Test-local RNG, separate from the library's to keep oracles independent.
class TestRng {
public:
    explicit TestRng(std::uint64_t seed) : engine_(seed) {}

    double unit() { return (engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }
    double symmetric(double radius) { return uniform(-radius, radius); }

    Eigen::VectorXd beta(int e) {
        Eigen::VectorXd b(e);
        for (int i = 0; i < e; ++i) b(i) = symmetric(1.0);
        return b;
    }

    Eigen::VectorXd corner(int e) {
        Eigen::VectorXd b(e);
        for (int i = 0; i < e; ++i) b(i) = unit() < 0.5 ? -1.0 : 1.0;
        return b;
    }

    std::uint64_t next_u64() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

inline zonosim::Zonotope random_zonotope(TestRng& rng, int n, int e, double scale = 1.0) {
    Eigen::VectorXd c(n);
    for (int i = 0; i < n; ++i) c(i) = rng.symmetric(2.0 * scale);
    Eigen::MatrixXd g(n, e);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < e; ++j) g(i, j) = rng.symmetric(scale);
    return zonosim::Zonotope(c, g);
}

// Enumerates a regular grid over [-1,1]^e and applies fn to each point of
// the zonotope. Cost is steps^e, so keep e small.
template <typename Fn>
void for_each_grid_point(const zonosim::Zonotope& z, int steps, Fn&& fn) {
    const int e = z.num_generators();
    std::vector<int> idx(static_cast<std::size_t>(e), 0);
    Eigen::VectorXd beta(e);
    while (true) {
        for (int j = 0; j < e; ++j)
            beta(j) = e == 0 ? 0.0 : -1.0 + 2.0 * idx[static_cast<std::size_t>(j)] / (steps - 1);
        fn(z.center() + z.generators() * beta);
        int j = 0;
        for (; j < e; ++j) {
            if (++idx[static_cast<std::size_t>(j)] < steps) break;
            idx[static_cast<std::size_t>(j)] = 0;
        }
        if (j == e) break;
    }
}

// Axis-aligned bounds found by grid enumeration. For zonotopes the exact
// hull is attained at corner betas, which the grid endpoints include.
inline zonosim::IntervalBox grid_hull(const zonosim::Zonotope& z, int steps = 3) {
    zonosim::IntervalBox box;
    box.lower = Eigen::VectorXd::Constant(z.dim(), std::numeric_limits<double>::infinity());
    box.upper = -box.lower;
    for_each_grid_point(z, steps, [&](const Eigen::VectorXd& x) {
        box.lower = box.lower.cwiseMin(x);
        box.upper = box.upper.cwiseMax(x);
    });
    return box;
}

// Largest d'x over the beta grid; corners attain the true support value.
inline double grid_support(const zonosim::Zonotope& z, const Eigen::VectorXd& d) {
    double best = -std::numeric_limits<double>::infinity();
    for_each_grid_point(z, 2, [&](const Eigen::VectorXd& x) { best = std::max(best, d.dot(x)); });
    return best;
}

// Exact halfspace description of a full-dimensional zonotope in 2-D or 3-D.
// Each facet normal is orthogonal to n-1 generators; membership then reduces
// to |n'(x-c)| <= sum_k |n'g_k| per facet.
struct FacetForm {
    Eigen::VectorXd center;
    std::vector<Eigen::VectorXd> normals;
    std::vector<double> offsets;

    bool contains(const Eigen::VectorXd& x, double tol = 1e-12) const {
        for (std::size_t i = 0; i < normals.size(); ++i)
            if (std::abs(normals[i].dot(x - center)) > offsets[i] + tol) return false;
        return true;
    }
};

inline FacetForm facet_form(const zonosim::Zonotope& z) {
    const int n = z.dim();
    const int e = z.num_generators();
    FacetForm f;
    f.center = z.center();
    auto push = [&](Eigen::VectorXd normal) {
        const double len = normal.norm();
        if (len < 1e-12) return;
        normal /= len;
        for (const auto& existing : f.normals)
            if ((existing - normal).norm() < 1e-9 || (existing + normal).norm() < 1e-9) return;
        double off = 0.0;
        for (int k = 0; k < e; ++k) off += std::abs(normal.dot(z.generators().col(k)));
        f.normals.push_back(normal);
        f.offsets.push_back(off);
    };
    if (n == 2) {
        for (int j = 0; j < e; ++j) {
            const Eigen::Vector2d g = z.generators().col(j);
            push((Eigen::VectorXd(2) << -g.y(), g.x()).finished());
        }
    } else if (n == 3) {
        for (int a = 0; a < e; ++a)
            for (int b = a + 1; b < e; ++b) {
                const Eigen::Vector3d u = z.generators().col(a);
                const Eigen::Vector3d v = z.generators().col(b);
                Eigen::Vector3d w = u.cross(v);
                push(Eigen::VectorXd(w));
            }
    }
    return f;
}

// Monte Carlo volume estimate: hit ratio inside the interval hull times the
// hull volume. Uses the exact facet membership test, not the library's.
inline double mc_volume(const zonosim::Zonotope& z, TestRng& rng, int samples) {
    const auto hull = zonosim::interval_hull(z);
    const auto widths = hull.widths();
    double hull_volume = 1.0;
    for (int i = 0; i < z.dim(); ++i) hull_volume *= widths(i);
    if (hull_volume <= 0.0) return 0.0;
    const FacetForm f = facet_form(z);
    int hits = 0;
    Eigen::VectorXd x(z.dim());
    for (int s = 0; s < samples; ++s) {
        for (int i = 0; i < z.dim(); ++i) x(i) = rng.uniform(hull.lower(i), hull.upper(i));
        if (f.contains(x)) ++hits;
    }
    return hull_volume * hits / samples;
}

}  // namespace oracle
