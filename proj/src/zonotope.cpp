#include "zonosim/zonotope.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace zonosim {

bool IntervalBox::contains(const Eigen::VectorXd& x, double tol) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("IntervalBox::contains: dimension mismatch");
    }
    return (x.array() >= lower.array() - tol).all() &&
           (x.array() <= upper.array() + tol).all();
}

Zonotope::Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators)
    : center_(std::move(center)), generators_(std::move(generators)) {
    if (generators_.size() == 0 && generators_.rows() != center_.size()) {
        generators_.resize(center_.size(), 0);
    }
    if (generators_.rows() != center_.size()) {
        throw std::invalid_argument("Zonotope: generator rows must equal center dimension");
    }
}

Zonotope Zonotope::singleton(Eigen::VectorXd center) {
    const Eigen::Index n = center.size();
    return Zonotope(std::move(center), Eigen::MatrixXd(n, 0));
}

Zonotope Zonotope::box(const Eigen::VectorXd& center, const Eigen::VectorXd& radii) {
    if (center.size() != radii.size()) {
        throw std::invalid_argument("Zonotope::box: center/radii dimension mismatch");
    }
    return Zonotope(center, Eigen::MatrixXd(radii.asDiagonal()));
}

double Zonotope::order() const {
    if (dim() == 0) return 0.0;
    return static_cast<double>(num_generators()) / static_cast<double>(dim());
}

Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("minkowski_sum: dimension mismatch");
    }
    Eigen::MatrixXd gens(a.dim(), a.num_generators() + b.num_generators());
    gens << a.generators(), b.generators();
    return Zonotope(a.center() + b.center(), std::move(gens));
}

Zonotope linear_map(const Eigen::MatrixXd& map, const Zonotope& z) {
    if (map.cols() != z.dim()) {
        throw std::invalid_argument("linear_map: map columns must equal zonotope dimension");
    }
    return Zonotope(map * z.center(), map * z.generators());
}

Zonotope linear_map(double scale, const Zonotope& z) {
    return Zonotope(scale * z.center(), scale * z.generators());
}

double support(const Zonotope& z, const Eigen::VectorXd& direction) {
    if (direction.size() != z.dim()) {
        throw std::invalid_argument("support: direction dimension mismatch");
    }
    if (direction.norm() == 0.0) {
        throw std::invalid_argument("support: zero direction");
    }
    return direction.dot(z.center()) +
           (direction.transpose() * z.generators()).cwiseAbs().sum();
}

IntervalBox interval_hull(const Zonotope& z) {
    const Eigen::VectorXd radii = z.generators().cwiseAbs().rowwise().sum();
    return IntervalBox{z.center() - radii, z.center() + radii};
}

double volume(const Zonotope& z) {
    const Eigen::Index n = z.dim();
    const Eigen::Index e = z.num_generators();
    if (n == 0 || e < n) return 0.0;

    const Eigen::MatrixXd& gens = z.generators();
    std::vector<Eigen::Index> pick(static_cast<std::size_t>(n));
    std::iota(pick.begin(), pick.end(), Eigen::Index{0});

    Eigen::MatrixXd sub(n, n);
    double sum = 0.0;
    while (true) {
        for (Eigen::Index j = 0; j < n; ++j) {
            sub.col(j) = gens.col(pick[static_cast<std::size_t>(j)]);
        }
        sum += std::abs(sub.determinant());

        // advance to the next n-combination of {0..e-1}
        Eigen::Index i = n - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == e - n + i) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (Eigen::Index j = i + 1; j < n; ++j) {
            pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
    }
    return std::pow(2.0, static_cast<double>(n)) * sum;
}

namespace {

// Bounded-variable least squares on the unit box: minimizes ||G b - d|| over
// b in [-1,1]^e with an active-set method (Stark-Parker BVLS). Each outer
// iteration frees the variable whose gradient most violates its bound, then
// the inner loop re-solves the free subproblem, clamping variables that cross
// a bound. Returns the achieved residual norm.
double bvls_residual(const Eigen::MatrixXd& gens, const Eigen::VectorXd& d, double stop_below) {
    const Eigen::Index n = gens.rows();
    const Eigen::Index e = gens.cols();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(e);
    // -1/+1: clamped at that bound, 0: free. Start with everything free so the
    // first inner solve is the plain least-squares projection.
    Eigen::VectorXi state = Eigen::VectorXi::Zero(e);

    const Eigen::VectorXd colnorm = gens.colwise().norm();
    Eigen::VectorXd resid = d;  // d - G beta
    double rnorm = resid.norm();
    int frozen = -1;  // anti-cycling: last variable bounced straight back

    const int max_outer = 10 * static_cast<int>(e) + 100;
    for (int outer = 0; outer < max_outer; ++outer) {
        if (rnorm <= stop_below) return rnorm;

        // Free every variable whose bound blocks descent; first pass frees all.
        bool has_free = false;
        for (Eigen::Index j = 0; j < e; ++j) has_free |= state(j) == 0;
        if (outer > 0) {
            // Gradient of 1/2 ||G b - d||^2 is -G'resid; a bound variable
            // violates Kuhn-Tucker when moving off its bound is descent.
            const Eigen::VectorXd w = gens.transpose() * resid;
            Eigen::Index enter = -1;
            double worst = 0.0;
            for (Eigen::Index j = 0; j < e; ++j) {
                if (state(j) == 0 || j == frozen) continue;
                const double violation = -static_cast<double>(state(j)) * w(j);
                const double gate = 1e-13 * colnorm(j) * (1.0 + rnorm);
                if (violation > gate && violation > worst) {
                    worst = violation;
                    enter = j;
                }
            }
            if (enter < 0) return rnorm;  // Kuhn-Tucker conditions hold
            state(enter) = 0;
            frozen = static_cast<int>(enter);
            has_free = true;
        }
        if (!has_free) return rnorm;

        // Inner loop: least squares over the free set, clamping crossers.
        for (int inner = 0; inner <= static_cast<int>(e); ++inner) {
            std::vector<Eigen::Index> free_idx;
            Eigen::VectorXd rhs = d;
            for (Eigen::Index j = 0; j < e; ++j) {
                if (state(j) == 0 && colnorm(j) > 0.0) free_idx.push_back(j);
                else if (state(j) != 0) rhs -= beta(j) * gens.col(j);
            }
            if (free_idx.empty()) break;

            Eigen::MatrixXd sub(n, static_cast<Eigen::Index>(free_idx.size()));
            for (std::size_t k = 0; k < free_idx.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = gens.col(free_idx[k]);
            const Eigen::VectorXd sol = sub.completeOrthogonalDecomposition().solve(rhs);

            double alpha = 1.0;
            for (std::size_t k = 0; k < free_idx.size(); ++k) {
                const double target = sol(static_cast<Eigen::Index>(k));
                if (std::abs(target) <= 1.0) continue;
                const double bound = target > 0.0 ? 1.0 : -1.0;
                const double from = beta(free_idx[k]);
                const double denom = target - from;
                if (std::abs(denom) > 0.0) alpha = std::min(alpha, (bound - from) / denom);
            }
            alpha = std::clamp(alpha, 0.0, 1.0);

            bool clamped = false;
            for (std::size_t k = 0; k < free_idx.size(); ++k) {
                const Eigen::Index j = free_idx[k];
                const double target = sol(static_cast<Eigen::Index>(k));
                double next = beta(j) + alpha * (target - beta(j));
                if (next >= 1.0 - 1e-14 && target >= 1.0) {
                    next = 1.0;
                    state(j) = 1;
                    clamped = true;
                } else if (next <= -1.0 + 1e-14 && target <= -1.0) {
                    next = -1.0;
                    state(j) = -1;
                    clamped = true;
                }
                beta(j) = next;
            }
            if (!clamped) {
                frozen = -1;  // a full step succeeded, nothing is cycling
                break;
            }
        }
        resid = d - gens * beta;
        rnorm = resid.norm();
    }
    return rnorm;
}

}  // namespace

bool contains_point(const Zonotope& z, const Eigen::VectorXd& x, double tol) {
    if (x.size() != z.dim()) {
        throw std::invalid_argument("contains_point: dimension mismatch");
    }
    const Eigen::VectorXd d = x - z.center();
    if (d.norm() <= tol) return true;

    const Eigen::MatrixXd& gens = z.generators();
    if (gens.cols() == 0) return false;

    // cheap reject against the axis-aligned hull
    const Eigen::VectorXd radii = gens.cwiseAbs().rowwise().sum();
    if (((d.cwiseAbs() - radii).array() > tol).any()) return false;

    return bvls_residual(gens, d, tol) <= tol;
}

Zonotope reduce_order(const Zonotope& z, double max_order) {
    if (max_order < 1.0) {
        throw std::invalid_argument("reduce_order: max_order must be >= 1");
    }
    const Eigen::Index n = z.dim();
    const Eigen::Index e = z.num_generators();
    const auto target = static_cast<Eigen::Index>(std::floor(max_order * static_cast<double>(n)));
    if (e <= target) return z;

    const Eigen::MatrixXd& gens = z.generators();
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(e));
    std::iota(idx.begin(), idx.end(), Eigen::Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
        return gens.col(a).norm() > gens.col(b).norm();
    });

    const Eigen::Index keep = target - n;  // target >= n since max_order >= 1
    Eigen::MatrixXd kept(n, keep);
    for (Eigen::Index j = 0; j < keep; ++j) {
        kept.col(j) = gens.col(idx[static_cast<std::size_t>(j)]);
    }
    Eigen::VectorXd box_radii = Eigen::VectorXd::Zero(n);
    for (Eigen::Index j = keep; j < e; ++j) {
        box_radii += gens.col(idx[static_cast<std::size_t>(j)]).cwiseAbs();
    }

    Eigen::MatrixXd reduced(n, keep + n);
    reduced << kept, Eigen::MatrixXd(box_radii.asDiagonal());
    return Zonotope(z.center(), std::move(reduced));
}

bool strip_intersection_empty(const Zonotope& z, const Strip& strip) {
    if (strip.h.size() != z.dim()) {
        throw std::invalid_argument("strip_intersection_empty: dimension mismatch");
    }
    const double offset = std::abs(strip.h.dot(z.center()) - strip.y);
    const double reach = strip.r + (strip.h * z.generators()).cwiseAbs().sum();
    return offset > reach;
}

double frobenius_size(const Zonotope& z) {
    return z.generators().squaredNorm();
}

}  // namespace zonosim
