#pragma once

#include <Eigen/Dense>

namespace zonosim {

/// Measurement strip: the set { x : |h x - y| <= r } of states consistent
/// with one scalar bounded-noise measurement.
struct Strip {
    Eigen::RowVectorXd h;
    double y = 0.0;
    double r = 0.0;
};

/// Tightest axis-aligned bounding box, kept as componentwise bounds.
struct IntervalBox {
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;

    Eigen::Index dim() const { return lower.size(); }
    Eigen::VectorXd center() const { return 0.5 * (lower + upper); }
    Eigen::VectorXd widths() const { return upper - lower; }
    bool contains(const Eigen::VectorXd& x, double tol = 0.0) const;
};

/// Centrally symmetric convex set { c + G b : b in [-1,1]^e } given by a
/// center c and a generator matrix G whose columns are the segment
/// directions. e = 0 denotes the singleton {c}.
class Zonotope {
public:
    Zonotope() = default;
    Zonotope(Eigen::VectorXd center, Eigen::MatrixXd generators);

    /// Singleton set {c}.
    static Zonotope singleton(Eigen::VectorXd center);
    /// Axis-aligned box: center +- radii per axis. Zero radii are kept as
    /// zero generator columns so the dimension bookkeeping stays uniform.
    static Zonotope box(const Eigen::VectorXd& center, const Eigen::VectorXd& radii);

    const Eigen::VectorXd& center() const { return center_; }
    const Eigen::MatrixXd& generators() const { return generators_; }
    Eigen::Index dim() const { return center_.size(); }
    Eigen::Index num_generators() const { return generators_.cols(); }
    /// Generators per dimension, the growth measure capped by reduce_order.
    double order() const;

private:
    Eigen::VectorXd center_;
    Eigen::MatrixXd generators_;
};

/// Exact Minkowski sum <c1 + c2, [G1, G2]>.
Zonotope minkowski_sum(const Zonotope& a, const Zonotope& b);

/// Exact image under a linear map: <L c, L G>. L may be rectangular.
Zonotope linear_map(const Eigen::MatrixXd& map, const Zonotope& z);
/// Scalar scaling, treated as (s I) Z.
Zonotope linear_map(double scale, const Zonotope& z);

/// Exact support value max { d.x : x in Z } = d.c + sum_i |d.g_i|.
double support(const Zonotope& z, const Eigen::VectorXd& direction);

/// Tightest axis-aligned box: center +- rowwise 1-norm of G.
IntervalBox interval_hull(const Zonotope& z);

/// Exact volume 2^n * sum over n-subsets S of generators |det G_S|.
/// Degenerate sets (fewer generators than dimensions, or rank-deficient G)
/// have volume 0. Cost is combinatorial in the generator count.
double volume(const Zonotope& z);

/// Decides x in Z by solving the box-constrained least-squares feasibility
/// problem min ||G b - (x - c)|| over b in [-1,1]^e; membership holds when
/// the residual drops to tol.
bool contains_point(const Zonotope& z, const Eigen::VectorXd& x, double tol = 1e-9);

/// Over-approximates Z with at most max_order * dim generators: keeps the
/// largest-norm generators and replaces the rest with their interval hull
/// (n axis-aligned generators). Returns Z unchanged when already small.
Zonotope reduce_order(const Zonotope& z, double max_order);

/// Exact emptiness test for Z vs a single strip:
/// empty iff |h c - y| > r + sum_i |h g_i|.
bool strip_intersection_empty(const Zonotope& z, const Strip& strip);

/// Squared Frobenius norm of the generator matrix, the size metric
/// minimized by the fusion gain/weight optimizers.
double frobenius_size(const Zonotope& z);

}  // namespace zonosim
