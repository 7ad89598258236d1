#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "zonosim/zonotope.hpp"

namespace zonosim {

/// Deterministic seeded random source. Doubles are built from the top 53
/// bits of the mt19937_64 stream, so a given seed yields the same sequence
/// on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1).
    double unit() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

    /// Uniform in [-1, 1].
    double symmetric() { return 2.0 * unit() - 1.0; }

    Eigen::VectorXd symmetric_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = symmetric();
        return v;
    }

    /// Components drawn from {-1, +1}; exercises zonotope corners.
    Eigen::VectorXd corner_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = (engine_() & 1u) ? 1.0 : -1.0;
        return v;
    }

private:
    std::mt19937_64 engine_;
};

/// Discrete-time linear dynamics x_{k+1} = F x_k + n_k with the process
/// noise bounded by a zonotope.
struct LinearSystem {
    Eigen::MatrixXd F;
    Zonotope process_noise;
    int horizon = 0;
    double dt = 0.1;
};

struct Pose {
    double x = 0.0;
    double y = 0.0;
    double heading = 0.0;  // radians, 0 along +x
};

/// Linear measurement y = H x + v with |v_j| <= noise_radii(j), plus the
/// mounting geometry used by the visibility model.
struct SensorModel {
    std::string id;
    Eigen::MatrixXd H;           // p x n
    Eigen::VectorXd noise_radii; // p
    Pose pose;
    double fov_range = 50.0;
    double fov_half_angle = 1.0471975511965976;  // 60 deg
};

void validate(const LinearSystem& sys);
void validate(const SensorModel& sensor);

/// Planar constant-velocity model, state (px, py, vx, vy). Process noise is
/// an axis-aligned zonotope with the given per-axis position and velocity
/// radii.
LinearSystem constant_velocity_system(double dt, int horizon,
                                      const Eigen::Vector2d& pos_noise_radii,
                                      const Eigen::Vector2d& vel_noise_radii);

/// Position-only sensor for the constant-velocity model: H selects (px, py).
SensorModel position_sensor(std::string id, const Eigen::Vector2d& noise_radii,
                            Pose pose = {}, double fov_range = 50.0,
                            double fov_half_angle = 1.0471975511965976);

enum class NoiseSampling { uniform, corners };

/// Uniform (or corner) sample c + G b with b drawn componentwise in [-1,1].
Eigen::VectorXd sample_member(const Zonotope& z, Rng& rng,
                              NoiseSampling mode = NoiseSampling::uniform);

/// One step of ground truth: F x + w with w sampled from the process-noise
/// zonotope.
Eigen::VectorXd step_truth(const LinearSystem& sys, const Eigen::VectorXd& x, Rng& rng,
                           NoiseSampling mode = NoiseSampling::uniform);

/// Simulated measurement y = H x + v, each v_j uniform in [-r_j, r_j].
Eigen::VectorXd measure(const SensorModel& sensor, const Eigen::VectorXd& x, Rng& rng,
                        NoiseSampling mode = NoiseSampling::uniform);

/// One strip per scalar measurement row; a p-dimensional measurement becomes
/// p strips fused jointly downstream.
std::vector<Strip> strips_from_measurement(const SensorModel& sensor,
                                           const Eigen::VectorXd& y);

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H);

/// Rank test of the stacked observability matrix [H; HF; ...; HF^(n-1)].
bool observable(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H);

}  // namespace zonosim
