#include "zonosim/models.hpp"

#include <stdexcept>

namespace zonosim {

void validate(const LinearSystem& sys) {
    if (sys.F.rows() != sys.F.cols()) {
        throw std::invalid_argument("LinearSystem: F must be square");
    }
    if (sys.process_noise.dim() != sys.F.rows()) {
        throw std::invalid_argument("LinearSystem: process_noise dimension must match F");
    }
    if (sys.horizon < 0) {
        throw std::invalid_argument("LinearSystem: horizon must be non-negative");
    }
    if (sys.dt <= 0.0) {
        throw std::invalid_argument("LinearSystem: dt must be positive");
    }
}

void validate(const SensorModel& sensor) {
    if (sensor.H.rows() < 1) {
        throw std::invalid_argument("SensorModel '" + sensor.id + "': needs at least one measurement row");
    }
    if (sensor.noise_radii.size() != sensor.H.rows()) {
        throw std::invalid_argument("SensorModel '" + sensor.id + "': noise_radii size must equal H rows");
    }
    if ((sensor.noise_radii.array() <= 0.0).any()) {
        throw std::invalid_argument("SensorModel '" + sensor.id + "': noise_radii must be positive");
    }
    if (sensor.fov_range <= 0.0 || sensor.fov_half_angle <= 0.0) {
        throw std::invalid_argument("SensorModel '" + sensor.id + "': field of view must be positive");
    }
}

LinearSystem constant_velocity_system(double dt, int horizon,
                                      const Eigen::Vector2d& pos_noise_radii,
                                      const Eigen::Vector2d& vel_noise_radii) {
    Eigen::MatrixXd F = Eigen::MatrixXd::Identity(4, 4);
    F(0, 2) = dt;
    F(1, 3) = dt;
    Eigen::VectorXd radii(4);
    radii << pos_noise_radii(0), pos_noise_radii(1), vel_noise_radii(0), vel_noise_radii(1);
    LinearSystem sys{std::move(F), Zonotope::box(Eigen::VectorXd::Zero(4), radii), horizon, dt};
    validate(sys);
    return sys;
}

SensorModel position_sensor(std::string id, const Eigen::Vector2d& noise_radii,
                            Pose pose, double fov_range, double fov_half_angle) {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2, 4);
    H(0, 0) = 1.0;
    H(1, 1) = 1.0;
    SensorModel sensor{std::move(id), std::move(H), noise_radii, pose, fov_range, fov_half_angle};
    validate(sensor);
    return sensor;
}

Eigen::VectorXd sample_member(const Zonotope& z, Rng& rng, NoiseSampling mode) {
    const Eigen::Index e = z.num_generators();
    const Eigen::VectorXd beta = (mode == NoiseSampling::corners)
                                     ? rng.corner_vector(e)
                                     : rng.symmetric_vector(e);
    return z.center() + z.generators() * beta;
}

Eigen::VectorXd step_truth(const LinearSystem& sys, const Eigen::VectorXd& x, Rng& rng,
                           NoiseSampling mode) {
    if (x.size() != sys.F.cols()) {
        throw std::invalid_argument("step_truth: state dimension mismatch");
    }
    return sys.F * x + sample_member(sys.process_noise, rng, mode);
}

Eigen::VectorXd measure(const SensorModel& sensor, const Eigen::VectorXd& x, Rng& rng,
                        NoiseSampling mode) {
    if (x.size() != sensor.H.cols()) {
        throw std::invalid_argument("measure: state dimension mismatch");
    }
    Eigen::VectorXd y = sensor.H * x;
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        const double b = (mode == NoiseSampling::corners)
                             ? ((rng.next_u64() & 1u) ? 1.0 : -1.0)
                             : rng.symmetric();
        y(j) += sensor.noise_radii(j) * b;
    }
    return y;
}

std::vector<Strip> strips_from_measurement(const SensorModel& sensor,
                                           const Eigen::VectorXd& y) {
    if (y.size() != sensor.H.rows()) {
        throw std::invalid_argument("strips_from_measurement: measurement dimension mismatch");
    }
    std::vector<Strip> strips;
    strips.reserve(static_cast<std::size_t>(y.size()));
    for (Eigen::Index j = 0; j < y.size(); ++j) {
        strips.push_back(Strip{sensor.H.row(j), y(j), sensor.noise_radii(j)});
    }
    return strips;
}

Eigen::MatrixXd observability_matrix(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H) {
    if (F.rows() != F.cols() || H.cols() != F.rows()) {
        throw std::invalid_argument("observability_matrix: dimension mismatch");
    }
    const Eigen::Index n = F.rows();
    const Eigen::Index p = H.rows();
    Eigen::MatrixXd obs(p * n, n);
    Eigen::MatrixXd block = H;
    for (Eigen::Index k = 0; k < n; ++k) {
        obs.middleRows(k * p, p) = block;
        block = block * F;
    }
    return obs;
}

bool observable(const Eigen::MatrixXd& F, const Eigen::MatrixXd& H) {
    const Eigen::MatrixXd obs = observability_matrix(F, H);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(obs);
    return lu.rank() == F.rows();
}

}  // namespace zonosim
