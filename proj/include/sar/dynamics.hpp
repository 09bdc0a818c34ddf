#pragma once

#include <array>
#include <stdexcept>

#include "sar/math.hpp"
#include "sar/sim_config.hpp"

namespace sar {

struct Attitude {
    double yaw = 0.0;    // psi, rad
    double pitch = 0.0;  // theta, rad, kept inside (-pi/2, pi/2)
    double roll = 0.0;   // phi, rad
};

// Angular velocity about the body axes, as a gyro reports it.
struct BodyRates {
    double x = 0.0;  // rad/s
    double y = 0.0;
    double z = 0.0;
};

struct EulerRates {
    double yaw = 0.0;  // rad/s
    double pitch = 0.0;
    double roll = 0.0;
};

// Full simulated truth.
struct QuadState {
    Vec3 position;   // world frame, z up, meters
    Vec3 velocity;   // m/s
    Attitude attitude;
    BodyRates rates;
    std::array<double, 4> motor_cmds{};  // normalized [0, 1]
};

// Minimal plant: point-mass translation plus first-order torque response.
struct PlantParams {
    double mass = 1.2;                // kg
    double max_total_thrust = 23.544; // N, all four motors at full command
    double torque_gain_roll = 40.0;   // rad/s^2 per unit differential command
    double torque_gain_pitch = 40.0;
    double torque_gain_yaw = 15.0;
    double rot_damping = 2.0;         // 1/s
};

struct GimbalLockError : std::domain_error {
    GimbalLockError() : std::domain_error("euler rates singular: |cos(pitch)| below tolerance") {}
};

// Pitch saturates just short of the gimbal-lock singularity instead of erroring.
constexpr double kPitchLimit = kPi / 2.0 - 0.01;

Mat3 rotation(const Attitude& att);  // body -> world

// Standard Z-Y-X body-rate to Euler-rate transform. Throws GimbalLockError
// when |cos(pitch)| <= 1e-6.
EulerRates euler_rates(const Attitude& att, const BodyRates& rates);

// One explicit integration step; yaw wraps to (-pi, pi], pitch saturates at
// +-kPitchLimit.
Attitude integrate_attitude(const Attitude& att, const EulerRates& rates, double dt);

// Semi-implicit Euler update of the full state. Ground plane clamps z at 0
// and zeroes downward velocity.
QuadState propagate(const QuadState& state, const PlantParams& params, const SimConfig& config);

inline void validate(const PlantParams& p) {
    if (!(p.mass > 0.0)) throw ConfigError("plant.mass must be > 0");
    if (!(p.max_total_thrust > p.mass * 9.81))
        throw ConfigError("plant.max_total_thrust must exceed hover weight");
    if (!(p.rot_damping >= 0.0)) throw ConfigError("plant.rot_damping must be >= 0");
}

}  // namespace sar
