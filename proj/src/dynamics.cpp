#include "sar/dynamics.hpp"

#include <cmath>

namespace sar {

Mat3 rotation(const Attitude& att) {
    return zyx_rotation(att.yaw, att.pitch, att.roll);
}

EulerRates euler_rates(const Attitude& att, const BodyRates& w) {
    const double ct = std::cos(att.pitch);
    if (std::abs(ct) <= 1e-6) throw GimbalLockError{};
    const double sp = std::sin(att.roll);
    const double cp = std::cos(att.roll);
    const double tt = std::tan(att.pitch);

    EulerRates r;
    r.roll = w.x + sp * tt * w.y + cp * tt * w.z;
    r.pitch = cp * w.y - sp * w.z;
    r.yaw = (sp * w.y + cp * w.z) / ct;
    return r;
}

Attitude integrate_attitude(const Attitude& att, const EulerRates& rates, double dt) {
    Attitude out;
    out.yaw = wrap_angle(att.yaw + rates.yaw * dt);
    out.pitch = std::clamp(att.pitch + rates.pitch * dt, -kPitchLimit, kPitchLimit);
    out.roll = att.roll + rates.roll * dt;
    return out;
}

// Differential commands the plus-configuration mixer encodes into the motors:
// m1/m2 sit on the pitch arm, m3/m4 on the roll arm, yaw from the pair split.
static void differential_commands(const std::array<double, 4>& m, double& pitch_cmd,
                                  double& roll_cmd, double& yaw_cmd) {
    pitch_cmd = (m[0] - m[1]) / 2.0;
    roll_cmd = (m[2] - m[3]) / 2.0;
    yaw_cmd = (m[2] + m[3] - m[0] - m[1]) / 4.0;
}

QuadState propagate(const QuadState& state, const PlantParams& params, const SimConfig& config) {
    const double dt = config.dt;
    QuadState next = state;

    double pitch_cmd, roll_cmd, yaw_cmd;
    differential_commands(state.motor_cmds, pitch_cmd, roll_cmd, yaw_cmd);

    // Angular: first-order torque response with linear damping.
    BodyRates wdot;
    wdot.x = params.torque_gain_roll * roll_cmd - params.rot_damping * state.rates.x;
    wdot.y = params.torque_gain_pitch * pitch_cmd - params.rot_damping * state.rates.y;
    wdot.z = params.torque_gain_yaw * yaw_cmd - params.rot_damping * state.rates.z;

    next.rates.x = state.rates.x + wdot.x * dt;
    next.rates.y = state.rates.y + wdot.y * dt;
    next.rates.z = state.rates.z + wdot.z * dt;

    // Semi-implicit: attitude advances with the updated rates.
    next.attitude = integrate_attitude(state.attitude, euler_rates(state.attitude, next.rates), dt);

    // Translational: mean motor command scales total thrust along body z.
    const double mean_cmd =
        (state.motor_cmds[0] + state.motor_cmds[1] + state.motor_cmds[2] + state.motor_cmds[3]) / 4.0;
    const double thrust = params.max_total_thrust * mean_cmd;
    const Vec3 accel = rotation(state.attitude) * Vec3{0.0, 0.0, thrust / params.mass} -
                       Vec3{0.0, 0.0, config.gravity};

    next.velocity = state.velocity + accel * dt;
    next.position = state.position + next.velocity * dt;

    // Ground clamp.
    if (next.position.z <= 0.0) {
        next.position.z = 0.0;
        if (next.velocity.z < 0.0) next.velocity.z = 0.0;
    }
    return next;
}

}  // namespace sar
