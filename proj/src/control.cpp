#include "sar/control.hpp"

#include <algorithm>

namespace sar {

double pid_update(const PidGains& gains, PidState& state, double setpoint, double measurement,
                  double dt, bool trapezoidal) {
    const double error = setpoint - measurement;

    const double increment =
        trapezoidal ? 0.5 * (error + state.prev_error) * dt : error * dt;
    state.integral =
        std::clamp(state.integral + increment, -state.integral_limit, state.integral_limit);

    const double derivative = (error - state.prev_error) / dt;
    state.prev_error = error;

    return gains.kp * error + gains.ki * state.integral + gains.kd * derivative;
}

std::optional<double> altitude_error_from_echo(const std::optional<double>& echo_time,
                                               double target_altitude, double sound_speed) {
    if (!echo_time) return std::nullopt;
    const double target_echo = 2.0 * target_altitude / sound_speed;
    return target_echo - *echo_time;
}

MotorCommands mix(double base_throttle, double u_yaw, double u_pitch, double u_roll) {
    auto sat = [](double v) { return std::clamp(v, 0.0, 1.0); };
    MotorCommands m;
    m.m1 = sat(base_throttle + u_pitch - u_yaw);
    m.m2 = sat(base_throttle - u_pitch - u_yaw);
    m.m3 = sat(base_throttle + u_roll + u_yaw);
    m.m4 = sat(base_throttle - u_roll + u_yaw);
    return m;
}

}  // namespace sar
