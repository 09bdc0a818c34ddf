#pragma once

#include <array>
#include <optional>

#include "sar/sim_config.hpp"

namespace sar {

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
};

struct PidState {
    double integral = 0.0;        // error * s, clamped
    double prev_error = 0.0;
    double integral_limit = 1.0;  // |integral| never exceeds this
};

struct Setpoints {
    double yaw_sp = 0.0;      // rad
    double pitch_sp = 0.0;    // rad, |.| <= 30 deg
    double roll_sp = 0.0;     // rad, |.| <= 30 deg
    double altitude_sp = 0.0; // m, converted to a target echo time at the loop
};

struct MotorCommands {
    double m1 = 0.0;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;

    std::array<double, 4> as_array() const { return {m1, m2, m3, m4}; }
};

struct LoopConfig {
    PidGains gains;
    double integral_limit = 1.0;
};

// The four loops of the stabilization stack plus mixer plumbing. Defaults
// were hand-tuned against the default plant.
struct ControlConfig {
    LoopConfig roll{{0.4, 0.05, 0.13}, 0.3};
    LoopConfig pitch{{0.4, 0.05, 0.13}, 0.3};
    LoopConfig yaw{{0.3, 0.0, 0.1}, 0.3};
    LoopConfig altitude{{30.0, 8.0, 20.0}, 0.04};  // echo-time units
    double hover_feedforward = 0.5;  // base throttle at hover
    bool trapezoidal_integral = false;
};

inline void validate(const LoopConfig& l) {
    if (l.gains.kp < 0.0 || l.gains.ki < 0.0 || l.gains.kd < 0.0)
        throw ConfigError("pid gains must be >= 0");
    if (!(l.integral_limit >= 0.0)) throw ConfigError("pid integral_limit must be >= 0");
}

inline void validate(const ControlConfig& c) {
    validate(c.roll);
    validate(c.pitch);
    validate(c.yaw);
    validate(c.altitude);
    if (c.hover_feedforward < 0.0 || c.hover_feedforward > 1.0)
        throw ConfigError("control.hover_feedforward must be in [0, 1]");
}

// Textbook discrete PID: rectangular integral (trapezoidal behind the flag),
// derivative on error, anti-windup by clamping the integral.
double pid_update(const PidGains& gains, PidState& state, double setpoint, double measurement,
                  double dt, bool trapezoidal = false);

// The altitude loop runs in raw echo-time units. Empty echo means the caller
// must hold its previous output and leave the integral untouched.
std::optional<double> altitude_error_from_echo(const std::optional<double>& echo_time,
                                               double target_altitude, double sound_speed);

// Plus-configuration mixer; every motor saturates to [0, 1].
MotorCommands mix(double base_throttle, double u_yaw, double u_pitch, double u_roll);

}  // namespace sar
