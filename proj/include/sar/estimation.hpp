#pragma once

#include "sar/sensors.hpp"

namespace sar {

struct FilterConfig {
    double alpha = 0.98;          // complementary coefficient, (0, 1)
    double accel_gate_low = 0.5;  // g, reject |a| below
    double accel_gate_high = 1.5; // g, reject |a| above
};

struct FilterState {
    double roll_est = 0.0;   // rad
    double pitch_est = 0.0;  // rad
    bool last_accel_accepted = true;
};

struct AccelAngles {
    double roll = 0.0;   // rad
    double pitch = 0.0;  // rad
    bool clamped = false;     // an arcsin argument had to be clamped to [-1, 1]
    bool degenerate = false;  // |pitch| at the pole; roll reported as 0
};

// Inverts the accelerometer model: pitch = arcsin(A_x),
// roll = arcsin(-A_y / cos(pitch)). Arguments clamp instead of erroring
// because noise routinely pushes |A_x| past 1.
AccelAngles accel_angles(const AccelSample& accel);

// Accept the accelerometer only when its magnitude is plausible for gravity.
bool disturbance_gate(const AccelSample& accel, const FilterConfig& config);

// One filter iteration for a single angle. Accepted:
//   angle <- alpha * (angle + gyro_rate * dt) + (1 - alpha) * accel_angle
// Rejected samples fall back to pure gyro integration.
double complementary_update(double angle, double gyro_rate, double accel_angle,
                            bool accepted, const FilterConfig& config, double dt);

// Applies the per-angle update to roll and pitch together.
FilterState filter_step(const FilterState& state, double roll_rate, double pitch_rate,
                        const AccelAngles& accel, bool accepted, const FilterConfig& config,
                        double dt);

inline void validate(const FilterConfig& f) {
    if (!(f.alpha > 0.0 && f.alpha < 1.0)) throw ConfigError("filter.alpha must be in (0, 1)");
    if (!(f.accel_gate_low > 0.0 && f.accel_gate_low < 1.0))
        throw ConfigError("filter.accel_gate_low must be in (0, 1)");
    if (!(f.accel_gate_high > 1.0)) throw ConfigError("filter.accel_gate_high must be > 1");
}

}  // namespace sar
