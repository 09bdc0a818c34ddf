#include "sar/estimation.hpp"

#include <cmath>

namespace sar {

AccelAngles accel_angles(const AccelSample& accel) {
    AccelAngles out;

    double ax = accel.x;
    if (ax > 1.0 || ax < -1.0) {
        ax = std::clamp(ax, -1.0, 1.0);
        out.clamped = true;
    }
    out.pitch = std::asin(ax);

    const double ct = std::cos(out.pitch);
    if (ct < 1e-9) {
        out.degenerate = true;
        out.roll = 0.0;
        return out;
    }

    double arg = -accel.y / ct;
    if (arg > 1.0 || arg < -1.0) {
        arg = std::clamp(arg, -1.0, 1.0);
        out.clamped = true;
    }
    out.roll = std::asin(arg);
    return out;
}

bool disturbance_gate(const AccelSample& accel, const FilterConfig& config) {
    const double n = accel.norm();
    return n >= config.accel_gate_low && n <= config.accel_gate_high;
}

double complementary_update(double angle, double gyro_rate, double accel_angle,
                            bool accepted, const FilterConfig& config, double dt) {
    const double gyro_angle = angle + gyro_rate * dt;
    if (!accepted) return gyro_angle;
    return config.alpha * gyro_angle + (1.0 - config.alpha) * accel_angle;
}

FilterState filter_step(const FilterState& state, double roll_rate, double pitch_rate,
                        const AccelAngles& accel, bool accepted, const FilterConfig& config,
                        double dt) {
    // A degenerate angle extraction is treated as a rejected sample.
    const bool usable = accepted && !accel.degenerate;
    FilterState next;
    next.roll_est = complementary_update(state.roll_est, roll_rate, accel.roll, usable, config, dt);
    next.pitch_est =
        complementary_update(state.pitch_est, pitch_rate, accel.pitch, usable, config, dt);
    next.last_accel_accepted = usable;
    return next;
}

}  // namespace sar
