#pragma once

#include <optional>

#include "sar/dynamics.hpp"
#include "sar/rng.hpp"

namespace sar {

// MPU6050-style gyro: additive bias that random-walks plus white noise.
// `bias` is live state, advanced by every sample_gyro call.
struct GyroModel {
    Vec3 bias{0.01, 0.0, 0.0};      // rad/s
    double bias_walk_sigma = 5e-4;  // rad/s per sqrt(s)
    double white_sigma = 0.01;      // rad/s
};

// Accelerometer in g-units. Motor vibration is a per-axis sinusoid; spikes
// model the impulsive hits the disturbance gate has to reject.
struct AccelModel {
    double white_sigma = 0.02;        // g
    double vibration_amplitude = 0.08;  // g
    double vibration_freq = 55.0;       // Hz
    double spike_probability = 0.01;    // per sample
    double spike_magnitude = 0.8;       // g
    bool include_translational = false; // feed true specific force, not just gravity
};

struct UltrasonicModel {
    double sound_speed = 343.0;  // m/s
    double noise_sigma = 0.0;    // s, on echo time
    double max_range = 4.0;      // m
};

struct AccelSample {
    double x = 0.0;  // g-units
    double y = 0.0;
    double z = 1.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

// One tick's worth of corrupted measurements.
struct SensorReadings {
    BodyRates gyro;
    AccelSample accel;
    std::optional<double> echo_time;  // empty = out of range
};

// reading = truth + bias + white noise; bias then random-walks with step
// sigma bias_walk_sigma * sqrt(dt).
BodyRates sample_gyro(const BodyRates& true_rates, GyroModel& model, RngStream& rng, double dt);

// Noiseless static reading is (sin(pitch), -sin(roll)cos(pitch),
// cos(roll)cos(pitch)) in g-units: the convention whose arcsin extraction
// recovers pitch and roll exactly. specific_force_world is gravity + any
// translational acceleration, in m/s^2 (pass {0,0,g} for the static model).
AccelSample sample_accel(const Attitude& attitude, const Vec3& specific_force_world,
                         double gravity, const AccelModel& model, RngStream& rng,
                         double sim_time);

// Round-trip echo off the ground plane below the tilted sensor. Out of range
// when the slant exceeds max_range or either tilt angle exceeds 45 degrees.
std::optional<double> sample_ultrasonic(const QuadState& state, const UltrasonicModel& model,
                                        RngStream& rng);

inline void validate(const GyroModel& g) {
    if (g.bias_walk_sigma < 0.0 || g.white_sigma < 0.0)
        throw ConfigError("gyro sigmas must be >= 0");
}

inline void validate(const AccelModel& a) {
    if (a.white_sigma < 0.0 || a.vibration_amplitude < 0.0 || a.spike_magnitude < 0.0)
        throw ConfigError("accel sigmas/amplitudes must be >= 0");
    if (a.spike_probability < 0.0 || a.spike_probability > 1.0)
        throw ConfigError("accel.spike_probability must be in [0, 1]");
}

inline void validate(const UltrasonicModel& u) {
    if (!(u.sound_speed > 0.0)) throw ConfigError("ultrasonic.sound_speed must be > 0");
    if (!(u.max_range > 0.0)) throw ConfigError("ultrasonic.max_range must be > 0");
    if (u.noise_sigma < 0.0) throw ConfigError("ultrasonic.noise_sigma must be >= 0");
}

}  // namespace sar
