#include "sar/sensors.hpp"

#include <cmath>

namespace sar {

BodyRates sample_gyro(const BodyRates& true_rates, GyroModel& model, RngStream& rng, double dt) {
    BodyRates reading;
    reading.x = true_rates.x + model.bias.x + rng.normal(0.0, model.white_sigma);
    reading.y = true_rates.y + model.bias.y + rng.normal(0.0, model.white_sigma);
    reading.z = true_rates.z + model.bias.z + rng.normal(0.0, model.white_sigma);

    const double walk = model.bias_walk_sigma * std::sqrt(dt);
    model.bias.x += rng.normal(0.0, walk);
    model.bias.y += rng.normal(0.0, walk);
    model.bias.z += rng.normal(0.0, walk);
    return reading;
}

AccelSample sample_accel(const Attitude& attitude, const Vec3& specific_force_world,
                         double gravity, const AccelModel& model, RngStream& rng,
                         double sim_time) {
    // Resolve the specific force in the body frame, then apply the sign
    // convention that makes the arcsin angle extraction an exact inverse:
    // with f = {0,0,g} this reduces to (sin t, -sin p cos t, cos p cos t).
    const Vec3 f_body = rotation(attitude).transpose() * (specific_force_world / gravity);
    AccelSample a;
    a.x = -f_body.x;
    a.y = -f_body.y;
    a.z = f_body.z;

    a.x += rng.normal(0.0, model.white_sigma);
    a.y += rng.normal(0.0, model.white_sigma);
    a.z += rng.normal(0.0, model.white_sigma);

    if (model.vibration_amplitude > 0.0) {
        const double w = 2.0 * kPi * model.vibration_freq * sim_time;
        a.x += model.vibration_amplitude * std::sin(w);
        a.y += model.vibration_amplitude * std::sin(w + 2.0 * kPi / 3.0);
        a.z += model.vibration_amplitude * std::sin(w + 4.0 * kPi / 3.0);
    }

    if (rng.bernoulli(model.spike_probability)) {
        const std::uint64_t axis = rng.uniform_index(3);
        const double spike = rng.bernoulli(0.5) ? model.spike_magnitude : -model.spike_magnitude;
        if (axis == 0)
            a.x += spike;
        else if (axis == 1)
            a.y += spike;
        else
            a.z += spike;
    }
    return a;
}

std::optional<double> sample_ultrasonic(const QuadState& state, const UltrasonicModel& model,
                                        RngStream& rng) {
    const double ct = std::cos(state.attitude.pitch);
    const double cp = std::cos(state.attitude.roll);
    if (std::abs(state.attitude.pitch) > deg2rad(45.0) ||
        std::abs(state.attitude.roll) > deg2rad(45.0))
        return std::nullopt;

    const double slant = state.position.z / (ct * cp);
    if (slant > model.max_range) return std::nullopt;

    return 2.0 * slant / model.sound_speed + rng.normal(0.0, model.noise_sigma);
}

}  // namespace sar
