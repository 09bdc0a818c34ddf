#pragma once

#include <cstdint>
#include <stdexcept>

namespace sar {

// Simulation clock and global constants.
struct SimConfig {
    double dt = 0.01;             // seconds per physics tick
    double duration = 60.0;       // seconds
    std::uint64_t seed = 42;      // master seed, forked per subsystem
    double gravity = 9.81;        // m/s^2
    double detector_fps = 3.0;    // detector cadence, Hz
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline void validate(const SimConfig& c) {
    if (!(c.dt > 0.0)) throw ConfigError("sim.dt must be > 0");
    if (!(c.duration >= c.dt)) throw ConfigError("sim.duration must be >= sim.dt");
    if (!(c.detector_fps > 0.0)) throw ConfigError("sim.detector_fps must be > 0");
    if (!(c.dt <= 1.0 / c.detector_fps))
        throw ConfigError("sim.dt must not exceed one detector frame period");
    if (!(c.gravity > 0.0)) throw ConfigError("sim.gravity must be > 0");
}

}  // namespace sar
