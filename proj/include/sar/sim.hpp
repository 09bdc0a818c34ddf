#pragma once

#include <cstdint>
#include <limits>

#include "sar/config.hpp"
#include "sar/estimation.hpp"
#include "sar/mission.hpp"

namespace sar {

// Attitude estimation state carried between ticks. The gyro-only angles are
// the unfiltered integration track, kept for the filter-vs-raw comparison.
struct EstimatorState {
    FilterState filter;
    double yaw_gyro = 0.0;    // integrated gyro yaw; the yaw loop's feedback
    double roll_gyro = 0.0;   // pure gyro integration (drifts)
    double pitch_gyro = 0.0;
    AccelAngles last_accel;   // raw accel extraction, for logging
    bool last_gate = true;
};

struct ControllerState {
    PidState roll;
    PidState pitch;
    PidState yaw;
    PidState altitude;
    double last_alt_output = 0.0;  // held while the echo is out of range
};

struct WorldState {
    double time = 0.0;
    std::int64_t tick = 0;
    QuadState quad;
    Vec3 gyro_bias;  // live random-walk state (seeded from the gyro model)
    EstimatorState est;
    ControllerState ctl;
    FollowerState follower;
    SensorReadings readings;
    double last_frame_time = -std::numeric_limits<double>::infinity();
    int frames = 0;
};

// One deterministic stream per noise source, all forked from the master seed.
struct RngSet {
    RngStream gyro;
    RngStream accel;
    RngStream ultrasonic;
    RngStream detector;

    static RngSet from_seed(std::uint64_t seed) {
        RngStream master(seed);
        return {master.fork(1), master.fork(2), master.fork(3), master.fork(4)};
    }
};

// Precomputed per-run environment.
struct SimEnv {
    std::vector<Box> anchors;
    SearchPlan plan;
};

// One CSV row of the attitude comparison series.
struct TimeSeriesRow {
    double t = 0.0;
    double roll_true = 0.0, pitch_true = 0.0;
    double roll_filt = 0.0, pitch_filt = 0.0;
    double roll_accel = 0.0, pitch_accel = 0.0;
    double roll_gyro = 0.0, pitch_gyro = 0.0;
    double echo_altitude = 0.0;  // NaN while out of range
};

// True exactly when a full detector frame period has elapsed.
bool detector_tick(double sim_time, double detector_fps, double last_frame_time);

// Advances the world by one tick: detector frame (on schedule), sensors,
// filter, PIDs, mixer, plant. The input world is not modified.
WorldState step(const WorldState& world, const MasterConfig& cfg, const SimEnv& env, RngSet& rngs,
                MissionLog* log = nullptr, TimeSeriesRow* row = nullptr);

WorldState initial_world(const MasterConfig& cfg, const SimEnv& env);

SimEnv make_env(const MasterConfig& cfg);

struct SimAbort : std::runtime_error {
    std::int64_t tick;
    explicit SimAbort(std::int64_t t)
        : std::runtime_error("non-finite state at tick " + std::to_string(t)), tick(t) {}
};

// Owns one simulation instance end to end. Instances share nothing.
class Simulator {
public:
    explicit Simulator(MasterConfig cfg);

    bool tick();  // one step; false once duration is reached
    void run();   // all remaining ticks; throws SimAbort on non-finite state

    const WorldState& world() const { return world_; }
    const MissionLog& log() const { return log_; }
    const std::vector<TimeSeriesRow>& timeseries() const { return rows_; }
    const SimEnv& env() const { return env_; }
    const MasterConfig& config() const { return cfg_; }

private:
    MasterConfig cfg_;
    SimEnv env_;
    RngSet rngs_;
    WorldState world_;
    MissionLog log_;
    std::vector<TimeSeriesRow> rows_;
};

}  // namespace sar
