#include "sar/sim.hpp"

#include <cmath>

namespace sar {

bool detector_tick(double sim_time, double detector_fps, double last_frame_time) {
    return sim_time - last_frame_time >= 1.0 / detector_fps;
}

SimEnv make_env(const MasterConfig& cfg) {
    SimEnv env;
    env.anchors = generate_anchors(cfg.anchor_maps);
    env.plan = plan_lawnmower(cfg.scenario, cfg.camera, cfg.mission.overlap);
    return env;
}

WorldState initial_world(const MasterConfig& cfg, const SimEnv& env) {
    WorldState w;
    w.gyro_bias = cfg.gyro.bias;
    w.ctl.roll.integral_limit = cfg.control.roll.integral_limit;
    w.ctl.pitch.integral_limit = cfg.control.pitch.integral_limit;
    w.ctl.yaw.integral_limit = cfg.control.yaw.integral_limit;
    w.ctl.altitude.integral_limit = cfg.control.altitude.integral_limit;
    if (!env.plan.waypoints.empty()) {
        w.quad.position.x = env.plan.waypoints.front().x;
        w.quad.position.y = env.plan.waypoints.front().y;
    }
    return w;
}

namespace {

// Detector frame: project every victim, run the anchor/NMS pipeline,
// geolocate the survivors, append to the log.
void run_frame(const WorldState& world, const MasterConfig& cfg, const SimEnv& env, RngSet& rngs,
               MissionLog* log) {
    std::vector<VictimProjection> visible;
    for (const auto& v : cfg.scenario.victims) {
        auto proj = project_victim({v.x, v.y, 0.0}, v.height, world.quad, cfg.camera);
        if (proj) visible.push_back(*proj);
    }

    const std::vector<Detection> detections =
        run_detector_frame(visible, env.anchors, cfg.detector, cfg.pipeline, rngs.detector);
    if (!log) return;

    for (const auto& det : detections) {
        MissionLogEntry e;
        e.t = world.time;
        e.drone_pos = world.quad.position;
        e.drone_att = world.quad.attitude;
        e.box = det.box;
        e.conf = det.conf;
        e.geo = geolocate(det.box, world.quad, cfg.camera);
        log->entries.push_back(e);
    }
}

}  // namespace

WorldState step(const WorldState& world, const MasterConfig& cfg, const SimEnv& env, RngSet& rngs,
                MissionLog* log, TimeSeriesRow* row) {
    const double dt = cfg.sim.dt;
    WorldState next = world;

    // Detector runs on the physics clock, before the state advances. The
    // schedule accumulates whole periods so tick quantization cannot drift
    // the long-run frame rate below detector_fps.
    if (detector_tick(world.time, cfg.sim.detector_fps, world.last_frame_time)) {
        run_frame(world, cfg, env, rngs, log);
        next.last_frame_time = std::isinf(world.last_frame_time)
                                   ? world.time
                                   : world.last_frame_time + 1.0 / cfg.sim.detector_fps;
        next.frames = world.frames + 1;
    }

    // Sensors. The gyro bias random walk lives in the world state.
    GyroModel gyro_model = cfg.gyro;
    gyro_model.bias = world.gyro_bias;
    next.readings.gyro = sample_gyro(world.quad.rates, gyro_model, rngs.gyro, dt);
    next.gyro_bias = gyro_model.bias;

    Vec3 specific_force{0.0, 0.0, cfg.sim.gravity};
    if (cfg.accel.include_translational) {
        // What the proof mass feels: thrust resolved in the world frame.
        const double mean_cmd = (world.quad.motor_cmds[0] + world.quad.motor_cmds[1] +
                                 world.quad.motor_cmds[2] + world.quad.motor_cmds[3]) /
                                4.0;
        specific_force = rotation(world.quad.attitude) *
                         Vec3{0.0, 0.0, cfg.plant.max_total_thrust * mean_cmd / cfg.plant.mass};
    }
    next.readings.accel = sample_accel(world.quad.attitude, specific_force, cfg.sim.gravity,
                                       cfg.accel, rngs.accel, world.time);
    next.readings.echo_time = sample_ultrasonic(world.quad, cfg.ultrasonic, rngs.ultrasonic);

    // Estimation: gyro rates go through the Euler transform at the estimated
    // attitude, the accel extraction is gated, then the filter blends.
    next.est.last_accel = accel_angles(next.readings.accel);
    next.est.last_gate = disturbance_gate(next.readings.accel, cfg.filter);

    const Attitude est_att{world.est.yaw_gyro, world.est.filter.pitch_est,
                           world.est.filter.roll_est};
    const EulerRates est_rates = euler_rates(est_att, next.readings.gyro);
    next.est.filter = filter_step(world.est.filter, est_rates.roll, est_rates.pitch,
                                  next.est.last_accel, next.est.last_gate, cfg.filter, dt);
    next.est.filter.pitch_est = std::clamp(next.est.filter.pitch_est, -kPitchLimit, kPitchLimit);
    next.est.yaw_gyro = wrap_angle(world.est.yaw_gyro + est_rates.yaw * dt);

    // Unfiltered gyro integration, kept for the drift comparison.
    const Attitude gyro_att{world.est.yaw_gyro, world.est.pitch_gyro, world.est.roll_gyro};
    const EulerRates gyro_rates = euler_rates(gyro_att, next.readings.gyro);
    next.est.roll_gyro = world.est.roll_gyro + gyro_rates.roll * dt;
    next.est.pitch_gyro =
        std::clamp(world.est.pitch_gyro + gyro_rates.pitch * dt, -kPitchLimit, kPitchLimit);

    // Control: outer loop picks the setpoints, four PIDs track them.
    const Setpoints sp = follow_waypoints(env.plan, next.follower, world.quad,
                                          cfg.mission.follower, cfg.scenario.cruise_speed,
                                          cfg.sim.gravity);

    const bool trap = cfg.control.trapezoidal_integral;
    const double u_roll = pid_update(cfg.control.roll.gains, next.ctl.roll, sp.roll_sp,
                                     next.est.filter.roll_est, dt, trap);
    const double u_pitch = pid_update(cfg.control.pitch.gains, next.ctl.pitch, sp.pitch_sp,
                                      next.est.filter.pitch_est, dt, trap);
    const double yaw_sp_unwrapped =
        next.est.yaw_gyro + wrap_angle(sp.yaw_sp - next.est.yaw_gyro);
    const double u_yaw = pid_update(cfg.control.yaw.gains, next.ctl.yaw, yaw_sp_unwrapped,
                                    next.est.yaw_gyro, dt, trap);

    double u_alt = world.ctl.last_alt_output;
    if (const auto alt_err = altitude_error_from_echo(next.readings.echo_time, sp.altitude_sp,
                                                      cfg.ultrasonic.sound_speed)) {
        // pid_update consumes (setpoint - measurement); feed the error directly.
        u_alt = pid_update(cfg.control.altitude.gains, next.ctl.altitude, *alt_err, 0.0, dt, trap);
    }
    next.ctl.last_alt_output = u_alt;

    const MotorCommands motors =
        mix(cfg.control.hover_feedforward + u_alt, u_yaw, u_pitch, u_roll);
    next.quad.motor_cmds = motors.as_array();

    // Plant.
    next.quad = propagate(next.quad, cfg.plant, cfg.sim);

    next.time = world.time + dt;
    next.tick = world.tick + 1;

    if (row) {
        row->t = world.time;
        row->roll_true = world.quad.attitude.roll;
        row->pitch_true = world.quad.attitude.pitch;
        row->roll_filt = next.est.filter.roll_est;
        row->pitch_filt = next.est.filter.pitch_est;
        row->roll_accel = next.est.last_accel.roll;
        row->pitch_accel = next.est.last_accel.pitch;
        row->roll_gyro = next.est.roll_gyro;
        row->pitch_gyro = next.est.pitch_gyro;
        row->echo_altitude = next.readings.echo_time
                                 ? *next.readings.echo_time * cfg.ultrasonic.sound_speed / 2.0
                                 : std::numeric_limits<double>::quiet_NaN();
    }
    return next;
}

Simulator::Simulator(MasterConfig cfg)
    : cfg_(std::move(cfg)),
      env_(make_env(cfg_)),
      rngs_(RngSet::from_seed(cfg_.sim.seed)),
      world_(initial_world(cfg_, env_)) {}

bool Simulator::tick() {
    if (world_.time >= cfg_.sim.duration) return false;

    TimeSeriesRow row;
    world_ = step(world_, cfg_, env_, rngs_, &log_, &row);
    if (world_.tick % cfg_.output.timeseries_stride == 0) rows_.push_back(row);

    const QuadState& q = world_.quad;
    const bool finite = std::isfinite(q.position.x) && std::isfinite(q.position.y) &&
                        std::isfinite(q.position.z) && std::isfinite(q.attitude.yaw) &&
                        std::isfinite(q.attitude.pitch) && std::isfinite(q.attitude.roll) &&
                        std::isfinite(q.velocity.z);
    if (!finite) throw SimAbort(world_.tick);
    return true;
}

void Simulator::run() {
    while (tick()) {
    }
}

}  // namespace sar
