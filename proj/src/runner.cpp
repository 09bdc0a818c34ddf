#include "sar/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>

#include "sar/output.hpp"

namespace sar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

double rms(const std::vector<TimeSeriesRow>& rows, double TimeSeriesRow::*est,
           double TimeSeriesRow::*truth) {
    if (rows.empty()) return std::numeric_limits<double>::quiet_NaN();
    double s = 0.0;
    for (const auto& r : rows) {
        const double e = r.*est - r.*truth;
        s += e * e;
    }
    return std::sqrt(s / rows.size());
}

json metrics_to_json(const MissionMetrics& m, const Simulator& sim, std::size_t reports) {
    json ttf = json::array();
    for (double t : m.time_to_first) ttf.push_back(t);  // NaN dumps as null
    return {
        {"recall", m.recall},
        {"false_positives", m.false_positives},
        {"matched", m.matched},
        {"victims", sim.config().scenario.victims.size()},
        {"reports", reports},
        {"raw_detections", sim.log().entries.size()},
        {"mean_loc_error_m", m.mean_loc_error},
        {"time_to_first_s", ttf},
        {"detector_frames", sim.world().frames},
        {"rms_roll_filt_rad", rms(sim.timeseries(), &TimeSeriesRow::roll_filt, &TimeSeriesRow::roll_true)},
        {"rms_pitch_filt_rad", rms(sim.timeseries(), &TimeSeriesRow::pitch_filt, &TimeSeriesRow::pitch_true)},
        {"rms_roll_accel_rad", rms(sim.timeseries(), &TimeSeriesRow::roll_accel, &TimeSeriesRow::roll_true)},
        {"rms_pitch_accel_rad", rms(sim.timeseries(), &TimeSeriesRow::pitch_accel, &TimeSeriesRow::pitch_true)},
    };
}

struct SimOutcome {
    MissionMetrics metrics;
    json metrics_json;
    MissionLog consolidated;
    int frames = 0;
    std::size_t raw = 0;
};

SimOutcome simulate(const json& tree) {
    MasterConfig cfg = config_from_json(tree);
    validate(cfg);

    Simulator sim(cfg);
    sim.run();

    SimOutcome out;
    out.consolidated = consolidate_log(sim.log(), cfg.mission.merge_radius);
    out.metrics = evaluate_mission(out.consolidated, cfg.scenario, cfg.mission.assoc_radius);
    out.metrics_json = metrics_to_json(out.metrics, sim, out.consolidated.entries.size());
    out.frames = sim.world().frames;
    out.raw = sim.log().entries.size();

    return out;
}

}  // namespace

RunResult run_simulation(const RunOptions& opts) {
    const json tree = resolve_config_tree(opts.config_path, opts.overrides, opts.seed);
    MasterConfig cfg = config_from_json(tree);
    validate(cfg);

    fs::create_directories(opts.out_dir);
    const fs::path out(opts.out_dir);

    Simulator sim(cfg);
    sim.run();

    const MissionLog consolidated = consolidate_log(sim.log(), cfg.mission.merge_radius);
    const MissionMetrics metrics =
        evaluate_mission(consolidated, cfg.scenario, cfg.mission.assoc_radius);
    const json mj = metrics_to_json(metrics, sim, consolidated.entries.size());

    write_manifest((out / "manifest.json").string(), tree);
    write_timeseries_csv((out / "attitude.csv").string(), sim.timeseries());
    write_detections_jsonl((out / "detections.jsonl").string(), sim.log());
    write_metrics_json((out / "metrics.json").string(), mj);

    RunResult res;
    res.metrics = metrics;
    res.metrics_json = mj;
    res.detector_frames = sim.world().frames;
    res.raw_detections = sim.log().entries.size();
    return res;
}

void run_sweep(const RunOptions& base, const std::string& parameter,
               const std::vector<std::string>& values) {
    if (values.empty()) throw ConfigError("sweep needs at least one value");

    const json base_tree = resolve_config_tree(base.config_path, base.overrides, base.seed);
    const std::uint64_t master_seed = base_tree["sim"]["seed"].get<std::uint64_t>();

    // Validate the parameter path up front so errors surface before any run.
    {
        json probe = base_tree;
        set_config_path(probe, parameter, values.front());
    }

    struct Row {
        std::string value;
        std::uint64_t seed;
        SimOutcome outcome;
    };

    std::vector<std::future<Row>> futures;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const std::uint64_t sub_seed = RngStream(master_seed).fork(100 + i).seed();
        futures.push_back(std::async(std::launch::async, [&, i, sub_seed]() {
            json tree = base_tree;
            set_config_path(tree, parameter, values[i]);
            tree["sim"]["seed"] = sub_seed;
            return Row{values[i], sub_seed, simulate(tree)};
        }));
    }

    fs::create_directories(base.out_dir);
    std::ofstream csv(fs::path(base.out_dir) / "sweep.csv", std::ios::binary);
    csv << "parameter,value,seed,recall,false_positives,matched,raw_detections,"
           "mean_loc_error_m,rms_roll_filt_rad,rms_pitch_filt_rad\n";
    for (auto& f : futures) {
        const Row row = f.get();
        const auto& m = row.outcome.metrics;
        csv << parameter << ',' << row.value << ',' << row.seed << ','
            << format_double(m.recall) << ',' << m.false_positives << ',' << m.matched << ','
            << row.outcome.raw << ',' << format_double(m.mean_loc_error) << ','
            << format_double(row.outcome.metrics_json["rms_roll_filt_rad"].get<double>()) << ','
            << format_double(row.outcome.metrics_json["rms_pitch_filt_rad"].get<double>()) << "\n";
    }
}

json run_eval(const std::string& log_path, const RunOptions& opts) {
    const json tree = resolve_config_tree(opts.config_path, opts.overrides, opts.seed);
    MasterConfig cfg = config_from_json(tree);
    validate(cfg);

    std::ifstream in(log_path);
    if (!in) throw ConfigError("cannot open detection log: " + log_path);
    MissionLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) log.entries.push_back(parse_detection_record(line));
    }

    const MissionLog consolidated = consolidate_log(log, cfg.mission.merge_radius);
    const MissionMetrics m = evaluate_mission(consolidated, cfg.scenario, cfg.mission.assoc_radius);

    json ttf = json::array();
    for (double t : m.time_to_first) ttf.push_back(t);
    return {
        {"recall", m.recall},
        {"false_positives", m.false_positives},
        {"matched", m.matched},
        {"victims", cfg.scenario.victims.size()},
        {"reports", consolidated.entries.size()},
        {"raw_detections", log.entries.size()},
        {"mean_loc_error_m", m.mean_loc_error},
        {"time_to_first_s", ttf},
    };
}

namespace {

// path -> description; array indices normalized to '#'.
const std::map<std::string, std::string>& path_docs() {
    static const std::map<std::string, std::string> docs = {
        {"sim.dt", "seconds per physics tick"},
        {"sim.duration", "simulated seconds per run"},
        {"sim.seed", "master seed; every noise stream forks from it"},
        {"sim.gravity", "m/s^2"},
        {"sim.detector_fps", "detector cadence on the physics clock, Hz"},
        {"plant.mass", "vehicle mass, kg"},
        {"plant.max_total_thrust", "all-motors-full thrust, N"},
        {"plant.torque_gain_roll", "roll accel per unit differential command, rad/s^2"},
        {"plant.torque_gain_pitch", "pitch accel per unit differential command, rad/s^2"},
        {"plant.torque_gain_yaw", "yaw accel per unit differential command, rad/s^2"},
        {"plant.rot_damping", "rotational damping, 1/s"},
        {"gyro.bias.#", "initial gyro bias per axis, rad/s"},
        {"gyro.bias_walk_sigma", "bias random walk, rad/s per sqrt(s)"},
        {"gyro.white_sigma", "gyro white noise, rad/s"},
        {"accel.white_sigma", "accelerometer white noise, g"},
        {"accel.vibration_amplitude", "motor vibration sinusoid amplitude, g"},
        {"accel.vibration_freq", "motor vibration frequency, Hz"},
        {"accel.spike_probability", "per-sample spike probability"},
        {"accel.spike_magnitude", "spike size, g"},
        {"accel.include_translational", "feed true specific force instead of gravity only"},
        {"ultrasonic.sound_speed", "m/s"},
        {"ultrasonic.noise_sigma", "echo time noise, s"},
        {"ultrasonic.max_range", "slant range limit, m"},
        {"filter.alpha", "complementary filter coefficient, (0,1)"},
        {"filter.accel_gate_low", "reject accel below this magnitude, g"},
        {"filter.accel_gate_high", "reject accel above this magnitude, g"},
        {"control.roll.kp", "roll loop proportional gain"},
        {"control.roll.ki", "roll loop integral gain"},
        {"control.roll.kd", "roll loop derivative gain"},
        {"control.roll.integral_limit", "roll loop integral clamp"},
        {"control.pitch.kp", "pitch loop proportional gain"},
        {"control.pitch.ki", "pitch loop integral gain"},
        {"control.pitch.kd", "pitch loop derivative gain"},
        {"control.pitch.integral_limit", "pitch loop integral clamp"},
        {"control.yaw.kp", "yaw loop proportional gain"},
        {"control.yaw.ki", "yaw loop integral gain"},
        {"control.yaw.kd", "yaw loop derivative gain"},
        {"control.yaw.integral_limit", "yaw loop integral clamp"},
        {"control.altitude.kp", "altitude loop gain (echo-time units)"},
        {"control.altitude.ki", "altitude loop integral gain"},
        {"control.altitude.kd", "altitude loop derivative gain"},
        {"control.altitude.integral_limit", "altitude loop integral clamp"},
        {"control.hover_feedforward", "base throttle added to the altitude loop output"},
        {"control.trapezoidal_integral", "trapezoidal instead of rectangular integration"},
        {"camera.width", "px"},
        {"camera.height", "px"},
        {"camera.vertical_fov_deg", "vertical field of view, degrees"},
        {"detector.p_max", "peak detection probability"},
        {"detector.pixel_height_50", "apparent height at 50% detectability, px"},
        {"detector.steepness", "logistic slope, px"},
        {"detector.conf_noise_sigma", "confidence noise"},
        {"detector.near_limit", "detectable band near edge, m"},
        {"detector.far_limit", "detectable band far edge, m"},
        {"detector.center_jitter_sigma", "box center jitter, normalized image units"},
        {"detector.false_positive_rate", "false positive probability per frame"},
        {"anchor_maps.#.grid", "feature map cells per side"},
        {"anchor_maps.#.scales.#", "anchor size, fraction of image"},
        {"anchor_maps.#.aspect_ratios.#", "anchor aspect ratio w/h"},
        {"pipeline.match_iou", "anchor-matching IoU threshold"},
        {"pipeline.nms_iou", "NMS suppression IoU threshold"},
        {"pipeline.loc_noise_sigma", "noise on per-anchor offsets"},
        {"pipeline.conf_iou_penalty", "candidate conf drop per unit (1 - IoU)"},
        {"mission.follower.pos_kp", "desired speed per meter of position error, 1/s"},
        {"mission.follower.vel_kp", "tilt demand per m/s of velocity error, g"},
        {"mission.follower.max_tilt_deg", "attitude setpoint cap, degrees"},
        {"mission.follower.capture_radius", "waypoint capture distance, m"},
        {"mission.overlap", "camera footprint overlap between transects, [0,1)"},
        {"mission.assoc_radius", "detection-to-victim association radius, m"},
        {"mission.merge_radius", "temporal dedup radius for repeated sightings, m"},
        {"scenario.area.width", "search area width, m"},
        {"scenario.area.height", "search area height, m"},
        {"scenario.victims.#.x", "victim x, m"},
        {"scenario.victims.#.y", "victim y, m"},
        {"scenario.victims.#.height", "victim size, m"},
        {"scenario.search_altitude", "mission altitude, m"},
        {"scenario.cruise_speed", "horizontal speed cap, m/s"},
        {"output.timeseries_stride", "write one attitude.csv row every N ticks"},
    };
    return docs;
}

std::string normalize_path(const std::string& path) {
    std::string out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) {
        const bool numeric = !part.empty() && part.find_first_not_of("0123456789") == std::string::npos;
        if (!out.empty()) out += '.';
        out += numeric ? "#" : part;
    }
    return out;
}

}  // namespace

std::string schema_text() {
    const json defaults = to_json(MasterConfig{});
    std::ostringstream out;
    out << "Config schema (JSON). Every path is overridable with --override PATH=VALUE.\n\n";
    for (const auto& path : config_paths(defaults)) {
        const json* node = &defaults;
        std::stringstream ss(path);
        std::string part;
        while (std::getline(ss, part, '.'))
            node = node->is_array() ? &(*node)[std::stoul(part)] : &(*node)[part];
        const auto& docs = path_docs();
        const auto it = docs.find(normalize_path(path));
        out << "  " << path << " = " << node->dump();
        if (it != docs.end()) out << "   # " << it->second;
        out << "\n";
    }
    out << "\n"
        << "Extra top-level key: scenario_file = path to a JSON file holding the scenario\n"
        << "section (mutually exclusive with an inline scenario).\n\n"
        << "Output files written by `run` into --out DIR:\n"
        << "  manifest.json    fully resolved config of the run (reproducibility record)\n"
        << "  attitude.csv     columns: " << kTimeseriesColumns << "\n"
        << "                   angles in rad; echo_altitude in m, nan while out of range\n"
        << "  detections.jsonl one record per detection:\n"
        << "                   {\"t\":s,\"pos\":[x,y,z],\"att\":[yaw,pitch,roll],\n"
        << "                    \"box\":[cx,cy,w,h],\"conf\":c,\"geo\":[x,y]|null}\n"
        << "  metrics.json     recall, false_positives, matched, victims, reports,\n"
        << "                   raw_detections, mean_loc_error_m, time_to_first_s,\n"
        << "                   detector_frames, rms_{roll,pitch}_{filt,accel}_rad\n\n"
        << "`sweep` writes sweep.csv with columns: parameter,value,seed,recall,\n"
        << "false_positives,matched,raw_detections,mean_loc_error_m,rms_roll_filt_rad,\n"
        << "rms_pitch_filt_rad\n\n"
        << "Environment: QUADSAR_OUT overrides the default output directory when --out\n"
        << "is not given.\n";
    return out.str();
}

}  // namespace sar
