#include "sar/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace sar {

using nlohmann::json;

namespace {

// Tolerant of missing keys, strict about unknown ones.
class Reader {
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigError(path_ + ": expected a JSON object");
    }

    template <typename T>
    void get(const char* key, T& out) {
        auto it = j_.find(key);
        if (it == j_.end()) return;
        seen_.insert(key);
        try {
            it->get_to(out);
        } catch (const json::exception& e) {
            throw ConfigError(path_ + "." + key + ": " + e.what());
        }
    }

    void get_angle_deg(const char* key, double& out_rad) {
        double deg = rad2deg(out_rad);
        get(key, deg);
        out_rad = deg2rad(deg);
    }

    const json* child(const char* key) {
        auto it = j_.find(key);
        if (it == j_.end()) return nullptr;
        seen_.insert(key);
        return &*it;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key()))
                throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

json vec3_to_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

Vec3 vec3_from_json(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3)
        throw ConfigError(path + ": expected an array of 3 numbers");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json loop_to_json(const LoopConfig& l) {
    return {{"kp", l.gains.kp},
            {"ki", l.gains.ki},
            {"kd", l.gains.kd},
            {"integral_limit", l.integral_limit}};
}

void loop_from_json(const json& j, const std::string& path, LoopConfig& l) {
    Reader r(j, path);
    r.get("kp", l.gains.kp);
    r.get("ki", l.gains.ki);
    r.get("kd", l.gains.kd);
    r.get("integral_limit", l.integral_limit);
    r.finish();
}

json scenario_to_json(const Scenario& s) {
    json victims = json::array();
    for (const auto& v : s.victims)
        victims.push_back({{"x", v.x}, {"y", v.y}, {"height", v.height}});
    return {{"area", {{"width", s.area_width}, {"height", s.area_height}}},
            {"victims", victims},
            {"search_altitude", s.search_altitude},
            {"cruise_speed", s.cruise_speed}};
}

void scenario_from_json(const json& j, const std::string& path, Scenario& s) {
    Reader r(j, path);
    if (const json* area = r.child("area")) {
        Reader ra(*area, path + ".area");
        ra.get("width", s.area_width);
        ra.get("height", s.area_height);
        ra.finish();
    }
    if (const json* victims = r.child("victims")) {
        if (!victims->is_array()) throw ConfigError(path + ".victims: expected an array");
        s.victims.clear();
        int i = 0;
        for (const auto& vj : *victims) {
            Victim v;
            Reader rv(vj, path + ".victims." + std::to_string(i++));
            rv.get("x", v.x);
            rv.get("y", v.y);
            rv.get("height", v.height);
            rv.finish();
            s.victims.push_back(v);
        }
    }
    r.get("search_altitude", s.search_altitude);
    r.get("cruise_speed", s.cruise_speed);
    r.finish();
}

}  // namespace

json to_json(const MasterConfig& c) {
    json maps = json::array();
    for (const auto& m : c.anchor_maps)
        maps.push_back({{"grid", m.grid}, {"scales", m.scales}, {"aspect_ratios", m.aspect_ratios}});

    return {
        {"sim",
         {{"dt", c.sim.dt},
          {"duration", c.sim.duration},
          {"seed", c.sim.seed},
          {"gravity", c.sim.gravity},
          {"detector_fps", c.sim.detector_fps}}},
        {"plant",
         {{"mass", c.plant.mass},
          {"max_total_thrust", c.plant.max_total_thrust},
          {"torque_gain_roll", c.plant.torque_gain_roll},
          {"torque_gain_pitch", c.plant.torque_gain_pitch},
          {"torque_gain_yaw", c.plant.torque_gain_yaw},
          {"rot_damping", c.plant.rot_damping}}},
        {"gyro",
         {{"bias", vec3_to_json(c.gyro.bias)},
          {"bias_walk_sigma", c.gyro.bias_walk_sigma},
          {"white_sigma", c.gyro.white_sigma}}},
        {"accel",
         {{"white_sigma", c.accel.white_sigma},
          {"vibration_amplitude", c.accel.vibration_amplitude},
          {"vibration_freq", c.accel.vibration_freq},
          {"spike_probability", c.accel.spike_probability},
          {"spike_magnitude", c.accel.spike_magnitude},
          {"include_translational", c.accel.include_translational}}},
        {"ultrasonic",
         {{"sound_speed", c.ultrasonic.sound_speed},
          {"noise_sigma", c.ultrasonic.noise_sigma},
          {"max_range", c.ultrasonic.max_range}}},
        {"filter",
         {{"alpha", c.filter.alpha},
          {"accel_gate_low", c.filter.accel_gate_low},
          {"accel_gate_high", c.filter.accel_gate_high}}},
        {"control",
         {{"roll", loop_to_json(c.control.roll)},
          {"pitch", loop_to_json(c.control.pitch)},
          {"yaw", loop_to_json(c.control.yaw)},
          {"altitude", loop_to_json(c.control.altitude)},
          {"hover_feedforward", c.control.hover_feedforward},
          {"trapezoidal_integral", c.control.trapezoidal_integral}}},
        {"camera",
         {{"width", c.camera.width},
          {"height", c.camera.height},
          {"vertical_fov_deg", rad2deg(c.camera.vertical_fov)}}},
        {"detector",
         {{"p_max", c.detector.p_max},
          {"pixel_height_50", c.detector.pixel_height_50},
          {"steepness", c.detector.steepness},
          {"conf_noise_sigma", c.detector.conf_noise_sigma},
          {"near_limit", c.detector.near_limit},
          {"far_limit", c.detector.far_limit},
          {"center_jitter_sigma", c.detector.center_jitter_sigma},
          {"false_positive_rate", c.detector.false_positive_rate}}},
        {"anchor_maps", maps},
        {"pipeline",
         {{"match_iou", c.pipeline.match_iou},
          {"nms_iou", c.pipeline.nms_iou},
          {"loc_noise_sigma", c.pipeline.loc_noise_sigma},
          {"conf_iou_penalty", c.pipeline.conf_iou_penalty}}},
        {"mission",
         {{"follower",
           {{"pos_kp", c.mission.follower.pos_kp},
            {"vel_kp", c.mission.follower.vel_kp},
            {"max_tilt_deg", rad2deg(c.mission.follower.max_tilt)},
            {"capture_radius", c.mission.follower.capture_radius}}},
          {"overlap", c.mission.overlap},
          {"assoc_radius", c.mission.assoc_radius},
          {"merge_radius", c.mission.merge_radius}}},
        {"scenario", scenario_to_json(c.scenario)},
        {"output", {{"timeseries_stride", c.output.timeseries_stride}}},
    };
}

MasterConfig config_from_json(const json& j) {
    MasterConfig c;
    Reader root(j, "config");

    if (const json* s = root.child("sim")) {
        Reader r(*s, "sim");
        r.get("dt", c.sim.dt);
        r.get("duration", c.sim.duration);
        r.get("seed", c.sim.seed);
        r.get("gravity", c.sim.gravity);
        r.get("detector_fps", c.sim.detector_fps);
        r.finish();
    }
    if (const json* s = root.child("plant")) {
        Reader r(*s, "plant");
        r.get("mass", c.plant.mass);
        r.get("max_total_thrust", c.plant.max_total_thrust);
        r.get("torque_gain_roll", c.plant.torque_gain_roll);
        r.get("torque_gain_pitch", c.plant.torque_gain_pitch);
        r.get("torque_gain_yaw", c.plant.torque_gain_yaw);
        r.get("rot_damping", c.plant.rot_damping);
        r.finish();
    }
    if (const json* s = root.child("gyro")) {
        Reader r(*s, "gyro");
        if (const json* b = r.child("bias")) c.gyro.bias = vec3_from_json(*b, "gyro.bias");
        r.get("bias_walk_sigma", c.gyro.bias_walk_sigma);
        r.get("white_sigma", c.gyro.white_sigma);
        r.finish();
    }
    if (const json* s = root.child("accel")) {
        Reader r(*s, "accel");
        r.get("white_sigma", c.accel.white_sigma);
        r.get("vibration_amplitude", c.accel.vibration_amplitude);
        r.get("vibration_freq", c.accel.vibration_freq);
        r.get("spike_probability", c.accel.spike_probability);
        r.get("spike_magnitude", c.accel.spike_magnitude);
        r.get("include_translational", c.accel.include_translational);
        r.finish();
    }
    if (const json* s = root.child("ultrasonic")) {
        Reader r(*s, "ultrasonic");
        r.get("sound_speed", c.ultrasonic.sound_speed);
        r.get("noise_sigma", c.ultrasonic.noise_sigma);
        r.get("max_range", c.ultrasonic.max_range);
        r.finish();
    }
    if (const json* s = root.child("filter")) {
        Reader r(*s, "filter");
        r.get("alpha", c.filter.alpha);
        r.get("accel_gate_low", c.filter.accel_gate_low);
        r.get("accel_gate_high", c.filter.accel_gate_high);
        r.finish();
    }
    if (const json* s = root.child("control")) {
        Reader r(*s, "control");
        if (const json* l = r.child("roll")) loop_from_json(*l, "control.roll", c.control.roll);
        if (const json* l = r.child("pitch")) loop_from_json(*l, "control.pitch", c.control.pitch);
        if (const json* l = r.child("yaw")) loop_from_json(*l, "control.yaw", c.control.yaw);
        if (const json* l = r.child("altitude"))
            loop_from_json(*l, "control.altitude", c.control.altitude);
        r.get("hover_feedforward", c.control.hover_feedforward);
        r.get("trapezoidal_integral", c.control.trapezoidal_integral);
        r.finish();
    }
    if (const json* s = root.child("camera")) {
        Reader r(*s, "camera");
        r.get("width", c.camera.width);
        r.get("height", c.camera.height);
        r.get_angle_deg("vertical_fov_deg", c.camera.vertical_fov);
        r.finish();
    }
    if (const json* s = root.child("detector")) {
        Reader r(*s, "detector");
        r.get("p_max", c.detector.p_max);
        r.get("pixel_height_50", c.detector.pixel_height_50);
        r.get("steepness", c.detector.steepness);
        r.get("conf_noise_sigma", c.detector.conf_noise_sigma);
        r.get("near_limit", c.detector.near_limit);
        r.get("far_limit", c.detector.far_limit);
        r.get("center_jitter_sigma", c.detector.center_jitter_sigma);
        r.get("false_positive_rate", c.detector.false_positive_rate);
        r.finish();
    }
    if (const json* s = root.child("anchor_maps")) {
        if (!s->is_array()) throw ConfigError("anchor_maps: expected an array");
        c.anchor_maps.clear();
        int i = 0;
        for (const auto& mj : *s) {
            FeatureMapSpec m;
            Reader r(mj, "anchor_maps." + std::to_string(i++));
            r.get("grid", m.grid);
            r.get("scales", m.scales);
            r.get("aspect_ratios", m.aspect_ratios);
            r.finish();
            c.anchor_maps.push_back(std::move(m));
        }
    }
    if (const json* s = root.child("pipeline")) {
        Reader r(*s, "pipeline");
        r.get("match_iou", c.pipeline.match_iou);
        r.get("nms_iou", c.pipeline.nms_iou);
        r.get("loc_noise_sigma", c.pipeline.loc_noise_sigma);
        r.get("conf_iou_penalty", c.pipeline.conf_iou_penalty);
        r.finish();
    }
    if (const json* s = root.child("mission")) {
        Reader r(*s, "mission");
        if (const json* f = r.child("follower")) {
            Reader rf(*f, "mission.follower");
            rf.get("pos_kp", c.mission.follower.pos_kp);
            rf.get("vel_kp", c.mission.follower.vel_kp);
            rf.get_angle_deg("max_tilt_deg", c.mission.follower.max_tilt);
            rf.get("capture_radius", c.mission.follower.capture_radius);
            rf.finish();
        }
        r.get("overlap", c.mission.overlap);
        r.get("assoc_radius", c.mission.assoc_radius);
        r.get("merge_radius", c.mission.merge_radius);
        r.finish();
    }
    if (const json* s = root.child("scenario")) scenario_from_json(*s, "scenario", c.scenario);
    if (const json* s = root.child("output")) {
        Reader r(*s, "output");
        r.get("timeseries_stride", c.output.timeseries_stride);
        r.finish();
    }
    root.child("scenario_file");  // resolved by load_config before parsing
    root.finish();
    return c;
}

void validate(const MasterConfig& c) {
    validate(c.sim);
    validate(c.plant);
    validate(c.gyro);
    validate(c.accel);
    validate(c.ultrasonic);
    validate(c.filter);
    validate(c.control);
    validate(c.camera);
    validate(c.detector);
    for (const auto& m : c.anchor_maps) validate(m);
    validate(c.mission);
    validate(c.scenario);
    if (c.output.timeseries_stride < 1)
        throw ConfigError("output.timeseries_stride must be >= 1");
}

std::vector<std::string> config_paths(const json& tree) {
    std::vector<std::string> out;
    std::function<void(const json&, const std::string&)> walk = [&](const json& j,
                                                                    const std::string& prefix) {
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it)
                walk(*it, prefix.empty() ? it.key() : prefix + "." + it.key());
        } else if (j.is_array()) {
            for (std::size_t i = 0; i < j.size(); ++i) walk(j[i], prefix + "." + std::to_string(i));
        } else {
            out.push_back(prefix);
        }
    };
    walk(tree, "");
    std::sort(out.begin(), out.end());
    return out;
}

void set_config_path(json& tree, const std::string& path, const std::string& value) {
    std::vector<std::string> parts;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    if (parts.empty()) throw ConfigError("empty override path");

    json* node = &tree;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        const std::string& p = parts[i];
        if (node->is_array()) {
            std::size_t idx = 0;
            try {
                idx = std::stoul(p);
            } catch (...) {
                node = nullptr;
                break;
            }
            if (idx >= node->size()) {
                node = nullptr;
                break;
            }
            node = &(*node)[idx];
        } else if (node->is_object() && node->contains(p)) {
            node = &(*node)[p];
        } else {
            node = nullptr;
            break;
        }
    }

    json* leaf = nullptr;
    if (node) {
        const std::string& last = parts.back();
        if (node->is_array()) {
            try {
                std::size_t idx = std::stoul(last);
                if (idx < node->size()) leaf = &(*node)[idx];
            } catch (...) {
            }
        } else if (node->is_object() && node->contains(last)) {
            leaf = &(*node)[last];
        }
    }
    if (!leaf) {
        std::string msg = "unknown config path '" + path + "'; valid paths:\n";
        for (const auto& p : config_paths(tree)) msg += "  " + p + "\n";
        throw ConfigError(msg);
    }

    json parsed;
    try {
        parsed = json::parse(value);
    } catch (...) {
        parsed = value;  // bare string
    }
    *leaf = parsed;
}

void apply_override(json& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw ConfigError("override '" + assignment + "' is not of the form KEY=VALUE");
    set_config_path(tree, assignment.substr(0, eq), assignment.substr(eq + 1));
}

json resolve_config_tree(const std::string& config_path, const std::vector<std::string>& overrides,
                         const std::optional<std::uint64_t>& seed_override) {
    json tree = to_json(MasterConfig{});
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) throw ConfigError("cannot open config file: " + config_path);
        json file;
        try {
            file = json::parse(in);
        } catch (const json::exception& e) {
            throw ConfigError(config_path + ": " + e.what());
        }
        if (file.contains("scenario_file")) {
            if (file.contains("scenario"))
                throw ConfigError(config_path + ": give either scenario or scenario_file, not both");
            const std::string ref = file["scenario_file"].get<std::string>();
            std::ifstream sin(ref);
            if (!sin) throw ConfigError("cannot open scenario file: " + ref);
            try {
                file["scenario"] = json::parse(sin);
            } catch (const json::exception& e) {
                throw ConfigError(ref + ": " + e.what());
            }
            file.erase("scenario_file");
        }
        // Merge the file over the defaults so the resolved tree is complete.
        tree.merge_patch(file);
    }
    for (const auto& ov : overrides) apply_override(tree, ov);
    if (seed_override) tree["sim"]["seed"] = *seed_override;
    return tree;
}

MasterConfig load_config(const std::string& config_path, const std::vector<std::string>& overrides,
                         const std::optional<std::uint64_t>& seed_override) {
    MasterConfig cfg = config_from_json(resolve_config_tree(config_path, overrides, seed_override));
    validate(cfg);
    return cfg;
}

}  // namespace sar
