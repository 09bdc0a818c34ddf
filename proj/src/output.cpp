#include "sar/output.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sar {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

const char* const kTimeseriesColumns =
    "time,roll_true,pitch_true,roll_filt,pitch_filt,roll_accel,pitch_accel,"
    "roll_gyro,pitch_gyro,echo_altitude";

static std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // binary: no platform newline games
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

void write_timeseries_csv(const std::string& path, const std::vector<TimeSeriesRow>& rows) {
    std::ofstream out = open_out(path);
    out << kTimeseriesColumns << "\n";
    for (const auto& r : rows) {
        out << format_double(r.t) << ',' << format_double(r.roll_true) << ','
            << format_double(r.pitch_true) << ',' << format_double(r.roll_filt) << ','
            << format_double(r.pitch_filt) << ',' << format_double(r.roll_accel) << ','
            << format_double(r.pitch_accel) << ',' << format_double(r.roll_gyro) << ','
            << format_double(r.pitch_gyro) << ',' << format_double(r.echo_altitude) << "\n";
    }
}

std::string detection_record(const MissionLogEntry& e) {
    std::string s = "{\"t\":" + format_double(e.t);
    s += ",\"pos\":[" + format_double(e.drone_pos.x) + "," + format_double(e.drone_pos.y) + "," +
         format_double(e.drone_pos.z) + "]";
    s += ",\"att\":[" + format_double(e.drone_att.yaw) + "," + format_double(e.drone_att.pitch) +
         "," + format_double(e.drone_att.roll) + "]";
    s += ",\"box\":[" + format_double(e.box.cx) + "," + format_double(e.box.cy) + "," +
         format_double(e.box.w) + "," + format_double(e.box.h) + "]";
    s += ",\"conf\":" + format_double(e.conf);
    if (e.geo)
        s += ",\"geo\":[" + format_double(e.geo->x) + "," + format_double(e.geo->y) + "]";
    else
        s += ",\"geo\":null";
    s += "}";
    return s;
}

MissionLogEntry parse_detection_record(const std::string& line) {
    const json j = json::parse(line);
    MissionLogEntry e;
    e.t = j.at("t").get<double>();
    const auto& pos = j.at("pos");
    e.drone_pos = {pos[0].get<double>(), pos[1].get<double>(), pos[2].get<double>()};
    const auto& att = j.at("att");
    e.drone_att = {att[0].get<double>(), att[1].get<double>(), att[2].get<double>()};
    const auto& box = j.at("box");
    e.box = {box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
             box[3].get<double>()};
    e.conf = j.at("conf").get<double>();
    if (!j.at("geo").is_null()) {
        const auto& geo = j.at("geo");
        e.geo = Vec2{geo[0].get<double>(), geo[1].get<double>()};
    }
    return e;
}

void write_detections_jsonl(const std::string& path, const MissionLog& log) {
    std::ofstream out = open_out(path);
    for (const auto& e : log.entries) out << detection_record(e) << "\n";
}

void write_metrics_json(const std::string& path, const json& metrics) {
    std::ofstream out = open_out(path);
    out << metrics.dump(2) << "\n";
}

void write_manifest(const std::string& path, const json& resolved_config) {
    std::ofstream out = open_out(path);
    out << resolved_config.dump(2) << "\n";
}

}  // namespace sar
