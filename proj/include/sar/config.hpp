#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sar/control.hpp"
#include "sar/detection.hpp"
#include "sar/estimation.hpp"
#include "sar/mission.hpp"

namespace sar {

struct OutputConfig {
    int timeseries_stride = 1;  // CSV row every N ticks
};

// Fully resolved configuration of one simulation run.
struct MasterConfig {
    SimConfig sim;
    PlantParams plant;
    GyroModel gyro;
    AccelModel accel;
    UltrasonicModel ultrasonic;
    FilterConfig filter;
    ControlConfig control;
    CameraModel camera;
    DetectorModel detector;
    std::vector<FeatureMapSpec> anchor_maps{
        {8, {0.1, 0.15}, {1.0, 0.5}},
        {4, {0.25, 0.4}, {1.0, 0.5}},
    };
    DetectionPipelineConfig pipeline;
    MissionConfig mission;
    Scenario scenario;
    OutputConfig output;
};

void validate(const MasterConfig& cfg);

// JSON round trip. Parsing is tolerant of missing keys (defaults fill in)
// and strict about unknown ones.
nlohmann::json to_json(const MasterConfig& cfg);
MasterConfig config_from_json(const nlohmann::json& j);

// Applies "dot.path=value" onto a config tree. Numeric segments index
// arrays. The path must already exist; unknown paths raise ConfigError
// listing every valid one.
void apply_override(nlohmann::json& tree, const std::string& assignment);
void set_config_path(nlohmann::json& tree, const std::string& path, const std::string& value);

// Every leaf path of a config tree, dot-separated, sorted.
std::vector<std::string> config_paths(const nlohmann::json& tree);

// Fully resolved tree: defaults <- file (with scenario_file pulled in) <-
// overrides <- seed. The file may be empty-string for defaults only.
nlohmann::json resolve_config_tree(const std::string& config_path,
                                   const std::vector<std::string>& overrides = {},
                                   const std::optional<std::uint64_t>& seed_override = {});

// resolve + parse + validate in one go.
MasterConfig load_config(const std::string& config_path,
                         const std::vector<std::string>& overrides = {},
                         const std::optional<std::uint64_t>& seed_override = {});

}  // namespace sar
