#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sar/config.hpp"
#include "sar/sim.hpp"

namespace sar {

struct RunOptions {
    std::string config_path;  // empty = built-in defaults
    std::optional<std::uint64_t> seed;
    std::string out_dir = "out";
    std::vector<std::string> overrides;  // KEY=VALUE, applied in order
};

struct RunResult {
    MissionMetrics metrics;  // scored on the consolidated log
    nlohmann::json metrics_json;
    int detector_frames = 0;
    std::size_t raw_detections = 0;
};

// Runs one simulation and writes manifest.json, attitude.csv,
// detections.jsonl and metrics.json into out_dir.
RunResult run_simulation(const RunOptions& opts);

// One simulation per value (in parallel), one CSV row each, written to
// out_dir/sweep.csv. Values are parsed like override values.
void run_sweep(const RunOptions& base, const std::string& parameter,
               const std::vector<std::string>& values);

// Re-scores an existing detections.jsonl against the config's scenario.
nlohmann::json run_eval(const std::string& log_path, const RunOptions& opts);

// Human-readable description of every config path, the output files and
// their exact columns/fields.
std::string schema_text();

}  // namespace sar
