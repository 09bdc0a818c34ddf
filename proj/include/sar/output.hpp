#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sar/mission.hpp"
#include "sar/sim.hpp"

namespace sar {

// Shortest round-trip decimal form (to_chars); "nan"/"inf" spelled out.
// All file output funnels through this so runs are byte-comparable.
std::string format_double(double v);

extern const char* const kTimeseriesColumns;

void write_timeseries_csv(const std::string& path, const std::vector<TimeSeriesRow>& rows);
void write_detections_jsonl(const std::string& path, const MissionLog& log);
void write_metrics_json(const std::string& path, const nlohmann::json& metrics);
void write_manifest(const std::string& path, const nlohmann::json& resolved_config);

// One JSONL record, and its inverse for the eval subcommand.
std::string detection_record(const MissionLogEntry& e);
MissionLogEntry parse_detection_record(const std::string& line);

}  // namespace sar
