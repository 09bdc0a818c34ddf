#pragma once

#include <optional>
#include <vector>

#include "sar/control.hpp"
#include "sar/detection.hpp"

namespace sar {

struct Victim {
    double x = 0.0;       // m, world
    double y = 0.0;
    double height = 1.7;  // m
};

// Default scenario is a stationary hover at the origin (zero-size area);
// give the area a real extent to fly a search mission.
struct Scenario {
    double area_width = 0.0;   // m, area spans [0, width] x [0, height]
    double area_height = 0.0;
    std::vector<Victim> victims;
    double search_altitude = 3.0;  // m
    double cruise_speed = 3.0;     // m/s cap
};

struct SearchPlan {
    std::vector<Vec3> waypoints;
    double swath = 0.0;  // m between transects
};

struct MissionLogEntry {
    double t = 0.0;
    Vec3 drone_pos;
    Attitude drone_att;
    Box box;
    double conf = 0.0;
    std::optional<Vec2> geo;  // ground intersection, empty if the ray missed
};

struct MissionLog {
    std::vector<MissionLogEntry> entries;  // times non-decreasing
};

struct MissionMetrics {
    double recall = 0.0;           // NaN when the scenario has no victims
    int false_positives = 0;
    int matched = 0;
    int total_detections = 0;
    double mean_loc_error = 0.0;   // m over matched pairs, NaN if none
    std::vector<double> time_to_first;  // per victim, NaN if never seen
};

// Outer position loop feeding the attitude PIDs.
struct FollowerConfig {
    double pos_kp = 0.8;          // desired speed per meter of error
    double vel_kp = 0.35;         // accel per m/s of velocity error, in g
    double max_tilt = deg2rad(10.0);
    double capture_radius = 1.5;  // m
};

struct FollowerState {
    std::size_t wp_index = 0;
    bool done = false;
};

struct MissionConfig {
    FollowerConfig follower;
    double overlap = 0.2;       // footprint overlap fraction between transects
    double assoc_radius = 5.0;  // m, detection-to-victim association
    double merge_radius = 3.0;  // m, temporal dedup of repeated sightings
};

inline void validate(const MissionConfig& m) {
    if (!(m.overlap >= 0.0 && m.overlap < 1.0)) throw ConfigError("mission.overlap must be in [0, 1)");
    if (!(m.assoc_radius > 0.0)) throw ConfigError("mission.assoc_radius must be > 0");
    if (!(m.merge_radius > 0.0)) throw ConfigError("mission.merge_radius must be > 0");
    if (!(m.follower.capture_radius > 0.0)) throw ConfigError("mission.follower.capture_radius must be > 0");
    if (!(m.follower.max_tilt > 0.0 && m.follower.max_tilt <= deg2rad(30.0)))
        throw ConfigError("mission.follower.max_tilt must be in (0, 30] degrees");
}

// Parallel transects spaced by swath = 2*altitude*tan(hfov/2)*(1-overlap),
// serpentine order, covering [0,W]x[0,H].
SearchPlan plan_lawnmower(const Scenario& scenario, const CameraModel& cam, double overlap);

// Inverse pinhole: ray through the box center, rotated by the drone attitude,
// intersected with the ground plane.
std::optional<Vec2> geolocate(const Box& det, const QuadState& drone, const CameraModel& cam);

// Greedy in log order: a detection matches the nearest victim within
// assoc_radius; duplicates of an already-matched victim count as false
// positives, as does anything with no victim in range (or no geolocation).
MissionMetrics evaluate_mission(const MissionLog& log, const Scenario& scenario,
                                double assoc_radius);

// Temporal dedup: entries merge into an existing report when geolocated
// within merge_radius of it. Reports keep first time, mean position, max conf.
MissionLog consolidate_log(const MissionLog& log, double merge_radius);

// Issues attitude/altitude setpoints toward the current waypoint and advances
// it on capture. After the last waypoint the follower holds position there.
Setpoints follow_waypoints(const SearchPlan& plan, FollowerState& state, const QuadState& drone,
                           const FollowerConfig& config, double cruise_speed, double gravity);

inline void validate(const Scenario& s) {
    if (!(s.area_width >= 0.0 && s.area_height >= 0.0))
        throw ConfigError("scenario area must be non-negative");
    if (!(s.search_altitude > 0.0)) throw ConfigError("scenario.search_altitude must be > 0");
    if (!(s.cruise_speed > 0.0)) throw ConfigError("scenario.cruise_speed must be > 0");
    for (const auto& v : s.victims)
        if (v.x < 0.0 || v.x > s.area_width || v.y < 0.0 || v.y > s.area_height)
            throw ConfigError("scenario victim outside the search area");
}

}  // namespace sar
