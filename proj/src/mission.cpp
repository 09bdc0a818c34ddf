#include "sar/mission.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sar {

SearchPlan plan_lawnmower(const Scenario& scenario, const CameraModel& cam, double overlap) {
    if (!(overlap >= 0.0 && overlap < 1.0)) throw ConfigError("mission.overlap must be in [0, 1)");

    SearchPlan plan;
    const double alt = scenario.search_altitude;
    plan.swath = 2.0 * alt * std::tan(cam.horizontal_half_fov()) * (1.0 - overlap);

    const double w = scenario.area_width;
    const double h = scenario.area_height;
    // Tolerance keeps an exact multiple from rounding up to an extra transect.
    const int transects = std::max(1, static_cast<int>(std::ceil(w / plan.swath - 1e-9)));

    // Evenly spaced transect x positions; spacing never exceeds the swath, so
    // footprints tile the full width.
    std::vector<double> xs;
    if (transects == 1) {
        xs.push_back(w / 2.0);
    } else {
        const double x0 = plan.swath / 2.0;
        const double x1 = w - plan.swath / 2.0;
        for (int i = 0; i < transects; ++i)
            xs.push_back(x0 + (x1 - x0) * i / (transects - 1));
    }

    for (int i = 0; i < transects; ++i) {
        const double y_near = (i % 2 == 0) ? 0.0 : h;
        const double y_far = (i % 2 == 0) ? h : 0.0;
        plan.waypoints.push_back({xs[i], y_near, alt});
        if (h > 0.0) plan.waypoints.push_back({xs[i], y_far, alt});
    }
    return plan;
}

std::optional<Vec2> geolocate(const Box& det, const QuadState& drone, const CameraModel& cam) {
    if (!(drone.position.z > 0.0)) return std::nullopt;

    const double f = cam.focal_px();
    const double du = (det.cx * cam.width - cam.width / 2.0) / f;
    const double dv = (det.cy * cam.height - cam.height / 2.0) / f;

    // Invert the camera basis used by project_victim: a camera-frame ray
    // (du, dv, 1) is (-dv, -du, -1) in the body frame.
    const Vec3 d_body{-dv, -du, -1.0};
    const Vec3 d_world = rotation(drone.attitude) * d_body;
    if (d_world.z >= -1e-9) return std::nullopt;  // parallel to or away from ground

    const double t = -drone.position.z / d_world.z;
    return Vec2{drone.position.x + t * d_world.x, drone.position.y + t * d_world.y};
}

MissionMetrics evaluate_mission(const MissionLog& log, const Scenario& scenario,
                                double assoc_radius) {
    if (!(assoc_radius > 0.0)) throw ConfigError("assoc_radius must be > 0");
    const double nan = std::numeric_limits<double>::quiet_NaN();

    MissionMetrics m;
    m.total_detections = static_cast<int>(log.entries.size());
    m.time_to_first.assign(scenario.victims.size(), nan);

    std::vector<char> taken(scenario.victims.size(), 0);
    double err_sum = 0.0;

    for (const auto& e : log.entries) {
        if (!e.geo) {
            ++m.false_positives;
            continue;
        }
        int nearest = -1;
        double nearest_d = std::numeric_limits<double>::infinity();
        for (std::size_t v = 0; v < scenario.victims.size(); ++v) {
            const double dx = e.geo->x - scenario.victims[v].x;
            const double dy = e.geo->y - scenario.victims[v].y;
            const double d = std::hypot(dx, dy);
            if (d < nearest_d) {
                nearest_d = d;
                nearest = static_cast<int>(v);
            }
        }
        if (nearest < 0 || nearest_d > assoc_radius) {
            ++m.false_positives;
        } else if (taken[nearest]) {
            ++m.false_positives;  // duplicate of an already-matched victim
        } else {
            taken[nearest] = 1;
            ++m.matched;
            err_sum += nearest_d;
            m.time_to_first[nearest] = e.t;
        }
    }

    m.recall = scenario.victims.empty()
                   ? nan
                   : static_cast<double>(m.matched) / static_cast<double>(scenario.victims.size());
    m.mean_loc_error = m.matched > 0 ? err_sum / m.matched : nan;
    return m;
}

MissionLog consolidate_log(const MissionLog& log, double merge_radius) {
    struct Report {
        MissionLogEntry entry;
        double sum_x = 0.0, sum_y = 0.0;
        int count = 0;
    };
    std::vector<Report> reports;

    for (const auto& e : log.entries) {
        if (!e.geo) continue;
        Report* hit = nullptr;
        double hit_d = merge_radius;
        for (auto& r : reports) {
            const double d = std::hypot(e.geo->x - r.entry.geo->x, e.geo->y - r.entry.geo->y);
            if (d <= hit_d) {
                hit_d = d;
                hit = &r;
            }
        }
        if (hit) {
            hit->sum_x += e.geo->x;
            hit->sum_y += e.geo->y;
            ++hit->count;
            hit->entry.geo = Vec2{hit->sum_x / hit->count, hit->sum_y / hit->count};
            hit->entry.conf = std::max(hit->entry.conf, e.conf);
        } else {
            Report r;
            r.entry = e;
            r.sum_x = e.geo->x;
            r.sum_y = e.geo->y;
            r.count = 1;
            reports.push_back(r);
        }
    }

    MissionLog out;
    for (const auto& r : reports) out.entries.push_back(r.entry);
    std::stable_sort(out.entries.begin(), out.entries.end(),
                     [](const MissionLogEntry& a, const MissionLogEntry& b) { return a.t < b.t; });
    return out;
}

Setpoints follow_waypoints(const SearchPlan& plan, FollowerState& state, const QuadState& drone,
                           const FollowerConfig& config, double cruise_speed, double gravity) {
    Setpoints sp;
    if (plan.waypoints.empty()) {
        sp.altitude_sp = drone.position.z;
        return sp;
    }

    const Vec3& wp = plan.waypoints[std::min(state.wp_index, plan.waypoints.size() - 1)];
    const double ex = wp.x - drone.position.x;
    const double ey = wp.y - drone.position.y;

    if (!state.done && std::hypot(ex, ey) < config.capture_radius) {
        if (state.wp_index + 1 < plan.waypoints.size())
            ++state.wp_index;
        else
            state.done = true;
    }

    // Position error -> capped velocity target -> acceleration -> tilt.
    double vx_des = config.pos_kp * ex;
    double vy_des = config.pos_kp * ey;
    const double v_norm = std::hypot(vx_des, vy_des);
    if (v_norm > cruise_speed) {
        vx_des *= cruise_speed / v_norm;
        vy_des *= cruise_speed / v_norm;
    }
    const double ax = config.vel_kp * gravity * (vx_des - drone.velocity.x);
    const double ay = config.vel_kp * gravity * (vy_des - drone.velocity.y);

    // Rotate the demand into the heading frame; +pitch accelerates along
    // body x, +roll along -body y.
    const double cy_ = std::cos(drone.attitude.yaw);
    const double sy_ = std::sin(drone.attitude.yaw);
    const double a_fwd = cy_ * ax + sy_ * ay;
    const double a_left = -sy_ * ax + cy_ * ay;

    sp.pitch_sp = std::clamp(a_fwd / gravity, -config.max_tilt, config.max_tilt);
    sp.roll_sp = std::clamp(-a_left / gravity, -config.max_tilt, config.max_tilt);
    sp.yaw_sp = 0.0;
    sp.altitude_sp = wp.z;
    return sp;
}

}  // namespace sar
