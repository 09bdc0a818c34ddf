#pragma once

#include <optional>
#include <vector>

#include "sar/dynamics.hpp"
#include "sar/rng.hpp"

namespace sar {

// Axis-aligned box in normalized image coordinates. Centers may leave [0,1];
// only IoU against the frame clips.
struct Box {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
};

struct Detection {
    Box box;
    double conf = 0.0;  // [0, 1]
};

// One feature map of the anchor pyramid.
struct FeatureMapSpec {
    int grid = 1;                        // cells per side
    std::vector<double> scales;          // box size as fraction of image
    std::vector<double> aspect_ratios;   // w / h
};

struct LocOffsets {
    double dcx = 0.0;
    double dcy = 0.0;
    double dw = 0.0;
    double dh = 0.0;
};

struct MatchResult {
    std::vector<int> anchor_to_gt;    // per anchor: ground-truth index or -1
    std::vector<LocOffsets> offsets;  // valid where anchor_to_gt >= 0
    std::vector<int> forced_anchor;   // per ground truth: its best-IoU anchor

    int positives() const {
        int n = 0;
        for (int g : anchor_to_gt) n += (g >= 0);
        return n;
    }
};

// Downward-mounted pinhole camera.
struct CameraModel {
    int width = 640;    // px
    int height = 480;   // px
    double vertical_fov = deg2rad(60.0);  // rad

    double focal_px() const { return (height / 2.0) / std::tan(vertical_fov / 2.0); }
    double horizontal_half_fov() const {
        return std::atan(static_cast<double>(width) / height * std::tan(vertical_fov / 2.0));
    }
};

// Stochastic stand-in for the trained network: detectability is a logistic
// in apparent pixel height, gated to the useful slant-range band.
struct DetectorModel {
    double p_max = 0.98;            // peak detection probability
    double pixel_height_50 = 20.0;  // apparent height (px) at half detectability
    double steepness = 6.0;         // logistic slope, px
    double conf_noise_sigma = 0.05;
    double near_limit = 1.0;        // m
    double far_limit = 20.0;        // m
    double center_jitter_sigma = 0.004;  // normalized image units
    double false_positive_rate = 0.005;  // per frame
};

struct DetectionPipelineConfig {
    double match_iou = 0.5;
    double nms_iou = 0.45;
    double loc_noise_sigma = 0.004;  // on the per-anchor offsets
    double conf_iou_penalty = 0.1;   // candidate conf drop per unit (1 - IoU)
};

// A victim the camera can currently see.
struct VictimProjection {
    Box box;                 // normalized
    double apparent_px = 0;  // pixel height (focal * height / slant)
    double slant_m = 0.0;    // camera-to-victim distance
};

// Anchors in deterministic order: map, then row-major cells, then scale,
// then ratio. A cell (i, j) is centered at ((i+0.5)/grid, (j+0.5)/grid);
// anchor w = s*sqrt(r), h = s/sqrt(r).
std::vector<Box> generate_anchors(const std::vector<FeatureMapSpec>& specs);

double iou(const Box& a, const Box& b);

// Every ground truth gets its best-IoU anchor (forced, ties to the lowest
// anchor index, previously forced anchors excluded). Any other anchor whose
// best IoU exceeds the threshold is positive for that ground truth.
MatchResult match_anchors(const std::vector<Box>& anchors, const std::vector<Box>& ground_truth,
                          double iou_threshold);

// Plain componentwise offsets; decode is the exact inverse of encode.
LocOffsets encode(const Box& anchor, const Box& gt);
Box decode(const Box& anchor, const LocOffsets& loc);  // throws on w/h <= 0

// Greedy non-max suppression: keep by descending conf (ties by input order),
// suppress anything overlapping a kept box above the threshold.
std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold);

// Projects a victim (upright footprint height_m x 0.5*height_m on the ground
// plane) through the body-mounted downward camera. Empty when the center
// falls outside the frame or behind the camera.
std::optional<VictimProjection> project_victim(const Vec3& victim_pos, double victim_height,
                                               const QuadState& drone, const CameraModel& cam);

double detection_probability(double apparent_px, double slant_m, const DetectorModel& model);

// Per-victim Bernoulli detections with jittered centers and noisy conf, plus
// occasional false positives.
std::vector<Detection> simulate_detection(const std::vector<VictimProjection>& victims,
                                          const DetectorModel& model, RngStream& rng);

// Full per-frame pipeline: stochastic detections fan out to every matched
// anchor as decoded candidates, and NMS prunes the duplicates back down.
std::vector<Detection> run_detector_frame(const std::vector<VictimProjection>& victims,
                                          const std::vector<Box>& anchors,
                                          const DetectorModel& model,
                                          const DetectionPipelineConfig& pipe, RngStream& rng);

inline void validate(const CameraModel& c) {
    if (!(c.vertical_fov > 0.0 && c.vertical_fov < kPi))
        throw ConfigError("camera.vertical_fov must be in (0, pi)");
    if (c.width <= 0 || c.height <= 0) throw ConfigError("camera resolution must be positive");
}

inline void validate(const DetectorModel& d) {
    if (!(d.p_max > 0.0 && d.p_max <= 1.0)) throw ConfigError("detector.p_max must be in (0, 1]");
    if (!(d.pixel_height_50 > 0.0)) throw ConfigError("detector.pixel_height_50 must be > 0");
    if (!(d.steepness > 0.0)) throw ConfigError("detector.steepness must be > 0");
    if (!(d.near_limit > 0.0 && d.near_limit < d.far_limit))
        throw ConfigError("detector range limits must satisfy 0 < near < far");
    if (d.false_positive_rate < 0.0 || d.false_positive_rate > 1.0)
        throw ConfigError("detector.false_positive_rate must be in [0, 1]");
}

inline void validate(const FeatureMapSpec& s) {
    if (s.grid < 1) throw ConfigError("anchor map grid must be >= 1");
    if (s.scales.empty() || s.aspect_ratios.empty())
        throw ConfigError("anchor map needs at least one scale and one ratio");
    for (double v : s.scales)
        if (!(v > 0.0)) throw ConfigError("anchor scales must be > 0");
    for (double v : s.aspect_ratios)
        if (!(v > 0.0)) throw ConfigError("anchor ratios must be > 0");
}

}  // namespace sar
