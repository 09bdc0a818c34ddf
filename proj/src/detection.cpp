#include "sar/detection.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sar {

std::vector<Box> generate_anchors(const std::vector<FeatureMapSpec>& specs) {
    std::vector<Box> anchors;
    for (const auto& spec : specs) {
        validate(spec);
        const double g = spec.grid;
        for (int i = 0; i < spec.grid; ++i) {
            for (int j = 0; j < spec.grid; ++j) {
                const double cx = (i + 0.5) / g;
                const double cy = (j + 0.5) / g;
                for (double s : spec.scales) {
                    for (double r : spec.aspect_ratios) {
                        const double sr = std::sqrt(r);
                        anchors.push_back({cx, cy, s * sr, s / sr});
                    }
                }
            }
        }
    }
    return anchors;
}

double iou(const Box& a, const Box& b) {
    const double ix = std::max(0.0, std::min(a.cx + a.w / 2, b.cx + b.w / 2) -
                                        std::max(a.cx - a.w / 2, b.cx - b.w / 2));
    const double iy = std::max(0.0, std::min(a.cy + a.h / 2, b.cy + b.h / 2) -
                                        std::max(a.cy - a.h / 2, b.cy - b.h / 2));
    const double inter = ix * iy;
    const double area_a = std::max(a.w, 0.0) * std::max(a.h, 0.0);
    const double area_b = std::max(b.w, 0.0) * std::max(b.h, 0.0);
    const double uni = area_a + area_b - inter;
    return uni > 0.0 ? inter / uni : 0.0;
}

LocOffsets encode(const Box& anchor, const Box& gt) {
    return {gt.cx - anchor.cx, gt.cy - anchor.cy, gt.w - anchor.w, gt.h - anchor.h};
}

Box decode(const Box& anchor, const LocOffsets& loc) {
    Box b{anchor.cx + loc.dcx, anchor.cy + loc.dcy, anchor.w + loc.dw, anchor.h + loc.dh};
    if (!(b.w > 0.0) || !(b.h > 0.0))
        throw std::domain_error("decode produced non-positive box dimensions");
    return b;
}

MatchResult match_anchors(const std::vector<Box>& anchors, const std::vector<Box>& ground_truth,
                          double iou_threshold) {
    MatchResult result;
    result.anchor_to_gt.assign(anchors.size(), -1);
    result.offsets.assign(anchors.size(), {});
    result.forced_anchor.assign(ground_truth.size(), -1);

    // Pass 1: force each ground truth onto its best free anchor.
    std::vector<char> forced(anchors.size(), 0);
    for (std::size_t g = 0; g < ground_truth.size(); ++g) {
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (forced[a]) continue;
            const double v = iou(anchors[a], ground_truth[g]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(a);
            }
        }
        if (best >= 0) {
            forced[best] = 1;
            result.forced_anchor[g] = best;
            result.anchor_to_gt[best] = static_cast<int>(g);
        }
    }

    // Pass 2: any remaining anchor above the threshold joins its best match.
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        if (forced[a]) continue;
        int best = -1;
        double best_iou = -1.0;
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            const double v = iou(anchors[a], ground_truth[g]);
            if (v > best_iou) {
                best_iou = v;
                best = static_cast<int>(g);
            }
        }
        if (best >= 0 && best_iou > iou_threshold) result.anchor_to_gt[a] = best;
    }

    for (std::size_t a = 0; a < anchors.size(); ++a)
        if (result.anchor_to_gt[a] >= 0)
            result.offsets[a] = encode(anchors[a], ground_truth[result.anchor_to_gt[a]]);

    return result;
}

std::vector<Detection> nms(std::vector<Detection> detections, double iou_threshold) {
    std::vector<std::size_t> order(detections.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return detections[a].conf > detections[b].conf;
    });

    std::vector<Detection> kept;
    std::vector<char> suppressed(detections.size(), 0);
    for (std::size_t oi = 0; oi < order.size(); ++oi) {
        const std::size_t i = order[oi];
        if (suppressed[i]) continue;
        kept.push_back(detections[i]);
        for (std::size_t oj = oi + 1; oj < order.size(); ++oj) {
            const std::size_t j = order[oj];
            if (!suppressed[j] && iou(detections[i].box, detections[j].box) > iou_threshold)
                suppressed[j] = 1;
        }
    }
    return kept;
}

std::optional<VictimProjection> project_victim(const Vec3& victim_pos, double victim_height,
                                               const QuadState& drone, const CameraModel& cam) {
    const Vec3 d_world = victim_pos - drone.position;
    const Vec3 d_body = rotation(drone.attitude).transpose() * d_world;

    // Camera basis in the body frame: image right = -y, image down = -x,
    // optical axis (into the scene) = -z.
    const double u = -d_body.y;
    const double v = -d_body.x;
    const double w = -d_body.z;
    if (w <= 1e-9) return std::nullopt;

    const double f = cam.focal_px();
    const double px = cam.width / 2.0 + f * u / w;
    const double py = cam.height / 2.0 + f * v / w;
    if (px < 0.0 || px > cam.width || py < 0.0 || py > cam.height) return std::nullopt;

    const double slant = d_world.norm();
    const double h_px = f * victim_height / slant;
    const double w_px = f * (0.5 * victim_height) / slant;

    VictimProjection proj;
    proj.box = {px / cam.width, py / cam.height, w_px / cam.width, h_px / cam.height};
    proj.apparent_px = h_px;
    proj.slant_m = slant;
    return proj;
}

double detection_probability(double apparent_px, double slant_m, const DetectorModel& model) {
    const double logistic =
        1.0 / (1.0 + std::exp(-(apparent_px - model.pixel_height_50) / model.steepness));

    // Unity inside [near, far]; linear rolloff over 20% of each limit outside.
    double range_factor = 1.0;
    if (slant_m < model.near_limit)
        range_factor = std::max(0.0, 1.0 - (model.near_limit - slant_m) / (0.2 * model.near_limit));
    else if (slant_m > model.far_limit)
        range_factor = std::max(0.0, 1.0 - (slant_m - model.far_limit) / (0.2 * model.far_limit));

    return model.p_max * logistic * range_factor;
}

std::vector<Detection> simulate_detection(const std::vector<VictimProjection>& victims,
                                          const DetectorModel& model, RngStream& rng) {
    std::vector<Detection> out;
    for (const auto& vp : victims) {
        const double p = detection_probability(vp.apparent_px, vp.slant_m, model);
        if (!rng.bernoulli(p)) continue;
        Detection d;
        d.box = vp.box;
        d.box.cx += rng.normal(0.0, model.center_jitter_sigma);
        d.box.cy += rng.normal(0.0, model.center_jitter_sigma);
        d.conf = std::clamp(0.8 + rng.normal(0.0, model.conf_noise_sigma), 0.0, 1.0);
        out.push_back(d);
    }

    if (rng.bernoulli(model.false_positive_rate)) {
        Detection fp;
        const double h = rng.uniform(0.03, 0.2);
        fp.box = {rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), h * rng.uniform(0.3, 0.5), h};
        fp.conf = rng.uniform(0.3, 0.8);
        out.push_back(fp);
    }
    return out;
}

std::vector<Detection> run_detector_frame(const std::vector<VictimProjection>& victims,
                                          const std::vector<Box>& anchors,
                                          const DetectorModel& model,
                                          const DetectionPipelineConfig& pipe, RngStream& rng) {
    const std::vector<Detection> raw = simulate_detection(victims, model, rng);
    if (raw.empty()) return {};

    std::vector<Box> raw_boxes;
    raw_boxes.reserve(raw.size());
    for (const auto& d : raw) raw_boxes.push_back(d.box);

    const MatchResult match = match_anchors(anchors, raw_boxes, pipe.match_iou);

    // Every positive anchor emits one decoded candidate, as a trained head
    // would; NMS then collapses the duplicates.
    std::vector<Detection> candidates;
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        const int g = match.anchor_to_gt[a];
        if (g < 0) continue;
        LocOffsets loc = match.offsets[a];
        loc.dcx += rng.normal(0.0, pipe.loc_noise_sigma);
        loc.dcy += rng.normal(0.0, pipe.loc_noise_sigma);
        loc.dw += rng.normal(0.0, pipe.loc_noise_sigma);
        loc.dh += rng.normal(0.0, pipe.loc_noise_sigma);
        loc.dw = std::max(loc.dw, 1e-4 - anchors[a].w);
        loc.dh = std::max(loc.dh, 1e-4 - anchors[a].h);

        Detection cand;
        cand.box = decode(anchors[a], loc);
        const double overlap = iou(anchors[a], raw_boxes[g]);
        cand.conf = std::clamp(raw[g].conf - pipe.conf_iou_penalty * (1.0 - overlap), 0.0, 1.0);
        candidates.push_back(cand);
    }
    return nms(std::move(candidates), pipe.nms_iou);
}

}  // namespace sar
