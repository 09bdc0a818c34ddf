#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sar/detection.hpp"
#include "sar/rng.hpp"

using namespace sar;

// ---- independent references, kept free of the implementation's structure ----
namespace oracle {

double iou_ref(const Box& a, const Box& b) {
    const double ax0 = a.cx - a.w / 2, ax1 = a.cx + a.w / 2;
    const double ay0 = a.cy - a.h / 2, ay1 = a.cy + a.h / 2;
    const double bx0 = b.cx - b.w / 2, bx1 = b.cx + b.w / 2;
    const double by0 = b.cy - b.h / 2, by1 = b.cy + b.h / 2;
    const double iw = std::min(ax1, bx1) - std::max(ax0, bx0);
    const double ih = std::min(ay1, by1) - std::max(ay0, by0);
    if (iw <= 0 || ih <= 0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.w * a.h + b.w * b.h - inter);
}

// Declarative NMS: a detection survives iff no higher-ranked survivor
// overlaps it above the threshold. Rank = conf desc, ties by input order.
std::vector<Detection> nms_ref(const std::vector<Detection>& dets, double thr) {
    std::vector<std::size_t> rank(dets.size());
    for (std::size_t i = 0; i < rank.size(); ++i) rank[i] = i;
    std::stable_sort(rank.begin(), rank.end(),
                     [&](std::size_t a, std::size_t b) { return dets[a].conf > dets[b].conf; });
    std::vector<std::size_t> survivors;
    for (std::size_t i : rank) {
        bool killed = false;
        for (std::size_t s : survivors)
            if (iou_ref(dets[s].box, dets[i].box) > thr) killed = true;
        if (!killed) survivors.push_back(i);
    }
    std::vector<Detection> out;
    for (std::size_t s : survivors) out.push_back(dets[s]);
    return out;
}

// Exhaustive matcher mirroring the stated rules with plain scans.
std::vector<int> match_ref(const std::vector<Box>& anchors, const std::vector<Box>& gts,
                           double thr) {
    std::vector<int> label(anchors.size(), -1);
    std::vector<char> is_forced(anchors.size(), 0);
    for (std::size_t g = 0; g < gts.size(); ++g) {
        double best = -1.0;
        int best_a = -1;
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (is_forced[a]) continue;
            const double v = iou_ref(anchors[a], gts[g]);
            if (v > best) {
                best = v;
                best_a = static_cast<int>(a);
            }
        }
        if (best_a >= 0) {
            is_forced[best_a] = 1;
            label[best_a] = static_cast<int>(g);
        }
    }
    for (std::size_t a = 0; a < anchors.size(); ++a) {
        if (is_forced[a]) continue;
        double best = -1.0;
        int best_g = -1;
        for (std::size_t g = 0; g < gts.size(); ++g) {
            const double v = iou_ref(anchors[a], gts[g]);
            if (v > best) {
                best = v;
                best_g = static_cast<int>(g);
            }
        }
        if (best_g >= 0 && best > thr) label[a] = best_g;
    }
    return label;
}

}  // namespace oracle

namespace {

Box random_box(RngStream& rng) {
    return {rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), rng.uniform(0.02, 0.5),
            rng.uniform(0.02, 0.5)};
}

}  // namespace

TEST_CASE("anchor counts") {
    CHECK(generate_anchors({{8, {0.2}, {1.0}}}).size() == 64);
    CHECK(generate_anchors({{8, {0.1, 0.15}, {1.0, 0.5}}, {4, {0.25, 0.4}, {1.0, 0.5}}}).size() ==
          320);
}

TEST_CASE("anchor count formula holds for arbitrary pyramids") {
    RngStream rng(2);
    for (int t = 0; t < 20; ++t) {
        std::vector<FeatureMapSpec> specs;
        std::size_t expected = 0;
        const int n_maps = 1 + static_cast<int>(rng.uniform_index(3));
        for (int m = 0; m < n_maps; ++m) {
            FeatureMapSpec s;
            s.grid = 1 + static_cast<int>(rng.uniform_index(9));
            for (std::size_t i = 0; i <= rng.uniform_index(3); ++i)
                s.scales.push_back(rng.uniform(0.05, 0.5));
            for (std::size_t i = 0; i <= rng.uniform_index(3); ++i)
                s.aspect_ratios.push_back(rng.uniform(0.3, 3.0));
            expected += static_cast<std::size_t>(s.grid) * s.grid * s.scales.size() *
                        s.aspect_ratios.size();
            specs.push_back(s);
        }
        CHECK(generate_anchors(specs).size() == expected);
    }
}

TEST_CASE("anchor placement and shape") {
    const auto anchors = generate_anchors({{4, {0.2}, {1.0}}});
    CHECK(anchors[0].cx == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(anchors[0].cy == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(anchors[0].w == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(anchors[0].h == doctest::Approx(0.2).epsilon(1e-15));

    // Ordering: cells row-major, then scale, then ratio.
    const auto multi = generate_anchors({{2, {0.1, 0.2}, {1.0, 4.0}}});
    CHECK(multi.size() == 16);
    CHECK(multi[0].w == doctest::Approx(0.1));       // s0 r0
    CHECK(multi[1].w == doctest::Approx(0.2));       // s0 r1: w = 0.1*sqrt(4)
    CHECK(multi[1].h == doctest::Approx(0.05));
    CHECK(multi[2].w == doctest::Approx(0.2));       // s1 r0
    CHECK(multi[4].cy == doctest::Approx(0.75));     // next cell
}

TEST_CASE("iou identities") {
    const Box a{0.5, 0.5, 1.0, 1.0};
    CHECK(iou(a, a) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(iou(a, Box{5.0, 5.0, 1.0, 1.0}) == 0.0);
    CHECK(iou(a, Box{1.0, 0.5, 1.0, 1.0}) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("iou is symmetric, bounded, and matches the reference") {
    RngStream rng(5);
    for (int i = 0; i < 2000; ++i) {
        const Box a = random_box(rng), b = random_box(rng);
        const double v = iou(a, b);
        CHECK(v == doctest::Approx(iou(b, a)).epsilon(1e-14));
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v == doctest::Approx(oracle::iou_ref(a, b)).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("encode/decode are exact inverses") {
    const Box anchor{0.5, 0.5, 0.2, 0.2};
    const Box same = decode(anchor, LocOffsets{});
    CHECK(same.cx == 0.5);
    CHECK(same.w == 0.2);

    const Box moved = decode(anchor, LocOffsets{0.1, 0.0, -0.05, 0.05});
    CHECK(moved.cx == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(moved.cy == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(moved.w == doctest::Approx(0.15).epsilon(1e-15));
    CHECK(moved.h == doctest::Approx(0.25).epsilon(1e-15));

    RngStream rng(7);
    for (int i = 0; i < 1000; ++i) {
        const Box a = random_box(rng), gt = random_box(rng);
        const Box back = decode(a, encode(a, gt));
        CHECK(back.cx == doctest::Approx(gt.cx).scale(1.0).epsilon(1e-12));
        CHECK(back.cy == doctest::Approx(gt.cy).scale(1.0).epsilon(1e-12));
        CHECK(back.w == doctest::Approx(gt.w).scale(1.0).epsilon(1e-12));
        CHECK(back.h == doctest::Approx(gt.h).scale(1.0).epsilon(1e-12));
    }
}

TEST_CASE("decode rejects non-positive dimensions") {
    CHECK_THROWS_AS(decode(Box{0.5, 0.5, 0.2, 0.2}, LocOffsets{0, 0, -0.2, 0}),
                    std::domain_error);
}

TEST_CASE("exact ground truth claims its anchor with zero offsets") {
    const auto anchors = generate_anchors({{4, {0.2}, {1.0}}});
    const Box gt = anchors[5];
    const MatchResult r = match_anchors(anchors, {gt}, 0.5);
    CHECK(r.forced_anchor[0] == 5);
    CHECK(r.anchor_to_gt[5] == 0);
    CHECK(r.offsets[5].dcx == 0.0);
    CHECK(r.offsets[5].dw == 0.0);
}

TEST_CASE("no ground truth means no positives") {
    const auto anchors = generate_anchors({{4, {0.2}, {1.0}}});
    const MatchResult r = match_anchors(anchors, {}, 0.5);
    CHECK(r.positives() == 0);
    CHECK(r.forced_anchor.empty());
}

TEST_CASE("matching equals the exhaustive oracle") {
    const auto anchors =
        generate_anchors({{8, {0.1, 0.15}, {1.0, 0.5}}, {4, {0.25, 0.4}, {1.0, 0.5}}});
    RngStream rng(11);
    for (int t = 0; t < 200; ++t) {
        std::vector<Box> gts;
        const std::size_t n = 1 + rng.uniform_index(3);
        for (std::size_t i = 0; i < n; ++i) gts.push_back(random_box(rng));

        const MatchResult r = match_anchors(anchors, gts, 0.5);
        const std::vector<int> ref = oracle::match_ref(anchors, gts, 0.5);
        REQUIRE(r.anchor_to_gt == ref);

        // Every ground truth keeps at least one positive anchor.
        for (std::size_t g = 0; g < gts.size(); ++g) {
            REQUIRE(r.forced_anchor[g] >= 0);
            CHECK(r.anchor_to_gt[r.forced_anchor[g]] == static_cast<int>(g));
        }
        // Offsets decode back to the assigned ground truth.
        for (std::size_t a = 0; a < anchors.size(); ++a) {
            if (r.anchor_to_gt[a] < 0) continue;
            const Box back = decode(anchors[a], r.offsets[a]);
            const Box& gt = gts[r.anchor_to_gt[a]];
            CHECK(back.cx == doctest::Approx(gt.cx).scale(1.0).epsilon(1e-12));
            CHECK(back.h == doctest::Approx(gt.h).scale(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("nms basics") {
    const Detection d{{0.5, 0.5, 0.2, 0.2}, 0.7};
    const auto single = nms({d}, 0.45);
    REQUIRE(single.size() == 1);
    CHECK(single[0].conf == 0.7);

    const auto two = nms({{{0.5, 0.5, 0.2, 0.2}, 0.8}, {{0.5, 0.5, 0.2, 0.2}, 0.9}}, 0.45);
    REQUIRE(two.size() == 1);
    CHECK(two[0].conf == 0.9);
}

TEST_CASE("nms equals the declarative reference and is an IoU anti-chain") {
    RngStream rng(13);
    for (int t = 0; t < 300; ++t) {
        std::vector<Detection> dets;
        const std::size_t n = 1 + rng.uniform_index(50);
        for (std::size_t i = 0; i < n; ++i)
            dets.push_back({random_box(rng), rng.uniform(0.0, 1.0)});
        const double thr = rng.uniform(0.2, 0.7);

        const auto got = nms(dets, thr);
        const auto ref = oracle::nms_ref(dets, thr);
        REQUIRE(got.size() == ref.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].conf == ref[i].conf);
            CHECK(got[i].box.cx == ref[i].box.cx);
        }
        for (std::size_t i = 0; i < got.size(); ++i)
            for (std::size_t j = i + 1; j < got.size(); ++j)
                CHECK(iou(got[i].box, got[j].box) <= thr);
    }
}

TEST_CASE("victim below a level drone projects to the frame center") {
    QuadState drone;
    drone.position = {10.0, 20.0, 8.0};
    const CameraModel cam;
    const auto proj = project_victim({10.0, 20.0, 0.0}, 1.7, drone, cam);
    REQUIRE(proj.has_value());
    CHECK(proj->box.cx == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(proj->box.cy == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(proj->slant_m == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("pinhole apparent height at 10 m") {
    QuadState drone;
    drone.position = {0.0, 0.0, 10.0};
    const CameraModel cam;  // 640x480, 60 deg vertical fov
    CHECK(cam.focal_px() == doctest::Approx(415.69219381653056).epsilon(1e-12));
    const auto proj = project_victim({0.0, 0.0, 0.0}, 1.7, drone, cam);
    REQUIRE(proj.has_value());
    CHECK(proj->apparent_px == doctest::Approx(70.66767294881019).epsilon(1e-12));
}

TEST_CASE("far-off victim is off frame") {
    QuadState drone;
    drone.position = {0.0, 0.0, 10.0};
    CHECK_FALSE(project_victim({100.0, 0.0, 0.0}, 1.7, drone, CameraModel{}).has_value());
}

TEST_CASE("apparent height decreases with slant distance") {
    const CameraModel cam;
    double prev = 1e9;
    for (double alt = 2.0; alt < 40.0; alt += 1.0) {
        QuadState drone;
        drone.position = {0.0, 0.0, alt};
        const auto proj = project_victim({0.0, 0.0, 0.0}, 1.7, drone, cam);
        REQUIRE(proj.has_value());
        CHECK(proj->apparent_px < prev);
        prev = proj->apparent_px;
    }
}

TEST_CASE("detection probability is calibrated to the 1-20 m band") {
    const DetectorModel model;
    const CameraModel cam;
    auto p_at = [&](double slant) {
        return detection_probability(cam.focal_px() * 1.7 / slant, slant, model);
    };
    CHECK(p_at(10.0) == doctest::Approx(0.9797892904468908).epsilon(1e-12));
    CHECK(p_at(10.0) > 0.9);
    CHECK(p_at(2.0) > 0.9);
    CHECK(p_at(19.0) > 0.9);
    CHECK(p_at(30.0) < 0.2);
    CHECK(p_at(30.0) == 0.0);  // past the far rolloff entirely
    CHECK(p_at(26.0) < 0.2);
}

TEST_CASE("p_max zero silences true detections") {
    DetectorModel model;
    model.p_max = 0.0;
    model.false_positive_rate = 0.0;
    RngStream rng(17);
    VictimProjection vp{{0.5, 0.5, 0.1, 0.2}, 200.0, 5.0};
    for (int i = 0; i < 200; ++i) CHECK(simulate_detection({vp}, model, rng).empty());
}

TEST_CASE("certain detection reports the true box when noise is off") {
    DetectorModel model;
    model.p_max = 1.0;
    model.pixel_height_50 = 1.0;
    model.conf_noise_sigma = 0.0;
    model.center_jitter_sigma = 0.0;
    model.false_positive_rate = 0.0;
    RngStream rng(19);
    VictimProjection vp{{0.4, 0.6, 0.1, 0.2}, 300.0, 5.0};
    const auto dets = simulate_detection({vp}, model, rng);
    REQUIRE(dets.size() == 1);
    CHECK(dets[0].conf == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(dets[0].box.cx == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(dets[0].box.h == doctest::Approx(0.2).epsilon(1e-15));
}

TEST_CASE("frame pipeline produces a deduplicated detection per victim") {
    const auto anchors =
        generate_anchors({{8, {0.1, 0.15}, {1.0, 0.5}}, {4, {0.25, 0.4}, {1.0, 0.5}}});
    DetectorModel model;
    model.p_max = 1.0;
    model.pixel_height_50 = 1.0;
    model.conf_noise_sigma = 0.0;
    model.center_jitter_sigma = 0.0;
    model.false_positive_rate = 0.0;
    DetectionPipelineConfig pipe;
    pipe.loc_noise_sigma = 0.0;

    RngStream rng(23);
    VictimProjection vp{{0.52, 0.48, 0.07, 0.14}, 300.0, 5.0};
    const auto out = run_detector_frame({vp}, anchors, model, pipe, rng);
    REQUIRE(out.size() >= 1);
    // With zero loc noise every candidate decodes to the raw box; NMS keeps one.
    CHECK(out.size() == 1);
    CHECK(out[0].box.cx == doctest::Approx(0.52).epsilon(1e-12));
    for (std::size_t i = 0; i < out.size(); ++i)
        for (std::size_t j = i + 1; j < out.size(); ++j)
            CHECK(iou(out[i].box, out[j].box) <= pipe.nms_iou);
}
