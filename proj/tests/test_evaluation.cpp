#include <doctest.h>

#include <cmath>

#include "fairway/core/error.hpp"
#include "fairway/core/rng.hpp"
#include "fairway/eval/metrics.hpp"
#include "fairway/model/fusion.hpp"
#include "fairway/synthgen/synthgen.hpp"

using namespace fairway;

namespace {

MaskU8 horizontal_water(int h, int w, int first_water_row) {
    MaskU8 m(h, w);
    for (int y = first_water_row; y < h; ++y)
        for (int x = 0; x < w; ++x) m.at(y, x) = 1;
    return m;
}

MaskU8 blob_mask(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    const double cy = rng.uniform(0.3, 0.7) * h;
    const double cx = rng.uniform(0.3, 0.7) * w;
    const double r0 = rng.uniform(0.15, 0.3) * std::min(h, w);
    const double a1 = rng.uniform(0.0, 0.35), p1 = rng.uniform(0.0, 6.28);
    MaskU8 m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dy = y - cy, dx = x - cx;
            const double rr = r0 * (1.0 + a1 * std::sin(2 * std::atan2(dy, dx) + p1));
            m.at(y, x) = (dy * dy + dx * dx <= rr * rr) ? 1 : 0;
        }
    return m;
}

} // namespace

TEST_CASE("selected zone: straight shoreline with band 10 spans rows 30..99") {
    const MaskU8 gt = horizontal_water(100, 100, 40);
    const SelectedZone zone = build_selected_zone(gt, 10);
    CHECK(zone.mask.count_ones() == 7000);
    for (int y = 0; y < 100; ++y)
        for (int x = 0; x < 100; x += 9)
            CHECK(static_cast<int>(zone.mask.at(y, x)) == (y >= 30 ? 1 : 0));
}

TEST_CASE("selected zone with band 0 is exactly the water region") {
    const MaskU8 gt = horizontal_water(60, 60, 25);
    const SelectedZone zone = build_selected_zone(gt, 0);
    CHECK(zone.mask == gt);
}

TEST_CASE("selected zone of an all-water mask is the whole image") {
    MaskU8 gt(30, 30);
    for (auto& v : gt.values) v = 1;
    const SelectedZone zone = build_selected_zone(gt, 0);
    CHECK(zone.mask.count_ones() == 900);
}

TEST_CASE("selected zone matches the exhaustive distance oracle on blobs") {
    for (std::uint64_t seed : {3ull, 5ull, 8ull}) {
        const MaskU8 gt = blob_mask(40, 52, seed);
        const ContourPolyline contour = mask_to_contour(gt);
        REQUIRE(!contour.empty());
        const SelectedZone zone = build_selected_zone(gt, 5);

        // Oracle: direct min over all segments for every pixel.
        std::vector<ContourIndex::Segment> segs;
        for (const auto& ch : contour.chains)
            for (std::size_t i = 1; i < ch.size(); ++i) segs.push_back({ch[i - 1], ch[i]});
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 52; ++x) {
                double best = 1e30;
                for (const auto& s : segs)
                    best = std::min(best, point_segment_distance(y, x, s.a, s.b));
                const bool expected = gt.at(y, x) || best <= 5.0;
                CHECK(static_cast<bool>(zone.mask.at(y, x)) == expected);
            }
    }
}

TEST_CASE("zone grows monotonically with the band width") {
    const MaskU8 gt = blob_mask(48, 48, 21);
    std::size_t prev = 0;
    for (int band : {0, 2, 5, 9, 14}) {
        const SelectedZone zone = build_selected_zone(gt, band);
        const std::size_t ones = zone.mask.count_ones();
        CHECK(ones >= prev);
        prev = ones;
    }
}

TEST_CASE("miou identities and analytic cases") {
    const MaskU8 gt = horizontal_water(100, 100, 50);
    SUBCASE("perfect prediction is 1.0 in both scopes") {
        const SelectedZone zone = build_selected_zone(gt, 10);
        CHECK(miou(gt, gt, nullptr) == doctest::Approx(1.0));
        CHECK(miou(gt, gt, &zone) == doctest::Approx(1.0));
    }
    SUBCASE("all-water prediction on half-water gt scores 0.25 full-scope") {
        MaskU8 pred(100, 100);
        for (auto& v : pred.values) v = 1;
        CHECK(miou(pred, gt, nullptr) == doctest::Approx(0.25));
    }
    SUBCASE("vacuous class counts as IoU 1") {
        MaskU8 all_water(10, 10);
        for (auto& v : all_water.values) v = 1;
        CHECK(miou(all_water, all_water, nullptr) == doctest::Approx(1.0));
    }
}

TEST_CASE("miou is symmetric under simultaneous class relabeling") {
    const MaskU8 gt = blob_mask(32, 32, 31);
    const MaskU8 pred = blob_mask(32, 32, 77);
    auto invert = [](const MaskU8& m) {
        MaskU8 out(m.height, m.width);
        for (std::size_t i = 0; i < m.values.size(); ++i) out.values[i] = 1 - m.values[i];
        return out;
    };
    CHECK(miou(pred, gt, nullptr) ==
          doctest::Approx(miou(invert(pred), invert(gt), nullptr)).epsilon(1e-12));
}

TEST_CASE("shoreline shift: selected-zone MIoU is strictly below full-scope") {
    const MaskU8 gt = horizontal_water(100, 100, 40);
    const MaskU8 pred = horizontal_water(100, 100, 42);
    const SelectedZone zone = build_selected_zone(gt, 10);

    // Exhaustive counting oracle.
    auto count_miou = [](const MaskU8& p, const MaskU8& g, const MaskU8* z) {
        std::size_t inter[2] = {0, 0}, uni[2] = {0, 0};
        for (int y = 0; y < g.height; ++y)
            for (int x = 0; x < g.width; ++x) {
                if (z && !z->at(y, x)) continue;
                for (int cls = 0; cls < 2; ++cls) {
                    const bool pp = p.at(y, x) == cls, gg = g.at(y, x) == cls;
                    inter[cls] += pp && gg;
                    uni[cls] += pp || gg;
                }
            }
        double s = 0;
        for (int cls = 0; cls < 2; ++cls)
            s += uni[cls] ? static_cast<double>(inter[cls]) / uni[cls] : 1.0;
        return s / 2;
    };
    const double full = miou(pred, gt, nullptr);
    const double sel = miou(pred, gt, &zone);
    CHECK(full == doctest::Approx(count_miou(pred, gt, nullptr)).epsilon(1e-12));
    CHECK(sel == doctest::Approx(count_miou(pred, gt, &zone.mask)).epsilon(1e-12));
    CHECK(sel < full);
}

TEST_CASE("band scaling: 32 px at 480 rows becomes 15 px at 224") {
    CHECK(scaled_band_px(32, 480) == 32);
    CHECK(scaled_band_px(32, 224) == 15);
}

TEST_CASE("evaluate_sequence with the gt oracle predictor is perfect") {
    SceneSpec spec;
    spec.seed = 9;
    spec.n_frames = 8;
    spec.height = spec.width = 64;
    spec.base_row = 32;
    spec.reflection_strength = 0.5;
    spec.texture_amplitude = 0.2;
    spec.jitter = {1.0, 0.3, 0.5};
    GeneratedSequence g = generate_sequence(spec, "oracleseq", Split::test);

    const FramePredictor oracle = [](const FrameSequence& s, int i) {
        return *s.frames[static_cast<std::size_t>(i)].mask;
    };
    EvalOptions opts;
    const SequenceMetrics m = evaluate_sequence_with(oracle, 4, g.sequence, opts);
    CHECK(m.frames_evaluated == 4);
    CHECK(m.miou_full == doctest::Approx(1.0));
    CHECK(m.miou_selected == doctest::Approx(1.0));
    CHECK(m.mean_contour_distance_px == doctest::Approx(0.0));
}

TEST_CASE("constant all-water predictor on a half-water sequence scores 0.25 full") {
    SceneSpec spec;
    spec.seed = 10;
    spec.n_frames = 6;
    spec.height = spec.width = 64;
    spec.base_row = 32;
    spec.jitter = {0.0, 0.0, 0.0};
    spec.reflection_strength = 0.0;
    spec.texture_amplitude = 0.0;
    GeneratedSequence g = generate_sequence(spec, "halfseq", Split::test);

    const FramePredictor all_water = [](const FrameSequence& s, int) {
        MaskU8 m(s.height(), s.width());
        for (auto& v : m.values) v = 1;
        return m;
    };
    EvalOptions opts;
    const SequenceMetrics m = evaluate_sequence_with(all_water, 4, g.sequence, opts);
    CHECK(m.miou_full == doctest::Approx(0.25));
}

TEST_CASE("unlabeled frames are skipped and counted") {
    SceneSpec spec;
    spec.seed = 11;
    spec.n_frames = 8;
    spec.height = spec.width = 48;
    spec.base_row = 24;
    GeneratedSequence g = generate_sequence(spec, "unlabeled", Split::test);
    g.sequence.frames[5].mask.reset();
    g.sequence.frames[6].mask.reset();

    const FramePredictor oracle = [](const FrameSequence& s, int i) {
        if (s.frames[static_cast<std::size_t>(i)].mask)
            return *s.frames[static_cast<std::size_t>(i)].mask;
        return MaskU8(s.height(), s.width());
    };
    EvalOptions opts;
    const SequenceMetrics m = evaluate_sequence_with(oracle, 4, g.sequence, opts);
    CHECK(m.frames_evaluated == 2);
    CHECK(m.frames_skipped_unlabeled == 2);
}

TEST_CASE("model evaluation is deterministic across runs") {
    SceneSpec spec;
    spec.seed = 12;
    spec.n_frames = 7;
    spec.height = spec.width = 64;
    spec.base_row = 30;
    spec.texture_amplitude = 0.3;
    spec.reflection_strength = 0.6;
    spec.jitter = {2.0, 0.5, 0.6};
    GeneratedSequence g = generate_sequence(spec, "modeleval", Split::test);

    ModelConfig cfg = ModelConfig::tiny_preset();
    cfg.feature_channels = 16;
    cfg.attention_heads = 2;
    cfg.validate();
    ParamStore params = build_model(cfg, 3);
    EvalOptions opts;
    opts.eval_seed = 17;
    std::vector<FrameMetrics> frames_a, frames_b;
    const SequenceMetrics a = evaluate_sequence(cfg, params, g.sequence, opts, &frames_a);
    const SequenceMetrics b = evaluate_sequence(cfg, params, g.sequence, opts, &frames_b);
    CHECK(a.miou_full == b.miou_full);
    CHECK(a.miou_selected == b.miou_selected);
    CHECK(a.mean_contour_distance_px == b.mean_contour_distance_px);
    REQUIRE(frames_a.size() == frames_b.size());
    for (std::size_t i = 0; i < frames_a.size(); ++i)
        CHECK(frames_a[i].miou_selected == frames_b[i].miou_selected);

    // Report JSON round trip.
    EvalReport report;
    report.per_sequence["modeleval"] = a;
    report.aggregate = a;
    report.band_width_px = 4;
    report.condition.drop = {1, 7};
    report.condition.backward = true;
    write_eval_report("tmp_eval_report.json", report);
    const EvalReport back = read_eval_report("tmp_eval_report.json");
    CHECK(back.condition.backward);
    CHECK(back.condition.drop.den == 7);
    CHECK(back.per_sequence.at("modeleval").miou_full == doctest::Approx(a.miou_full));
}

TEST_CASE("miou validates shapes and binarity") {
    const MaskU8 a = horizontal_water(10, 10, 5);
    const MaskU8 b = horizontal_water(10, 12, 5);
    CHECK_THROWS_AS(miou(a, b, nullptr), ValidationError);
    MaskU8 bad = a;
    bad.values[0] = 3;
    CHECK_THROWS_AS(miou(bad, a, nullptr), ValidationError);
}
