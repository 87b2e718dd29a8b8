#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "fairway/core/error.hpp"
#include "fairway/harness/picks.hpp"
#include "fairway/harness/train.hpp"
#include "fairway/synthgen/synthgen.hpp"

using namespace fairway;
namespace fs = std::filesystem;

namespace {

// Small, fast waterway dataset for trainer tests.
std::vector<FrameSequence> micro_dataset(int n_train, int n_test, int frames, int hw = 64) {
    std::vector<FrameSequence> out;
    int idx = 0;
    auto add = [&](Split split) {
        SceneSpec spec;
        spec.seed = 100 + static_cast<std::uint64_t>(idx);
        spec.n_frames = frames;
        spec.height = spec.width = hw;
        spec.base_row = hw / 2.0 + (idx % 3) * 2.0;
        spec.reflection_strength = 0.7;
        spec.texture_amplitude = 0.3;
        spec.jitter = {2.0, 0.5, 0.7};
        spec.harmonics.push_back({2.0, 1.0, 0.3, 0.01});
        GeneratedSequence g =
            generate_sequence(spec, "micro" + std::to_string(idx), split);
        out.push_back(std::move(g.sequence));
        ++idx;
    };
    for (int i = 0; i < n_train; ++i) add(Split::train);
    for (int i = 0; i < n_test; ++i) add(Split::test);
    return out;
}

ModelConfig fast_config() {
    ModelConfig cfg = ModelConfig::tiny_preset();
    cfg.feature_channels = 16;
    cfg.attention_heads = 2;
    cfg.validate();
    return cfg;
}

} // namespace

TEST_CASE("pick_frames: pool exhaustion returns the whole window") {
    Rng rng(1);
    const FramePick pick = pick_frames(10, 4, 4, PickMode::random_k_of_m, rng);
    CHECK(pick.indices == std::vector<int>{9, 8, 7, 6});
}

TEST_CASE("pick_frames: fixed_last_k takes the most recent frames") {
    Rng rng(2);
    const FramePick pick = pick_frames(10, 4, 2, PickMode::fixed_last_k, rng);
    CHECK(pick.indices == std::vector<int>{9, 8});
}

TEST_CASE("pick_frames: uniform over the 6 unordered pairs") {
    Rng rng(3);
    std::map<std::pair<int, int>, int> counts;
    const int draws = 100000;
    for (int i = 0; i < draws; ++i) {
        const FramePick pick = pick_frames(10, 4, 2, PickMode::random_k_of_m, rng);
        REQUIRE(pick.indices.size() == 2);
        CHECK(pick.indices[0] > pick.indices[1]);
        CHECK(pick.indices[0] < 10);
        CHECK(pick.indices[1] >= 6);
        counts[{pick.indices[0], pick.indices[1]}]++;
    }
    REQUIRE(counts.size() == 6);
    for (const auto& [pair, count] : counts) {
        const double freq = static_cast<double>(count) / draws;
        CHECK(std::fabs(freq - 1.0 / 6.0) < 0.01 * (1.0 / 6.0) + 0.004);
    }
}

TEST_CASE("pick_frames rejects context-only frames and bad k") {
    Rng rng(4);
    CHECK_THROWS_AS(pick_frames(3, 4, 2, PickMode::random_k_of_m, rng), ValidationError);
    CHECK_THROWS_AS(pick_frames(10, 4, 5, PickMode::random_k_of_m, rng), ValidationError);
}

TEST_CASE("eval picks are reproducible functions of (seed, id, index)") {
    const FramePick a = pick_frames_eval(12, 4, 2, PickMode::random_k_of_m, 7, "seqA");
    const FramePick b = pick_frames_eval(12, 4, 2, PickMode::random_k_of_m, 7, "seqA");
    CHECK(a.indices == b.indices);
    const FramePick c = pick_frames_eval(12, 4, 2, PickMode::random_k_of_m, 8, "seqA");
    const FramePick d = pick_frames_eval(12, 4, 2, PickMode::random_k_of_m, 7, "seqB");
    const bool differs = (c.indices != a.indices) || (d.indices != a.indices);
    CHECK(differs);
}

TEST_CASE("apply_condition: drop 1/7 keeps 12 of 14 frames, timestamps gap") {
    auto dataset = micro_dataset(0, 1, 14, 32);
    const FrameSequence& seq = dataset[0];
    const FrameSequence dropped = apply_condition(seq, {false, {1, 7}, false, 0});
    REQUIRE(dropped.frames.size() == 12);
    std::vector<int> ts;
    for (const auto& f : dropped.frames) ts.push_back(f.timestamp);
    CHECK(ts == std::vector<int>{0, 1, 2, 3, 4, 5, 7, 8, 9, 10, 11, 12});
}

TEST_CASE("apply_condition: backward reverses order and reassigns timestamps") {
    auto dataset = micro_dataset(0, 1, 5, 32);
    const FrameSequence& seq = dataset[0];
    const FrameSequence rev = apply_condition(seq, {true, {0, 1}, false, 0});
    REQUIRE(rev.frames.size() == 5);
    for (int i = 0; i < 5; ++i) {
        CHECK(rev.frames[static_cast<std::size_t>(i)].timestamp == i);
        CHECK(rev.frames[static_cast<std::size_t>(i)].image.pixels ==
              seq.frames[static_cast<std::size_t>(4 - i)].image.pixels);
    }
}

TEST_CASE("apply_condition identity: no drops, forward") {
    auto dataset = micro_dataset(0, 1, 6, 32);
    const FrameSequence& seq = dataset[0];
    const FrameSequence same = apply_condition(seq, {false, {0, 1}, false, 0});
    REQUIRE(same.frames.size() == seq.frames.size());
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        CHECK(same.frames[i].timestamp == seq.frames[i].timestamp);
        CHECK(same.frames[i].image.pixels == seq.frames[i].image.pixels);
        CHECK(same.frames[i].mask->values == seq.frames[i].mask->values);
    }
}

TEST_CASE("train: one iteration with lr 0 leaves parameters at initialization") {
    auto dataset = micro_dataset(1, 0, 8);
    const ModelConfig cfg = fast_config();
    TrainConfig tcfg;
    tcfg.iterations = 1;
    tcfg.learning_rate = 0.0;
    tcfg.batch_size = 1;
    tcfg.seed = 11;
    const TrainResult result = train(cfg, tcfg, dataset);
    const ParamStore fresh = build_model(cfg, tcfg.seed);
    REQUIRE(result.params.size() == fresh.size());
    for (std::size_t i = 0; i < fresh.entries().size(); ++i) {
        const auto& a = result.params.entries()[i].var.value();
        const auto& b = fresh.entries()[i].var.value();
        for (std::size_t k = 0; k < a.numel(); ++k) CHECK(a[k] == b[k]);
    }
}

TEST_CASE("train: loss drops over a short run on the micro benchmark") {
    auto dataset = micro_dataset(2, 0, 10);
    const ModelConfig cfg = fast_config();
    TrainConfig tcfg;
    tcfg.iterations = 80;
    tcfg.learning_rate = 0.005;
    tcfg.batch_size = 2;
    tcfg.seed = 5;
    const TrainResult result = train(cfg, tcfg, dataset);
    REQUIRE(static_cast<int>(result.log.size()) == 80);
    auto avg = [&](int from, int to) {
        double s = 0.0;
        for (int i = from; i < to; ++i) s += result.log[static_cast<std::size_t>(i)].total;
        return s / (to - from);
    };
    CHECK(avg(75, 80) < avg(0, 5));
    for (const auto& e : result.log) {
        CHECK(std::isfinite(e.total));
        CHECK(e.total >= 0.0);
        CHECK(e.total ==
              doctest::Approx(e.l_ce + e.l_dice + e.l_con).epsilon(1e-9));
    }
}

TEST_CASE("train: checkpoints are byte-identical across reruns of one seed") {
    auto dataset = micro_dataset(2, 0, 8);
    const ModelConfig cfg = fast_config();
    TrainConfig tcfg;
    tcfg.iterations = 5;
    tcfg.batch_size = 2;
    tcfg.seed = 21;

    fs::create_directories("tmp_harness");
    std::ostringstream log_a, log_b;
    const TrainResult a = train(cfg, tcfg, dataset, &log_a);
    const TrainResult b = train(cfg, tcfg, dataset, &log_b);
    save_checkpoint("tmp_harness/a.fwck", cfg, a.params);
    save_checkpoint("tmp_harness/b.fwck", cfg, b.params);
    std::ifstream fa("tmp_harness/a.fwck", std::ios::binary), fb("tmp_harness/b.fwck", std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(fa)), {});
    const std::string sb((std::istreambuf_iterator<char>(fb)), {});
    CHECK(sa == sb);
    CHECK(log_a.str() == log_b.str());
    CHECK(log_a.str().find("\"iteration\":1") != std::string::npos);
}

TEST_CASE("train requires a train split and labeled frames") {
    auto dataset = micro_dataset(0, 1, 8);
    const ModelConfig cfg = fast_config();
    TrainConfig tcfg;
    tcfg.iterations = 1;
    CHECK_THROWS_AS(train(cfg, tcfg, dataset), ValidationError);
}

TEST_CASE("train aborts with NumericError when the loss blows up") {
    auto dataset = micro_dataset(1, 0, 8);
    const ModelConfig cfg = fast_config();
    TrainConfig tcfg;
    tcfg.iterations = 40;
    tcfg.learning_rate = 1e14;
    tcfg.batch_size = 1;
    tcfg.seed = 2;
    CHECK_THROWS_AS(train(cfg, tcfg, dataset), NumericError);
}

TEST_CASE("run_robustness: 4 conditions per test sequence; identity row matches eval") {
    auto dataset = micro_dataset(1, 1, 9);
    const ModelConfig cfg = fast_config();
    const ParamStore params = build_model(cfg, 3);
    EvalOptions opts;
    opts.eval_seed = 4;
    const RobustnessReport report = run_robustness(cfg, params, dataset, opts);
    REQUIRE(report.rows.size() == 4);

    const SequenceMetrics plain = evaluate_sequence(cfg, params, dataset[1], opts);
    const RobustnessRow* identity = nullptr;
    for (const auto& r : report.rows)
        if (!r.backward && r.drop.num == 0) identity = &r;
    REQUIRE(identity != nullptr);
    CHECK(identity->metrics.miou_full == plain.miou_full);
    CHECK(identity->metrics.miou_selected == plain.miou_selected);
    CHECK(identity->metrics.mean_contour_distance_px == plain.mean_contour_distance_px);
}

TEST_CASE("run_ablation: five reproducible rows, DCN removal shrinks the model") {
    auto dataset = micro_dataset(1, 1, 8, 32);
    ModelConfig cfg = ModelConfig::tiny_preset();
    cfg.input_h = cfg.input_w = 32;
    cfg.grid_h = cfg.grid_w = 4;
    cfg.feature_channels = 8;
    cfg.attention_heads = 2;
    cfg.validate();
    TrainConfig tcfg;
    tcfg.iterations = 2;
    tcfg.batch_size = 1;
    tcfg.seed = 9;
    EvalOptions opts;

    const AblationReport report = run_ablation(cfg, tcfg, dataset, opts);
    REQUIRE(report.rows.size() == 5);
    CHECK(report.rows[0].name == "all");
    std::size_t all_params = 0, no_dcn_params = 0;
    for (const auto& r : report.rows) {
        CHECK(r.test_metrics.miou_selected >= 0.0);
        CHECK(r.test_metrics.miou_selected <= 1.0);
        CHECK(r.test_metrics.miou_full >= 0.0);
        if (r.name == "all") all_params = r.parameter_count;
        if (r.name == "without_dcn") no_dcn_params = r.parameter_count;
    }
    CHECK(no_dcn_params < all_params);

    const AblationReport again = run_ablation(cfg, tcfg, dataset, opts);
    CHECK(ablation_report_to_json(report) == ablation_report_to_json(again));
}
