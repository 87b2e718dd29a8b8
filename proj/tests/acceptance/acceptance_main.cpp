// Acceptance suite: runs every acceptance criterion end to end and prints
// one PASS/FAIL line per criterion. Exit code is the failure count.

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fairway/core/error.hpp"
#include "fairway/eval/metrics.hpp"
#include "fairway/harness/train.hpp"
#include "fairway/losses/losses.hpp"
#include "fairway/model/fusion.hpp"
#include "fairway/synthgen/synthgen.hpp"
#include "../grad_check.hpp"

using namespace fairway;
namespace fs = std::filesystem;
using fairway::testutil::check_gradients;
using fairway::testutil::random_tensor;

namespace {

struct Harness {
    int failures = 0;

    void report(int num, const std::string& name, bool ok, const std::string& detail,
                double seconds) {
        std::printf("[%s] criterion %2d: %-38s %s (%.1fs)\n", ok ? "PASS" : "FAIL", num,
                    name.c_str(), detail.c_str(), seconds);
        std::fflush(stdout);
        if (!ok) ++failures;
    }

    template <typename F>
    void run(int num, const std::string& name, F&& body) {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        std::string detail;
        try {
            std::tie(ok, detail) = body();
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("exception: ") + e.what();
        }
        const double secs =
            std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0)
                .count() /
            1000.0;
        report(num, name, ok, detail, secs);
    }
};

using Result = std::pair<bool, std::string>;

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof(buf), f, args);
    va_end(args);
    return buf;
}

MaskU8 horizontal_water(int h, int w, int first_water_row) {
    MaskU8 m(h, w);
    for (int y = first_water_row; y < h; ++y)
        for (int x = 0; x < w; ++x) m.at(y, x) = 1;
    return m;
}

Tensor hard_probability(const MaskU8& m) {
    Tensor p({m.height, m.width});
    for (int y = 0; y < m.height; ++y)
        for (int x = 0; x < m.width; ++x) p.at2(y, x) = m.at(y, x);
    return p;
}

MaskU8 blob_mask(int h, int w, std::uint64_t seed) {
    Rng rng(seed);
    const double cy = rng.uniform(0.35, 0.65) * h;
    const double cx = rng.uniform(0.35, 0.65) * w;
    const double r0 = rng.uniform(0.18, 0.3) * std::min(h, w);
    const double a1 = rng.uniform(0.0, 0.35), p1 = rng.uniform(0.0, 6.28);
    const double a2 = rng.uniform(0.0, 0.2), p2 = rng.uniform(0.0, 6.28);
    MaskU8 m(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double dy = y - cy, dx = x - cx;
            const double ang = std::atan2(dy, dx);
            const double rr = r0 * (1.0 + a1 * std::sin(2 * ang + p1) + a2 * std::sin(3 * ang + p2));
            m.at(y, x) = (dy * dy + dx * dx <= rr * rr) ? 1 : 0;
        }
    return m;
}

// ---------------------------------------------------------------- 1
Result criterion_dcn_reduction() {
    Rng rng(101);
    double worst_zero = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        ad::Var x = ad::Var::constant(random_tensor({7, 8, 3}, rng));
        ad::Var w = ad::Var::constant(random_tensor({3, 3, 3, 4}, rng));
        ad::Var b = ad::Var::constant(random_tensor({4}, rng));
        ad::Var off = ad::Var::constant(Tensor::zeros({7, 8, 18}));
        const Tensor dcn = ad::deform_conv2d(x, w, b, off, 1).value();
        const Tensor ref = ad::conv2d(x, w, b, 1, 1).value();
        for (std::size_t i = 0; i < dcn.numel(); ++i)
            worst_zero = std::max(worst_zero, std::fabs(dcn[i] - ref[i]));
    }
    if (worst_zero >= 1e-5)
        return {false, fmt("zero-offset max abs diff %.3g >= 1e-5", worst_zero)};

    // Random offsets vs an independent nested-loop bilinear oracle.
    double worst_rel = 0.0;
    for (int trial = 0; trial < 30; ++trial) {
        const int h = 6, w = 6, ci = 2, co = 2, k = 3;
        const Tensor x = random_tensor({h, w, ci}, rng);
        const Tensor wt = random_tensor({k, k, ci, co}, rng);
        const Tensor bt = random_tensor({co}, rng);
        const Tensor off = random_tensor({h, w, 2 * k * k}, rng, -2.0, 2.0);
        const Tensor out = ad::deform_conv2d(ad::Var::constant(x), ad::Var::constant(wt),
                                             ad::Var::constant(bt), ad::Var::constant(off), 1)
                               .value();
        for (int y = 0; y < h; ++y)
            for (int xx = 0; xx < w; ++xx)
                for (int c = 0; c < co; ++c) {
                    double acc = bt[static_cast<std::size_t>(c)];
                    for (int t = 0; t < k * k; ++t) {
                        const double py = y + t / k - 1 + off.at3(y, xx, 2 * t);
                        const double px = xx + t % k - 1 + off.at3(y, xx, 2 * t + 1);
                        const int y0 = static_cast<int>(std::floor(py));
                        const int x0 = static_cast<int>(std::floor(px));
                        for (int cin = 0; cin < ci; ++cin) {
                            double v = 0.0;
                            for (int dy = 0; dy <= 1; ++dy)
                                for (int dx = 0; dx <= 1; ++dx) {
                                    const int yy = y0 + dy, xc = x0 + dx;
                                    if (yy < 0 || yy >= h || xc < 0 || xc >= w) continue;
                                    v += (dy ? py - y0 : 1 - (py - y0)) *
                                         (dx ? px - x0 : 1 - (px - x0)) * x.at3(yy, xc, cin);
                                }
                            acc += v * wt[((static_cast<std::size_t>(t / k) * k + t % k) * ci + cin) * co + c];
                        }
                    }
                    const double got = out.at3(y, xx, c);
                    worst_rel = std::max(worst_rel,
                                         std::fabs(got - acc) / std::max(1e-9, std::fabs(acc)));
                }
    }
    if (worst_rel >= 1e-6) return {false, fmt("oracle max rel diff %.3g >= 1e-6", worst_rel)};
    return {true, fmt("zero-offset %.2g, oracle rel %.2g", worst_zero, worst_rel)};
}

// ---------------------------------------------------------------- 2
Result criterion_gradient_suite() {
    ModelConfig cfg = ModelConfig::tiny_preset();
    cfg.input_h = cfg.input_w = 16;
    cfg.grid_h = cfg.grid_w = 4;
    cfg.feature_channels = 4;
    cfg.attention_heads = 2;
    cfg.validate();
    ParamStore store = build_model(cfg, 7);
    {
        Rng orng(8);
        Tensor& ow = store.get("alignment.dcn.offset.weight").mutable_value();
        for (std::size_t i = 0; i < ow.numel(); ++i) ow[i] = orng.uniform(-0.15, 0.15);
        Tensor& wo = store.get("fusion.attn0.wo").mutable_value();
        for (std::size_t i = 0; i < wo.numel(); ++i) wo[i] = orng.uniform(-0.3, 0.3);
    }
    Rng rng(9);
    double worst = 0.0;
    std::string worst_name;

    auto track = [&](const char* stage, const testutil::GradCheckResult& res) {
        if (res.max_rel_err > worst) {
            worst = res.max_rel_err;
            worst_name = std::string(stage) + "/" + res.worst_param;
        }
    };

    { // prefuse
        ad::Var y1 = ad::Var::leaf(random_tensor({4, 4, 4}, rng));
        ad::Var y2 = ad::Var::leaf(random_tensor({4, 4, 4}, rng));
        Tensor probe = random_tensor({4, 4, 4}, rng);
        std::vector<std::pair<std::string, ad::Var>> leaves = {{"y1", y1}, {"y2", y2}};
        for (const auto& e : store.entries())
            if (e.name.rfind("alignment.dcn", 0) == 0 || e.name.rfind("alignment.gate", 0) == 0)
                leaves.emplace_back(e.name, e.var);
        track("prefuse", check_gradients(leaves, [&] {
            return ad::sum_all(ad::mul_const(prefuse(cfg, store, {{y1, 2}, {y2, 5}}, 7), probe));
        }));
    }
    { // cross_attend + spatial_attend
        ad::Var fx = ad::Var::leaf(random_tensor({4, 4, 4}, rng));
        ad::Var fp = ad::Var::leaf(random_tensor({4, 4, 4}, rng));
        std::vector<std::pair<std::string, ad::Var>> leaves = {{"fx", fx}, {"fp", fp}};
        for (const auto& e : store.entries())
            if (e.name.rfind("fusion.attn", 0) == 0) leaves.emplace_back(e.name, e.var);
        track("cross_attend", check_gradients(leaves, [&] {
            return ad::mean_all(cross_attend(cfg, store, fx, fp));
        }));

        std::vector<std::pair<std::string, ad::Var>> sp_leaves = {{"fx", fx}};
        for (const auto& e : store.entries())
            if (e.name.rfind("fusion.spatial", 0) == 0) sp_leaves.emplace_back(e.name, e.var);
        track("spatial_attend", check_gradients(sp_leaves, [&] {
            return ad::mean_all(spatial_attend(cfg, store, fx));
        }));
    }
    { // decode
        ad::Var feat = ad::Var::leaf(random_tensor({4, 4, 4}, rng));
        std::vector<std::pair<std::string, ad::Var>> leaves = {{"feat", feat}};
        for (const auto& e : store.entries())
            if (e.name.rfind("fusion.decoder", 0) == 0) leaves.emplace_back(e.name, e.var);
        track("decode", check_gradients(leaves, [&] { return ad::mean_all(decode(cfg, store, feat)); }));
    }
    { // total_loss including the contour surrogate
        const MaskU8 gt = blob_mask(8, 8, 55);
        const ContourDistanceFields fields = contour_distance_fields(gt);
        Tensor logits0({8, 8, 2});
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                logits0.at3(y, x, 0) = 0.4 * std::sin(0.9 * y + 0.2 * x);
                logits0.at3(y, x, 1) = 0.4 * std::cos(0.5 * y - 0.8 * x) + (gt.at(y, x) ? 0.5 : -0.5);
            }
        ad::Var logits = ad::Var::leaf(logits0);
        track("total_loss", check_gradients({{"logits", logits}}, [&] {
            return total_loss(cfg, logits, gt, &fields).total_var;
        }));
    }
    return {worst < 1e-3, fmt("max rel err %.3g at %s", worst, worst_name.c_str())};
}

// ---------------------------------------------------------------- 3
Result criterion_loss_identities() {
    std::ostringstream why;
    bool ok = true;
    auto expect = [&](const char* name, double got, double want, double tol) {
        if (std::fabs(got - want) > tol) {
            ok = false;
            why << name << " got " << got << " want " << want << "; ";
        }
    };

    MaskU8 sq(20, 20);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x) sq.at(y, x) = 1;
    expect("dice(identical)", dice_loss(ad::Var::constant(hard_probability(sq)), sq).value().item(),
           0.0, 1e-12);

    MaskU8 other(20, 20);
    for (int y = 10; y < 20; ++y)
        for (int x = 10; x < 20; ++x) other.at(y, x) = 1;
    expect("dice(disjoint)", dice_loss(ad::Var::constant(hard_probability(other)), sq).value().item(),
           1.0 - 1.0 / 201.0, 1e-12);

    expect("ce(uniform)",
           cross_entropy(ad::Var::constant(Tensor::zeros({4, 4, 2})), blob_mask(4, 4, 3)).value().item(),
           std::log(2.0), 1e-6);

    const MaskU8 gt = horizontal_water(224, 224, 10);
    const ContourDistanceFields fields = contour_distance_fields(gt);
    expect("lcon(identical)",
           contour_loss(ad::Var::constant(hard_probability(gt)), fields, 1.0).value().item(), 0.0,
           1e-15);

    const MaskU8 pred = horizontal_water(224, 224, 12);
    const double beta = 1.0;
    expect("lcon(parallel)",
           contour_loss(ad::Var::constant(hard_probability(pred)), fields, beta).value().item(),
           beta * 2.0 / (224.0 * std::sqrt(2.0)), 1e-9);
    return {ok, ok ? "dice/ce/contour identities exact" : why.str()};
}

// ---------------------------------------------------------------- 4
Result criterion_surrogate_agreement() {
    int checked = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; checked < 50 && seed < 200; ++seed) {
        const MaskU8 gt = blob_mask(96, 96, 4000 + seed);
        const MaskU8 pred = blob_mask(96, 96, 9000 + seed);
        const ContourPolyline cg = mask_to_contour(gt);
        const ContourPolyline cp = mask_to_contour(pred);
        if (cg.empty() || cp.empty()) continue;
        const ContourDistanceFields fields = contour_distance_fields(gt);
        const double diag = std::sqrt(2.0) * 96.0;
        const double surrogate =
            contour_loss(ad::Var::constant(hard_probability(pred)), fields, 1.0).value().item() * diag;
        const double sampled = contour_distance_sampled(cp, cg, 10000, seed);
        worst = std::max(worst, std::fabs(surrogate - sampled) / sampled);
        ++checked;
    }
    return {checked == 50 && worst < 0.03, fmt("%d masks, worst rel gap %.4f", checked, worst)};
}

// ---------------------------------------------------------------- 5
Result criterion_metric_oracles() {
    Rng rng(500);
    for (int trial = 0; trial < 50; ++trial) {
        const MaskU8 gt = blob_mask(40, 48, 6000 + static_cast<std::uint64_t>(trial));
        const MaskU8 pred = blob_mask(40, 48, 7000 + static_cast<std::uint64_t>(trial));
        const int band = 3 + trial % 5;
        const SelectedZone zone = build_selected_zone(gt, band);

        // Zone oracle: exhaustive per-pixel distance scan.
        const ContourPolyline contour = mask_to_contour(gt);
        std::vector<ContourIndex::Segment> segs;
        for (const auto& ch : contour.chains)
            for (std::size_t i = 1; i < ch.size(); ++i) segs.push_back({ch[i - 1], ch[i]});
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 48; ++x) {
                bool expected = gt.at(y, x) != 0;
                if (!expected && !segs.empty()) {
                    double best = 1e30;
                    for (const auto& s : segs)
                        best = std::min(best, point_segment_distance(y, x, s.a, s.b));
                    expected = best <= band;
                }
                if (static_cast<bool>(zone.mask.at(y, x)) != expected)
                    return {false, fmt("zone mismatch at trial %d (%d,%d)", trial, y, x)};
            }

        // MIoU oracle: exhaustive counting.
        std::size_t inter[2] = {0, 0}, uni[2] = {0, 0};
        std::size_t inter_z[2] = {0, 0}, uni_z[2] = {0, 0};
        for (int y = 0; y < 40; ++y)
            for (int x = 0; x < 48; ++x)
                for (int cls = 0; cls < 2; ++cls) {
                    const bool pp = pred.at(y, x) == cls, gg = gt.at(y, x) == cls;
                    inter[cls] += pp && gg;
                    uni[cls] += pp || gg;
                    if (zone.mask.at(y, x)) {
                        inter_z[cls] += pp && gg;
                        uni_z[cls] += pp || gg;
                    }
                }
        auto fold = [](const std::size_t* i, const std::size_t* u) {
            double s = 0;
            for (int cls = 0; cls < 2; ++cls)
                s += u[cls] ? static_cast<double>(i[cls]) / u[cls] : 1.0;
            return s / 2;
        };
        if (std::fabs(miou(pred, gt, nullptr) - fold(inter, uni)) > 1e-12)
            return {false, fmt("full miou mismatch at trial %d", trial)};
        if (std::fabs(miou(pred, gt, &zone) - fold(inter_z, uni_z)) > 1e-12)
            return {false, fmt("selected miou mismatch at trial %d", trial)};
    }

    // Shoreline-shift sensitivity: nearshore error weighs more in the zone.
    const MaskU8 gt = horizontal_water(100, 100, 40);
    const MaskU8 pred = horizontal_water(100, 100, 42);
    const SelectedZone zone = build_selected_zone(gt, 10);
    const double full = miou(pred, gt, nullptr);
    const double sel = miou(pred, gt, &zone);
    if (!(sel < full)) return {false, fmt("sensitivity: sel %.4f !< full %.4f", sel, full)};
    return {true, fmt("50 oracle cases exact; sensitivity %.4f < %.4f", sel, full)};
}

// ------------------------------------------------------------ 6/7/8/9
struct Experiments {
    fs::path bench_dir = "acceptance_data/bench";
    std::vector<FrameSequence> dataset;
    // key: variant name + seed
    std::map<std::string, TrainResult> trained;
    std::map<std::string, EvalReport> reports;

    ModelConfig variant_config(const std::string& variant) const {
        ModelConfig cfg = ModelConfig::tiny_preset();
        if (variant == "image_only") cfg.image_only = true;
        if (variant == "without_dcn") cfg.use_dcn = false;
        return cfg;
    }

    TrainConfig train_config(std::uint64_t seed) const {
        TrainConfig tcfg;
        tcfg.iterations = 1200;
        tcfg.learning_rate = 0.003;
        tcfg.batch_size = 4;
        tcfg.seed = seed;
        return tcfg;
    }

    void ensure_dataset() {
        if (!dataset.empty()) return;
        if (!fs::exists(bench_dir / "dataset.json")) {
            std::printf("    generating seed-0 benchmark (60 frames x 10 sequences)...\n");
            std::fflush(stdout);
            generate_benchmark(0, bench_dir, 60);
        }
        dataset = load_dataset(bench_dir / "dataset.json");
    }

    const TrainResult& model(const std::string& variant, std::uint64_t seed) {
        const std::string key = variant + "#" + std::to_string(seed);
        auto it = trained.find(key);
        if (it == trained.end()) {
            ensure_dataset();
            std::printf("    training %s seed %llu...\n", variant.c_str(),
                        static_cast<unsigned long long>(seed));
            std::fflush(stdout);
            it = trained.emplace(key, train(variant_config(variant), train_config(seed), dataset))
                     .first;
        }
        return it->second;
    }

    const EvalReport& report(const std::string& variant, std::uint64_t seed) {
        const std::string key = variant + "#" + std::to_string(seed);
        auto it = reports.find(key);
        if (it == reports.end()) {
            const TrainResult& tr = model(variant, seed);
            EvalOptions opts;
            opts.eval_seed = 0;
            it = reports
                     .emplace(key, evaluate_dataset(variant_config(variant), tr.params, dataset,
                                                    Split::test, opts))
                     .first;
        }
        return it->second;
    }
};

double median3(double a, double b, double c) {
    return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

Result criterion_temporal_benefit(Experiments& ex) {
    double all_sel[3], img_sel[3];
    std::ostringstream detail;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        all_sel[s - 1] = ex.report("all", s).aggregate.miou_selected;
        img_sel[s - 1] = ex.report("image_only", s).aggregate.miou_selected;
        detail << "s" << s << ": " << fmt("%.4f/%.4f ", all_sel[s - 1], img_sel[s - 1]);
    }
    const double med_all = median3(all_sel[0], all_sel[1], all_sel[2]);
    const double med_img = median3(img_sel[0], img_sel[1], img_sel[2]);
    detail << fmt("median %.4f vs %.4f+0.01", med_all, med_img);
    return {med_all >= med_img + 0.01, detail.str()};
}

double high_jitter_selected(const EvalReport& report) {
    double sum = 0.0;
    int n = 0;
    for (const auto& [id, m] : report.per_sequence)
        if (id.find("_jhi_") != std::string::npos) {
            sum += m.miou_selected;
            ++n;
        }
    if (n == 0) throw fairway::ValidationError("no high-jitter sequences in the test split");
    return sum / n;
}

Result criterion_ablation_direction(Experiments& ex) {
    double all_sel[3], nodcn_sel[3];
    std::ostringstream detail;
    for (std::uint64_t s = 1; s <= 3; ++s) {
        all_sel[s - 1] = high_jitter_selected(ex.report("all", s));
        nodcn_sel[s - 1] = high_jitter_selected(ex.report("without_dcn", s));
        detail << "s" << s << ": " << fmt("%.4f/%.4f ", all_sel[s - 1], nodcn_sel[s - 1]);
    }
    const double med_all = median3(all_sel[0], all_sel[1], all_sel[2]);
    const double med_nodcn = median3(nodcn_sel[0], nodcn_sel[1], nodcn_sel[2]);
    detail << fmt("median without_dcn %.4f < all %.4f", med_nodcn, med_all);
    return {med_nodcn < med_all, detail.str()};
}

Result criterion_robustness_stability(Experiments& ex) {
    const TrainResult& tr = ex.model("all", 1);
    EvalOptions opts;
    opts.eval_seed = 0;
    const RobustnessReport rb =
        run_robustness(ex.variant_config("all"), tr.params, ex.dataset, opts);
    double none_sum = 0.0, drop_sum = 0.0;
    int none_n = 0, drop_n = 0;
    for (const auto& row : rb.rows) {
        if (row.backward) continue;
        if (row.drop.num == 0) {
            none_sum += row.metrics.miou_selected;
            ++none_n;
        } else {
            drop_sum += row.metrics.miou_selected;
            ++drop_n;
        }
    }
    const double none = none_sum / none_n;
    const double drop = drop_sum / drop_n;
    const double gap = std::fabs(none - drop);
    return {gap < 0.02, fmt("forward none %.4f vs 1/7 drops %.4f, gap %.4f < 0.02", none, drop, gap)};
}

Result criterion_determinism(Experiments& ex) {
    ex.ensure_dataset();
    ModelConfig cfg = ModelConfig::tiny_preset();
    TrainConfig tcfg;
    tcfg.iterations = 40;
    tcfg.learning_rate = 0.003;
    tcfg.batch_size = 2;
    tcfg.seed = 9;

    fs::create_directories("acceptance_data");
    auto run_once = [&](const fs::path& ckpt_path, const fs::path& report_path) {
        TrainResult tr = train(cfg, tcfg, ex.dataset);
        save_checkpoint(ckpt_path, cfg, tr.params);
        EvalOptions opts;
        opts.eval_seed = 3;
        EvalReport er = evaluate_dataset(cfg, tr.params, ex.dataset, Split::test, opts);
        write_eval_report(report_path, er);
    };
    run_once("acceptance_data/det_a.fwck", "acceptance_data/det_a.json");
    run_once("acceptance_data/det_b.fwck", "acceptance_data/det_b.json");

    auto bytes = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)), {});
    };
    const bool ckpt_equal = bytes("acceptance_data/det_a.fwck") == bytes("acceptance_data/det_b.fwck");
    const bool report_equal = bytes("acceptance_data/det_a.json") == bytes("acceptance_data/det_b.json");
    return {ckpt_equal && report_equal,
            fmt("checkpoints %s, reports %s", ckpt_equal ? "identical" : "DIFFER",
                report_equal ? "identical" : "DIFFER")};
}

// ---------------------------------------------------------------- 10
Result criterion_generator_integrity() {
    // Mask exactness against the analytic jittered shoreline on a noisy,
    // high-jitter curved scene.
    SceneSpec spec;
    spec.seed = 77;
    spec.n_frames = 30;
    spec.height = spec.width = 128;
    spec.base_row = 64;
    spec.harmonics.push_back({7.0, 1.0, 0.9, 0.02});
    spec.harmonics.push_back({3.0, 2.0, 0.1, -0.015});
    spec.reflection_strength = 0.9;
    spec.texture_amplitude = 0.5;
    spec.flicker_amplitude = 0.2;
    spec.jitter = {6.0, 2.0, 0.8};
    GeneratedSequence g = generate_sequence(spec, "integrity", Split::train);

    double worst_iou = 1.0;
    for (int t = 0; t < spec.n_frames; ++t) {
        const JitterSample& js = g.trace.frames[static_cast<std::size_t>(t)];
        const double rot = js.rot_deg * 3.14159265358979323846 / 180.0;
        const double cy = 0.5 * (spec.height - 1.0), cx = 0.5 * (spec.width - 1.0);
        std::size_t inter = 0, uni = 0;
        const MaskU8& stored = *g.sequence.frames[static_cast<std::size_t>(t)].mask;
        for (int y = 0; y < spec.height; ++y)
            for (int x = 0; x < spec.width; ++x) {
                const double ty = y - cy - js.dy, tx = x - cx - js.dx;
                const double sy = std::cos(rot) * ty + std::sin(rot) * tx + cy;
                const double sx = -std::sin(rot) * ty + std::cos(rot) * tx + cx;
                const bool analytic = sy >= spec.shoreline_row(sx, t);
                const bool got = stored.at(y, x) != 0;
                inter += analytic && got;
                uni += analytic || got;
            }
        worst_iou = std::min(worst_iou, uni ? static_cast<double>(inter) / uni : 1.0);
    }
    if (worst_iou < 0.995) return {false, fmt("mask IoU %.5f < 0.995", worst_iou)};

    // AR(1) trace reconstruction: regeneration is exact, innovations bounded.
    GeneratedSequence g2 = generate_sequence(spec, "integrity", Split::train);
    for (std::size_t t = 0; t < g.trace.frames.size(); ++t) {
        if (g.trace.frames[t].dy != g2.trace.frames[t].dy ||
            g.trace.frames[t].dx != g2.trace.frames[t].dx ||
            g.trace.frames[t].rot_deg != g2.trace.frames[t].rot_deg)
            return {false, "jitter trace regeneration is not bit-exact"};
    }
    double prev_dy = 0.0;
    for (const auto& f : g.trace.frames) {
        const double eps = f.dy - spec.jitter.temporal_correlation * prev_dy;
        if (std::fabs(eps) > (1.0 - spec.jitter.temporal_correlation) * spec.jitter.max_shift_px + 1e-12)
            return {false, "AR(1) innovation out of bounds"};
        prev_dy = f.dy;
    }

    // Zero-amplitude spec: every frame identical bit for bit.
    SceneSpec still;
    still.seed = 3;
    still.n_frames = 5;
    still.height = still.width = 96;
    still.base_row = 48;
    still.reflection_strength = 0.0;
    still.texture_amplitude = 0.0;
    still.flicker_amplitude = 0.0;
    still.jitter = {0.0, 0.0, 0.0};
    GeneratedSequence s = generate_sequence(still, "still", Split::train);
    for (const auto& f : s.sequence.frames) {
        if (f.image.pixels != s.sequence.frames[0].image.pixels ||
            f.mask->values != s.sequence.frames[0].mask->values)
            return {false, "zero-amplitude frames differ"};
    }
    return {true, fmt("mask IoU %.5f, trace exact, static video bit-equal", worst_iou)};
}

} // namespace

int main() {
    std::printf("fairway acceptance suite\n");
    Harness h;
    Experiments ex;

    h.run(1, "deformable conv reduction", [] { return criterion_dcn_reduction(); });
    h.run(2, "gradient suite", [] { return criterion_gradient_suite(); });
    h.run(3, "loss identities", [] { return criterion_loss_identities(); });
    h.run(4, "surrogate-estimator agreement", [] { return criterion_surrogate_agreement(); });
    h.run(5, "metric oracles", [] { return criterion_metric_oracles(); });
    h.run(6, "temporal-fusion benefit", [&] { return criterion_temporal_benefit(ex); });
    h.run(7, "ablation direction (DCN)", [&] { return criterion_ablation_direction(ex); });
    h.run(8, "robustness stability (1/7 drops)", [&] { return criterion_robustness_stability(ex); });
    h.run(9, "train/eval determinism", [&] { return criterion_determinism(ex); });
    h.run(10, "generator integrity", [] { return criterion_generator_integrity(); });

    std::printf("%d/10 criteria passed\n", 10 - h.failures);
    return h.failures;
}
