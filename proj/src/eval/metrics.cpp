#include "fairway/eval/metrics.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fairway/core/error.hpp"
#include "fairway/core/frame_input.hpp"
#include "fairway/harness/picks.hpp"
#include "fairway/losses/losses.hpp"
#include "fairway/model/fusion.hpp"

namespace fairway {

using nlohmann::json;

SelectedZone build_selected_zone(const MaskU8& gt_mask, int band_width_px, bool below_only) {
    validate_mask_binary(gt_mask, "build_selected_zone");
    if (band_width_px < 0) throw ValidationError("build_selected_zone: band must be >= 0");
    SelectedZone zone;
    zone.band_width_px = band_width_px;
    zone.mask = MaskU8(gt_mask.height, gt_mask.width);

    const ContourPolyline contour = mask_to_contour(gt_mask);
    if (below_only || contour.empty()) {
        // Below-only reading (or no shoreline at all): the zone is exactly
        // the water region.
        zone.mask = gt_mask;
        return zone;
    }
    const ContourIndex index(contour);
    for (int y = 0; y < gt_mask.height; ++y)
        for (int x = 0; x < gt_mask.width; ++x) {
            if (gt_mask.at(y, x)) {
                zone.mask.at(y, x) = 1;
            } else if (index.distance(y, x) <= band_width_px) {
                zone.mask.at(y, x) = 1;
            }
        }
    return zone;
}

double miou(const MaskU8& pred_mask, const MaskU8& gt_mask, const SelectedZone* zone) {
    if (pred_mask.height != gt_mask.height || pred_mask.width != gt_mask.width)
        throw ValidationError("miou: prediction and gt resolutions differ");
    if (zone && (zone->mask.height != gt_mask.height || zone->mask.width != gt_mask.width))
        throw ValidationError("miou: zone resolution differs");
    validate_mask_binary(pred_mask, "miou(pred)");
    validate_mask_binary(gt_mask, "miou(gt)");

    // Class 1 = water, class 0 = background.
    std::size_t inter[2] = {0, 0}, uni[2] = {0, 0};
    for (int y = 0; y < gt_mask.height; ++y)
        for (int x = 0; x < gt_mask.width; ++x) {
            if (zone && !zone->mask.at(y, x)) continue;
            const int p = pred_mask.at(y, x), g = gt_mask.at(y, x);
            for (int cls = 0; cls < 2; ++cls) {
                const bool pp = (p == cls), gg = (g == cls);
                inter[cls] += (pp && gg) ? 1 : 0;
                uni[cls] += (pp || gg) ? 1 : 0;
            }
        }
    double sum = 0.0;
    for (int cls = 0; cls < 2; ++cls)
        sum += uni[cls] == 0 ? 1.0 : static_cast<double>(inter[cls]) / static_cast<double>(uni[cls]);
    return 0.5 * sum;
}

int scaled_band_px(int band_at_480, int eval_height) {
    return static_cast<int>(std::lround(band_at_480 * static_cast<double>(eval_height) / 480.0));
}

namespace {

int effective_band(const EvalOptions& opts, int eval_height) {
    return opts.band_px ? *opts.band_px : scaled_band_px(opts.band_at_480, eval_height);
}

} // namespace

MaskU8 predict_frame_mask(const ModelConfig& cfg, const ParamStore& params,
                          const FrameSequence& seq, int frame_index, const EvalOptions& opts) {
    const Frame& frame = seq.frames[static_cast<std::size_t>(frame_index)];
    std::vector<std::pair<Tensor, int>> previous;
    if (!cfg.image_only) {
        const FramePick pick = pick_frames_eval(frame_index, cfg.n_prev_pool, cfg.n_prev_pick,
                                                opts.pick_mode, opts.eval_seed, seq.id);
        for (int idx : pick.indices) {
            const Frame& prev = seq.frames[static_cast<std::size_t>(idx)];
            previous.emplace_back(frame_to_input(cfg, prev), prev.timestamp);
        }
    }
    ad::Var logits = model_forward(cfg, params, frame_to_input(cfg, frame), previous,
                                   frame.timestamp);
    const Tensor prob = water_probability(logits).value();
    MaskU8 pred(cfg.input_h, cfg.input_w);
    for (int y = 0; y < cfg.input_h; ++y)
        for (int x = 0; x < cfg.input_w; ++x) pred.at(y, x) = prob.at2(y, x) > 0.5 ? 1 : 0;
    return resize_mask_nearest(pred, seq.height(), seq.width());
}

SequenceMetrics evaluate_sequence_with(const FramePredictor& predictor, int n_prev_pool,
                                       const FrameSequence& seq, const EvalOptions& opts,
                                       std::vector<FrameMetrics>* per_frame) {
    if (static_cast<int>(seq.frames.size()) <= n_prev_pool)
        throw ValidationError("evaluate_sequence: sequence '" + seq.id +
                              "' has no frames past the context prefix");
    SequenceMetrics metrics;
    const int band = effective_band(opts, seq.height());
    double miou_full_sum = 0.0, miou_sel_sum = 0.0, dist_sum = 0.0;
    int dist_count = 0;

    for (int i = n_prev_pool; i < static_cast<int>(seq.frames.size()); ++i) {
        const Frame& frame = seq.frames[static_cast<std::size_t>(i)];
        if (!frame.mask) {
            ++metrics.frames_skipped_unlabeled;
            continue;
        }
        const MaskU8 pred = predictor(seq, i);
        const SelectedZone zone = build_selected_zone(*frame.mask, band, opts.zone_below_only);
        FrameMetrics fm;
        fm.frame_index = i;
        fm.miou_full = miou(pred, *frame.mask, nullptr);
        fm.miou_selected = miou(pred, *frame.mask, &zone);
        miou_full_sum += fm.miou_full;
        miou_sel_sum += fm.miou_selected;
        ++metrics.frames_evaluated;

        const ContourPolyline pred_contour = mask_to_contour(pred);
        const ContourPolyline gt_contour = mask_to_contour(*frame.mask);
        if (pred_contour.empty() || gt_contour.empty()) {
            ++metrics.frames_without_contour;
        } else {
            fm.contour_dist_px = contour_distance_sampled(
                pred_contour, gt_contour, opts.n_c,
                Rng::mix(opts.eval_seed, static_cast<std::uint64_t>(i)), opts.symmetric_contour);
            fm.contour_defined = true;
            dist_sum += fm.contour_dist_px;
            ++dist_count;
        }
        if (per_frame) per_frame->push_back(fm);
    }
    if (metrics.frames_evaluated > 0) {
        metrics.miou_full = miou_full_sum / metrics.frames_evaluated;
        metrics.miou_selected = miou_sel_sum / metrics.frames_evaluated;
    }
    if (dist_count > 0) metrics.mean_contour_distance_px = dist_sum / dist_count;
    return metrics;
}

SequenceMetrics evaluate_sequence(const ModelConfig& cfg, const ParamStore& params,
                                  const FrameSequence& seq, const EvalOptions& opts,
                                  std::vector<FrameMetrics>* per_frame) {
    const FramePredictor predictor = [&](const FrameSequence& s, int i) {
        return predict_frame_mask(cfg, params, s, i, opts);
    };
    return evaluate_sequence_with(predictor, cfg.n_prev_pool, seq, opts, per_frame);
}

EvalReport evaluate_dataset(const ModelConfig& cfg, const ParamStore& params,
                            const std::vector<FrameSequence>& sequences, Split split,
                            const EvalOptions& opts) {
    EvalReport report;
    report.attention_orientation = to_string(cfg.attention_orientation);
    report.eval_seed = opts.eval_seed;
    int band = 0;
    double f = 0.0, s = 0.0, d = 0.0;
    int n = 0;
    for (const auto& seq : sequences) {
        if (seq.split != split) continue;
        band = effective_band(opts, seq.height());
        SequenceMetrics m = evaluate_sequence(cfg, params, seq, opts);
        report.per_sequence[seq.id] = m;
        f += m.miou_full;
        s += m.miou_selected;
        d += m.mean_contour_distance_px;
        report.aggregate.frames_evaluated += m.frames_evaluated;
        report.aggregate.frames_skipped_unlabeled += m.frames_skipped_unlabeled;
        report.aggregate.frames_without_contour += m.frames_without_contour;
        ++n;
    }
    if (n == 0) throw ValidationError("evaluate_dataset: no sequences in requested split");
    report.aggregate.miou_full = f / n;
    report.aggregate.miou_selected = s / n;
    report.aggregate.mean_contour_distance_px = d / n;
    report.band_width_px = band;
    return report;
}

namespace {

json metrics_to_json(const SequenceMetrics& m) {
    return json{{"miou_full", m.miou_full},
                {"miou_selected", m.miou_selected},
                {"mean_contour_distance_px", m.mean_contour_distance_px},
                {"frames_evaluated", m.frames_evaluated},
                {"frames_skipped_unlabeled", m.frames_skipped_unlabeled},
                {"frames_without_contour", m.frames_without_contour}};
}

SequenceMetrics metrics_from_json(const json& j) {
    SequenceMetrics m;
    m.miou_full = j.at("miou_full").get<double>();
    m.miou_selected = j.at("miou_selected").get<double>();
    m.mean_contour_distance_px = j.at("mean_contour_distance_px").get<double>();
    m.frames_evaluated = j.value("frames_evaluated", 0);
    m.frames_skipped_unlabeled = j.value("frames_skipped_unlabeled", 0);
    m.frames_without_contour = j.value("frames_without_contour", 0);
    return m;
}

} // namespace

std::string eval_report_to_json(const EvalReport& report) {
    json j;
    j["condition"] = {{"direction", report.condition.backward ? "backward" : "forward"},
                      {"drop_rate", {{"num", report.condition.drop.num},
                                     {"den", report.condition.drop.den}}}};
    j["band_width_px"] = report.band_width_px;
    j["attention_orientation"] = report.attention_orientation;
    j["eval_seed"] = report.eval_seed;
    json per = json::object();
    for (const auto& [id, m] : report.per_sequence) per[id] = metrics_to_json(m);
    j["per_sequence"] = per;
    j["aggregate"] = metrics_to_json(report.aggregate);
    return j.dump(2) + "\n";
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << eval_report_to_json(report);
}

EvalReport read_eval_report(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw FormatError("report is not valid JSON: " + std::string(e.what()));
    }
    EvalReport report;
    try {
        report.condition.backward = j.at("condition").at("direction").get<std::string>() == "backward";
        report.condition.drop.num = j.at("condition").at("drop_rate").at("num").get<int>();
        report.condition.drop.den = j.at("condition").at("drop_rate").at("den").get<int>();
        report.band_width_px = j.at("band_width_px").get<int>();
        report.attention_orientation = j.value("attention_orientation", "");
        report.eval_seed = j.value("eval_seed", 0ull);
        for (const auto& [id, m] : j.at("per_sequence").items())
            report.per_sequence[id] = metrics_from_json(m);
        report.aggregate = metrics_from_json(j.at("aggregate"));
    } catch (const json::exception& e) {
        throw FormatError("malformed report: " + std::string(e.what()));
    }
    return report;
}

} // namespace fairway
