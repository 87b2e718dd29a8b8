#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include "fairway/core/config.hpp"
#include "fairway/core/contour.hpp"
#include "fairway/core/dataset.hpp"
#include "fairway/model/params.hpp"

namespace fairway {

/// Evaluation region: ground-truth water plus every pixel within
/// band_width_px (Euclidean, pixel centers) of the gt shoreline contour.
/// `below_only` restricts the band to the water side, i.e. the zone
/// collapses to the water region itself.
struct SelectedZone {
    MaskU8 mask;
    int band_width_px = 0;
};

SelectedZone build_selected_zone(const MaskU8& gt_mask, int band_width_px,
                                 bool below_only = false);

/// Mean of per-class IoU for water and background over the zone (whole
/// image when zone is null). A class absent from both prediction and gt
/// inside the zone counts as IoU 1.
double miou(const MaskU8& pred_mask, const MaskU8& gt_mask, const SelectedZone* zone);

/// Scales the reference band width (defined at 480-row resolution) to an
/// evaluation resolution; 32 px at 480 rows becomes 15 px at 224.
int scaled_band_px(int band_at_480, int eval_height);

struct SequenceMetrics {
    double miou_full = 0.0;
    double miou_selected = 0.0;
    double mean_contour_distance_px = 0.0;
    int frames_evaluated = 0;
    int frames_skipped_unlabeled = 0;
    int frames_without_contour = 0; // excluded from the distance mean
};

struct DropRate {
    int num = 0;
    int den = 1;
};

struct EvalCondition {
    bool backward = false;
    DropRate drop;
};

struct EvalReport {
    std::map<std::string, SequenceMetrics> per_sequence;
    SequenceMetrics aggregate;
    EvalCondition condition;
    int band_width_px = 0;
    std::string attention_orientation;
    std::uint64_t eval_seed = 0;
};

struct EvalOptions {
    int band_at_480 = 32;            // reference band width
    std::optional<int> band_px;      // absolute override
    std::uint64_t eval_seed = 0;     // drives deterministic frame picking
    PickMode pick_mode = PickMode::random_k_of_m;
    int n_c = 128;                   // contour samples per frame
    bool symmetric_contour = false;
    bool zone_below_only = false;    // alternative zone reading: water region only
};

struct FrameMetrics {
    int frame_index = 0;
    double miou_full = 0.0;
    double miou_selected = 0.0;
    double contour_dist_px = 0.0;
    bool contour_defined = false;
};

/// Prediction mask for one frame at the sequence's native resolution.
using FramePredictor = std::function<MaskU8(const FrameSequence&, int frame_index)>;

/// Metric core shared by the model path and test oracles: walks frames
/// past the context prefix, applies the predictor, accumulates metrics.
SequenceMetrics evaluate_sequence_with(const FramePredictor& predictor, int n_prev_pool,
                                       const FrameSequence& seq, const EvalOptions& opts,
                                       std::vector<FrameMetrics>* per_frame = nullptr);

/// Runs the model over every frame past the context prefix
/// (index >= n_prev_pool), thresholds water probability at 0.5, and
/// accumulates metrics at the sequence's native resolution.
SequenceMetrics evaluate_sequence(const ModelConfig& cfg, const ParamStore& params,
                                  const FrameSequence& seq, const EvalOptions& opts,
                                  std::vector<FrameMetrics>* per_frame = nullptr);

/// Per-frame prediction mask at the sequence resolution (threshold 0.5).
MaskU8 predict_frame_mask(const ModelConfig& cfg, const ParamStore& params,
                          const FrameSequence& seq, int frame_index, const EvalOptions& opts);

EvalReport evaluate_dataset(const ModelConfig& cfg, const ParamStore& params,
                            const std::vector<FrameSequence>& sequences, Split split,
                            const EvalOptions& opts);

std::string eval_report_to_json(const EvalReport& report);
void write_eval_report(const std::filesystem::path& path, const EvalReport& report);
EvalReport read_eval_report(const std::filesystem::path& path);

} // namespace fairway
