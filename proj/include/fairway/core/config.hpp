#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

namespace fairway {

enum class EncoderKind { paper_backbone, tiny };
enum class AttentionOrientation { current_queries_previous, previous_queries_current };
enum class PickMode { random_k_of_m, fixed_last_k };
enum class LrSchedule { constant, linear_decay };

std::string to_string(EncoderKind k);
std::string to_string(AttentionOrientation o);
std::string to_string(PickMode m);
std::string to_string(LrSchedule s);
EncoderKind encoder_kind_from_string(const std::string& s);
AttentionOrientation attention_orientation_from_string(const std::string& s);
PickMode pick_mode_from_string(const std::string& s);
LrSchedule lr_schedule_from_string(const std::string& s);

/// Every architectural knob, including the four ablation switches. The
/// defaults reproduce the full-size geometry: 224x224 input, 14x14x320
/// features, 4 attention heads. `tiny_preset()` gives the desk-scale
/// configuration used by the fast experiments.
struct ModelConfig {
    int input_h = 224;
    int input_w = 224;
    int feature_channels = 320;
    int grid_h = 14;
    int grid_w = 14;
    int n_prev_pool = 4;
    int n_prev_pick = 2; // N_p, number of previous frames fused
    int attention_heads = 4;
    int attention_depth = 1;
    bool use_tpe = true;
    bool use_man = true;
    bool use_dcn = true;
    bool use_contour_loss = true;
    bool image_only = false; // degenerate mode: empty previous list, F_pre = 0
    double beta = 1.0;   // contour-loss coefficient on diagonal-normalized distances
    int n_c = 128;       // contour sample count for the evaluation-side estimator
    EncoderKind encoder = EncoderKind::paper_backbone;
    AttentionOrientation attention_orientation = AttentionOrientation::current_queries_previous;
    int dcn_kernel = 3;
    int spatial_attention_kernel = 7;
    int decoder_channels = 0; // 0 -> max(8, feature_channels / 8)
    bool symmetric_contour_distance = false;

    static ModelConfig tiny_preset();

    int decoder_channels_effective() const;
    void validate() const;
};

/// Optimizer settings. The seed fully determines initialization, data
/// order, and frame picking.
struct TrainConfig {
    int iterations = 1000;
    double learning_rate = 0.0001;
    int batch_size = 4;
    double momentum = 0.9;
    double weight_decay = 0.0001;
    std::uint64_t seed = 0;
    PickMode pick_mode = PickMode::random_k_of_m;
    LrSchedule lr_schedule = LrSchedule::constant; // linear_decay ramps to 10% of the initial rate

    void validate() const;
};

struct RunConfig {
    ModelConfig model;
    TrainConfig train;
};

std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

} // namespace fairway
