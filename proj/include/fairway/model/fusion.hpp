#pragma once

#include <filesystem>
#include <vector>

#include "fairway/core/frame_input.hpp"
#include "fairway/model/alignment.hpp"

namespace fairway {

void init_fusion_params(const ModelConfig& cfg, ParamStore& store, Rng& rng);

/// Builds every model parameter (alignment + fusion) with a seeded
/// initialization.
ParamStore build_model(const ModelConfig& cfg, std::uint64_t seed);

/// Multi-head cross attention between the current features and the
/// pre-fused previous features, with a residual connection onto the
/// current features. Query comes from the current frame by default
/// (configurable via attention_orientation).
ad::Var cross_attend(const ModelConfig& cfg, const ParamStore& store, const ad::Var& f_x,
                     const ad::Var& f_pre);

/// CBAM-style spatial gate: channel mean/max maps -> conv -> sigmoid,
/// multiplied into every channel.
ad::Var spatial_attend(const ModelConfig& cfg, const ParamStore& store, const ad::Var& fused);

/// Two conv blocks with bilinear upsampling, lifting grid features to
/// (input_h, input_w, 2) logits.
ad::Var decode(const ModelConfig& cfg, const ParamStore& store, const ad::Var& fused);

/// Full forward pass. `previous` may be empty only for the image-only
/// mode, in which case F_pre is the zero map. With use_man off the
/// cross attention is replaced by elementwise addition.
ad::Var model_forward(const ModelConfig& cfg, const ParamStore& store, const Tensor& current,
                      const std::vector<std::pair<Tensor, int>>& previous, int current_timestamp);

// Checkpoint archive: format tag + JSON header (model config and array
// manifest) + raw little-endian doubles keyed by dotted parameter path.
void save_checkpoint(const std::filesystem::path& path, const ModelConfig& cfg,
                     const ParamStore& store);
struct Checkpoint {
    ModelConfig config;
    ParamStore params;
};
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace fairway
