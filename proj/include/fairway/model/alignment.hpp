#pragma once

#include <vector>

#include "fairway/ad/ops.hpp"
#include "fairway/core/config.hpp"
#include "fairway/core/rng.hpp"
#include "fairway/model/params.hpp"

namespace fairway {

/// A feature map paired with the timestamp of the frame it came from.
struct TimedFeature {
    ad::Var features; // (grid_h, grid_w, c)
    int timestamp = 0;
};

/// Registers encoder, temporal-gate, and deformable-convolution
/// parameters. Skips the offset branch when use_dcn is off and the gate
/// when use_tpe is off, so ablated models genuinely have fewer
/// parameters.
void init_alignment_params(const ModelConfig& cfg, ParamStore& store, Rng& rng);

/// Strided conv encoder from (input_h, input_w, 3) to the configured
/// feature grid. Throws on wrong input resolution.
ad::Var encode_frame(const ModelConfig& cfg, const ParamStore& store, const ad::Var& input);

/// Per-channel gate in (0,1) derived from the frame interval: sinusoidal
/// embedding of delta_t, one affine layer, then a sigmoid. With use_tpe
/// off this returns the all-ones vector.
ad::Var temporal_gate(const ModelConfig& cfg, const ParamStore& store, int delta_t);

/// Builds the sinusoidal interval embedding (standard alternating
/// sin/cos over log-spaced wavelengths); exposed for tests.
Tensor interval_embedding(int delta_t, int dim);

/// Deformable convolution with a learned offset branch; reduces to the
/// plain convolution when use_dcn is off.
ad::Var deformable_conv(const ModelConfig& cfg, const ParamStore& store, const ad::Var& features);

/// Pre-fusion sum over the selected previous frames:
/// F_pre = sum_j DCN(Y_j) * gate(current - t_j).
ad::Var prefuse(const ModelConfig& cfg, const ParamStore& store,
                const std::vector<TimedFeature>& previous, int current_timestamp);

} // namespace fairway
