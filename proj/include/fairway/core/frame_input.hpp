#pragma once

#include "fairway/core/config.hpp"
#include "fairway/core/dataset.hpp"
#include "fairway/core/tensor.hpp"

namespace fairway {

/// Frame image as a model input tensor: [0,1] floats resized bilinearly
/// to the configured input resolution.
Tensor frame_to_input(const ModelConfig& cfg, const Frame& frame);

/// Ground-truth mask at the model input resolution (nearest neighbour).
MaskU8 frame_mask_at_input(const ModelConfig& cfg, const Frame& frame);

} // namespace fairway
