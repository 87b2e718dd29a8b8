#include "fairway/core/frame_input.hpp"

#include "fairway/core/error.hpp"

namespace fairway {

Tensor frame_to_input(const ModelConfig& cfg, const Frame& frame) {
    return resize_bilinear(image_to_tensor(frame.image), cfg.input_h, cfg.input_w);
}

MaskU8 frame_mask_at_input(const ModelConfig& cfg, const Frame& frame) {
    if (!frame.mask) throw ValidationError("frame has no mask");
    return resize_mask_nearest(*frame.mask, cfg.input_h, cfg.input_w);
}

} // namespace fairway
