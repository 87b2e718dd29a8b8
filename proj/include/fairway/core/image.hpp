#pragma once

#include <cstdint>
#include <vector>

#include "fairway/core/tensor.hpp"

namespace fairway {

/// 8-bit interleaved image, `channels` is 1 or 3.
struct ImageU8 {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<std::uint8_t> pixels; // row-major, interleaved

    ImageU8() = default;
    ImageU8(int h, int w, int c)
        : height(h), width(w), channels(c),
          pixels(static_cast<std::size_t>(h) * w * c, 0) {}

    std::uint8_t& at(int y, int x, int c) {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    std::uint8_t at(int y, int x, int c) const {
        return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
};

/// Binary label grid, values are exactly 0 or 1.
struct MaskU8 {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> values;

    MaskU8() = default;
    MaskU8(int h, int w) : height(h), width(w), values(static_cast<std::size_t>(h) * w, 0) {}

    std::uint8_t& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
    std::size_t count_ones() const;
    bool operator==(const MaskU8& o) const = default;
};

/// Converts to a (h, w, 3) float tensor in [0, 1].
Tensor image_to_tensor(const ImageU8& img);
ImageU8 tensor_to_image(const Tensor& t); // clamps to [0,1], rounds to 8 bit

/// Bilinear resize of an RGB image expressed as a (h, w, 3) tensor.
Tensor resize_bilinear(const Tensor& src, int out_h, int out_w);
/// Nearest-neighbour resize for label grids.
MaskU8 resize_mask_nearest(const MaskU8& src, int out_h, int out_w);

void validate_mask_binary(const MaskU8& mask, const char* where);

} // namespace fairway
