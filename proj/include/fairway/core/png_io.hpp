#pragma once

#include <filesystem>

#include "fairway/core/image.hpp"

namespace fairway {

// Thin libpng wrappers. Settings are pinned (8-bit, default compression)
// so repeated writes of the same pixels produce identical bytes.

void write_png_rgb8(const std::filesystem::path& path, const ImageU8& img);
void write_png_gray8(const std::filesystem::path& path, const ImageU8& img);
ImageU8 read_png(const std::filesystem::path& path); // returns 1- or 3-channel image

/// Masks are stored as grayscale PNG with values 0 / 255.
void write_mask_png(const std::filesystem::path& path, const MaskU8& mask);
MaskU8 read_mask_png(const std::filesystem::path& path);

} // namespace fairway
