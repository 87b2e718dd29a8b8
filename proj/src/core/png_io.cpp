#include "fairway/core/png_io.hpp"

#include <png.h>

#include <cstdio>
#include <memory>
#include <vector>

#include "fairway/core/error.hpp"

namespace fairway {

namespace {

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

void write_png_impl(const std::filesystem::path& path, const ImageU8& img, int color_type) {
    FilePtr fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot open for writing: " + path.string());

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_write_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng write error: " + path.string());
    }
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    // No text chunks, no timestamps: output depends only on the pixels.
    png_write_info(png, info);

    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] =
            const_cast<png_bytep>(img.pixels.data() + static_cast<std::size_t>(y) * stride);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

} // namespace

void write_png_rgb8(const std::filesystem::path& path, const ImageU8& img) {
    if (img.channels != 3) throw ValidationError("write_png_rgb8 expects 3 channels");
    write_png_impl(path, img, PNG_COLOR_TYPE_RGB);
}

void write_png_gray8(const std::filesystem::path& path, const ImageU8& img) {
    if (img.channels != 1) throw ValidationError("write_png_gray8 expects 1 channel");
    write_png_impl(path, img, PNG_COLOR_TYPE_GRAY);
}

ImageU8 read_png(const std::filesystem::path& path) {
    FilePtr fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open for reading: " + path.string());

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw IoError("png_create_read_struct failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw IoError("png_create_info_struct failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("not a valid PNG file: " + path.string());
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int bit_depth = png_get_bit_depth(png, info);
    int color_type = png_get_color_type(png, info);

    if (bit_depth == 16) png_set_strip_16(png);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    if (color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw FormatError("unsupported PNG channel count in " + path.string());
    }

    ImageU8 img(static_cast<int>(h), static_cast<int>(w), channels);
    std::vector<png_bytep> rows(h);
    const std::size_t stride = static_cast<std::size_t>(w) * channels;
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = img.pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return img;
}

void write_mask_png(const std::filesystem::path& path, const MaskU8& mask) {
    ImageU8 img(mask.height, mask.width, 1);
    for (std::size_t i = 0; i < mask.values.size(); ++i)
        img.pixels[i] = mask.values[i] ? 255 : 0;
    write_png_gray8(path, img);
}

MaskU8 read_mask_png(const std::filesystem::path& path) {
    ImageU8 img = read_png(path);
    if (img.channels != 1)
        throw FormatError("mask PNG must be grayscale: " + path.string());
    MaskU8 mask(img.height, img.width);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const auto v = img.pixels[i];
        if (v != 0 && v != 255)
            throw ValidationError("mask PNG must contain only 0 or 255: " + path.string());
        mask.values[i] = v ? 1 : 0;
    }
    return mask;
}

} // namespace fairway
