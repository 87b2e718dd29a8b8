#include "fairway/core/image.hpp"

#include <algorithm>
#include <cmath>

#include "fairway/core/error.hpp"

namespace fairway {

std::size_t MaskU8::count_ones() const {
    std::size_t n = 0;
    for (auto v : values) n += v;
    return n;
}

Tensor image_to_tensor(const ImageU8& img) {
    if (img.channels != 3) throw ValidationError("image_to_tensor expects 3 channels");
    Tensor t({img.height, img.width, 3});
    const double inv = 1.0 / 255.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) t[i] = img.pixels[i] * inv;
    return t;
}

ImageU8 tensor_to_image(const Tensor& t) {
    if (t.rank() != 3 || t.dim(2) != 3) throw ValidationError("tensor_to_image expects (h,w,3)");
    ImageU8 img(t.dim(0), t.dim(1), 3);
    for (std::size_t i = 0; i < t.numel(); ++i) {
        double v = std::clamp(t[i], 0.0, 1.0);
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(v * 255.0));
    }
    return img;
}

Tensor resize_bilinear(const Tensor& src, int out_h, int out_w) {
    if (src.rank() != 3) throw ValidationError("resize_bilinear expects rank-3 tensor");
    const int h = src.dim(0), w = src.dim(1), c = src.dim(2);
    if (h == out_h && w == out_w) return src;
    Tensor dst({out_h, out_w, c});
    const double sy = static_cast<double>(h) / out_h;
    const double sx = static_cast<double>(w) / out_w;
    for (int y = 0; y < out_h; ++y) {
        double fy = (y + 0.5) * sy - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(h - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, h - 1);
        const double wy = fy - y0;
        for (int x = 0; x < out_w; ++x) {
            double fx = (x + 0.5) * sx - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(w - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, w - 1);
            const double wx = fx - x0;
            for (int ch = 0; ch < c; ++ch) {
                const double top = src.at3(y0, x0, ch) * (1 - wx) + src.at3(y0, x1, ch) * wx;
                const double bot = src.at3(y1, x0, ch) * (1 - wx) + src.at3(y1, x1, ch) * wx;
                dst.at3(y, x, ch) = top * (1 - wy) + bot * wy;
            }
        }
    }
    return dst;
}

MaskU8 resize_mask_nearest(const MaskU8& src, int out_h, int out_w) {
    if (src.height == out_h && src.width == out_w) return src;
    MaskU8 dst(out_h, out_w);
    const double sy = static_cast<double>(src.height) / out_h;
    const double sx = static_cast<double>(src.width) / out_w;
    for (int y = 0; y < out_h; ++y) {
        int yy = std::min(static_cast<int>((y + 0.5) * sy), src.height - 1);
        for (int x = 0; x < out_w; ++x) {
            int xx = std::min(static_cast<int>((x + 0.5) * sx), src.width - 1);
            dst.at(y, x) = src.at(yy, xx);
        }
    }
    return dst;
}

void validate_mask_binary(const MaskU8& mask, const char* where) {
    for (auto v : mask.values) {
        if (v != 0 && v != 1)
            throw ValidationError(std::string(where) + ": mask values must be 0 or 1");
    }
}

} // namespace fairway
