#include "fairway/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fairway {

namespace {

// 5x7 bitmap font, one byte per row, low 5 bits used.
struct Glyph {
    char ch;
    std::uint8_t rows[7];
};

constexpr Glyph kFont[] = {
    {' ', {0, 0, 0, 0, 0, 0, 0}},
    {'.', {0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C}},
    {',', {0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08}},
    {'-', {0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00}},
    {'_', {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F}},
    {':', {0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00}},
    {'/', {0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10}},
    {'%', {0x19, 0x19, 0x02, 0x04, 0x08, 0x13, 0x13}},
    {'(', {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02}},
    {')', {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08}},
    {'=', {0x00, 0x00, 0x1F, 0x00, 0x1F, 0x00, 0x00}},
    {'+', {0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00}},
    {'0', {0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E}},
    {'1', {0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'2', {0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F}},
    {'3', {0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E}},
    {'4', {0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02}},
    {'5', {0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E}},
    {'6', {0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E}},
    {'7', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08}},
    {'8', {0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E}},
    {'9', {0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C}},
    {'A', {0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'B', {0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E}},
    {'C', {0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E}},
    {'D', {0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C}},
    {'E', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F}},
    {'F', {0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10}},
    {'G', {0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F}},
    {'H', {0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11}},
    {'I', {0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E}},
    {'J', {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C}},
    {'K', {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11}},
    {'L', {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F}},
    {'M', {0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11}},
    {'N', {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11}},
    {'O', {0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'P', {0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10}},
    {'Q', {0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D}},
    {'R', {0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11}},
    {'S', {0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E}},
    {'T', {0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04}},
    {'U', {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E}},
    {'V', {0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04}},
    {'W', {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A}},
    {'X', {0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11}},
    {'Y', {0x11, 0x11, 0x0A, 0x04, 0x04, 0x04, 0x04}},
    {'Z', {0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F}},
};

const Glyph* find_glyph(char c) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (const auto& g : kFont)
        if (g.ch == up) return &g;
    return nullptr;
}

void put_pixel(ImageU8& img, int y, int x, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    if (y < 0 || y >= img.height || x < 0 || x >= img.width) return;
    img.at(y, x, 0) = r;
    img.at(y, x, 1) = g;
    img.at(y, x, 2) = b;
}

void draw_line(ImageU8& img, double y0, double x0, double y1, double x1, std::uint8_t r,
               std::uint8_t g, std::uint8_t b) {
    const double steps = std::max(std::fabs(y1 - y0), std::fabs(x1 - x0)) + 1.0;
    const int n = static_cast<int>(std::ceil(steps)) * 2;
    for (int i = 0; i <= n; ++i) {
        const double t = static_cast<double>(i) / n;
        put_pixel(img, static_cast<int>(std::lround(y0 + (y1 - y0) * t)),
                  static_cast<int>(std::lround(x0 + (x1 - x0) * t)), r, g, b);
    }
}

std::string format_tick(double v) {
    char buf[32];
    if (std::fabs(v) >= 1000.0 || v == std::floor(v))
        std::snprintf(buf, sizeof(buf), "%.0f", v);
    else
        std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

} // namespace

void draw_text(ImageU8& img, int y, int x, const std::string& text, int scale, std::uint8_t r,
               std::uint8_t g, std::uint8_t b) {
    int cx = x;
    for (char c : text) {
        const Glyph* gl = find_glyph(c);
        if (gl) {
            for (int row = 0; row < 7; ++row)
                for (int col = 0; col < 5; ++col)
                    if (gl->rows[row] & (1 << (4 - col)))
                        for (int sy = 0; sy < scale; ++sy)
                            for (int sx = 0; sx < scale; ++sx)
                                put_pixel(img, y + row * scale + sy, cx + col * scale + sx, r, g, b);
        }
        cx += 6 * scale;
    }
}

ImageU8 render_line_chart(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series,
                          int width, int height) {
    ImageU8 img(height, width, 3);
    std::fill(img.pixels.begin(), img.pixels.end(), 255);

    const int ml = 70, mr = 20, mt = 40, mb = 50;
    const int px0 = ml, px1 = width - mr, py0 = mt, py1 = height - mb;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (first) {
                xmin = xmax = s.x[i];
                ymin = ymax = s.y[i];
                first = false;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmax <= xmin) xmax = xmin + 1;
    if (ymax <= ymin) ymax = ymin + 1;
    ymin = std::min(ymin, 0.0);

    auto sx = [&](double v) { return px0 + (v - xmin) / (xmax - xmin) * (px1 - px0); };
    auto sy = [&](double v) { return py1 - (v - ymin) / (ymax - ymin) * (py1 - py0); };

    // Grid + ticks
    for (int i = 0; i <= 5; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 5.0;
        const double yv = ymin + (ymax - ymin) * i / 5.0;
        draw_line(img, py0, sx(xv), py1, sx(xv), 225, 225, 225);
        draw_line(img, sy(yv), px0, sy(yv), px1, 225, 225, 225);
        draw_text(img, py1 + 8, static_cast<int>(sx(xv)) - 10, format_tick(xv), 1, 60, 60, 60);
        draw_text(img, static_cast<int>(sy(yv)) - 3, 8, format_tick(yv), 1, 60, 60, 60);
    }
    draw_line(img, py1, px0, py1, px1, 0, 0, 0);
    draw_line(img, py0, px0, py1, px0, 0, 0, 0);

    for (const auto& s : series)
        for (std::size_t i = 1; i < s.x.size(); ++i)
            draw_line(img, sy(s.y[i - 1]), sx(s.x[i - 1]), sy(s.y[i]), sx(s.x[i]), s.r, s.g, s.b);

    draw_text(img, 10, ml, title, 2, 0, 0, 0);
    draw_text(img, height - 20, (px0 + px1) / 2 - 3 * static_cast<int>(x_label.size()), x_label, 1,
              0, 0, 0);
    draw_text(img, py0 - 14, 8, y_label, 1, 0, 0, 0);
    int ly = py0 + 6;
    for (const auto& s : series) {
        draw_line(img, ly + 3, px1 - 150, ly + 3, px1 - 130, s.r, s.g, s.b);
        draw_text(img, ly, px1 - 124, s.label, 1, 0, 0, 0);
        ly += 14;
    }
    return img;
}

ImageU8 render_text_table(const std::string& title, const std::vector<std::string>& lines,
                          int scale) {
    std::size_t max_len = title.size();
    for (const auto& l : lines) max_len = std::max(max_len, l.size());
    const int width = static_cast<int>(max_len) * 6 * scale + 40;
    const int height = (static_cast<int>(lines.size()) + 2) * 10 * scale + 40;
    ImageU8 img(height, width, 3);
    std::fill(img.pixels.begin(), img.pixels.end(), 255);
    draw_text(img, 14, 20, title, scale, 0, 0, 0);
    int y = 14 + 14 * scale;
    for (const auto& l : lines) {
        draw_text(img, y, 20, l, scale, 20, 20, 20);
        y += 10 * scale;
    }
    return img;
}

} // namespace fairway
