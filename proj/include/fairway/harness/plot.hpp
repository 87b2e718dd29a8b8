#pragma once

#include <string>
#include <vector>

#include "fairway/core/image.hpp"

namespace fairway {

struct PlotSeries {
    std::string label;
    std::uint8_t r = 0, g = 0, b = 0;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal line chart with axes, ticks, and a legend; enough for loss
/// curves and per-frame metric traces.
ImageU8 render_line_chart(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<PlotSeries>& series,
                          int width = 900, int height = 540);

/// Fixed-width text table rendered with the built-in 5x7 font.
ImageU8 render_text_table(const std::string& title, const std::vector<std::string>& lines,
                          int scale = 2);

void draw_text(ImageU8& img, int y, int x, const std::string& text, int scale, std::uint8_t r,
               std::uint8_t g, std::uint8_t b);

} // namespace fairway
