#pragma once

#include <cstdint>
#include <vector>

#include "fairway/core/image.hpp"

namespace fairway {

struct Point2d {
    double y = 0.0;
    double x = 0.0;
};

/// Shoreline boundary extracted from a binary mask. Points lie on the
/// half-pixel grid between water and background pixels (pixel centers sit
/// at integer coordinates). A mask with several water blobs produces one
/// chain per closed or border-terminated boundary piece; closed loops
/// repeat their first point at the end.
struct ContourPolyline {
    std::vector<std::vector<Point2d>> chains;

    bool empty() const { return chains.empty(); }
    double total_length() const;
    std::size_t point_count() const;
};

/// Marching-squares boundary of the water region. Image-border edges are
/// not part of the contour: a mask that is all water (or all background)
/// has no boundary. Throws ValidationError on non-binary input.
ContourPolyline mask_to_contour(const MaskU8& mask);

/// Nearest-segment query structure over a polyline. Exact Euclidean
/// point-to-segment distances; the column-sorted index only prunes.
class ContourIndex {
public:
    explicit ContourIndex(const ContourPolyline& contour);

    bool empty() const { return segments_.empty(); }
    double distance(double y, double x) const;

    struct Segment {
        Point2d a, b;
    };
    const std::vector<Segment>& segments() const { return segments_; }

private:
    std::vector<Segment> segments_;
    std::vector<int> by_center_x_; // segment ids sorted by center x
    std::vector<double> center_x_sorted_;
    double max_half_len_ = 0.0;
};

double point_segment_distance(double y, double x, const Point2d& a, const Point2d& b);

} // namespace fairway
