#include "fairway/core/contour.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "fairway/core/error.hpp"

namespace fairway {

double ContourPolyline::total_length() const {
    double len = 0.0;
    for (const auto& chain : chains) {
        for (std::size_t i = 1; i < chain.size(); ++i) {
            const double dy = chain[i].y - chain[i - 1].y;
            const double dx = chain[i].x - chain[i - 1].x;
            len += std::sqrt(dy * dy + dx * dx);
        }
    }
    return len;
}

std::size_t ContourPolyline::point_count() const {
    std::size_t n = 0;
    for (const auto& chain : chains) n += chain.size();
    return n;
}

namespace {

// Crossing sites sit on pixel-pair edges. 'H' edges join (r,c)-(r,c+1)
// at point (r, c+0.5); 'V' edges join (r,c)-(r+1,c) at point (r+0.5, c).
struct EdgeKey {
    std::int64_t id;
    bool operator<(const EdgeKey& o) const { return id < o.id; }
};

EdgeKey h_edge(int r, int c, int w) { return {2 * (static_cast<std::int64_t>(r) * w + c)}; }
EdgeKey v_edge(int r, int c, int w) { return {2 * (static_cast<std::int64_t>(r) * w + c) + 1}; }

Point2d edge_point(EdgeKey k, int w) {
    const bool vertical = (k.id & 1) != 0;
    const std::int64_t cell = k.id >> 1;
    const int r = static_cast<int>(cell / w);
    const int c = static_cast<int>(cell % w);
    if (vertical) return {r + 0.5, static_cast<double>(c)};
    return {static_cast<double>(r), c + 0.5};
}

struct RawSegment {
    EdgeKey a, b;
};

} // namespace

ContourPolyline mask_to_contour(const MaskU8& mask) {
    validate_mask_binary(mask, "mask_to_contour");
    const int h = mask.height, w = mask.width;
    ContourPolyline out;
    if (h < 2 || w < 2) return out;

    std::vector<RawSegment> segments;
    for (int r = 0; r + 1 < h; ++r) {
        for (int c = 0; c + 1 < w; ++c) {
            const int tl = mask.at(r, c), tr = mask.at(r, c + 1);
            const int bl = mask.at(r + 1, c), br = mask.at(r + 1, c + 1);
            const int code = tl | (tr << 1) | (bl << 2) | (br << 3);
            if (code == 0 || code == 15) continue;
            const EdgeKey T = h_edge(r, c, w);
            const EdgeKey B = h_edge(r + 1, c, w);
            const EdgeKey L = v_edge(r, c, w);
            const EdgeKey R = v_edge(r, c + 1, w);
            switch (code) {
                case 1:  segments.push_back({T, L}); break;            // tl
                case 2:  segments.push_back({T, R}); break;            // tr
                case 4:  segments.push_back({L, B}); break;            // bl
                case 8:  segments.push_back({R, B}); break;            // br
                case 3:  segments.push_back({L, R}); break;            // top row water
                case 12: segments.push_back({L, R}); break;            // bottom row water
                case 5:  segments.push_back({T, B}); break;            // left column water
                case 10: segments.push_back({T, B}); break;            // right column water
                case 7:  segments.push_back({R, B}); break;            // all but br
                case 11: segments.push_back({L, B}); break;            // all but bl
                case 13: segments.push_back({T, R}); break;            // all but tr
                case 14: segments.push_back({T, L}); break;            // all but tl
                case 9:  // tl+br saddle: keep the two corners separate
                    segments.push_back({T, L});
                    segments.push_back({R, B});
                    break;
                case 6:  // tr+bl saddle
                    segments.push_back({T, R});
                    segments.push_back({L, B});
                    break;
                default: break;
            }
        }
    }
    if (segments.empty()) return out;

    // Stitch segments into chains. Open chains end at image-border edges
    // (degree-1 sites); everything left over is a closed loop.
    std::map<std::int64_t, std::vector<int>> incident;
    for (int i = 0; i < static_cast<int>(segments.size()); ++i) {
        incident[segments[i].a.id].push_back(i);
        incident[segments[i].b.id].push_back(i);
    }
    std::vector<char> used(segments.size(), 0);

    auto walk = [&](std::int64_t start) {
        std::vector<Point2d> chain;
        chain.push_back(edge_point({start}, w));
        std::int64_t cur = start;
        while (true) {
            int next_seg = -1;
            for (int si : incident[cur]) {
                if (!used[static_cast<std::size_t>(si)]) {
                    next_seg = si;
                    break;
                }
            }
            if (next_seg < 0) break;
            used[static_cast<std::size_t>(next_seg)] = 1;
            const auto& s = segments[static_cast<std::size_t>(next_seg)];
            cur = (s.a.id == cur) ? s.b.id : s.a.id;
            chain.push_back(edge_point({cur}, w));
        }
        return chain;
    };

    // Degree-1 sites first so open chains start at their true endpoints.
    for (const auto& [key, segs] : incident) {
        if (segs.size() != 1) continue;
        if (used[static_cast<std::size_t>(segs[0])]) continue;
        out.chains.push_back(walk(key));
    }
    for (const auto& [key, segs] : incident) {
        bool any_unused = false;
        for (int si : segs)
            if (!used[static_cast<std::size_t>(si)]) any_unused = true;
        if (!any_unused) continue;
        out.chains.push_back(walk(key)); // closed loop, returns to start
    }
    return out;
}

double point_segment_distance(double y, double x, const Point2d& a, const Point2d& b) {
    const double vy = b.y - a.y, vx = b.x - a.x;
    const double len2 = vy * vy + vx * vx;
    double t = 0.0;
    if (len2 > 0.0) t = std::clamp(((y - a.y) * vy + (x - a.x) * vx) / len2, 0.0, 1.0);
    const double py = a.y + t * vy - y;
    const double px = a.x + t * vx - x;
    return std::sqrt(py * py + px * px);
}

ContourIndex::ContourIndex(const ContourPolyline& contour) {
    for (const auto& chain : contour.chains) {
        for (std::size_t i = 1; i < chain.size(); ++i) {
            segments_.push_back({chain[i - 1], chain[i]});
            const double dy = chain[i].y - chain[i - 1].y;
            const double dx = chain[i].x - chain[i - 1].x;
            max_half_len_ = std::max(max_half_len_, 0.5 * std::sqrt(dy * dy + dx * dx));
        }
        if (chain.size() == 1) segments_.push_back({chain[0], chain[0]});
    }
    by_center_x_.resize(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) by_center_x_[i] = static_cast<int>(i);
    std::sort(by_center_x_.begin(), by_center_x_.end(), [this](int a, int b) {
        const double ca = 0.5 * (segments_[static_cast<std::size_t>(a)].a.x +
                                 segments_[static_cast<std::size_t>(a)].b.x);
        const double cb = 0.5 * (segments_[static_cast<std::size_t>(b)].a.x +
                                 segments_[static_cast<std::size_t>(b)].b.x);
        if (ca != cb) return ca < cb;
        return a < b;
    });
    center_x_sorted_.resize(segments_.size());
    for (std::size_t i = 0; i < segments_.size(); ++i) {
        const auto& s = segments_[static_cast<std::size_t>(by_center_x_[i])];
        center_x_sorted_[i] = 0.5 * (s.a.x + s.b.x);
    }
}

double ContourIndex::distance(double y, double x) const {
    if (segments_.empty()) return std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(segments_.size());
    // Expand outward from the nearest column; a segment whose center x is
    // further away than best + max_half_len cannot improve the answer.
    const auto it = std::lower_bound(center_x_sorted_.begin(), center_x_sorted_.end(), x);
    int right = static_cast<int>(it - center_x_sorted_.begin());
    int left = right - 1;
    double best = std::numeric_limits<double>::infinity();
    while (left >= 0 || right < n) {
        const double dl = (left >= 0) ? std::fabs(center_x_sorted_[static_cast<std::size_t>(left)] - x)
                                      : std::numeric_limits<double>::infinity();
        const double dr = (right < n) ? std::fabs(center_x_sorted_[static_cast<std::size_t>(right)] - x)
                                      : std::numeric_limits<double>::infinity();
        const bool take_left = dl <= dr;
        const double col_dist = take_left ? dl : dr;
        if (col_dist - max_half_len_ > best) break;
        const int idx = take_left ? left-- : right++;
        const auto& s = segments_[static_cast<std::size_t>(by_center_x_[static_cast<std::size_t>(idx)])];
        best = std::min(best, point_segment_distance(y, x, s.a, s.b));
    }
    return best;
}

} // namespace fairway
