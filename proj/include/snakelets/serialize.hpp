#pragma once

#include "detect.hpp"
#include "eval.hpp"
#include "snakelet.hpp"

#include <map>
#include <sstream>

namespace snakelets {

// Line-delimited snakelet records:
//   id source_id state grow_head grow_tail npoints x0 y0 x1 y1 ...
// with 3-decimal fixed-precision coordinates.
inline std::string snakelet_records(const SnakeletSet& set) {
    std::ostringstream os;
    os << "# id source state head tail n x0 y0 ...\n";
    os.setf(std::ios::fixed);
    os.precision(3);
    for (const auto& s : set.snakelets) {
        os << s.id << ' ' << s.source_id << ' ' << to_string(s.state) << ' ' << (s.grow_head ? 1 : 0)
           << ' ' << (s.grow_tail ? 1 : 0) << ' ' << s.points.size();
        for (const auto& p : s.points) os << ' ' << p.x << ' ' << p.y;
        os << '\n';
    }
    return os.str();
}

namespace detail {

inline void append_polyline(std::ostringstream& os, const std::vector<Point>& pts) {
    os << "  <polyline fill=\"none\" stroke=\"#0000ff\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) os << ' ';
        os << pts[i].x << ',' << pts[i].y;
    }
    os << "\"/>\n";
}

}  // namespace detail

// SVG 1.1 document with one polyline per snakelet. With merge_chains, chain
// continuations are concatenated onto their parent into a single polyline.
inline std::string svg_polylines(const SnakeletSet& set, bool merge_chains = false) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(3);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << set.width
       << "\" height=\"" << set.height << "\" viewBox=\"0 0 " << set.width << ' ' << set.height
       << "\">\n";

    if (!merge_chains) {
        for (const auto& s : set.snakelets) detail::append_polyline(os, s.points);
    } else {
        std::map<int, std::size_t> by_id;
        std::map<int, std::size_t> child_of;  // parent id -> child index
        for (std::size_t i = 0; i < set.snakelets.size(); ++i) {
            by_id[set.snakelets[i].id] = i;
            if (set.snakelets[i].parent_id >= 0) child_of[set.snakelets[i].parent_id] = i;
        }
        for (const auto& s : set.snakelets) {
            if (s.parent_id >= 0 && by_id.count(s.parent_id)) continue;  // not a chain root
            std::vector<Point> pts = s.points;
            int cur = s.id;
            while (child_of.count(cur)) {
                const auto& child = set.snakelets[child_of[cur]];
                const bool dup = !pts.empty() && !child.points.empty() &&
                                 distance(pts.back(), child.points.front()) < 1e-6;
                pts.insert(pts.end(), child.points.begin() + (dup ? 1 : 0), child.points.end());
                cur = child.id;
            }
            detail::append_polyline(os, pts);
        }
    }
    os << "</svg>\n";
    return os.str();
}

// Metrics serialized as a key: value report.
inline std::string metrics_report(const Metrics& m) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << "precision: " << m.precision << '\n'
       << "recall: " << m.recall << '\n'
       << "f1: " << m.f1 << '\n'
       << "gap_closure_rate: " << m.gap_closure_rate << '\n'
       << "mean_contour_distance: " << m.mean_contour_distance << '\n';
    return os.str();
}

// Snakelets drawn in blue over the NMS image (display-scaled to its maximum).
inline RasterImage overlay_image(const RasterImage& nms, const SnakeletSet& set) {
    if (nms.channels != 1) throw std::invalid_argument("overlay_image: single-channel NMS required");
    float peak = 0.0f;
    for (float v : nms.data) peak = std::max(peak, v);
    const float scale = peak > 0.0f ? 1.0f / peak : 1.0f;

    RasterImage rgb(nms.width, nms.height, 3);
    for (std::size_t p = 0; p < nms.pixel_count(); ++p) {
        const float v = nms.data[p] * scale;
        rgb.data[p * 3 + 0] = v;
        rgb.data[p * 3 + 1] = v;
        rgb.data[p * 3 + 2] = v;
    }
    for (const auto& s : set.snakelets) {
        for (std::size_t i = 1; i < s.points.size(); ++i) {
            supercover_line(s.points[i - 1], s.points[i], [&](int x, int y) {
                if (!rgb.in_bounds(x, y)) return;
                rgb.at(x, y, 0) = 0.0f;
                rgb.at(x, y, 1) = 0.0f;
                rgb.at(x, y, 2) = 1.0f;
            });
        }
    }
    return rgb;
}

}  // namespace snakelets
