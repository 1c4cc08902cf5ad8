#pragma once

#include "gradient.hpp"
#include "raster.hpp"

namespace snakelets {

// Hysteresis thresholds on [0,1]-normalized magnitudes.
struct Thresholds {
    double high = 0.2;
    double low = 0.05;

    void validate() const {
        if (!(low >= 0.0 && low <= high && high <= 1.0))
            throw std::invalid_argument("Thresholds: need 0 <= low <= high <= 1");
    }
};

// A pixel is an edge iff its value exceeds the low threshold and it is
// 8-connected through such pixels to a pixel at or above the high threshold.
inline BinaryEdgeMap hysteresis(const RasterImage& nms, const Thresholds& th) {
    if (nms.channels != 1) throw std::invalid_argument("hysteresis: single-channel image required");
    th.validate();

    const int w = nms.width, h = nms.height;
    BinaryEdgeMap edges(w, h);
    std::vector<std::size_t> stack;
    stack.reserve(256);

    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * w + x;
            if (nms.data[i] >= th.high && nms.data[i] > th.low && !edges.membership[i]) {
                edges.membership[i] = 1;
                stack.push_back(i);
                while (!stack.empty()) {
                    const std::size_t p = stack.back();
                    stack.pop_back();
                    const int px = static_cast<int>(p % w);
                    const int py = static_cast<int>(p / w);
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            if (dx == 0 && dy == 0) continue;
                            const int nx = px + dx, ny = py + dy;
                            if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                            const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
                            if (!edges.membership[q] && nms.data[q] > th.low) {
                                edges.membership[q] = 1;
                                stack.push_back(q);
                            }
                        }
                    }
                }
            }
        }
    }
    return edges;
}

// Classic four-stage pipeline: smoothing + gradient (by channel count),
// non-maximum suppression, hysteresis linking.
inline BinaryEdgeMap canny_detect(const RasterImage& img, double sigma, const Thresholds& th) {
    th.validate();
    const GradientField grad =
        img.channels == 3 ? gradient_color(img, sigma) : gradient_gray(img, sigma);
    return hysteresis(nonmax_suppress(grad), th);
}

// Maps a fractile of the positive magnitudes to an absolute threshold value.
// Convenience for threshold specification; the core operations stay absolute.
inline double magnitude_fractile(const RasterImage& nms, double fractile) {
    if (!(fractile >= 0.0 && fractile < 1.0))
        throw std::invalid_argument("magnitude_fractile: fractile must lie in [0, 1)");
    std::vector<float> positive;
    positive.reserve(nms.data.size());
    for (float v : nms.data)
        if (v > 0.0f) positive.push_back(v);
    if (positive.empty()) return 0.0;
    std::sort(positive.begin(), positive.end());
    const std::size_t idx = static_cast<std::size_t>(fractile * positive.size());
    return positive[std::min(idx, positive.size() - 1)];
}

}  // namespace snakelets
