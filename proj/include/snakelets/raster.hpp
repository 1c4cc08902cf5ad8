#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace snakelets {

// Row-major pixel grid, 1 or 3 channels, samples normalized to [0, 1].
struct RasterImage {
    int width = 0;
    int height = 0;
    int channels = 1;
    std::vector<float> data;

    RasterImage() = default;
    RasterImage(int w, int h, int c = 1, float fill = 0.0f) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("RasterImage: width and height must be positive");
        if (c != 1 && c != 3)
            throw std::invalid_argument("RasterImage: channels must be 1 or 3");
        width = w;
        height = h;
        channels = c;
        data.assign(static_cast<std::size_t>(w) * h * c, fill);
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

    float& at(int x, int y, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    float at(int x, int y, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
};

// Clamped bilinear sample of a single-channel image at a subpixel position.
inline double bilinear(const RasterImage& img, double x, double y) {
    const int w = img.width, h = img.height;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0;
    const double fy = y - y0;
    return (1.0 - fx) * (1.0 - fy) * img.at(x0, y0) + fx * (1.0 - fy) * img.at(x1, y0) +
           (1.0 - fx) * fy * img.at(x0, y1) + fx * fy * img.at(x1, y1);
}

// Boolean pixel grid of edge membership.
struct BinaryEdgeMap {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> membership;

    BinaryEdgeMap() = default;
    BinaryEdgeMap(int w, int h) {
        if (w <= 0 || h <= 0)
            throw std::invalid_argument("BinaryEdgeMap: width and height must be positive");
        width = w;
        height = h;
        membership.assign(static_cast<std::size_t>(w) * h, 0);
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool at(int x, int y) const { return membership[static_cast<std::size_t>(y) * width + x] != 0; }
    void set(int x, int y, bool v = true) {
        membership[static_cast<std::size_t>(y) * width + x] = v ? 1 : 0;
    }

    int count() const {
        int n = 0;
        for (auto m : membership) n += (m != 0);
        return n;
    }

    RasterImage to_image() const {
        RasterImage img(width, height, 1);
        for (std::size_t i = 0; i < membership.size(); ++i) img.data[i] = membership[i] ? 1.0f : 0.0f;
        return img;
    }

    static BinaryEdgeMap from_image(const RasterImage& img, float threshold = 0.5f) {
        if (img.channels != 1)
            throw std::invalid_argument("BinaryEdgeMap::from_image: single-channel image required");
        BinaryEdgeMap map(img.width, img.height);
        for (std::size_t i = 0; i < img.data.size(); ++i) map.membership[i] = img.data[i] > threshold;
        return map;
    }
};

}  // namespace snakelets
