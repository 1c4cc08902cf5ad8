#pragma once

#include "raster.hpp"

namespace snakelets {

// BT.601 luminance for 3-channel input; 1-channel input is returned unchanged.
inline RasterImage to_grayscale(const RasterImage& img) {
    if (img.channels == 1) return img;
    if (img.channels != 3) throw std::invalid_argument("to_grayscale: 1 or 3 channels required");
    RasterImage out(img.width, img.height, 1);
    for (std::size_t p = 0; p < img.pixel_count(); ++p) {
        const float r = img.data[p * 3 + 0];
        const float g = img.data[p * 3 + 1];
        const float b = img.data[p * 3 + 2];
        out.data[p] = 0.299f * r + 0.587f * g + 0.114f * b;
    }
    return out;
}

namespace detail {

// Half-sample symmetric reflection: ... 2 1 0 | 0 1 2 ... | n-1 n-2 ...
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

inline int clamp_index(int i, int n) { return i < 0 ? 0 : (i >= n ? n - 1 : i); }

// Truncated normalized Gaussian, radius ceil(3*sigma). Built symmetric so
// k[r+j] and k[r-j] are bitwise equal.
inline std::vector<double> gaussian_kernel(double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> k(2 * radius + 1);
    double sum = 0.0;
    for (int j = 0; j <= radius; ++j) {
        const double w = std::exp(-(static_cast<double>(j) * j) / (2.0 * sigma * sigma));
        k[radius + j] = w;
        k[radius - j] = w;
        sum += j == 0 ? w : 2.0 * w;
    }
    for (auto& w : k) w /= sum;
    return k;
}

}  // namespace detail

// Separable Gaussian convolution per channel with reflected borders.
// sigma = 0 is the identity.
inline RasterImage gaussian_smooth(const RasterImage& img, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_smooth: sigma must be nonnegative");
    if (sigma == 0.0) return img;

    const auto kernel = detail::gaussian_kernel(sigma);
    const int radius = static_cast<int>(kernel.size() / 2);
    const int w = img.width, h = img.height, ch = img.channels;

    RasterImage tmp(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int j = -radius; j <= radius; ++j)
                    acc += kernel[radius + j] * img.at(detail::reflect_index(x + j, w), y, c);
                tmp.at(x, y, c) = static_cast<float>(acc);
            }
        }
    }
    RasterImage out(w, h, ch);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double acc = 0.0;
                for (int j = -radius; j <= radius; ++j)
                    acc += kernel[radius + j] * tmp.at(x, detail::reflect_index(y + j, h), c);
                out.at(x, y, c) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

}  // namespace snakelets
