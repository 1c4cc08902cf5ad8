#pragma once

#include "filter.hpp"
#include "raster.hpp"

#include <numbers>

namespace snakelets {

// Per-pixel gradient components, magnitude, and direction modulo pi.
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<float> gx, gy, magnitude, orientation;

    GradientField() = default;
    GradientField(int w, int h) : width(w), height(h) {
        const std::size_t n = static_cast<std::size_t>(w) * h;
        gx.assign(n, 0.0f);
        gy.assign(n, 0.0f);
        magnitude.assign(n, 0.0f);
        orientation.assign(n, 0.0f);
    }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

namespace detail {

inline float wrap_to_half_turn(double angle) {
    constexpr double pi = std::numbers::pi;
    if (angle < 0.0) angle += pi;
    if (angle >= pi) angle -= pi;
    return static_cast<float>(angle);
}

// Central differences with replicated borders on a smoothed channel.
inline void central_differences(const RasterImage& img, int channel, std::vector<float>& gx,
                                std::vector<float>& gy) {
    const int w = img.width, h = img.height;
    gx.assign(static_cast<std::size_t>(w) * h, 0.0f);
    gy.assign(static_cast<std::size_t>(w) * h, 0.0f);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const float xp = img.at(clamp_index(x + 1, w), y, channel);
            const float xm = img.at(clamp_index(x - 1, w), y, channel);
            const float yp = img.at(x, clamp_index(y + 1, h), channel);
            const float ym = img.at(x, clamp_index(y - 1, h), channel);
            gx[static_cast<std::size_t>(y) * w + x] = 0.5f * (xp - xm);
            gy[static_cast<std::size_t>(y) * w + x] = 0.5f * (yp - ym);
        }
    }
}

}  // namespace detail

// Gradient of a single-channel image: Gaussian smoothing followed by central
// differences.
inline GradientField gradient_gray(const RasterImage& img, double sigma) {
    if (img.channels != 1) throw std::invalid_argument("gradient_gray: single-channel image required");
    const RasterImage smooth = gaussian_smooth(img, sigma);

    GradientField field(img.width, img.height);
    detail::central_differences(smooth, 0, field.gx, field.gy);
    for (std::size_t i = 0; i < field.gx.size(); ++i) {
        const double dx = field.gx[i], dy = field.gy[i];
        field.magnitude[i] = static_cast<float>(std::sqrt(dx * dx + dy * dy));
        field.orientation[i] = detail::wrap_to_half_turn(std::atan2(dy, dx));
    }
    return field;
}

// Multi-channel gradient via the 2x2 structure tensor: magnitude is the square
// root of the dominant eigenvalue, orientation the dominant eigenvector angle.
inline GradientField gradient_color(const RasterImage& img, double sigma) {
    if (img.channels != 3) throw std::invalid_argument("gradient_color: 3-channel image required");
    const RasterImage smooth = gaussian_smooth(img, sigma);

    std::vector<float> cgx, cgy;
    const std::size_t n = img.pixel_count();
    std::vector<double> txx(n, 0.0), txy(n, 0.0), tyy(n, 0.0);
    for (int c = 0; c < 3; ++c) {
        detail::central_differences(smooth, c, cgx, cgy);
        for (std::size_t i = 0; i < n; ++i) {
            const double dx = cgx[i], dy = cgy[i];
            txx[i] += dx * dx;
            txy[i] += dx * dy;
            tyy[i] += dy * dy;
        }
    }

    GradientField field(img.width, img.height);
    for (std::size_t i = 0; i < n; ++i) {
        const double a = txx[i], b = txy[i], c = tyy[i];
        const double root = std::sqrt(0.25 * (a - c) * (a - c) + b * b);
        const double lambda_max = 0.5 * (a + c) + root;
        const double mag = std::sqrt(std::max(lambda_max, 0.0));
        const double theta = 0.5 * std::atan2(2.0 * b, a - c);
        field.magnitude[i] = static_cast<float>(mag);
        field.orientation[i] = detail::wrap_to_half_turn(theta);
        field.gx[i] = static_cast<float>(mag * std::cos(field.orientation[i]));
        field.gy[i] = static_cast<float>(mag * std::sin(field.orientation[i]));
    }
    return field;
}

// Non-maximum suppression along the gradient direction quantized to 4
// directions. A pixel survives iff it is >= both in-bounds neighbors and
// strictly greater than at least one of them; when no neighbor is in bounds it
// survives iff its magnitude is positive.
inline RasterImage nonmax_suppress(const GradientField& grad) {
    constexpr double pi = std::numbers::pi;
    static constexpr int offsets[4][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 1}};

    RasterImage out(grad.width, grad.height, 1);
    for (int y = 0; y < grad.height; ++y) {
        for (int x = 0; x < grad.width; ++x) {
            const std::size_t i = grad.index(x, y);
            const float m = grad.magnitude[i];
            if (m == 0.0f) continue;
            const int bin = static_cast<int>(std::floor(grad.orientation[i] / (pi / 4.0) + 0.5)) & 3;
            const int dx = offsets[bin][0], dy = offsets[bin][1];

            int present = 0;
            bool ge_all = true;
            bool gt_any = false;
            for (int s : {-1, 1}) {
                const int nx = x + s * dx, ny = y + s * dy;
                if (nx < 0 || nx >= grad.width || ny < 0 || ny >= grad.height) continue;
                ++present;
                const float nm = grad.magnitude[grad.index(nx, ny)];
                if (m < nm) ge_all = false;
                if (m > nm) gt_any = true;
            }
            const bool keep = present == 0 ? m > 0.0f : (ge_all && gt_any);
            if (keep) out.at(x, y) = m;
        }
    }
    return out;
}

}  // namespace snakelets
