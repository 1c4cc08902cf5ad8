#include <snakelets/filter.hpp>
#include <snakelets/gradient.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <numbers>

#include "test_helpers.hpp"

using namespace snakelets;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct 2-D Gaussian convolution + central differences, the brute-force
// oracle for the gradient pipeline.
void oracle_gradient(const RasterImage& img, double sigma, std::vector<double>& gx,
                     std::vector<double>& gy) {
    const int w = img.width, h = img.height;
    std::vector<double> smooth(static_cast<std::size_t>(w) * h);
    if (sigma > 0.0) {
        const int r = static_cast<int>(std::ceil(3.0 * sigma));
        double ksum = 0.0;
        std::vector<std::vector<double>> k(2 * r + 1, std::vector<double>(2 * r + 1));
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx) {
                k[dy + r][dx + r] = std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
                ksum += k[dy + r][dx + r];
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int dy = -r; dy <= r; ++dy)
                    for (int dx = -r; dx <= r; ++dx)
                        acc += k[dy + r][dx + r] / ksum *
                               img.at(detail::reflect_index(x + dx, w), detail::reflect_index(y + dy, h));
                smooth[static_cast<std::size_t>(y) * w + x] = acc;
            }
    } else {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) smooth[static_cast<std::size_t>(y) * w + x] = img.at(x, y);
    }
    gx.assign(smooth.size(), 0.0);
    gy.assign(smooth.size(), 0.0);
    auto at = [&](int x, int y) {
        return smooth[static_cast<std::size_t>(detail::clamp_index(y, h)) * w + detail::clamp_index(x, w)];
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            gx[static_cast<std::size_t>(y) * w + x] = 0.5 * (at(x + 1, y) - at(x - 1, y));
            gy[static_cast<std::size_t>(y) * w + x] = 0.5 * (at(x, y + 1) - at(x, y - 1));
        }
}

RasterImage vertical_step(int w, int h, int x0) {
    RasterImage img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = x0; x < w; ++x) img.at(x, y) = 1.0f;
    return img;
}

}  // namespace

TEST_CASE("gradient_gray on flat and ramp images") {
    RasterImage flat(8, 8, 1, 0.5f);
    const GradientField g0 = gradient_gray(flat, 1.0);
    for (std::size_t i = 0; i < g0.magnitude.size(); ++i) {
        REQUIRE(g0.gx[i] == 0.0f);
        REQUIRE(g0.gy[i] == 0.0f);
        REQUIRE(g0.magnitude[i] == 0.0f);
    }

    const int w = 9, h = 5;
    RasterImage ramp(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) ramp.at(x, y) = static_cast<float>(x) / (w - 1);
    const GradientField g = gradient_gray(ramp, 0.0);
    for (int y = 0; y < h; ++y)
        for (int x = 1; x + 1 < w; ++x) {
            REQUIRE(g.gx[g.index(x, y)] == Catch::Approx(1.0 / (w - 1)).margin(1e-7));
            REQUIRE(g.gy[g.index(x, y)] == Catch::Approx(0.0).margin(1e-9));
        }

    REQUIRE_THROWS_AS(gradient_gray(RasterImage(4, 4, 3), 1.0), std::invalid_argument);
}

TEST_CASE("gradient_gray matches the brute-force oracle on a step edge") {
    const RasterImage img = vertical_step(16, 8, 8);
    const GradientField g = gradient_gray(img, 1.0);

    std::vector<double> ox, oy;
    oracle_gradient(img, 1.0, ox, oy);
    for (std::size_t i = 0; i < ox.size(); ++i) {
        REQUIRE(g.gx[i] == Catch::Approx(ox[i]).margin(1e-5));
        REQUIRE(g.gy[i] == Catch::Approx(oy[i]).margin(1e-5));
    }

    // Magnitude is column-maximal at the step columns.
    for (int y = 0; y < 8; ++y) {
        float best = 0.0f;
        int best_x = -1;
        for (int x = 0; x < 16; ++x)
            if (g.magnitude[g.index(x, y)] > best) {
                best = g.magnitude[g.index(x, y)];
                best_x = x;
            }
        REQUIRE((best_x == 7 || best_x == 8));
    }
}

TEST_CASE("gradient_color structure tensor") {
    RasterImage flat(6, 6, 3, 0.3f);
    const GradientField g0 = gradient_color(flat, 1.0);
    for (float m : g0.magnitude) REQUIRE(m == 0.0f);

    // Identical channels: magnitude scales by sqrt(3), orientation matches.
    testutil::Rng rng(5);
    RasterImage gray(12, 10, 1);
    for (auto& v : gray.data) v = static_cast<float>(rng.uniform());
    RasterImage rgb(12, 10, 3);
    for (std::size_t p = 0; p < gray.data.size(); ++p)
        rgb.data[p * 3] = rgb.data[p * 3 + 1] = rgb.data[p * 3 + 2] = gray.data[p];

    const GradientField gg = gradient_gray(gray, 1.0);
    const GradientField gc = gradient_color(rgb, 1.0);
    for (std::size_t i = 0; i < gg.magnitude.size(); ++i) {
        REQUIRE(gc.magnitude[i] == Catch::Approx(std::sqrt(3.0) * gg.magnitude[i]).margin(1e-5));
        if (gg.magnitude[i] > 1e-6) {
            double diff = std::abs(gc.orientation[i] - gg.orientation[i]);
            diff = std::min(diff, kPi - diff);  // angles are modulo pi
            REQUIRE(diff < 1e-4);
        }
    }

    REQUIRE_THROWS_AS(gradient_color(gray, 1.0), std::invalid_argument);
}

TEST_CASE("gradient_color sees luminance-constant color steps") {
    // Red 0.587 and green 0.299 have identical luminance, so the grayscale
    // pipeline is blind to this boundary.
    const int w = 12, h = 6, x0 = 6;
    RasterImage rgb(w, h, 3);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            if (x < x0)
                rgb.at(x, y, 0) = 0.587f;
            else
                rgb.at(x, y, 1) = 0.299f;
        }

    const GradientField color = gradient_color(rgb, 1.0);
    const GradientField gray = gradient_gray(to_grayscale(rgb), 1.0);
    float color_peak = 0.0f, gray_peak = 0.0f;
    for (std::size_t i = 0; i < color.magnitude.size(); ++i) {
        color_peak = std::max(color_peak, color.magnitude[i]);
        gray_peak = std::max(gray_peak, gray.magnitude[i]);
    }
    REQUIRE(gray_peak < 1e-6f);
    REQUIRE(color_peak > 0.05f);

    // Per-channel difference oracle at the step: channel gradients are equal
    // and opposite, and the tensor magnitude is their quadrature sum.
    std::vector<double> rx, ry, gx_, gy_;
    RasterImage red(w, h, 1), green(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            red.at(x, y) = rgb.at(x, y, 0);
            green.at(x, y) = rgb.at(x, y, 1);
        }
    oracle_gradient(red, 1.0, rx, ry);
    oracle_gradient(green, 1.0, gx_, gy_);
    for (int y = 2; y < h - 2; ++y) {
        const std::size_t i = color.index(x0, y);
        const double expect = std::sqrt(rx[i] * rx[i] + gx_[i] * gx_[i]);
        REQUIRE(color.magnitude[i] == Catch::Approx(expect).margin(1e-5));
    }
}

TEST_CASE("nonmax_suppress basics") {
    GradientField zero(7, 7);
    const RasterImage out = nonmax_suppress(zero);
    for (float v : out.data) REQUIRE(v == 0.0f);

    // Single-column ridge with horizontal gradient survives 1 pixel wide.
    GradientField ridge(9, 5);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 9; ++x) {
            const float m = x == 4 ? 1.0f : (x == 3 || x == 5 ? 0.5f : 0.0f);
            ridge.magnitude[ridge.index(x, y)] = m;
            ridge.orientation[ridge.index(x, y)] = 0.0f;  // gradient along x
        }
    const RasterImage thin = nonmax_suppress(ridge);
    for (int y = 0; y < 5; ++y)
        for (int x = 0; x < 9; ++x) {
            if (x == 4)
                REQUIRE(thin.at(x, y) == 1.0f);
            else
                REQUIRE(thin.at(x, y) == 0.0f);
        }
}

TEST_CASE("nonmax_suppress tie rule suppresses plateaus") {
    GradientField plateau(5, 5);
    for (std::size_t i = 0; i < plateau.magnitude.size(); ++i) {
        plateau.magnitude[i] = 0.7f;
        plateau.orientation[i] = 0.0f;
    }
    const RasterImage out = nonmax_suppress(plateau);
    // Horizontal comparisons: every pixel has at least one in-bounds equal
    // neighbor, so the strict-greater requirement fails everywhere.
    for (float v : out.data) REQUIRE(v == 0.0f);
}

TEST_CASE("nonmax_suppress matches an exhaustive oracle on random fields") {
    constexpr double pi = std::numbers::pi;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        testutil::Rng rng(seed);
        const int w = 12, h = 9;
        GradientField g(w, h);
        for (std::size_t i = 0; i < g.magnitude.size(); ++i) {
            g.magnitude[i] = static_cast<float>(rng.uniform());
            g.orientation[i] = static_cast<float>(rng.uniform() * pi * 0.999);
        }
        const RasterImage out = nonmax_suppress(g);

        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                const std::size_t i = g.index(x, y);
                // Independent re-derivation of the rule.
                const double theta = g.orientation[i];
                int dx, dy;
                if (theta < pi / 8 || theta >= 7 * pi / 8) {
                    dx = 1;
                    dy = 0;
                } else if (theta < 3 * pi / 8) {
                    dx = 1;
                    dy = 1;
                } else if (theta < 5 * pi / 8) {
                    dx = 0;
                    dy = 1;
                } else {
                    dx = -1;
                    dy = 1;
                }
                const float m = g.magnitude[i];
                int present = 0;
                bool ge = true, gt = false;
                for (int s : {-1, 1}) {
                    const int nx = x + s * dx, ny = y + s * dy;
                    if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
                    ++present;
                    const float nm = g.magnitude[g.index(nx, ny)];
                    ge = ge && m >= nm;
                    gt = gt || m > nm;
                }
                const bool keep = present == 0 ? m > 0 : (ge && gt);
                REQUIRE(out.at(x, y) == (keep ? m : 0.0f));
                // Support is a subset of the magnitude image.
                REQUIRE((out.at(x, y) == 0.0f || out.at(x, y) == m));
            }
    }
}
