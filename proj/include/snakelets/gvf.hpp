#pragma once

#include "gradient.hpp"
#include "raster.hpp"

namespace snakelets {

// Dense 2-D force field; after normalization every vector has length <= 1.
struct VectorField {
    int width = 0;
    int height = 0;
    std::vector<float> u, v;

    VectorField() = default;
    VectorField(int w, int h) : width(w), height(h) {
        const std::size_t n = static_cast<std::size_t>(w) * h;
        u.assign(n, 0.0f);
        v.assign(n, 0.0f);
    }

    std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width + x; }
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

// Clamped bilinear sample of the field at a subpixel position.
inline Vec2 sample(const VectorField& f, double x, double y) {
    const int w = f.width, h = f.height;
    x = std::clamp(x, 0.0, static_cast<double>(w - 1));
    y = std::clamp(y, 0.0, static_cast<double>(h - 1));
    int x0 = std::min(static_cast<int>(x), std::max(w - 2, 0));
    int y0 = std::min(static_cast<int>(y), std::max(h - 2, 0));
    const int x1 = std::min(x0 + 1, w - 1);
    const int y1 = std::min(y0 + 1, h - 1);
    const double fx = x - x0, fy = y - y0;
    const double w00 = (1.0 - fx) * (1.0 - fy), w10 = fx * (1.0 - fy);
    const double w01 = (1.0 - fx) * fy, w11 = fx * fy;
    Vec2 out;
    out.x = w00 * f.u[f.index(x0, y0)] + w10 * f.u[f.index(x1, y0)] + w01 * f.u[f.index(x0, y1)] +
            w11 * f.u[f.index(x1, y1)];
    out.y = w00 * f.v[f.index(x0, y0)] + w10 * f.v[f.index(x1, y0)] + w01 * f.v[f.index(x0, y1)] +
            w11 * f.v[f.index(x1, y1)];
    return out;
}

// Diffusion state for gradient vector flow. Keeps the fixed source gradient so
// iteration can be resumed without recomputation.
struct GvfState {
    VectorField field;
    std::vector<float> fx, fy, b;  // b = fx^2 + fy^2
    int width = 0;
    int height = 0;
    int iterations_done = 0;
    double mu = 0.2;
};

// Initializes GVF from a gray or binary edge map: the source gradient is the
// central-difference gradient of the map, and the field starts equal to it.
inline GvfState gvf_init(const RasterImage& edge_source, double mu = 0.2) {
    if (edge_source.channels != 1)
        throw std::invalid_argument("gvf_init: single-channel edge source required");
    if (!(mu > 0.0)) throw std::invalid_argument("gvf_init: mu must be positive");

    GvfState state;
    state.width = edge_source.width;
    state.height = edge_source.height;
    state.mu = mu;
    detail::central_differences(edge_source, 0, state.fx, state.fy);
    state.b.resize(state.fx.size());
    for (std::size_t i = 0; i < state.fx.size(); ++i)
        state.b[i] = state.fx[i] * state.fx[i] + state.fy[i] * state.fy[i];
    state.field = VectorField(state.width, state.height);
    state.field.u = state.fx;
    state.field.v = state.fy;
    return state;
}

// Runs n diffusion updates with a 5-point Laplacian and replicated borders.
// The smoothing term is explicit and the data-attachment term implicit,
//   u <- (u + mu*lap(u) + b*fx) / (1 + b),
// which shares its fixed points with the plain explicit update but stays
// bounded by max(|fx|, |fy|) for any mu <= 0.25. Jacobi two-buffer sweep, so
// iterate(a) then iterate(b) is bit-identical to iterate(a+b).
inline GvfState gvf_iterate(GvfState state, int n) {
    if (n < 0) throw std::invalid_argument("gvf_iterate: iteration count must be nonnegative");
    const int w = state.width, h = state.height;
    std::vector<float> nu(state.field.u.size()), nv(state.field.v.size());

    for (int it = 0; it < n; ++it) {
        const auto& u = state.field.u;
        const auto& v = state.field.v;
        for (int y = 0; y < h; ++y) {
            const int ym = detail::clamp_index(y - 1, h), yp = detail::clamp_index(y + 1, h);
            for (int x = 0; x < w; ++x) {
                const int xm = detail::clamp_index(x - 1, w), xp = detail::clamp_index(x + 1, w);
                const std::size_t i = static_cast<std::size_t>(y) * w + x;
                const std::size_t ixm = static_cast<std::size_t>(y) * w + xm;
                const std::size_t ixp = static_cast<std::size_t>(y) * w + xp;
                const std::size_t iym = static_cast<std::size_t>(ym) * w + x;
                const std::size_t iyp = static_cast<std::size_t>(yp) * w + x;
                const float lap_u = u[ixm] + u[ixp] + u[iym] + u[iyp] - 4.0f * u[i];
                const float lap_v = v[ixm] + v[ixp] + v[iym] + v[iyp] - 4.0f * v[i];
                nu[i] = (u[i] + static_cast<float>(state.mu) * lap_u + state.b[i] * state.fx[i]) /
                        (1.0f + state.b[i]);
                nv[i] = (v[i] + static_cast<float>(state.mu) * lap_v + state.b[i] * state.fy[i]) /
                        (1.0f + state.b[i]);
            }
        }
        state.field.u.swap(nu);
        state.field.v.swap(nv);
    }
    state.iterations_done += n;
    return state;
}

// Normalizes the field to unit vectors. Pixels whose magnitude falls below the
// zero_fractile-quantile of the positive magnitudes are zeroed first;
// zero_fractile = 0 is plain unit normalization.
inline VectorField gvf_normalize(const GvfState& state, double zero_fractile) {
    if (!(zero_fractile >= 0.0 && zero_fractile < 1.0))
        throw std::invalid_argument("gvf_normalize: fractile must lie in [0, 1)");

    const std::size_t n = state.field.u.size();
    std::vector<double> mag(n);
    std::vector<double> positive;
    positive.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        mag[i] = std::hypot(static_cast<double>(state.field.u[i]),
                            static_cast<double>(state.field.v[i]));
        if (mag[i] > 0.0) positive.push_back(mag[i]);
    }

    double cutoff = 0.0;
    if (zero_fractile > 0.0 && !positive.empty()) {
        std::sort(positive.begin(), positive.end());
        cutoff = positive[static_cast<std::size_t>(zero_fractile * positive.size())];
    }

    constexpr double eps = 1e-12;
    VectorField out(state.width, state.height);
    for (std::size_t i = 0; i < n; ++i) {
        if (mag[i] < cutoff || mag[i] <= eps) continue;
        out.u[i] = static_cast<float>(state.field.u[i] / mag[i]);
        out.v[i] = static_cast<float>(state.field.v[i] / mag[i]);
    }
    return out;
}

// Display scaling for a field component: [-1, 1] mapped to 0..255 with 128 at
// zero, returned as an image so it can be written as a PGM.
inline RasterImage component_image(const VectorField& field, int axis) {
    if (axis != 0 && axis != 1) throw std::invalid_argument("component_image: axis must be 0 or 1");
    const auto& comp = axis == 0 ? field.u : field.v;
    RasterImage img(field.width, field.height, 1);
    for (std::size_t i = 0; i < comp.size(); ++i) {
        const double c = std::clamp(static_cast<double>(comp[i]), -1.0, 1.0);
        img.data[i] = static_cast<float>(std::lround(127.5 * (c + 1.0)) / 255.0);
    }
    return img;
}

}  // namespace snakelets
