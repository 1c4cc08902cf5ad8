#pragma once

#include "gradient.hpp"
#include "raster.hpp"
#include "recovery.hpp"

#include <numbers>

namespace snakelets {

// Exact Euclidean distance transform (Felzenszwalb-Huttenlocher): distance
// from every pixel to the nearest set pixel. Empty maps yield huge distances.
inline std::vector<double> distance_transform(const BinaryEdgeMap& map) {
    constexpr double kFar = 1e18;
    const int w = map.width, h = map.height;
    std::vector<double> grid(static_cast<std::size_t>(w) * h);
    for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = map.membership[i] ? 0.0 : kFar;

    const int n = std::max(w, h);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    auto dt1d = [&](int count, auto read, auto write) {
        for (int q = 0; q < count; ++q) f[q] = read(q);
        int k = 0;
        v[0] = 0;
        z[0] = -kFar;
        z[1] = kFar;
        for (int q = 1; q < count; ++q) {
            double s;
            while (true) {
                s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                    (2.0 * q - 2.0 * v[k]);
                if (s <= z[k]) {
                    --k;
                } else {
                    break;
                }
            }
            ++k;
            v[k] = q;
            z[k] = s;
            z[k + 1] = kFar;
        }
        k = 0;
        for (int q = 0; q < count; ++q) {
            while (z[k + 1] < q) ++k;
            write(q, static_cast<double>(q - v[k]) * (q - v[k]) + f[v[k]]);
        }
    };

    for (int x = 0; x < w; ++x)
        dt1d(
            h, [&](int q) { return grid[static_cast<std::size_t>(q) * w + x]; },
            [&](int q, double val) { grid[static_cast<std::size_t>(q) * w + x] = val; });
    for (int y = 0; y < h; ++y)
        dt1d(
            w, [&](int q) { return grid[static_cast<std::size_t>(y) * w + q]; },
            [&](int q, double val) { grid[static_cast<std::size_t>(y) * w + q] = val; });

    for (auto& g : grid) g = std::sqrt(g);
    return grid;
}

struct Metrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double gap_closure_rate = 0.0;
    double mean_contour_distance = 0.0;
};

using PixelSet = std::vector<std::pair<int, int>>;

// Tolerance-matched precision/recall against a ground-truth map:
//   precision = fraction of result pixels within tolerance of some truth pixel
//   recall    = fraction of truth pixels within tolerance of some result pixel
// Empty result sets score precision 1 (empty-set convention) and mean contour
// distance 0. A gap counts as closed when at least 80% of its pixels lie
// within tolerance of result pixels; with no gaps the closure rate is 1.
inline Metrics score(const BinaryEdgeMap& result, const BinaryEdgeMap& truth, double tolerance,
                     const std::vector<PixelSet>& gaps = {}) {
    if (result.width != truth.width || result.height != truth.height)
        throw std::invalid_argument("score: dimension mismatch");
    if (tolerance < 0.0) throw std::invalid_argument("score: tolerance must be nonnegative");

    const auto dt_truth = distance_transform(truth);
    const auto dt_result = distance_transform(result);

    std::size_t result_count = 0, result_hits = 0;
    double dist_sum = 0.0;
    for (std::size_t i = 0; i < result.membership.size(); ++i) {
        if (!result.membership[i]) continue;
        ++result_count;
        dist_sum += dt_truth[i];
        if (dt_truth[i] <= tolerance) ++result_hits;
    }
    std::size_t truth_count = 0, truth_hits = 0;
    for (std::size_t i = 0; i < truth.membership.size(); ++i) {
        if (!truth.membership[i]) continue;
        ++truth_count;
        if (dt_result[i] <= tolerance) ++truth_hits;
    }

    Metrics m;
    m.precision = result_count == 0 ? 1.0 : static_cast<double>(result_hits) / result_count;
    m.recall = truth_count == 0 ? 1.0 : static_cast<double>(truth_hits) / truth_count;
    m.f1 = (m.precision + m.recall) > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                          : 0.0;
    m.mean_contour_distance = result_count == 0 ? 0.0 : dist_sum / result_count;

    if (gaps.empty()) {
        m.gap_closure_rate = 1.0;
    } else {
        int closed = 0;
        for (const auto& gap : gaps) {
            if (gap.empty()) {
                ++closed;
                continue;
            }
            std::size_t covered = 0;
            for (const auto& [x, y] : gap)
                if (dt_result[static_cast<std::size_t>(y) * result.width + x] <= tolerance) ++covered;
            if (static_cast<double>(covered) / gap.size() >= 0.8) ++closed;
        }
        m.gap_closure_rate = static_cast<double>(closed) / gaps.size();
    }
    return m;
}

// --- synthetic fixtures -----------------------------------------------------

// Midpoint ellipse: a closed, thin, 8-connected ring.
inline BinaryEdgeMap ellipse_ring(int w, int h, int cx, int cy, int rx, int ry) {
    BinaryEdgeMap map(w, h);
    auto plot4 = [&](long x, long y) {
        for (int sx : {-1, 1}) {
            for (int sy : {-1, 1}) {
                const long px = cx + sx * x, py = cy + sy * y;
                if (px >= 0 && px < w && py >= 0 && py < h)
                    map.set(static_cast<int>(px), static_cast<int>(py));
            }
        }
    };

    const long rx2 = static_cast<long>(rx) * rx, ry2 = static_cast<long>(ry) * ry;
    long x = 0, y = ry;
    long px = 0, py = 2 * rx2 * y;
    plot4(x, y);
    double p = ry2 - rx2 * ry + 0.25 * rx2;
    while (px < py) {
        ++x;
        px += 2 * ry2;
        if (p < 0) {
            p += ry2 + px;
        } else {
            --y;
            py -= 2 * rx2;
            p += ry2 + px - py;
        }
        plot4(x, y);
    }
    p = ry2 * (x + 0.5) * (x + 0.5) + rx2 * (y - 1.0) * (y - 1.0) - static_cast<double>(rx2) * ry2;
    while (y > 0) {
        --y;
        py -= 2 * rx2;
        if (p > 0) {
            p += rx2 - py;
        } else {
            ++x;
            px += 2 * ry2;
            p += rx2 - py + px;
        }
        plot4(x, y);
    }
    return map;
}

inline BinaryEdgeMap circle_ring(int w, int h, int cx, int cy, int r) {
    return ellipse_ring(w, h, cx, cy, r, r);
}

// Open U shape: left stroke down, bottom stroke across, right stroke up.
inline BinaryEdgeMap u_shape(int w, int h, int left, int top, int right, int bottom) {
    BinaryEdgeMap map(w, h);
    for (int y = top; y <= bottom; ++y) {
        map.set(left, y);
        map.set(right, y);
    }
    for (int x = left; x <= right; ++x) map.set(x, bottom);
    return map;
}

// Black/white half plane with a vertical boundary: columns >= x0 are white.
inline RasterImage half_plane_image(int w, int h, int x0) {
    RasterImage img(w, h, 1);
    for (int y = 0; y < h; ++y)
        for (int x = x0; x < w; ++x) img.at(x, y) = 1.0f;
    return img;
}

// Filled disc whose intensity fades to min_contrast inside a soft circular
// region centered on a rim point, so the boundary contrast decays to near
// zero over part of the circle. The fade field is slowly varying (bounded
// slope ~1.5/ramp_px), so it introduces no interior edges of its own; the
// boundary circle is the ground-truth contour.
inline RasterImage ring_sector_image(int w, int h, double cx, double cy, double radius,
                                     double weak_center_rad, double weak_radius_px, double ramp_px,
                                     double min_contrast) {
    const double wx = cx + radius * std::cos(weak_center_rad);
    const double wy = cy + radius * std::sin(weak_center_rad);
    RasterImage img(w, h, 1);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = x - cx, dy = y - cy;
            if (dx * dx + dy * dy > radius * radius) continue;
            const double d = std::hypot(x - wx, y - wy);
            const double t = std::clamp((d - weak_radius_px) / ramp_px, 0.0, 1.0);
            const double smooth = t * t * (3.0 - 2.0 * t);
            img.at(x, y) = static_cast<float>(min_contrast + (1.0 - min_contrast) * smooth);
        }
    }
    return img;
}

// Ordered pixel path of every fragment (walked with unvisited-neighbor
// preference; open fragments start at an endpoint, closed ones at their
// row-major first pixel).
inline std::vector<PixelSet> fragment_paths(const BinaryEdgeMap& edges) {
    const FragmentLabels labels = label_fragments(edges);
    std::vector<PixelSet> paths(labels.count);

    // Choose a start pixel per fragment: an endpoint when one exists.
    std::vector<std::pair<int, int>> start(labels.count, {-1, -1});
    for (int y = 0; y < edges.height; ++y) {
        for (int x = 0; x < edges.width; ++x) {
            if (!edges.at(x, y)) continue;
            const int id = labels.at(x, y);
            if (start[id].first < 0) start[id] = {x, y};
        }
    }
    for (int y = 0; y < edges.height; ++y) {
        for (int x = 0; x < edges.width; ++x) {
            if (!edges.at(x, y) || detail::neighbor_count(edges, x, y) != 1) continue;
            const int id = labels.at(x, y);
            if (!edges.at(start[id].first, start[id].second) ||
                detail::neighbor_count(edges, start[id].first, start[id].second) != 1)
                start[id] = {x, y};
        }
    }

    std::vector<std::uint8_t> visited(edges.membership.size(), 0);
    for (int id = 0; id < labels.count; ++id) {
        auto [cx, cy] = start[id];
        auto& path = paths[id];
        double dirx = 0.0, diry = 0.0;
        visited[static_cast<std::size_t>(cy) * edges.width + cx] = 1;
        path.emplace_back(cx, cy);
        while (true) {
            static constexpr int offs[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                               {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
            int bx = -1, by = -1;
            double best = -2.0;
            for (const auto& o : offs) {
                const int nx = cx + o[0], ny = cy + o[1];
                if (!edges.in_bounds(nx, ny) || !edges.at(nx, ny)) continue;
                if (visited[static_cast<std::size_t>(ny) * edges.width + nx]) continue;
                double sc = 0.0;
                if (path.size() > 1) {
                    const double len = std::hypot(static_cast<double>(o[0]), static_cast<double>(o[1]));
                    sc = (o[0] * dirx + o[1] * diry) / len;
                }
                if (sc > best + 1e-12) {
                    best = sc;
                    bx = nx;
                    by = ny;
                }
            }
            if (bx < 0) break;
            const double len = std::hypot(static_cast<double>(bx - cx), static_cast<double>(by - cy));
            dirx = (bx - cx) / len;
            diry = (by - cy) / len;
            cx = bx;
            cy = by;
            visited[static_cast<std::size_t>(cy) * edges.width + cx] = 1;
            path.emplace_back(cx, cy);
        }
    }
    return paths;
}

struct BreakSpec {
    int count = 1;
    int min_len = 5;
    int max_len = 25;
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (count < 0) throw std::invalid_argument("BreakSpec: count must be nonnegative");
        if (!(min_len > 0 && min_len <= max_len))
            throw std::invalid_argument("BreakSpec: need 0 < min_len <= max_len");
    }
};

struct BrokenEdges {
    BinaryEdgeMap edges;
    std::vector<PixelSet> gaps;
};

namespace detail {

// Small deterministic generator (splitmix64), stable across platforms.
struct Rng {
    std::uint64_t s;
    explicit Rng(std::uint64_t seed) : s(seed) {}
    std::uint64_t next() {
        s += 0x9e3779b97f4a7c15ULL;
        std::uint64_t z = s;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint32_t bounded(std::uint32_t n) { return n == 0 ? 0 : static_cast<std::uint32_t>(next() % n); }
};

}  // namespace detail

// Removes `count` disjoint runs of contiguous edge pixels with uniform-random
// lengths in [min_len, max_len]. Runs are kept 8-disjoint from each other so
// every removal opens its own gap; each run stays within one fragment.
inline BrokenEdges make_breaks(const BinaryEdgeMap& edges, const BreakSpec& spec) {
    spec.validate();
    BrokenEdges out{edges, {}};
    if (spec.count == 0) return out;
    if (edges.count() == 0) throw std::invalid_argument("make_breaks: edge map is empty");

    const auto paths = fragment_paths(edges);
    detail::Rng rng(spec.rng_seed);

    auto touches_removed = [&](int x, int y) {
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = x + dx, ny = y + dy;
                if (edges.in_bounds(nx, ny) && edges.at(nx, ny) && !out.edges.at(nx, ny)) return true;
            }
        return false;
    };

    const int max_attempts = 1000 * spec.count;
    int attempts = 0;
    while (static_cast<int>(out.gaps.size()) < spec.count) {
        if (++attempts > max_attempts)
            throw std::invalid_argument(
                "make_breaks: cannot place requested breaks disjointly within the fragments");
        const auto& path = paths[rng.bounded(static_cast<std::uint32_t>(paths.size()))];
        const int len =
            spec.min_len + static_cast<int>(rng.bounded(static_cast<std::uint32_t>(spec.max_len - spec.min_len + 1)));
        if (static_cast<int>(path.size()) <= len)
            continue;  // break must be shorter than the fragment it cuts
        const int start = static_cast<int>(rng.bounded(static_cast<std::uint32_t>(path.size() - len + 1)));

        bool ok = true;
        for (int k = 0; k < len && ok; ++k)
            if (touches_removed(path[start + k].first, path[start + k].second)) ok = false;
        if (!ok) continue;

        PixelSet gap;
        for (int k = 0; k < len; ++k) {
            out.edges.set(path[start + k].first, path[start + k].second, false);
            gap.push_back(path[start + k]);
        }
        out.gaps.push_back(std::move(gap));
    }
    return out;
}

// Fixture for gradient-assisted recovery: a circular contour with one break,
// plus a synthesized gradient ridge along the full true contour.
struct ContourFixture {
    BinaryEdgeMap edges;   // broken ring
    BinaryEdgeMap truth;   // full ring
    PixelSet gap;          // removed pixels
    GradientField grad;    // smooth ridge along the true contour
};

inline ContourFixture curved_break_fixture(int w, int h, int cx, int cy, int radius,
                                           double break_center_rad, int break_len_px,
                                           double ridge_sigma = 1.5) {
    ContourFixture fx;
    fx.truth = circle_ring(w, h, cx, cy, radius);

    // Remove the run of ring pixels angularly nearest the break center.
    const auto paths = fragment_paths(fx.truth);
    const auto& path = paths.front();
    std::size_t nearest = 0;
    double best = 1e18;
    constexpr double pi = std::numbers::pi;
    for (std::size_t i = 0; i < path.size(); ++i) {
        double delta =
            std::abs(std::atan2(path[i].second - cy, path[i].first - cx) - break_center_rad);
        if (delta > pi) delta = 2.0 * pi - delta;
        if (delta < best) {
            best = delta;
            nearest = i;
        }
    }
    fx.edges = fx.truth;
    const int n = static_cast<int>(path.size());
    for (int k = -(break_len_px / 2); k < break_len_px - break_len_px / 2; ++k) {
        const auto& p = path[static_cast<std::size_t>(((static_cast<int>(nearest) + k) % n + n) % n)];
        fx.edges.set(p.first, p.second, false);
        fx.gap.push_back(p);
    }

    fx.grad = GradientField(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double d = std::hypot(x - cx, y - cy) - radius;
            const double mag = std::exp(-d * d / (2.0 * ridge_sigma * ridge_sigma));
            const double theta = std::atan2(y - cy, x - cx);  // radial = gradient direction
            const std::size_t i = fx.grad.index(x, y);
            fx.grad.magnitude[i] = static_cast<float>(mag);
            fx.grad.orientation[i] = detail::wrap_to_half_turn(theta);
            fx.grad.gx[i] = static_cast<float>(mag * std::cos(theta));
            fx.grad.gy[i] = static_cast<float>(mag * std::sin(theta));
        }
    }
    return fx;
}

}  // namespace snakelets
