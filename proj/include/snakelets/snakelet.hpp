#pragma once

#include "gvf.hpp"
#include "raster.hpp"

#include <string>

namespace snakelets {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class SnakeState { Growing, Reached, Discarded, Stopped };

inline const char* to_string(SnakeState s) {
    switch (s) {
        case SnakeState::Growing: return "Growing";
        case SnakeState::Reached: return "Reached";
        case SnakeState::Discarded: return "Discarded";
        case SnakeState::Stopped: return "Stopped";
    }
    return "Unknown";
}

struct SnakeletParams {
    double alpha = 0.05;  // tension weight
    double beta = 0.5;    // rigidity weight
    double gamma = 2.0;   // growing-force weight
    double spacing = 2.0; // target inter-point distance, pixels
    double kappa = 1.0;   // external-force step scale
    double step = 2.0;    // growth step length, pixels

    void validate() const {
        if (alpha < 0.0) throw std::invalid_argument("SnakeletParams: alpha must be >= 0");
        if (beta < 0.0) throw std::invalid_argument("SnakeletParams: beta must be >= 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("SnakeletParams: gamma must be > 0");
        if (spacing < 1.0) throw std::invalid_argument("SnakeletParams: spacing must be >= 1");
        if (step < 1.0) throw std::invalid_argument("SnakeletParams: step must be >= 1");
    }
};

// Open active contour: an ordered point chain that deforms under internal and
// external forces and grows at one or both ends.
struct Snakelet {
    int id = 0;
    int source_id = 0;   // edge fragment or seed lineage that spawned it
    int parent_id = -1;  // previous chain segment, -1 for lineage roots
    std::vector<Point> points;
    bool grow_head = false;
    bool grow_tail = true;
    bool pin_head = false;  // chain continuations keep their junction point fixed
    SnakeState state = SnakeState::Growing;
    Point origin;  // first point at creation, excluded from occupancy collisions
};

struct SnakeletSet {
    int width = 0;
    int height = 0;
    std::vector<Snakelet> snakelets;
};

inline double arc_length(const Snakelet& s) {
    double total = 0.0;
    for (std::size_t i = 1; i < s.points.size(); ++i) total += distance(s.points[i - 1], s.points[i]);
    return total;
}

// Redistributes points by linear interpolation along the polyline at uniform
// arc-length intervals no longer than `spacing`; endpoints preserved exactly.
inline Snakelet resample(const Snakelet& s, const SnakeletParams& params) {
    if (s.points.size() < 2) throw std::invalid_argument("resample: at least 2 points required");
    const double total = arc_length(s);
    if (total <= 0.0) throw std::invalid_argument("resample: degenerate snakelet of zero length");

    const int segments = std::max(1, static_cast<int>(std::lround(total / params.spacing)));
    Snakelet out = s;
    out.points.clear();
    out.points.reserve(segments + 1);
    out.points.push_back(s.points.front());

    const double interval = total / segments;
    std::size_t seg = 1;
    double walked = 0.0;  // arc length consumed before points[seg - 1]
    for (int k = 1; k < segments; ++k) {
        const double target = interval * k;
        while (seg < s.points.size()) {
            const double len = distance(s.points[seg - 1], s.points[seg]);
            if (walked + len >= target || seg == s.points.size() - 1) break;
            walked += len;
            ++seg;
        }
        const double len = distance(s.points[seg - 1], s.points[seg]);
        const double t = len > 0.0 ? std::clamp((target - walked) / len, 0.0, 1.0) : 0.0;
        out.points.push_back({s.points[seg - 1].x + t * (s.points[seg].x - s.points[seg - 1].x),
                              s.points[seg - 1].y + t * (s.points[seg].y - s.points[seg - 1].y)});
    }
    out.points.push_back(s.points.back());
    return out;
}

// Bands of the internal-force matrix A for an n-point open chain: tension
// (alpha, second differences) plus rigidity (beta, fourth differences) with
// the rigidity weight zeroed at both end rows. d0 = diagonal, d1/d2 = first
// and second subdiagonals.
inline void internal_matrix_bands(int n, double alpha, double beta, std::vector<double>& d0,
                                  std::vector<double>& d1, std::vector<double>& d2) {
    d0.assign(n, 0.0);
    d1.assign(std::max(n - 1, 0), 0.0);
    d2.assign(std::max(n - 2, 0), 0.0);
    for (int i = 0; i + 1 < n; ++i) {  // alpha * (x[i+1] - x[i])^2
        d0[i] += alpha;
        d0[i + 1] += alpha;
        d1[i] -= alpha;
    }
    for (int i = 1; i + 1 < n; ++i) {  // beta * (x[i-1] - 2 x[i] + x[i+1])^2
        d0[i - 1] += beta;
        d0[i] += 4.0 * beta;
        d0[i + 1] += beta;
        d1[i - 1] -= 2.0 * beta;
        d1[i] -= 2.0 * beta;
        d2[i - 1] += beta;
    }
}

// Banded Cholesky factorization of M = I + A. M is symmetric positive
// definite for alpha, beta >= 0, so the factorization cannot break down.
class PentaSolver {
public:
    void factor(int n, double alpha, double beta) {
        n_ = n;
        alpha_ = alpha;
        beta_ = beta;
        std::vector<double> d0, d1, d2;
        internal_matrix_bands(n, alpha, beta, d0, d1, d2);
        for (auto& v : d0) v += 1.0;

        l0_.assign(n, 0.0);
        l1_.assign(std::max(n - 1, 0), 0.0);
        l2_.assign(std::max(n - 2, 0), 0.0);
        for (int j = 0; j < n; ++j) {
            double diag = d0[j];
            if (j >= 1) diag -= l1_[j - 1] * l1_[j - 1];
            if (j >= 2) diag -= l2_[j - 2] * l2_[j - 2];
            l0_[j] = std::sqrt(diag);
            if (j + 1 < n) {
                double sub = d1[j];
                if (j >= 1) sub -= l1_[j - 1] * l2_[j - 1];
                l1_[j] = sub / l0_[j];
            }
            if (j + 2 < n) l2_[j] = d2[j] / l0_[j];
        }
    }

    void solve(std::vector<double>& rhs) const {
        const int n = n_;
        for (int i = 0; i < n; ++i) {
            double v = rhs[i];
            if (i >= 1) v -= l1_[i - 1] * rhs[i - 1];
            if (i >= 2) v -= l2_[i - 2] * rhs[i - 2];
            rhs[i] = v / l0_[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double v = rhs[i];
            if (i + 1 < n) v -= l1_[i] * rhs[i + 1];
            if (i + 2 < n) v -= l2_[i] * rhs[i + 2];
            rhs[i] = v / l0_[i];
        }
    }

    bool matches(int n, double alpha, double beta) const {
        return n_ == n && alpha_ == alpha && beta_ == beta;
    }
    int size() const { return n_; }

private:
    int n_ = 0;
    double alpha_ = -1.0, beta_ = -1.0;
    std::vector<double> l0_, l1_, l2_;
};

// Reusable factorization across deform steps of equal point count.
struct DeformWorkspace {
    PentaSolver solver;
    std::vector<double> rx, ry;
};

// One semi-implicit deformation step: solves (I + A) x' = x + kappa * F with F
// sampled from the field by bilinear interpolation. Points are clamped to the
// field bounds afterwards.
inline Snakelet deform_step(const Snakelet& s, const VectorField& field, const SnakeletParams& params,
                            DeformWorkspace* ws = nullptr) {
    const int n = static_cast<int>(s.points.size());
    if (n < 2) throw std::invalid_argument("deform_step: at least 2 points required");
    params.validate();

    DeformWorkspace local;
    DeformWorkspace& work = ws ? *ws : local;
    if (!work.solver.matches(n, params.alpha, params.beta))
        work.solver.factor(n, params.alpha, params.beta);

    work.rx.resize(n);
    work.ry.resize(n);
    for (int i = 0; i < n; ++i) {
        const Vec2 f = sample(field, s.points[i].x, s.points[i].y);
        work.rx[i] = s.points[i].x + params.kappa * f.x;
        work.ry[i] = s.points[i].y + params.kappa * f.y;
    }
    work.solver.solve(work.rx);
    work.solver.solve(work.ry);

    Snakelet out = s;
    const double xmax = field.width - 1, ymax = field.height - 1;
    for (int i = 0; i < n; ++i) {
        out.points[i].x = std::clamp(work.rx[i], 0.0, xmax);
        out.points[i].y = std::clamp(work.ry[i], 0.0, ymax);
    }
    if (s.pin_head) out.points[0] = s.points[0];
    return out;
}

namespace detail {

// Unit tangent pointing out of the given end, from the last two distinct
// points. Returns false for a degenerate (all-coincident) chain.
inline bool end_tangent(const Snakelet& s, bool head, Vec2& t) {
    const auto& pts = s.points;
    const Point end = head ? pts.front() : pts.back();
    for (std::size_t k = 1; k < pts.size(); ++k) {
        const Point prev = head ? pts[k] : pts[pts.size() - 1 - k];
        const double d = distance(end, prev);
        if (d > 1e-12) {
            t.x = (end.x - prev.x) / d;
            t.y = (end.y - prev.y) / d;
            return true;
        }
    }
    return false;
}

}  // namespace detail

// Extends each growing end by one point at distance `step` along the end
// tangent, clamped to bounds. The sampled magnitude at the candidate new end
// (constant 1 without a magnitude map) gates the extension: an end whose
// magnitude does not exceed min_magnitude stops growing. When both ends have
// stopped the snakelet state becomes Stopped.
inline Snakelet grow(const Snakelet& s, const RasterImage* magnitude, const SnakeletParams& params,
                     int width, int height, double min_magnitude = 0.0) {
    if (s.state != SnakeState::Growing)
        throw std::invalid_argument("grow: snakelet must be in the Growing state");
    if (s.points.size() < 2) throw std::invalid_argument("grow: at least 2 points required");
    if (magnitude && (magnitude->width != width || magnitude->height != height))
        throw std::invalid_argument("grow: magnitude dimensions mismatch");
    params.validate();

    Snakelet out = s;
    const double xmax = width - 1, ymax = height - 1;
    for (bool head : {true, false}) {
        const bool growing = head ? out.grow_head : out.grow_tail;
        if (!growing) continue;

        Vec2 t;
        if (!detail::end_tangent(out, head, t)) {
            (head ? out.grow_head : out.grow_tail) = false;
            continue;
        }
        const Point end = head ? out.points.front() : out.points.back();
        Point cand{std::clamp(end.x + params.step * t.x, 0.0, xmax),
                   std::clamp(end.y + params.step * t.y, 0.0, ymax)};

        const double m = magnitude ? bilinear(*magnitude, cand.x, cand.y) : 1.0;
        if (!(m > min_magnitude)) {
            (head ? out.grow_head : out.grow_tail) = false;
            continue;
        }
        if (head)
            out.points.insert(out.points.begin(), cand);
        else
            out.points.push_back(cand);
        if (distance(cand, end) < 1e-6)  // pinned against the border
            (head ? out.grow_head : out.grow_tail) = false;
    }
    if (!out.grow_head && !out.grow_tail && out.state == SnakeState::Growing)
        out.state = SnakeState::Stopped;
    return out;
}

// Emits every pixel whose unit square the segment passes through (supercover
// traversal); exact corner crossings include both side pixels.
template <typename Emit>
inline void supercover_line(const Point& a, const Point& b, Emit&& emit) {
    const double u0 = a.x + 0.5, v0 = a.y + 0.5;
    const double u1 = b.x + 0.5, v1 = b.y + 0.5;
    int ix = static_cast<int>(std::floor(u0)), iy = static_cast<int>(std::floor(v0));
    const int jx = static_cast<int>(std::floor(u1)), jy = static_cast<int>(std::floor(v1));
    emit(ix, iy);

    const double dx = u1 - u0, dy = v1 - v0;
    const int sx = dx > 0 ? 1 : -1, sy = dy > 0 ? 1 : -1;
    const double inf = std::numeric_limits<double>::infinity();
    const double tdx = dx != 0.0 ? std::abs(1.0 / dx) : inf;
    const double tdy = dy != 0.0 ? std::abs(1.0 / dy) : inf;
    double tmx = inf, tmy = inf;
    if (dx != 0.0) tmx = (dx > 0 ? std::floor(u0) + 1.0 - u0 : u0 - std::floor(u0)) * tdx;
    if (dy != 0.0) tmy = (dy > 0 ? std::floor(v0) + 1.0 - v0 : v0 - std::floor(v0)) * tdy;

    int guard = 4 * (std::abs(jx - ix) + std::abs(jy - iy) + 2);
    while ((ix != jx || iy != jy) && guard-- > 0) {
        if (tmx < tmy) {
            ix += sx;
            tmx += tdx;
        } else if (tmy < tmx) {
            iy += sy;
            tmy += tdy;
        } else {  // exact corner crossing
            emit(ix + sx, iy);
            emit(ix, iy + sy);
            ix += sx;
            iy += sy;
            tmx += tdx;
            tmy += tdy;
        }
        emit(ix, iy);
    }
    emit(jx, jy);
}

// Dilated rasterization of accepted snakelets, used to suppress redundant
// seeds and stop growth at existing snakelets.
struct OccupancyMask {
    int width = 0;
    int height = 0;
    int radius = 0;
    std::vector<std::uint8_t> occupied;
    std::vector<std::pair<int, int>> disc;

    OccupancyMask() = default;
    OccupancyMask(int w, int h, int r) : width(w), height(h), radius(r) {
        if (w <= 0 || h <= 0) throw std::invalid_argument("OccupancyMask: bad dimensions");
        if (r < 0) throw std::invalid_argument("OccupancyMask: radius must be nonnegative");
        occupied.assign(static_cast<std::size_t>(w) * h, 0);
        for (int dy = -r; dy <= r; ++dy)
            for (int dx = -r; dx <= r; ++dx)
                if (dx * dx + dy * dy <= r * r) disc.emplace_back(dx, dy);
    }

    bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
    bool at(int x, int y) const { return occupied[static_cast<std::size_t>(y) * width + x] != 0; }

    void stamp(int x, int y) {
        for (const auto& [dx, dy] : disc) {
            const int nx = x + dx, ny = y + dy;
            if (in_bounds(nx, ny)) occupied[static_cast<std::size_t>(ny) * width + nx] = 1;
        }
    }
};

// Marks all pixels within the mask radius of the snakelet's swept polyline.
inline void register_snakelet(OccupancyMask& mask, const Snakelet& s) {
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        supercover_line(s.points[i - 1], s.points[i], [&](int x, int y) {
            if (x >= -mask.radius && x < mask.width + mask.radius && y >= -mask.radius &&
                y < mask.height + mask.radius)
                mask.stamp(x, y);
        });
    }
}

struct EndReach {
    bool head = false;
    bool tail = false;
};

namespace detail {

template <typename IsTarget>
inline bool end_reaches(const Point& end, double snap, int width, int height, IsTarget&& is_target) {
    const int r = static_cast<int>(std::ceil(snap));
    const int cx = static_cast<int>(std::lround(end.x));
    const int cy = static_cast<int>(std::lround(end.y));
    for (int y = cy - r; y <= cy + r; ++y) {
        for (int x = cx - r; x <= cx + r; ++x) {
            if (x < 0 || x >= width || y < 0 || y >= height) continue;
            const double d = std::hypot(x - end.x, y - end.y);
            if (d <= snap && is_target(x, y)) return true;
        }
    }
    return false;
}

}  // namespace detail

// Tests each growing end against the occupancy mask. Occupied pixels close to
// the snakelet's own birth point are ignored so chain continuations and
// opposite-direction siblings do not collide with their own junction.
inline EndReach reached_edge(const Snakelet& s, const OccupancyMask& mask, double snap) {
    const double exclusion = mask.radius + snap + 0.5;
    auto is_target = [&](int x, int y) {
        if (!mask.at(x, y)) return false;
        return std::hypot(x - s.origin.x, y - s.origin.y) > exclusion;
    };
    EndReach reach;
    if (s.grow_head)
        reach.head = detail::end_reaches(s.points.front(), snap, mask.width, mask.height, is_target);
    if (s.grow_tail)
        reach.tail = detail::end_reaches(s.points.back(), snap, mask.width, mask.height, is_target);
    return reach;
}

// Tests each growing end against a binary edge map. Pixels listed in
// excluded_sorted (row-major indices, sorted) belong to the snakelet's own
// source fragment and never count as targets.
inline EndReach reached_edge(const Snakelet& s, const BinaryEdgeMap& edges, double snap,
                             const std::vector<int>& excluded_sorted) {
    auto is_target = [&](int x, int y) {
        if (!edges.at(x, y)) return false;
        const int idx = y * edges.width + x;
        return !std::binary_search(excluded_sorted.begin(), excluded_sorted.end(), idx);
    };
    EndReach reach;
    if (s.grow_head)
        reach.head = detail::end_reaches(s.points.front(), snap, edges.width, edges.height, is_target);
    if (s.grow_tail)
        reach.tail = detail::end_reaches(s.points.back(), snap, edges.width, edges.height, is_target);
    return reach;
}

}  // namespace snakelets
