#pragma once

#include "canny.hpp"
#include "gradient.hpp"
#include "gvf.hpp"
#include "snakelet.hpp"

namespace snakelets {

// 8-connected component labels over a binary edge map, assigned in row-major
// first-seen order starting at 0; -1 marks background.
struct FragmentLabels {
    int width = 0;
    int height = 0;
    std::vector<std::int32_t> label;
    int count = 0;

    int at(int x, int y) const { return label[static_cast<std::size_t>(y) * width + x]; }
};

inline FragmentLabels label_fragments(const BinaryEdgeMap& edges) {
    FragmentLabels out;
    out.width = edges.width;
    out.height = edges.height;
    out.label.assign(edges.membership.size(), -1);

    std::vector<std::size_t> stack;
    for (int y = 0; y < edges.height; ++y) {
        for (int x = 0; x < edges.width; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * edges.width + x;
            if (!edges.membership[i] || out.label[i] >= 0) continue;
            const int id = out.count++;
            out.label[i] = id;
            stack.push_back(i);
            while (!stack.empty()) {
                const std::size_t p = stack.back();
                stack.pop_back();
                const int px = static_cast<int>(p % edges.width);
                const int py = static_cast<int>(p / edges.width);
                for (int dy = -1; dy <= 1; ++dy) {
                    for (int dx = -1; dx <= 1; ++dx) {
                        const int nx = px + dx, ny = py + dy;
                        if ((dx == 0 && dy == 0) || !edges.in_bounds(nx, ny)) continue;
                        const std::size_t q = static_cast<std::size_t>(ny) * edges.width + nx;
                        if (edges.membership[q] && out.label[q] < 0) {
                            out.label[q] = id;
                            stack.push_back(q);
                        }
                    }
                }
            }
        }
    }
    return out;
}

namespace detail {

inline int neighbor_count(const BinaryEdgeMap& edges, int x, int y) {
    int n = 0;
    for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx)
            if ((dx || dy) && edges.in_bounds(x + dx, y + dy) && edges.at(x + dx, y + dy)) ++n;
    return n;
}

}  // namespace detail

// True when the map is not single-pixel wide: a fully set 2x2 block, or a
// pixel with more than two neighbors where two of those neighbors touch each
// other (the redundant corners supercover rasterization leaves behind).
inline bool needs_thinning(const BinaryEdgeMap& edges) {
    for (int y = 0; y + 1 < edges.height; ++y)
        for (int x = 0; x + 1 < edges.width; ++x)
            if (edges.at(x, y) && edges.at(x + 1, y) && edges.at(x, y + 1) && edges.at(x + 1, y + 1))
                return true;

    for (int y = 0; y < edges.height; ++y) {
        for (int x = 0; x < edges.width; ++x) {
            if (!edges.at(x, y)) continue;
            std::pair<int, int> nbrs[8];
            int n = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if ((dx || dy) && edges.in_bounds(x + dx, y + dy) && edges.at(x + dx, y + dy))
                        nbrs[n++] = {dx, dy};
            if (n <= 2) continue;
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j)
                    if (std::abs(nbrs[i].first - nbrs[j].first) <= 1 &&
                        std::abs(nbrs[i].second - nbrs[j].second) <= 1)
                        return true;
        }
    }
    return false;
}

// Zhang-Suen iterative thinning; preserves connectivity while reducing thick
// strokes to single-pixel width.
inline BinaryEdgeMap thin_edges(BinaryEdgeMap edges) {
    const int w = edges.width, h = edges.height;
    auto px = [&](int x, int y) -> int {
        return (x >= 0 && x < w && y >= 0 && y < h && edges.at(x, y)) ? 1 : 0;
    };

    std::vector<std::size_t> removals;
    bool changed = true;
    while (changed) {
        changed = false;
        for (int pass = 0; pass < 2; ++pass) {
            removals.clear();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    if (!edges.at(x, y)) continue;
                    const int p2 = px(x, y - 1), p3 = px(x + 1, y - 1), p4 = px(x + 1, y);
                    const int p5 = px(x + 1, y + 1), p6 = px(x, y + 1), p7 = px(x - 1, y + 1);
                    const int p8 = px(x - 1, y), p9 = px(x - 1, y - 1);
                    const int b = p2 + p3 + p4 + p5 + p6 + p7 + p8 + p9;
                    if (b < 2 || b > 6) continue;
                    const int a = (p2 == 0 && p3 == 1) + (p3 == 0 && p4 == 1) + (p4 == 0 && p5 == 1) +
                                  (p5 == 0 && p6 == 1) + (p6 == 0 && p7 == 1) + (p7 == 0 && p8 == 1) +
                                  (p8 == 0 && p9 == 1) + (p9 == 0 && p2 == 1);
                    if (a != 1) continue;
                    const bool c1 = pass == 0 ? (p2 * p4 * p6 == 0) : (p2 * p4 * p8 == 0);
                    const bool c2 = pass == 0 ? (p4 * p6 * p8 == 0) : (p2 * p6 * p8 == 0);
                    if (c1 && c2) removals.push_back(static_cast<std::size_t>(y) * w + x);
                }
            }
            for (auto i : removals) edges.membership[i] = 0;
            changed = changed || !removals.empty();
        }
    }
    return edges;
}

inline BinaryEdgeMap ensure_thin(const BinaryEdgeMap& edges) {
    return needs_thinning(edges) ? thin_edges(edges) : edges;
}

// An edge pixel with exactly one edge neighbor: the boundary of a break.
struct EndPoint {
    int x = 0;
    int y = 0;
    int fragment_id = 0;
};

// Every edge pixel having exactly one 8-neighbor edge pixel, in row-major
// order. Thick input is thinned first.
inline std::vector<EndPoint> find_endpoints(const BinaryEdgeMap& edges) {
    const BinaryEdgeMap thin = ensure_thin(edges);
    const FragmentLabels labels = label_fragments(thin);
    std::vector<EndPoint> out;
    for (int y = 0; y < thin.height; ++y)
        for (int x = 0; x < thin.width; ++x)
            if (thin.at(x, y) && detail::neighbor_count(thin, x, y) == 1)
                out.push_back({x, y, labels.at(x, y)});
    return out;
}

// Walks along the fragment from the endpoint away from the break, collecting
// up to `length` pixels. The returned path is ordered so its LAST point is the
// endpoint (the growing end). At junctions the neighbor minimizing direction
// change wins; ties break in row-major neighbor order.
inline std::vector<Point> trace_back(const BinaryEdgeMap& edges, const EndPoint& ep, int length) {
    if (!edges.in_bounds(ep.x, ep.y) || !edges.at(ep.x, ep.y))
        throw std::invalid_argument("trace_back: endpoint is not an edge pixel");
    if (detail::neighbor_count(edges, ep.x, ep.y) != 1)
        throw std::invalid_argument("trace_back: pixel is not an endpoint");
    if (length < 2) throw std::invalid_argument("trace_back: length must be at least 2");

    static constexpr int offs[8][2] = {{-1, -1}, {0, -1}, {1, -1}, {-1, 0},
                                       {1, 0},   {-1, 1}, {0, 1},  {1, 1}};
    std::vector<std::pair<int, int>> path{{ep.x, ep.y}};
    std::vector<std::uint8_t> visited(edges.membership.size(), 0);
    visited[static_cast<std::size_t>(ep.y) * edges.width + ep.x] = 1;

    int cx = ep.x, cy = ep.y;
    double dirx = 0.0, diry = 0.0;
    while (static_cast<int>(path.size()) < length) {
        int bx = -1, by = -1;
        double best = -2.0;
        for (const auto& o : offs) {
            const int nx = cx + o[0], ny = cy + o[1];
            if (!edges.in_bounds(nx, ny) || !edges.at(nx, ny)) continue;
            if (visited[static_cast<std::size_t>(ny) * edges.width + nx]) continue;
            double score;
            if (path.size() == 1) {
                score = 0.0;  // row-major order decides the first move
            } else {
                const double len = std::hypot(static_cast<double>(o[0]), static_cast<double>(o[1]));
                score = (o[0] * dirx + o[1] * diry) / len;
            }
            if (score > best + 1e-12) {
                best = score;
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
    if (path.size() < 2) throw std::invalid_argument("trace_back: fragment shorter than 2 pixels");

    std::vector<Point> points(path.size());
    for (std::size_t i = 0; i < path.size(); ++i) {
        points[path.size() - 1 - i] = {static_cast<double>(path[i].first),
                                       static_cast<double>(path[i].second)};
    }
    return points;
}

struct RecoveryParams {
    int init_length = 25;     // trace-back length, pixels
    double max_grow = 70.0;   // maximum growing length, pixels
    int gvf_init_iters = 5;   // initial GVF iterations
    int gvf_expand_step = 5;  // iterations added per expansion round
    int gvf_max_iters = 50;   // total iteration budget before discarding
    double snap = 1.5;        // reach distance, pixels

    void validate(const SnakeletParams& sp) const {
        if (init_length < 2.0 * sp.spacing)
            throw std::invalid_argument("RecoveryParams: init_length must be >= 2*spacing");
        if (!(max_grow > 0.0)) throw std::invalid_argument("RecoveryParams: max_grow must be > 0");
        if (gvf_init_iters < 0 || gvf_init_iters > gvf_max_iters)
            throw std::invalid_argument("RecoveryParams: need 0 <= gvf_init_iters <= gvf_max_iters");
        if (gvf_expand_step <= 0)
            throw std::invalid_argument("RecoveryParams: gvf_expand_step must be > 0");
        if (!(snap > 0.0)) throw std::invalid_argument("RecoveryParams: snap must be > 0");
    }
};

struct RecoveryResult {
    SnakeletSet set;
    int gvf_iterations = 0;  // iterations applied to the shared GVF state
    int expansions = 0;      // expansion rounds consumed
};

namespace detail {

inline void resample_if_drifted(Snakelet& s, const SnakeletParams& sp) {
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (std::size_t i = 1; i < s.points.size(); ++i) {
        const double d = distance(s.points[i - 1], s.points[i]);
        dmin = std::min(dmin, d);
        dmax = std::max(dmax, d);
    }
    if ((dmax > 2.0 * sp.spacing || dmin < 0.5 * sp.spacing) && arc_length(s) > 0.0)
        s = resample(s, sp);
}

// One deform-and-grow attempt against a fixed GVF field. Returns true when the
// growing end reaches a non-excluded edge pixel within the growth budget.
inline bool recovery_attempt(Snakelet& s, const VectorField& field, const BinaryEdgeMap& edges,
                             const std::vector<int>& excluded, const RecoveryParams& rp,
                             const SnakeletParams& sp, DeformWorkspace& ws) {
    const double budget = arc_length(s) + rp.max_grow;
    const int max_iters = 4 * static_cast<int>(budget / std::max(sp.step, 1.0)) + 64;
    for (int iter = 0; iter < max_iters; ++iter) {
        s = deform_step(s, field, sp, &ws);
        resample_if_drifted(s, sp);
        if (reached_edge(s, edges, rp.snap, excluded).tail) return true;
        s = grow(s, nullptr, sp, edges.width, edges.height);
        if (reached_edge(s, edges, rp.snap, excluded).tail) return true;
        if (s.state == SnakeState::Stopped) return false;
        if (arc_length(s) > budget) return false;
    }
    return false;
}

}  // namespace detail

// Break recovery: initializes a unidirectional snakelet at every endpoint by
// tracing back along its fragment, then alternates deformation and growth
// under GVF computed from the edge map (or from NMS gradient magnitudes with
// 0.2-fractile clipping when a gradient field is supplied). Snakelets that
// fail at the current GVF capture range are retried from their initial shape
// after each expansion; when the iteration budget is exhausted they are
// discarded.
inline RecoveryResult recover(const BinaryEdgeMap& edges, const RecoveryParams& rp,
                              const SnakeletParams& sp, const GradientField* grad = nullptr) {
    sp.validate();
    rp.validate(sp);
    if (grad && (grad->width != edges.width || grad->height != edges.height))
        throw std::invalid_argument("recover: gradient dimensions mismatch");

    RecoveryResult result;
    result.set.width = edges.width;
    result.set.height = edges.height;

    const BinaryEdgeMap thin = ensure_thin(edges);
    const std::vector<EndPoint> endpoints = find_endpoints(thin);
    if (endpoints.empty()) return result;

    double fractile = 0.0;
    RasterImage source;
    if (grad) {
        source = nonmax_suppress(*grad);
        fractile = 0.2;
    } else {
        source = thin.to_image();
    }
    GvfState state = gvf_iterate(gvf_init(source), rp.gvf_init_iters);

    // Initial snakelets and their self-exclusion pixel sets (the traced path).
    std::vector<Snakelet> initial(endpoints.size());
    std::vector<std::vector<int>> excluded(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) {
        const auto path = trace_back(thin, endpoints[i], rp.init_length);
        Snakelet s;
        s.id = static_cast<int>(i);
        s.source_id = endpoints[i].fragment_id;
        s.points = path;
        s.grow_head = false;
        s.grow_tail = true;
        s.origin = {static_cast<double>(endpoints[i].x), static_cast<double>(endpoints[i].y)};
        if (arc_length(s) > 0.0) s = resample(s, sp);
        initial[i] = s;
        auto& excl = excluded[i];
        excl.reserve(path.size());
        for (const auto& p : path)
            excl.push_back(static_cast<int>(std::lround(p.y)) * thin.width +
                           static_cast<int>(std::lround(p.x)));
        std::sort(excl.begin(), excl.end());
    }

    std::vector<Snakelet> finals(endpoints.size());
    std::vector<std::size_t> pending(endpoints.size());
    for (std::size_t i = 0; i < endpoints.size(); ++i) pending[i] = i;

    DeformWorkspace ws;
    int iters = rp.gvf_init_iters;
    while (true) {
        const VectorField field = gvf_normalize(state, fractile);
        std::vector<std::size_t> still_pending;
        for (const std::size_t i : pending) {
            Snakelet attempt = initial[i];
            if (detail::recovery_attempt(attempt, field, thin, excluded[i], rp, sp, ws)) {
                attempt.state = SnakeState::Reached;
                finals[i] = attempt;
            } else {
                finals[i] = attempt;  // last failed geometry, kept for reporting
                still_pending.push_back(i);
            }
        }
        pending = std::move(still_pending);
        if (pending.empty() || iters >= rp.gvf_max_iters) break;
        const int step = std::min(rp.gvf_expand_step, rp.gvf_max_iters - iters);
        state = gvf_iterate(std::move(state), step);
        iters += step;
        ++result.expansions;
    }
    for (const std::size_t i : pending) finals[i].state = SnakeState::Discarded;

    result.gvf_iterations = iters;
    result.set.snakelets = std::move(finals);
    return result;
}

}  // namespace snakelets
