#pragma once

#include "canny.hpp"
#include "recovery.hpp"
#include "snakelet.hpp"

namespace snakelets {

struct DetectParams {
    double sigma = 1.4;
    Thresholds th;
    int seed_init_length = 12;    // establishment length of a seed snakelet, pixels
    double chain_max_grow = 40.0; // growth cap per chain segment, pixels
    int gvf_iters = 4;            // initial GVF iterations over the NMS image
    int coverage_radius = 2;      // occupancy dilation radius, pixels

    void validate() const {
        th.validate();
        if (sigma < 0.0) throw std::invalid_argument("DetectParams: sigma must be nonnegative");
        if (seed_init_length <= 0)
            throw std::invalid_argument("DetectParams: seed_init_length must be positive");
        if (!(chain_max_grow > 0.0))
            throw std::invalid_argument("DetectParams: chain_max_grow must be positive");
        if (gvf_iters <= 0) throw std::invalid_argument("DetectParams: gvf_iters must be positive");
        if (coverage_radius < 0)
            throw std::invalid_argument("DetectParams: coverage_radius must be nonnegative");
    }
};

struct Seed {
    int x = 0;
    int y = 0;
    float value = 0.0f;
};

// All NMS pixels at or above the high threshold, in decreasing magnitude
// order; ties break by row-major position.
inline std::vector<Seed> select_seeds(const RasterImage& nms, const Thresholds& th) {
    if (nms.channels != 1) throw std::invalid_argument("select_seeds: single-channel image required");
    th.validate();
    std::vector<Seed> seeds;
    for (int y = 0; y < nms.height; ++y)
        for (int x = 0; x < nms.width; ++x)
            if (nms.at(x, y) >= th.high) seeds.push_back({x, y, nms.at(x, y)});
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) {
        if (a.value != b.value) return a.value > b.value;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    return seeds;
}

// Supercover rasterization of every snakelet polyline, union semantics.
inline BinaryEdgeMap rasterize(const SnakeletSet& set) {
    BinaryEdgeMap map(set.width, set.height);
    for (const auto& s : set.snakelets) {
        for (std::size_t i = 1; i < s.points.size(); ++i) {
            supercover_line(s.points[i - 1], s.points[i], [&](int x, int y) {
                if (map.in_bounds(x, y)) map.set(x, y);
            });
        }
    }
    return map;
}

struct DetectResult {
    SnakeletSet set;
    RasterImage nms;
    int recovery_reached = 0;  // snakelets added by the final recovery pass
};

namespace detail {

constexpr double kDetectSnap = 1.5;
constexpr double kMinSnakeletArc = 4.0;
constexpr int kMaxChainSegments = 1024;

struct ChainRunner {
    const VectorField& field;
    const RasterImage& nms;
    const DetectParams& dp;
    const SnakeletParams& sp;
    OccupancyMask& mask;
    SnakeletSet& set;
    int& next_id;
    DeformWorkspace ws;

    // Finalizes a chain segment: drops short noise, otherwise registers it
    // into the occupancy mask and appends it to the output set.
    bool finalize(Snakelet& s) {
        if (arc_length(s) < kMinSnakeletArc) return false;
        register_snakelet(mask, s);
        set.snakelets.push_back(s);
        return true;
    }

    // Runs one full lineage from a stub snakelet: grow each segment to the
    // chain cap, then continue with a new segment pinned at the junction,
    // until the TL gate stops growth or an existing snakelet is reached.
    void run(Snakelet first) {
        double lineage_arc = 0.0;
        Snakelet cur = std::move(first);
        for (int segment = 0; segment < kMaxChainSegments; ++segment) {
            const double cap = dp.chain_max_grow;
            const int max_iters = 4 * static_cast<int>(cap / std::max(sp.step, 1.0)) + 64;
            bool chain_on = false;
            for (int iter = 0; iter < max_iters; ++iter) {
                cur = deform_step(cur, field, sp, &ws);
                resample_if_drifted(cur, sp);
                const bool established = lineage_arc + arc_length(cur) >= dp.seed_init_length;
                if (established && reached_edge(cur, mask, kDetectSnap).tail) {
                    cur.state = SnakeState::Reached;
                    break;
                }
                cur = grow(cur, &nms, sp, nms.width, nms.height, dp.th.low);
                if (cur.state == SnakeState::Stopped) break;
                if (established && reached_edge(cur, mask, kDetectSnap).tail) {
                    cur.state = SnakeState::Reached;
                    break;
                }
                if (arc_length(cur) >= cap) {
                    chain_on = true;
                    break;
                }
            }
            if (!chain_on) {
                if (cur.state == SnakeState::Growing) cur.state = SnakeState::Stopped;
                finalize(cur);
                return;
            }

            // Segment hit the cap: close it and continue from its end.
            cur.state = SnakeState::Stopped;
            Vec2 t;
            const bool has_tangent = end_tangent(cur, false, t);
            const Point junction = cur.points.back();
            lineage_arc += arc_length(cur);
            if (!finalize(cur) || !has_tangent) return;

            // Two stub points ahead of the junction so the end tangent does
            // not hinge on the pinned head alone.
            Point second{std::clamp(junction.x + sp.step * t.x, 0.0, double(nms.width - 1)),
                         std::clamp(junction.y + sp.step * t.y, 0.0, double(nms.height - 1))};
            Point third{std::clamp(junction.x + 2.0 * sp.step * t.x, 0.0, double(nms.width - 1)),
                        std::clamp(junction.y + 2.0 * sp.step * t.y, 0.0, double(nms.height - 1))};
            if (distance(junction, second) < 1e-6) return;  // pinned against the border
            Snakelet child;
            child.id = next_id++;
            child.source_id = cur.source_id;
            child.parent_id = cur.id;
            child.points = distance(second, third) < 1e-6 ? std::vector<Point>{junction, second}
                                                          : std::vector<Point>{junction, second, third};
            child.grow_tail = true;
            child.pin_head = true;
            child.origin = junction;
            cur = std::move(child);
        }
    }
};

}  // namespace detail

// Snakelet edge detection: gradient + NMS, GVF over the NMS image with
// 0.2-fractile-clipped normalization, seed snakelets grown in decreasing
// magnitude order under occupancy suppression, chained growth in place of
// hysteresis linking, and a final recovery pass over the rasterized result.
inline DetectResult detect(const RasterImage& img, const DetectParams& dp,
                           const SnakeletParams& sp = {}, const RecoveryParams& rp = {}) {
    dp.validate();
    sp.validate();
    rp.validate(sp);
    if (img.channels != 1 && img.channels != 3)
        throw std::invalid_argument("detect: 1 or 3 channels required");

    const GradientField grad =
        img.channels == 3 ? gradient_color(img, dp.sigma) : gradient_gray(img, dp.sigma);
    DetectResult result;
    result.nms = nonmax_suppress(grad);
    result.set.width = img.width;
    result.set.height = img.height;

    const VectorField field = gvf_normalize(gvf_iterate(gvf_init(result.nms), dp.gvf_iters), 0.2);
    const std::vector<Seed> seeds = select_seeds(result.nms, dp.th);

    OccupancyMask mask(img.width, img.height, dp.coverage_radius);
    int next_id = 0;
    detail::ChainRunner runner{field, result.nms, dp, sp, mask, result.set, next_id, {}};

    constexpr double half_pi = std::numbers::pi / 2.0;
    for (const Seed& seed : seeds) {
        if (mask.at(seed.x, seed.y)) continue;
        const double theta = grad.orientation[grad.index(seed.x, seed.y)];
        const Vec2 along{std::cos(theta + half_pi), std::sin(theta + half_pi)};
        const Point origin{static_cast<double>(seed.x), static_cast<double>(seed.y)};

        const int seed_source = next_id;  // shared by both directions
        for (const double sign : {1.0, -1.0}) {
            Point second{std::clamp(origin.x + sign * sp.step * along.x, 0.0, double(img.width - 1)),
                         std::clamp(origin.y + sign * sp.step * along.y, 0.0, double(img.height - 1))};
            if (distance(origin, second) < 1e-6) continue;
            Snakelet stub;
            stub.id = next_id++;
            stub.source_id = seed_source;
            stub.points = {origin, second};
            stub.grow_tail = true;
            stub.origin = origin;
            runner.run(std::move(stub));
        }
    }

    // Final recovery pass over the rasterized snakelet map, guided by the
    // same gradient field.
    if (!result.set.snakelets.empty()) {
        const BinaryEdgeMap ras = rasterize(result.set);
        RecoveryResult rec = recover(ras, rp, sp, &grad);
        for (auto& s : rec.set.snakelets) {
            if (s.state != SnakeState::Reached) continue;
            s.id = next_id++;
            s.parent_id = -1;
            result.set.snakelets.push_back(std::move(s));
            ++result.recovery_reached;
        }
    }
    return result;
}

}  // namespace snakelets
