#include <snakelets/eval.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "test_helpers.hpp"

using namespace snakelets;

namespace {

BinaryEdgeMap line_map(int w, int h, int y) {
    BinaryEdgeMap map(w, h);
    for (int x = 0; x < w; ++x) map.set(x, y);
    return map;
}

}  // namespace

TEST_CASE("distance transform matches brute force on random maps") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        testutil::Rng rng(seed);
        BinaryEdgeMap map(17, 13);
        for (auto& m : map.membership) m = rng.uniform() < 0.1;
        const auto dt = distance_transform(map);
        for (int y = 0; y < 13; ++y)
            for (int x = 0; x < 17; ++x) {
                double best = 1e18;
                for (int v = 0; v < 13; ++v)
                    for (int u = 0; u < 17; ++u)
                        if (map.at(u, v)) best = std::min(best, std::hypot(x - u, y - v));
                const double got = dt[static_cast<std::size_t>(y) * 17 + x];
                if (best < 1e17)
                    REQUIRE(got == Catch::Approx(best).margin(1e-9));
                else
                    REQUIRE(got > 1e8);  // empty map: effectively infinite
            }
    }
}

TEST_CASE("score on identical maps is perfect") {
    const BinaryEdgeMap map = ellipse_ring(60, 60, 30, 30, 20, 15);
    const Metrics m = score(map, map, 0.0);
    REQUIRE(m.precision == 1.0);
    REQUIRE(m.recall == 1.0);
    REQUIRE(m.f1 == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(m.mean_contour_distance == 0.0);
    REQUIRE(m.gap_closure_rate == 1.0);
}

TEST_CASE("empty result follows the stated conventions") {
    const BinaryEdgeMap truth = line_map(20, 10, 5);
    const BinaryEdgeMap empty(20, 10);
    const Metrics m = score(empty, truth, 2.0);
    REQUIRE(m.precision == 1.0);  // empty-set convention
    REQUIRE(m.recall == 0.0);
    REQUIRE(m.mean_contour_distance == 0.0);
}

TEST_CASE("tolerance bounds matching of parallel lines") {
    const BinaryEdgeMap truth = line_map(30, 12, 5);
    const BinaryEdgeMap result = line_map(30, 12, 7);

    const Metrics tight = score(result, truth, 1.0);
    REQUIRE(tight.precision == 0.0);
    REQUIRE(tight.recall == 0.0);

    const Metrics loose = score(result, truth, 2.0);
    REQUIRE(loose.precision == 1.0);
    REQUIRE(loose.recall == 1.0);
    REQUIRE(loose.mean_contour_distance == Catch::Approx(2.0));

    // f1 is the harmonic mean of precision and recall.
    const Metrics half = score(line_map(30, 12, 6), truth, 1.0);
    REQUIRE(half.f1 ==
            Catch::Approx(2.0 * half.precision * half.recall / (half.precision + half.recall))
                .margin(1e-9));

    REQUIRE_THROWS_AS(score(BinaryEdgeMap(5, 5), truth, 1.0), std::invalid_argument);
}

TEST_CASE("gap closure needs 80% coverage within tolerance") {
    const BinaryEdgeMap truth = line_map(40, 10, 5);
    BinaryEdgeMap result = truth;
    for (int x = 10; x < 20; ++x) result.set(x, 5, false);  // drop 10 pixels

    PixelSet gap;
    for (int x = 10; x < 20; ++x) gap.emplace_back(x, 5);
    PixelSet covered_gap;
    for (int x = 25; x < 33; ++x) covered_gap.emplace_back(x, 5);

    const Metrics m = score(result, truth, 1.0, {gap, covered_gap});
    // First gap: the interior 8 of its 10 pixels are farther than 1 px from
    // any remaining pixel, so coverage is 20% and it stays open. Second gap
    // lies on intact pixels, so it is closed.
    REQUIRE(m.gap_closure_rate == 0.5);
}

TEST_CASE("make_breaks accounting, determinism, and disjointness") {
    const BinaryEdgeMap ring = circle_ring(80, 80, 40, 40, 25);

    const BrokenEdges none = make_breaks(ring, {0, 5, 10, 7});
    REQUIRE(none.edges.membership == ring.membership);
    REQUIRE(none.gaps.empty());

    const int before = ring.count();
    const BrokenEdges one = make_breaks(ring, {1, 10, 10, 42});
    REQUIRE(one.gaps.size() == 1);
    REQUIRE(one.gaps[0].size() == 10);
    REQUIRE(one.edges.count() == before - 10);

    const BrokenEdges again = make_breaks(ring, {1, 10, 10, 42});
    REQUIRE(again.edges.membership == one.edges.membership);
    REQUIRE(again.gaps == one.gaps);

    // Three breaks: pairwise disjoint (not even 8-adjacent), each within one
    // fragment of the original map.
    const BrokenEdges three = make_breaks(ring, {3, 5, 12, 7});
    REQUIRE(three.gaps.size() == 3);
    std::set<std::pair<int, int>> all;
    for (const auto& gap : three.gaps)
        for (const auto& px : gap) REQUIRE(all.insert(px).second);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i + 1; j < 3; ++j)
            for (const auto& [ax, ay] : three.gaps[i])
                for (const auto& [bx, by] : three.gaps[j])
                    REQUIRE(std::max(std::abs(ax - bx), std::abs(ay - by)) > 1);

    // No break ever spans two fragments.
    BinaryEdgeMap pair(60, 40);
    for (int x = 5; x < 55; ++x) {
        pair.set(x, 10);
        pair.set(x, 30);
    }
    const FragmentLabels labels = label_fragments(pair);
    const BrokenEdges split = make_breaks(pair, {2, 5, 15, 9});
    for (const auto& gap : split.gaps) {
        const int label = labels.at(gap.front().first, gap.front().second);
        for (const auto& [x, y] : gap) REQUIRE(labels.at(x, y) == label);
    }

    // Impossible request: more break pixels than the fragment can host.
    BinaryEdgeMap small(30, 10);
    for (int x = 5; x < 15; ++x) small.set(x, 4);
    REQUIRE_THROWS_WITH(make_breaks(small, {4, 8, 9, 1}),
                        Catch::Matchers::ContainsSubstring("disjoint"));
}

TEST_CASE("synthetic fixtures are thin and well-formed") {
    const BinaryEdgeMap ellipse = ellipse_ring(200, 200, 100, 100, 80, 50);
    REQUIRE_FALSE(needs_thinning(ellipse));
    REQUIRE(find_endpoints(ellipse).empty());
    REQUIRE(label_fragments(ellipse).count == 1);

    // The U's right-angle corners carry a redundant corner pixel; endpoint
    // analysis thins them away and still sees one open curve.
    const BinaryEdgeMap u = u_shape(200, 200, 50, 40, 150, 160);
    REQUIRE(find_endpoints(u).size() == 2);
    REQUIRE(label_fragments(thin_edges(u)).count == 1);

    const RasterImage plane = half_plane_image(20, 10, 8);
    for (int y = 0; y < 10; ++y) {
        REQUIRE(plane.at(7, y) == 0.0f);
        REQUIRE(plane.at(8, y) == 1.0f);
    }

    const RasterImage ring = ring_sector_image(100, 100, 50, 50, 30, 0.0, 5.0, 20.0, 0.02);
    REQUIRE(ring.at(50, 50) > 0.0f);
    REQUIRE(ring.at(5, 5) == 0.0f);       // outside the disc
    REQUIRE(ring.at(79, 50) < 0.05f);     // faded rim region (angle 0)
    REQUIRE(ring.at(21, 50) > 0.9f);      // strong side (angle pi)
}

TEST_CASE("curved break fixture geometry") {
    const ContourFixture fx = curved_break_fixture(120, 120, 60, 60, 40, 1.0, 20);
    REQUIRE(fx.gap.size() == 20);
    REQUIRE(fx.truth.count() == fx.edges.count() + 20);
    REQUIRE(find_endpoints(fx.edges).size() == 2);

    // The synthesized ridge peaks on the contour and decays off it.
    const std::size_t on = fx.grad.index(100, 60);   // radius 40 from center
    const std::size_t off = fx.grad.index(110, 60);  // 10 px outside
    REQUIRE(fx.grad.magnitude[on] > 0.9f);
    REQUIRE(fx.grad.magnitude[off] < 0.1f);
}
