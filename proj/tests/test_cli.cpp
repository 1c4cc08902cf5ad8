#include <snakelets/eval.hpp>
#include <snakelets/image_io.hpp>

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "test_helpers.hpp"

using namespace snakelets;
using testutil::TempDir;

namespace {

const std::string kCli = SNAKELETS_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

int run_capture(const std::string& args, const std::string& out_file) {
    const std::string cmd = kCli + " " + args + " >" + out_file + " 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_fixture_png(const std::string& path) {
    save_png(path, half_plane_image(48, 32, 24));
}

}  // namespace

TEST_CASE("canny subcommand writes edges and validates before reading") {
    TempDir dir("canny");
    write_fixture_png(dir.file("in.png"));

    REQUIRE(run_capture("canny --sigma 1.4 --th 0.2 --tl 0.05 " + dir.file("in.png") + " " +
                            dir.file("out.png"),
                        dir.file("log.txt")) == 0);
    REQUIRE(std::filesystem::exists(dir.file("out.png")));
    REQUIRE(slurp(dir.file("log.txt")).find("edges:") != std::string::npos);
    const BinaryEdgeMap edges = BinaryEdgeMap::from_image(load_image(dir.file("out.png")));
    REQUIRE(edges.count() > 0);

    // Missing input: I/O failure, message names the path.
    REQUIRE(run_capture("canny " + dir.file("nope.png") + " " + dir.file("x.png"),
                        dir.file("err.txt")) == 3);
    REQUIRE(slurp(dir.file("err.txt")).find("nope.png") != std::string::npos);

    // Invalid thresholds are rejected before the (nonexistent) image is read.
    REQUIRE(run("canny --tl 0.3 --th 0.2 " + dir.file("nope.png") + " " + dir.file("x.png")) == 2);

    // Usage errors.
    REQUIRE(run("canny") == 2);
    REQUIRE(run("frobnicate a b") == 2);
}

TEST_CASE("config files feed parameters with flags taking precedence") {
    TempDir dir("config");
    write_fixture_png(dir.file("in.png"));
    {
        std::ofstream cfg(dir.file("canny.cfg"));
        cfg << "canny.sigma=1.0\ncanny.th=0.25\ncanny.tl=0.08\n";
    }

    REQUIRE(run("--config " + dir.file("canny.cfg") + " canny " + dir.file("in.png") + " " +
                dir.file("cfg.png")) == 0);
    REQUIRE(run("canny --sigma 1.0 --th 0.25 --tl 0.08 " + dir.file("in.png") + " " +
                dir.file("flags.png")) == 0);
    REQUIRE(run("canny " + dir.file("in.png") + " " + dir.file("def.png")) == 0);
    REQUIRE(testutil::read_bytes(dir.file("cfg.png")) == testutil::read_bytes(dir.file("flags.png")));
    REQUIRE(testutil::read_bytes(dir.file("cfg.png")) != testutil::read_bytes(dir.file("def.png")));

    // A flag overrides the config value.
    {
        std::ofstream cfg(dir.file("bad.cfg"));
        cfg << "canny.th=0.9\ncanny.tl=0.95\n";  // invalid as-is (tl > th)
    }
    REQUIRE(run("--config " + dir.file("bad.cfg") + " canny --tl 0.1 " + dir.file("in.png") + " " +
                dir.file("ovr.png")) == 0);
}

TEST_CASE("canny reruns produce byte-identical output") {
    TempDir dir("idem");
    write_fixture_png(dir.file("in.png"));
    REQUIRE(run("canny " + dir.file("in.png") + " " + dir.file("a.png")) == 0);
    REQUIRE(run("canny " + dir.file("in.png") + " " + dir.file("b.png")) == 0);
    REQUIRE(testutil::read_bytes(dir.file("a.png")) == testutil::read_bytes(dir.file("b.png")));
}

TEST_CASE("recover subcommand recovers a broken ring") {
    TempDir dir("recover");
    BinaryEdgeMap ring = ellipse_ring(160, 160, 80, 80, 60, 40);
    const BrokenEdges broken = make_breaks(ring, {1, 12, 12, 5});
    save_png(dir.file("broken.png"), broken.edges);

    REQUIRE(run("recover " + dir.file("broken.png") + " " + dir.file("rec.png") + " --svg " +
                dir.file("rec.svg")) == 0);
    REQUIRE(std::filesystem::exists(dir.file("rec.png")));
    REQUIRE(std::filesystem::exists(dir.file("rec.snk")));  // default dump path
    REQUIRE(std::filesystem::exists(dir.file("rec.svg")));

    const std::string dump = slurp(dir.file("rec.snk"));
    REQUIRE(dump.find("Reached") != std::string::npos);
    const std::string svg = slurp(dir.file("rec.svg"));
    REQUIRE(svg.find("<svg") != std::string::npos);
    REQUIRE(svg.find("<polyline") != std::string::npos);

    // The recovered map is a superset of the broken input.
    const BinaryEdgeMap out = BinaryEdgeMap::from_image(load_image(dir.file("rec.png")));
    for (std::size_t i = 0; i < out.membership.size(); ++i)
        if (broken.edges.membership[i]) REQUIRE(out.membership[i]);
    REQUIRE(out.count() > broken.edges.count());

    // Invalid parameter bundle is a usage error.
    REQUIRE(run("recover --snap -1 " + dir.file("broken.png") + " " + dir.file("x.png")) == 2);

    // Grayscale input is auto-binarized at 0.5 with a warning.
    RasterImage gray = broken.edges.to_image();
    for (auto& v : gray.data) v *= 0.8f;
    save_png(dir.file("gray.png"), gray);
    REQUIRE(run_capture("recover " + dir.file("gray.png") + " " + dir.file("gray-rec.png"),
                        dir.file("warn.txt")) == 0);
    REQUIRE(slurp(dir.file("warn.txt")).find("warning") != std::string::npos);
}

TEST_CASE("recover accepts a gradient image for guidance") {
    TempDir dir("recgrad");
    const ContourFixture fx = curved_break_fixture(120, 120, 60, 60, 40, 0.7, 14);
    save_png(dir.file("edges.png"), fx.edges);

    // Grayscale guidance image whose gradients ride the true contour.
    RasterImage guide(120, 120, 1);
    for (int y = 0; y < 120; ++y)
        for (int x = 0; x < 120; ++x)
            guide.at(x, y) = std::hypot(x - 60.0, y - 60.0) < 40.0 ? 1.0f : 0.0f;
    save_png(dir.file("guide.png"), guide);

    REQUIRE(run("recover " + dir.file("edges.png") + " " + dir.file("out.png") +
                " --gradient-image " + dir.file("guide.png") + " --sigma 1.2") == 0);
    REQUIRE(std::filesystem::exists(dir.file("out.png")));
}

TEST_CASE("detect subcommand emits raster, overlay, records, and svg") {
    TempDir dir("detect");
    write_fixture_png(dir.file("in.png"));

    REQUIRE(run("detect " + dir.file("in.png") + " " + dir.file("edges.png") + " --overlay " +
                dir.file("over.png") + " --dump " + dir.file("snakes.snk") +
                " --export svg --merge-chains") == 0);
    REQUIRE(std::filesystem::exists(dir.file("edges.png")));
    REQUIRE(std::filesystem::exists(dir.file("over.png")));
    REQUIRE(std::filesystem::exists(dir.file("snakes.snk")));
    REQUIRE(std::filesystem::exists(dir.file("edges.svg")));  // derived from output stem

    const RasterImage overlay = load_image(dir.file("over.png"));
    REQUIRE(overlay.channels == 3);

    REQUIRE(run("detect --export tiff " + dir.file("in.png") + " " + dir.file("x.png")) == 2);
}

TEST_CASE("detect reruns are byte-identical") {
    TempDir dir("detidem");
    write_fixture_png(dir.file("in.png"));
    REQUIRE(run("detect " + dir.file("in.png") + " " + dir.file("a.png") + " --dump " +
                dir.file("a.snk")) == 0);
    REQUIRE(run("detect " + dir.file("in.png") + " " + dir.file("b.png") + " --dump " +
                dir.file("b.snk")) == 0);
    REQUIRE(testutil::read_bytes(dir.file("a.png")) == testutil::read_bytes(dir.file("b.png")));
    REQUIRE(testutil::read_bytes(dir.file("a.snk")) == testutil::read_bytes(dir.file("b.snk")));
}

TEST_CASE("eval subcommand reports metrics and enforces assertions") {
    TempDir dir("eval");

    REQUIRE(run_capture("eval --fixture ellipse --breaks 1 --min-len 10 --max-len 14 --seed 3 "
                        "--report " +
                            dir.file("m.txt"),
                        dir.file("log.txt")) == 0);
    const std::string report = slurp(dir.file("m.txt"));
    REQUIRE(report.find("precision:") != std::string::npos);
    REQUIRE(report.find("gap_closure_rate:") != std::string::npos);

    // Satisfiable assertion passes, unsatisfiable one fails with exit 1 and
    // names the failing metric.
    REQUIRE(run("eval --fixture ellipse --breaks 1 --min-len 10 --max-len 14 --seed 3 "
                "--assert-gap-closure 0.99") == 0);
    REQUIRE(run_capture("eval --fixture ellipse --breaks 1 --min-len 10 --max-len 14 --seed 3 "
                        "--assert-f1 1.01",
                        dir.file("fail.txt")) == 1);
    REQUIRE(slurp(dir.file("fail.txt")).find("f1") != std::string::npos);

    REQUIRE(run("eval --fixture nosuch") == 2);
}

TEST_CASE("gvf subcommand writes component images") {
    TempDir dir("gvf");
    BinaryEdgeMap ring = ellipse_ring(60, 60, 30, 30, 20, 14);
    save_png(dir.file("ring.png"), ring);

    const std::string prefix = dir.file("f");
    REQUIRE(run("gvf " + dir.file("ring.png") + " --iters 3 10 --out-prefix " + prefix) == 0);
    for (const std::string name : {"-u-3.pgm", "-v-3.pgm", "-u-10.pgm", "-v-10.pgm"})
        REQUIRE(std::filesystem::exists(prefix + name));

    // Zero source: uniform 128 images at any iteration count.
    save_png(dir.file("zero.png"), RasterImage(32, 32, 1));
    REQUIRE(run("gvf " + dir.file("zero.png") + " --iters 4 --out-prefix " + dir.file("z")) == 0);
    const RasterImage u = load_image(dir.file("z-u-4.pgm"));
    for (float v : u.data) REQUIRE(std::lround(v * 255.0f) == 128);

    REQUIRE(run("gvf " + dir.file("ring.png") + " --mu 0 --out-prefix " + dir.file("m")) == 2);
}
