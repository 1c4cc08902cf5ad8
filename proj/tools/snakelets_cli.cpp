// Command-line surface for snakelet edge detection and recovery.
//
// Exit codes: 0 success, 1 assertion failure (eval), 2 usage or parameter
// validation error, 3 I/O error.

#include <snakelets/snakelets.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>

using namespace snakelets;

namespace {

void write_text(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path + "' for writing");
    f << content;
    if (!f.good()) throw IoError("failed writing '" + path + "'");
}

std::string with_extension(const std::string& path, const std::string& ext) {
    return std::filesystem::path(path).replace_extension(ext).string();
}

struct CannyOptions {
    std::string input, output;
    double sigma = 1.4;
    double th = 0.2, tl = 0.05;
    double th_fractile = -1.0, tl_fractile = -1.0;
};

struct SnakeOptions {
    SnakeletParams sp;
    RecoveryParams rp;
};

struct RecoverOptions {
    std::string input, output;
    std::string dump, svg, gradient_image;
    double sigma = 1.4;
    SnakeOptions snake;
};

struct DetectOptions {
    std::string input, output;
    std::string overlay, svg, dump, export_format;
    bool merge_chains = false;
    DetectParams dp;
    SnakeOptions snake;
};

struct EvalOptions {
    std::string fixture = "ellipse";
    std::string mode;
    std::string report;
    int breaks = 1;
    int min_len = 10;
    int max_len = 20;
    std::uint64_t seed = 1;
    double tolerance = 2.0;
    double assert_f1 = -1.0;
    double assert_gap_closure = -1.0;
    SnakeOptions snake;
    DetectParams dp;
};

struct GvfOptions {
    std::string input;
    std::string prefix;
    double mu = 0.2;
    std::vector<int> iters{3, 10};
};

void add_snake_options(CLI::App* cmd, SnakeOptions& o) {
    cmd->add_option("--alpha", o.sp.alpha, "tension weight")->capture_default_str();
    cmd->add_option("--beta", o.sp.beta, "rigidity weight")->capture_default_str();
    cmd->add_option("--gamma", o.sp.gamma, "growing-force weight")->capture_default_str();
    cmd->add_option("--spacing", o.sp.spacing, "target point spacing, pixels")->capture_default_str();
    cmd->add_option("--kappa", o.sp.kappa, "external-force step scale")->capture_default_str();
    cmd->add_option("--step", o.sp.step, "growth step length, pixels")->capture_default_str();
    cmd->add_option("--init-length", o.rp.init_length, "trace-back length, pixels")
        ->capture_default_str();
    cmd->add_option("--max-grow", o.rp.max_grow, "maximum growing length, pixels")
        ->capture_default_str();
    cmd->add_option("--gvf-init-iters", o.rp.gvf_init_iters, "initial GVF iterations")
        ->capture_default_str();
    cmd->add_option("--gvf-expand-step", o.rp.gvf_expand_step, "GVF iterations per expansion")
        ->capture_default_str();
    cmd->add_option("--gvf-max-iters", o.rp.gvf_max_iters, "total GVF iteration budget")
        ->capture_default_str();
    cmd->add_option("--snap", o.rp.snap, "reach distance, pixels")->capture_default_str();
}

int run_canny(const CannyOptions& o) {
    Thresholds th{o.th, o.tl};
    if (o.th_fractile < 0.0 && o.tl_fractile < 0.0)
        th.validate();  // reject bad thresholds before any pixel work

    RasterImage img = load_image(o.input);
    if (o.th_fractile >= 0.0 || o.tl_fractile >= 0.0) {
        const GradientField grad =
            img.channels == 3 ? gradient_color(img, o.sigma) : gradient_gray(img, o.sigma);
        const RasterImage nms = nonmax_suppress(grad);
        if (o.th_fractile >= 0.0) th.high = magnitude_fractile(nms, o.th_fractile);
        if (o.tl_fractile >= 0.0) th.low = magnitude_fractile(nms, o.tl_fractile);
        th.validate();
    }

    const BinaryEdgeMap edges = canny_detect(img, o.sigma, th);
    save_png(o.output, edges);
    const double pct = 100.0 * edges.count() / (static_cast<double>(img.width) * img.height);
    std::cout << "edges: " << edges.count() << " pixels (" << pct << "% of " << img.width << "x"
              << img.height << ")\n";
    return 0;
}

BinaryEdgeMap load_edge_map(const std::string& path) {
    RasterImage img = load_image(path);
    if (img.channels != 1) img = to_grayscale(img);
    bool binary = true;
    for (float v : img.data)
        if (v != 0.0f && v != 1.0f) {
            binary = false;
            break;
        }
    if (!binary)
        std::cerr << "warning: '" << path << "' is not binary, thresholding at 0.5\n";
    return BinaryEdgeMap::from_image(img, 0.5f);
}

int run_recover(const RecoverOptions& o) {
    o.snake.sp.validate();
    o.snake.rp.validate(o.snake.sp);

    const BinaryEdgeMap edges = load_edge_map(o.input);

    GradientField grad;
    const GradientField* grad_ptr = nullptr;
    if (!o.gradient_image.empty()) {
        const RasterImage src = load_image(o.gradient_image);
        grad = src.channels == 3 ? gradient_color(src, o.sigma) : gradient_gray(src, o.sigma);
        if (grad.width != edges.width || grad.height != edges.height)
            throw std::invalid_argument("gradient image dimensions do not match the edge image");
        grad_ptr = &grad;
    }

    const RecoveryResult result = recover(edges, o.snake.rp, o.snake.sp, grad_ptr);

    // Output edge map: input plus the rasterized reached snakelets.
    SnakeletSet reached{edges.width, edges.height, {}};
    int discarded = 0;
    for (const auto& s : result.set.snakelets) {
        if (s.state == SnakeState::Reached) reached.snakelets.push_back(s);
        if (s.state == SnakeState::Discarded) ++discarded;
    }
    BinaryEdgeMap out = rasterize(reached);
    for (std::size_t i = 0; i < out.membership.size(); ++i)
        out.membership[i] = out.membership[i] || edges.membership[i];
    save_png(o.output, out);

    const std::string dump = o.dump.empty() ? with_extension(o.output, ".snk") : o.dump;
    write_text(dump, snakelet_records(result.set));
    if (!o.svg.empty()) write_text(o.svg, svg_polylines(result.set));

    std::cout << "snakelets: " << result.set.snakelets.size() << " (" << reached.snakelets.size()
              << " reached, " << discarded << " discarded), gvf iterations "
              << result.gvf_iterations << ", expansions " << result.expansions << "\n";
    return 0;
}

int run_detect(const DetectOptions& o) {
    o.dp.validate();
    o.snake.sp.validate();
    o.snake.rp.validate(o.snake.sp);
    if (!o.export_format.empty() && o.export_format != "svg")
        throw std::invalid_argument("unsupported export format '" + o.export_format + "'");

    const RasterImage img = load_image(o.input);
    const DetectResult result = detect(img, o.dp, o.snake.sp, o.snake.rp);

    save_png(o.output, rasterize(result.set));
    if (!o.dump.empty()) write_text(o.dump, snakelet_records(result.set));
    if (!o.overlay.empty()) save_png(o.overlay, overlay_image(result.nms, result.set));
    if (!o.export_format.empty() || !o.svg.empty()) {
        const std::string svg_path = o.svg.empty() ? with_extension(o.output, ".svg") : o.svg;
        write_text(svg_path, svg_polylines(result.set, o.merge_chains));
    }

    std::cout << "snakelets: " << result.set.snakelets.size() << " (" << result.recovery_reached
              << " from recovery pass)\n";
    return 0;
}

int run_eval(const EvalOptions& o) {
    o.snake.sp.validate();
    o.snake.rp.validate(o.snake.sp);
    BreakSpec spec{o.breaks, o.min_len, o.max_len, o.seed};
    spec.validate();
    if (o.tolerance < 0.0) throw std::invalid_argument("tolerance must be nonnegative");

    std::string mode = o.mode;
    Metrics metrics;

    if (o.fixture == "ellipse" || o.fixture == "ushape") {
        if (mode.empty()) mode = "recover";
        if (mode != "recover")
            throw std::invalid_argument("fixture '" + o.fixture + "' supports mode 'recover'");
        const BinaryEdgeMap truth = o.fixture == "ellipse"
                                        ? ellipse_ring(200, 200, 100, 100, 80, 50)
                                        : u_shape(200, 200, 50, 40, 150, 160);
        const BrokenEdges broken = make_breaks(truth, spec);
        const RecoveryResult result = recover(broken.edges, o.snake.rp, o.snake.sp);

        SnakeletSet reached{truth.width, truth.height, {}};
        for (const auto& s : result.set.snakelets)
            if (s.state == SnakeState::Reached) reached.snakelets.push_back(s);
        BinaryEdgeMap out = rasterize(reached);
        for (std::size_t i = 0; i < out.membership.size(); ++i)
            out.membership[i] = out.membership[i] || broken.edges.membership[i];
        metrics = score(out, truth, o.tolerance, broken.gaps);
    } else if (o.fixture == "ring") {
        if (mode.empty()) mode = "detect";
        if (mode != "detect")
            throw std::invalid_argument("fixture 'ring' supports mode 'detect'");
        const RasterImage img = ring_sector_image(140, 140, 70, 70, 30, 0.0, 5.0, 30.0, 0.02);
        const BinaryEdgeMap truth = circle_ring(140, 140, 70, 70, 30);
        const DetectResult result = detect(img, o.dp, o.snake.sp, o.snake.rp);
        metrics = score(rasterize(result.set), truth, o.tolerance);
    } else {
        throw std::invalid_argument("unknown fixture '" + o.fixture +
                                    "' (expected ellipse, ushape, or ring)");
    }

    const std::string report = metrics_report(metrics);
    std::cout << report;
    if (!o.report.empty()) write_text(o.report, report);

    if (o.assert_f1 >= 0.0 && metrics.f1 < o.assert_f1) {
        std::cerr << "assertion failed: f1 " << metrics.f1 << " < " << o.assert_f1 << "\n";
        return 1;
    }
    if (o.assert_gap_closure >= 0.0 && metrics.gap_closure_rate < o.assert_gap_closure) {
        std::cerr << "assertion failed: gap_closure_rate " << metrics.gap_closure_rate << " < "
                  << o.assert_gap_closure << "\n";
        return 1;
    }
    return 0;
}

int run_gvf(const GvfOptions& o) {
    for (int k : o.iters)
        if (k < 0) throw std::invalid_argument("iteration counts must be nonnegative");

    const RasterImage src = to_grayscale(load_image(o.input));
    GvfState state = gvf_init(src, o.mu);  // validates mu

    const std::string prefix =
        o.prefix.empty() ? std::filesystem::path(o.input).stem().string() : o.prefix;
    std::set<int> counts(o.iters.begin(), o.iters.end());
    for (int k : counts) {
        state = gvf_iterate(std::move(state), k - state.iterations_done);
        save_pgm(prefix + "-u-" + std::to_string(k) + ".pgm", component_image(state.field, 0));
        save_pgm(prefix + "-v-" + std::to_string(k) + ".pgm", component_image(state.field, 1));
    }
    std::cout << "wrote " << 2 * counts.size() << " component images with prefix '" << prefix
              << "'\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"snakelet edge detection and recovery"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "config file, one <subcommand>.<option>=value per line (flags take precedence)");

    CannyOptions copt;
    auto* canny = app.add_subcommand("canny", "classic edge detection baseline");
    canny->add_option("input", copt.input, "input image (PNG or PGM/PPM)")->required();
    canny->add_option("output", copt.output, "output edge PNG")->required();
    canny->add_option("--sigma", copt.sigma, "Gaussian smoothing sigma")->capture_default_str();
    canny->add_option("--th", copt.th, "high threshold")->capture_default_str();
    canny->add_option("--tl", copt.tl, "low threshold")->capture_default_str();
    canny->add_option("--th-fractile", copt.th_fractile,
                      "derive the high threshold from this fractile of positive magnitudes");
    canny->add_option("--tl-fractile", copt.tl_fractile,
                      "derive the low threshold from this fractile of positive magnitudes");

    RecoverOptions ropt;
    auto* recover_cmd = app.add_subcommand("recover", "recover breaks in a binary edge image");
    recover_cmd->add_option("input", ropt.input, "binary edge image")->required();
    recover_cmd->add_option("output", ropt.output, "recovered edge PNG")->required();
    recover_cmd->add_option("--dump", ropt.dump, "snakelet record file (default: output stem + .snk)");
    recover_cmd->add_option("--svg", ropt.svg, "write snakelet polylines as SVG");
    recover_cmd->add_option("--gradient-image", ropt.gradient_image,
                            "original image whose gradient magnitudes guide recovery");
    recover_cmd->add_option("--sigma", ropt.sigma, "smoothing sigma for --gradient-image")
        ->capture_default_str();
    add_snake_options(recover_cmd, ropt.snake);

    DetectOptions dopt;
    auto* detect_cmd = app.add_subcommand("detect", "snakelet edge detection");
    detect_cmd->add_option("input", dopt.input, "input image (PNG or PGM/PPM)")->required();
    detect_cmd->add_option("output", dopt.output, "output edge PNG")->required();
    detect_cmd->add_option("--sigma", dopt.dp.sigma, "Gaussian smoothing sigma")
        ->capture_default_str();
    detect_cmd->add_option("--th", dopt.dp.th.high, "high (seed) threshold")->capture_default_str();
    detect_cmd->add_option("--tl", dopt.dp.th.low, "low (growth stop) threshold")
        ->capture_default_str();
    detect_cmd->add_option("--seed-init-length", dopt.dp.seed_init_length,
                           "establishment length of seed snakelets, pixels")
        ->capture_default_str();
    detect_cmd->add_option("--chain-max-grow", dopt.dp.chain_max_grow,
                           "growth cap per chain segment, pixels")
        ->capture_default_str();
    detect_cmd->add_option("--gvf-iters", dopt.dp.gvf_iters, "initial GVF iterations")
        ->capture_default_str();
    detect_cmd->add_option("--coverage-radius", dopt.dp.coverage_radius,
                           "occupancy dilation radius, pixels")
        ->capture_default_str();
    detect_cmd->add_option("--overlay", dopt.overlay, "write snakelets over the NMS image as PNG");
    detect_cmd->add_option("--export", dopt.export_format, "vector export format (svg)");
    detect_cmd->add_option("--svg", dopt.svg, "SVG output path (default: output stem + .svg)");
    detect_cmd->add_flag("--merge-chains", dopt.merge_chains,
                         "merge chain continuations into single polylines on export");
    detect_cmd->add_option("--dump", dopt.dump, "snakelet record file");
    add_snake_options(detect_cmd, dopt.snake);

    EvalOptions eopt;
    auto* eval_cmd = app.add_subcommand("eval", "synthetic fixture evaluation");
    eval_cmd->add_option("--fixture", eopt.fixture, "ellipse, ushape, or ring")
        ->capture_default_str();
    eval_cmd->add_option("--mode", eopt.mode, "recover or detect (fixture default)");
    eval_cmd->add_option("--breaks", eopt.breaks, "number of breaks")->capture_default_str();
    eval_cmd->add_option("--min-len", eopt.min_len, "minimum break length")->capture_default_str();
    eval_cmd->add_option("--max-len", eopt.max_len, "maximum break length")->capture_default_str();
    eval_cmd->add_option("--seed", eopt.seed, "break placement seed")->capture_default_str();
    eval_cmd->add_option("--tolerance", eopt.tolerance, "match tolerance, pixels")
        ->capture_default_str();
    eval_cmd->add_option("--report", eopt.report, "write the metrics report to this file");
    eval_cmd->add_option("--assert-f1", eopt.assert_f1, "fail (exit 1) when f1 is below this bound");
    eval_cmd->add_option("--assert-gap-closure", eopt.assert_gap_closure,
                         "fail (exit 1) when gap closure is below this bound");
    eval_cmd->add_option("--th", eopt.dp.th.high, "detect: high threshold")->capture_default_str();
    eval_cmd->add_option("--tl", eopt.dp.th.low, "detect: low threshold")->capture_default_str();
    eval_cmd->add_option("--sigma", eopt.dp.sigma, "detect: smoothing sigma")->capture_default_str();
    add_snake_options(eval_cmd, eopt.snake);

    GvfOptions gopt;
    auto* gvf_cmd = app.add_subcommand("gvf", "write GVF component images for inspection");
    gvf_cmd->add_option("input", gopt.input, "gray or binary edge image")->required();
    gvf_cmd->add_option("--mu", gopt.mu, "smoothness weight")->capture_default_str();
    gvf_cmd->add_option("--iters", gopt.iters, "iteration counts to dump")->capture_default_str();
    gvf_cmd->add_option("--out-prefix", gopt.prefix, "output prefix (default: input stem)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (canny->parsed()) return run_canny(copt);
        if (recover_cmd->parsed()) return run_recover(ropt);
        if (detect_cmd->parsed()) return run_detect(dopt);
        if (eval_cmd->parsed()) return run_eval(eopt);
        if (gvf_cmd->parsed()) return run_gvf(gopt);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
