#include <csignal>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "arc/bench.hpp"
#include "arc/client.hpp"
#include "arc/geometry.hpp"
#include "arc/image.hpp"
#include "arc/marker.hpp"
#include "arc/pipeline.hpp"
#include "arc/segmentation.hpp"
#include "arc/server.hpp"
#include "arc/shape_mlp.hpp"
#include "arc/template_match.hpp"

namespace {

namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNothing = 3;
constexpr int kExitTransport = 4;

constexpr uint16_t kBuiltinPort = 7502;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Default port: ARC_PORT when set (flags always win), else 7502.
uint16_t default_port() {
    const char* env = std::getenv("ARC_PORT");
    if (env == nullptr || *env == '\0') return kBuiltinPort;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0' || v < 1 || v > 65535)
        throw UsageError(std::string("invalid ARC_PORT value: ") + env);
    return static_cast<uint16_t>(v);
}

/// Parses "host" or "host:port".
arc::net::RemoteEndpoint parse_endpoint(const std::string& text) {
    arc::net::RemoteEndpoint ep;
    const size_t colon = text.rfind(':');
    if (colon == std::string::npos) {
        ep.host = text;
        ep.port = default_port();
    } else {
        ep.host = text.substr(0, colon);
        const std::string port_text = text.substr(colon + 1);
        char* end = nullptr;
        const unsigned long v = std::strtoul(port_text.c_str(), &end, 10);
        if (ep.host.empty() || end == port_text.c_str() || *end != '\0' || v < 1 || v > 65535)
            throw UsageError("invalid remote endpoint: " + text);
        ep.port = static_cast<uint16_t>(v);
    }
    if (ep.host.empty()) throw UsageError("invalid remote endpoint: " + text);
    return ep;
}

void print_detection_rows(const std::vector<arc::MarkerDetection>& dets) {
    for (const arc::MarkerDetection& d : dets) {
        std::printf("%u\t%d\t%d", d.id, d.rotation, d.corrected);
        for (const arc::Point2 p : d.corners) std::printf("\t%.2f\t%.2f", p.x, p.y);
        std::printf("\n");
    }
}

int run_marker_gen(uint16_t id, int cell_px, const std::string& out) {
    arc::pgm_save(out, arc::render_marker(id, cell_px));
    return kExitOk;
}

int run_detect(const std::string& image, const std::optional<std::string>& remote) {
    const arc::GrayImage img = arc::pgm_load(image);
    std::vector<arc::MarkerDetection> dets;
    if (remote) {
        const arc::net::RemoteEndpoint ep = parse_endpoint(*remote);
        arc::net::Client client(ep.host, ep.port);
        dets = arc::net::detect_remote(client, img);
    } else {
        dets = arc::detect_markers(img);
    }
    if (dets.empty()) return kExitNothing;
    print_detection_rows(dets);
    return kExitOk;
}

/// One subdirectory per class, each holding PGM masks (dark = shape).
arc::LabeledDataset load_training_dir(const std::string& dir, int rays) {
    arc::LabeledDataset data;
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());

    for (const fs::path& class_dir : class_dirs) {
        const int class_index = static_cast<int>(data.labels.size());
        data.labels.push_back(class_dir.filename().string());
        std::vector<fs::path> masks;
        for (const auto& entry : fs::directory_iterator(class_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".pgm")
                masks.push_back(entry.path());
        std::sort(masks.begin(), masks.end());
        if (masks.empty())
            throw std::runtime_error("no .pgm masks in " + class_dir.string());

        for (const fs::path& mask_path : masks) {
            const arc::BinaryImage mask =
                arc::threshold_global(arc::pgm_load(mask_path.string()), 128);
            const std::vector<arc::RegionNode> nodes = arc::trace_contours(mask);
            const arc::RegionNode* largest = nullptr;
            for (const arc::RegionNode& node : nodes)
                if (largest == nullptr || node.pixel_count > largest->pixel_count) largest = &node;
            if (largest == nullptr)
                throw std::runtime_error("no foreground region in " + mask_path.string());
            data.samples.emplace_back(
                arc::canonicalize(arc::extract_flag_vector(*largest, mask, rays)), class_index);
        }
    }
    return data;
}

int run_train(const std::string& data_dir, const std::string& out, int hidden, int epochs,
              double lr, uint64_t seed, int rays) {
    const arc::LabeledDataset data = load_training_dir(data_dir, rays);
    if (data.labels.size() < 2) throw std::runtime_error("need at least two class directories");

    arc::MlpModel model =
        arc::mlp_init({rays, hidden, static_cast<int>(data.labels.size())}, seed);
    model.labels = data.labels;
    arc::TrainConfig cfg;
    cfg.learning_rate = lr;
    cfg.epochs = epochs;
    cfg.seed = seed;
    const std::vector<double> trace = arc::mlp_train(model, data, cfg);
    arc::model_save_file(model, out);
    if (!trace.empty()) std::printf("%.6f\n", trace.back());
    return kExitOk;
}

int run_classify(const std::string& image, const std::optional<std::string>& model_path,
                 const std::optional<std::string>& remote) {
    const arc::GrayImage img = arc::pgm_load(image);
    std::string label;
    double confidence = 0;
    if (remote) {
        const arc::net::RemoteEndpoint ep = parse_endpoint(*remote);
        arc::net::Client client(ep.host, ep.port);
        const arc::net::ClassifyReply reply = arc::net::classify_image_remote(client, img);
        label = reply.label;
        confidence = reply.confidence;
    } else {
        const arc::MlpModel model = arc::model_load_file(*model_path);
        arc::DetectConfig cfg;
        cfg.rays = model.input_dim();
        // Match the trainer's binarization: masks are cut at a global 128, and
        // adaptive thresholding would hollow out large solid regions, which
        // collapses filled and outlined shapes onto the same descriptor.
        cfg.adaptive = false;
        const std::vector<arc::ShapeDetection> dets = arc::recognize_shapes(img, cfg, model);
        if (!dets.empty()) {
            label = dets.front().label;
            confidence = dets.front().confidence;
        }
    }
    if (label.empty()) return kExitNothing;
    std::printf("%s\t%.4f\n", label.c_str(), confidence);
    return kExitOk;
}

int run_match(const std::string& templates_dir, const std::string& image) {
    const arc::TemplateLibrary lib = arc::load_template_library(templates_dir);
    const arc::GrayImage img = arc::pgm_load(image);
    const arc::DetectConfig cfg;
    const arc::BinaryImage bin = arc::apply_threshold(img, cfg);
    const std::vector<arc::QuadCandidate> quads =
        arc::find_quads(arc::trace_contours(bin), cfg.min_area, cfg.eps_frac);

    bool any = false;
    for (const arc::QuadCandidate& quad : quads) {
        const arc::GrayImage patch = arc::warp_patch(img, arc::grow_quad(quad.corners, 0.5),
                                                     arc::kMarkerPatchSize, arc::kMarkerPatchSize);
        const auto match = arc::best_match(patch, lib);
        if (!match) continue;
        any = true;
        std::printf("%s\t%.4f", match->label.c_str(), match->score);
        for (const arc::Point2 p : quad.corners) std::printf("\t%.2f\t%.2f", p.x, p.y);
        std::printf("\n");
    }
    return any ? kExitOk : kExitNothing;
}

arc::net::Server* g_server = nullptr;

void handle_stop_signal(int) {
    if (g_server != nullptr) g_server->request_stop();
}

int run_serve(const std::optional<uint16_t>& port, const std::optional<std::string>& model_path,
              const std::optional<std::string>& templates_dir) {
    arc::net::ServerConfig cfg;
    if (model_path) cfg.model = arc::model_load_file(*model_path);
    if (templates_dir) cfg.templates = arc::load_template_library(*templates_dir);

    arc::net::Server server(std::move(cfg), port ? *port : default_port());
    g_server = &server;
    std::signal(SIGINT, handle_stop_signal);
    std::signal(SIGTERM, handle_stop_signal);
    std::fprintf(stderr, "listening on port %u\n", server.port());
    server.run();
    g_server = nullptr;
    return kExitOk;
}

int run_bench(const std::string& image, int iters, const std::optional<std::string>& remote) {
    const arc::GrayImage img = arc::pgm_load(image);
    std::optional<arc::net::RemoteEndpoint> endpoint;
    if (remote) endpoint = parse_endpoint(*remote);
    const std::vector<arc::net::ModeStats> stats = arc::net::bench_detect(img, iters, endpoint);
    std::fputs(arc::net::bench_tsv(stats).c_str(), stdout);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fiducial marker detection and object recognition toolkit"};
    app.require_subcommand(1);

    // marker-gen
    auto* gen = app.add_subcommand("marker-gen", "Render a marker to a PGM file");
    uint16_t gen_id = 0;
    int gen_cell_px = 8;
    std::string gen_out;
    gen->add_option("--id", gen_id, "Marker identifier (0..4095)")
        ->required()
        ->check(CLI::Range(0, 4095));
    gen->add_option("--cell-px", gen_cell_px, "Pixels per marker cell")
        ->capture_default_str()
        ->check(CLI::Range(1, 256));
    gen->add_option("--out", gen_out, "Output PGM path")->required();

    // detect
    auto* detect = app.add_subcommand("detect", "Detect markers in a PGM image");
    std::string detect_image;
    std::string detect_remote;
    std::string detect_format = "tsv";
    detect->add_option("image", detect_image, "Input PGM image")->required();
    detect->add_option("--remote", detect_remote, "Run detection on host[:port]");
    detect->add_option("--format", detect_format, "Output format")
        ->capture_default_str()
        ->check(CLI::IsMember({"tsv"}));

    // train
    auto* train = app.add_subcommand("train", "Train a shape classifier from mask directories");
    std::string train_dir;
    std::string train_out;
    int train_hidden = 32;
    int train_epochs = 500;
    double train_lr = 0.1;
    uint64_t train_seed = 1;
    int train_rays = arc::kDefaultRayCount;
    train->add_option("data", train_dir, "Directory with one subdirectory of PGM masks per class")
        ->required();
    train->add_option("out", train_out, "Output model path")->required();
    train->add_option("--hidden", train_hidden, "Hidden layer width")
        ->capture_default_str()
        ->check(CLI::Range(1, 4096));
    train->add_option("--epochs", train_epochs, "Training epochs")
        ->capture_default_str()
        ->check(CLI::Range(0, 1000000));
    train->add_option("--lr", train_lr, "Learning rate")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    train->add_option("--seed", train_seed, "Initialization and shuffle seed")
        ->capture_default_str();
    train->add_option("--rays", train_rays, "Descriptor ray count")
        ->capture_default_str()
        ->check(CLI::Range(1, 4096));

    // classify
    auto* classify = app.add_subcommand("classify", "Classify the dominant shape in a PGM image");
    std::string classify_image;
    std::string classify_model;
    std::string classify_remote;
    classify->add_option("image", classify_image, "Input PGM image")->required();
    auto* classify_model_opt = classify->add_option("--model", classify_model, "Model file");
    auto* classify_remote_opt =
        classify->add_option("--remote", classify_remote, "Classify on host[:port]");
    classify_model_opt->excludes(classify_remote_opt);

    // match
    auto* match = app.add_subcommand("match", "Match quad patches against a template library");
    std::string match_dir;
    std::string match_image;
    match->add_option("templates", match_dir, "Directory of PGM templates")->required();
    match->add_option("image", match_image, "Input PGM image")->required();

    // serve
    auto* serve = app.add_subcommand("serve", "Run the recognition service");
    uint16_t serve_port = 0;
    std::string serve_model;
    std::string serve_templates;
    auto* serve_port_opt =
        serve->add_option("--port", serve_port, "Listen port (default: ARC_PORT or 7502)");
    serve->add_option("--model", serve_model, "Model file for classify requests");
    serve->add_option("--templates", serve_templates, "Template directory to load");

    // bench
    auto* bench = app.add_subcommand("bench", "Benchmark local (and remote) detection latency");
    std::string bench_image;
    int bench_iters = 10;
    std::string bench_remote;
    bench->add_option("image", bench_image, "Input PGM image")->required();
    bench->add_option("--iters", bench_iters, "Iterations per mode")
        ->capture_default_str()
        ->check(CLI::Range(1, 1000000));
    bench->add_option("--remote", bench_remote, "Also benchmark against host[:port]");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*gen) return run_marker_gen(gen_id, gen_cell_px, gen_out);
        if (*detect)
            return run_detect(detect_image, detect->count("--remote")
                                                ? std::optional(detect_remote)
                                                : std::nullopt);
        if (*train)
            return run_train(train_dir, train_out, train_hidden, train_epochs, train_lr,
                             train_seed, train_rays);
        if (*classify) {
            if (!*classify_model_opt && !*classify_remote_opt)
                throw UsageError("classify needs --model or --remote");
            return run_classify(classify_image,
                                *classify_model_opt ? std::optional(classify_model) : std::nullopt,
                                *classify_remote_opt ? std::optional(classify_remote)
                                                     : std::nullopt);
        }
        if (*match) return run_match(match_dir, match_image);
        if (*serve)
            return run_serve(*serve_port_opt ? std::optional(serve_port) : std::nullopt,
                             serve->count("--model") ? std::optional(serve_model) : std::nullopt,
                             serve->count("--templates") ? std::optional(serve_templates)
                                                         : std::nullopt);
        if (*bench)
            return run_bench(bench_image, bench_iters,
                             bench->count("--remote") ? std::optional(bench_remote) : std::nullopt);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    } catch (const arc::net::TransportError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitTransport;
    } catch (const arc::net::RemoteError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitTransport;
    } catch (const arc::net::ProtocolError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitTransport;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    }
    return kExitUsage;
}
