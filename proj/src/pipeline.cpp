#include "arc/pipeline.hpp"

#include <algorithm>
#include <stdexcept>

#include "arc/geometry.hpp"
#include "arc/segmentation.hpp"

namespace arc {

namespace {

struct Bbox {
    double min_x, min_y, max_x, max_y;
};

Bbox corner_bbox(const std::array<Point2, 4>& corners) {
    Bbox b{corners[0].x, corners[0].y, corners[0].x, corners[0].y};
    for (const Point2 p : corners) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    return b;
}

double bbox_iou(const Bbox& a, const Bbox& b) {
    const double ix = std::min(a.max_x, b.max_x) - std::max(a.min_x, b.min_x);
    const double iy = std::min(a.max_y, b.max_y) - std::max(a.min_y, b.min_y);
    if (ix <= 0 || iy <= 0) return 0;
    const double inter = ix * iy;
    const double area_a = (a.max_x - a.min_x) * (a.max_y - a.min_y);
    const double area_b = (b.max_x - b.min_x) * (b.max_y - b.min_y);
    return inter / (area_a + area_b - inter);
}

}  // namespace

BinaryImage apply_threshold(const GrayImage& img, const DetectConfig& cfg) {
    if (cfg.adaptive) return threshold_adaptive(img, cfg.window, cfg.c);
    return threshold_global(img, cfg.global_threshold);
}

std::vector<MarkerDetection> detect_markers(const GrayImage& img, const DetectConfig& cfg) {
    const BinaryImage bin = apply_threshold(img, cfg);
    const std::vector<RegionNode> nodes = trace_contours(bin);
    const std::vector<QuadCandidate> quads = find_quads(nodes, cfg.min_area, cfg.eps_frac);

    struct Candidate {
        MarkerDetection det;
        double area;
        Bbox bbox;
    };
    std::vector<Candidate> candidates;
    for (const QuadCandidate& quad : quads) {
        // Corners are extreme pixel centers; the printed region extends half
        // a pixel beyond them, so sample the grown outline.
        const GrayImage patch =
            warp_patch(img, grow_quad(quad.corners, 0.5), kMarkerPatchSize, kMarkerPatchSize);
        const auto read = read_canonical(patch);
        if (!read) continue;
        MarkerDetection det;
        det.id = read->id;
        det.corners = quad.corners;
        det.rotation = read->rotation;
        det.corrected = read->corrected;
        candidates.push_back({det, quad.area, corner_bbox(quad.corners)});
    }

    // Nested contours (outer border edge vs. inner) can both decode; keep
    // the cleanest read, preferring the larger footprint on ties.
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.det.corrected != b.det.corrected) return a.det.corrected < b.det.corrected;
        return a.area > b.area;
    });
    std::vector<Candidate> kept;
    for (const Candidate& c : candidates) {
        bool duplicate = false;
        for (const Candidate& k : kept)
            if (bbox_iou(c.bbox, k.bbox) > cfg.dedupe_iou) duplicate = true;
        if (!duplicate) kept.push_back(c);
    }

    std::stable_sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        if (a.det.corners[0].y != b.det.corners[0].y) return a.det.corners[0].y < b.det.corners[0].y;
        return a.det.corners[0].x < b.det.corners[0].x;
    });
    std::vector<MarkerDetection> out;
    out.reserve(kept.size());
    for (const Candidate& c : kept) out.push_back(c.det);
    return out;
}

std::vector<ShapeDetection> recognize_shapes(const GrayImage& img, const DetectConfig& cfg,
                                             const MlpModel& model) {
    if (model.input_dim() != cfg.rays)
        throw std::invalid_argument("recognize_shapes: model input dim must equal ray count");
    const BinaryImage bin = apply_threshold(img, cfg);
    const std::vector<RegionNode> nodes = trace_contours(bin);

    std::vector<ShapeDetection> out;
    for (const RegionNode& node : nodes) {
        if (static_cast<double>(node.pixel_count) < cfg.min_area) continue;
        const FlagVector flags = canonicalize(extract_flag_vector(node, bin, cfg.rays));
        const Classification cls = mlp_classify(model, flags);
        out.push_back({cls.label, cls.confidence, centroid(node, bin), node.pixel_count});
    }
    std::stable_sort(out.begin(), out.end(), [](const ShapeDetection& a, const ShapeDetection& b) {
        return a.pixel_count > b.pixel_count;
    });
    return out;
}

}  // namespace arc
