#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "arc/image.hpp"
#include "arc/marker.hpp"
#include "arc/point.hpp"
#include "arc/shape_mlp.hpp"

namespace arc {

/// End-to-end detection parameters.
struct DetectConfig {
    /// Binarization: adaptive windowed mean (default) or a fixed global cut.
    bool adaptive = true;
    int32_t global_threshold = 128;
    int32_t window = 15;
    int32_t c = 7;

    /// Quad filter: minimum enclosed area (px^2, also the minimum region
    /// pixel count for shape recognition) and simplification tolerance as a
    /// fraction of contour perimeter.
    double min_area = 100.0;
    double eps_frac = 0.05;

    /// Overlap (bounding-box IoU) above which detections deduplicate.
    double dedupe_iou = 0.5;

    /// Ray count for shape descriptors.
    int rays = kDefaultRayCount;
};

/// One decoded marker in an image.
struct MarkerDetection {
    uint16_t id = 0;
    std::array<Point2, 4> corners{};  ///< Clockwise, first corner nearest origin.
    int rotation = 0;                 ///< Quarter turns applied to decode.
    int corrected = 0;                ///< Bit errors fixed, 0..3.
};

/// One classified free-form region in an image.
struct ShapeDetection {
    std::string label;
    double confidence = 0;
    Point2 centroid{};
    uint64_t pixel_count = 0;
};

/// Binarizes per the config (dark pixels become foreground).
BinaryImage apply_threshold(const GrayImage& img, const DetectConfig& cfg);

/// Full marker pipeline: threshold, contour hierarchy, quad filter,
/// canonical warp, decode.  Overlapping detections (bbox IoU above the
/// config threshold) collapse to the one with fewest corrected bits (ties:
/// larger area); output is sorted by (y, x) of the first corner.
std::vector<MarkerDetection> detect_markers(const GrayImage& img, const DetectConfig& cfg = {});

/// Shape pipeline: threshold, then classify every top-level region with at
/// least min_area pixels via its canonicalized ray descriptor.  Sorted by
/// pixel count, largest first.  The model input dimension must equal
/// cfg.rays.
std::vector<ShapeDetection> recognize_shapes(const GrayImage& img, const DetectConfig& cfg,
                                             const MlpModel& model);

}  // namespace arc
