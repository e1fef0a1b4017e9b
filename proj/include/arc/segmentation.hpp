#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "arc/image.hpp"
#include "arc/point.hpp"

namespace arc {

/// Closed boundary polyline of a region or of a hole inside a region.
///
/// Points are pixel coordinates on the region itself (outer contours run on
/// foreground pixels, hole contours on the background pixels of the hole).
/// Consecutive points are 8-adjacent and the last point is 8-adjacent to the
/// first.  A single isolated pixel yields a one-point contour.
struct Contour {
    enum class Kind { Outer, Hole };

    std::vector<PointI> points;
    Kind kind = Kind::Outer;
};

/// Node of the region hierarchy: an outer region whose children are its
/// holes, or a hole whose children are the regions nested inside it.
struct RegionNode {
    Contour contour;
    std::vector<RegionNode> children;
    /// Own pixels only: foreground pixels of the region for outer nodes,
    /// background pixels of the hole for hole nodes.  Children not included.
    uint64_t pixel_count = 0;
    /// Inclusive bounding box of the node's own pixels.
    int32_t min_x = 0;
    int32_t min_y = 0;
    int32_t max_x = 0;
    int32_t max_y = 0;
};

/// Convex quadrilateral candidate extracted from an outer contour.
///
/// Corners are ordered clockwise in image coordinates (y down) starting from
/// the corner nearest the image origin.
struct QuadCandidate {
    std::array<Point2, 4> corners{};
    double perimeter = 0;  ///< Sum of the four edge lengths, px.
    double area = 0;       ///< Shoelace area, px^2.
};

/// Bounding-box-local mask of a node's own pixels.
struct RegionMask {
    BinaryImage mask;  ///< mask.get(x - off_x, y - off_y) == pixel membership
    int32_t off_x = 0;
    int32_t off_y = 0;
};

/// Extracts the full region hierarchy of a binary mask.
///
/// Foreground regions are 8-connected, background regions 4-connected;
/// background components touching the image border count as outside rather
/// than as holes.  Returns the top-level outer regions; each node's children
/// are its holes, and each hole's children the regions nested inside it.
/// Deterministic: components are ordered by the raster position of their
/// first pixel, and every contour starts at its raster-smallest point.
std::vector<RegionNode> trace_contours(const BinaryImage& mask);

/// Simplifies a closed contour to a polygon with the classic split-and-merge
/// scheme: the contour is cut at its two mutually farthest points and each
/// arc is reduced so no discarded point lies farther than `eps` from the
/// simplified polyline.  The result is a subsequence of the contour points.
std::vector<PointI> polygon_approx(const Contour& contour, double eps);

/// Scans the hierarchy for outer contours that simplify to convex
/// quadrilaterals with at least `min_area` px^2 of enclosed area.  The
/// simplification tolerance is `eps_frac` times the contour perimeter, and
/// candidates whose contour strays from the quadrilateral by more than a
/// fraction of that tolerance are rejected so smooth blobs don't pass.
std::vector<QuadCandidate> find_quads(const std::vector<RegionNode>& nodes,
                                      double min_area = 100.0,
                                      double eps_frac = 0.05);

/// Collects a node's own pixels (see RegionNode::pixel_count) into a
/// bounding-box-local mask by flood fill from its contour start.
RegionMask region_pixels(const RegionNode& node, const BinaryImage& mask);

/// Mean coordinate of the node's own pixels.
Point2 centroid(const RegionNode& node, const BinaryImage& mask);

}  // namespace arc
