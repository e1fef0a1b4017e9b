#pragma once

#include <array>
#include <cstdint>

#include "arc/image.hpp"
#include "arc/point.hpp"

namespace arc {

/// 3x3 projective transform in row-major order, normalized so m[8] == 1.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    /// Maps a point through the transform.  Throws std::domain_error when the
    /// point lands on the plane at infinity (homogeneous w ~ 0).
    [[nodiscard]] Point2 apply(Point2 p) const;
};

/// Direct linear transform from four point correspondences.
///
/// Solves the 8x8 linear system that maps src[i] to dst[i] exactly.  Throws
/// std::invalid_argument when the configuration is degenerate (three
/// collinear points or coincident points make the system singular).
Homography homography_from_points(const std::array<Point2, 4>& src,
                                  const std::array<Point2, 4>& dst);

/// Offsets every edge of a convex clockwise quadrilateral outward by
/// `margin` and returns the re-intersected corners.  Detected corners are
/// extreme pixel centers, so growing by half a pixel recovers the true
/// region outline before resampling.  Throws std::invalid_argument when
/// adjacent edges are (near) parallel.
std::array<Point2, 4> grow_quad(const std::array<Point2, 4>& quad, double margin);

/// Resamples the quadrilateral `quad` (clockwise corner order) from `img`
/// into an upright out_w x out_h patch.
///
/// The patch corner grid (0,0)-(out_w,out_h) maps onto the quad corners;
/// each output pixel samples the source at its center (x+0.5, y+0.5) with
/// bilinear interpolation, rounded half-up.  Source neighbors outside the
/// image contribute white (255).
GrayImage warp_patch(const GrayImage& img, const std::array<Point2, 4>& quad, int32_t out_w,
                     int32_t out_h);

}  // namespace arc
