#pragma once

#include <cstdint>

namespace arc {

/// Subpixel image coordinate (x right, y down).
struct Point2 {
    double x = 0;
    double y = 0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

/// Integer pixel coordinate.
struct PointI {
    int32_t x = 0;
    int32_t y = 0;

    friend bool operator==(const PointI&, const PointI&) = default;
};

}  // namespace arc
