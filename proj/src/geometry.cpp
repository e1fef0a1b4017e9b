#include "arc/geometry.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace arc {

namespace {

constexpr double kSingularEps = 1e-12;

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
template <int N>
void solve_linear(double a[N][N], double b[N], double x[N]) {
    for (int col = 0; col < N; ++col) {
        int pivot = col;
        for (int row = col + 1; row < N; ++row)
            if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
        if (std::abs(a[pivot][col]) < kSingularEps)
            throw std::invalid_argument("homography: degenerate point configuration");
        if (pivot != col) {
            for (int k = col; k < N; ++k) std::swap(a[col][k], a[pivot][k]);
            std::swap(b[col], b[pivot]);
        }
        for (int row = col + 1; row < N; ++row) {
            const double f = a[row][col] / a[col][col];
            for (int k = col; k < N; ++k) a[row][k] -= f * a[col][k];
            b[row] -= f * b[col];
        }
    }
    for (int row = N - 1; row >= 0; --row) {
        double s = b[row];
        for (int k = row + 1; k < N; ++k) s -= a[row][k] * x[k];
        x[row] = s / a[row][row];
    }
}

}  // namespace

Point2 Homography::apply(Point2 p) const {
    const double w = m[6] * p.x + m[7] * p.y + m[8];
    if (std::abs(w) < kSingularEps) throw std::domain_error("homography: point maps to infinity");
    return {(m[0] * p.x + m[1] * p.y + m[2]) / w, (m[3] * p.x + m[4] * p.y + m[5]) / w};
}

Homography homography_from_points(const std::array<Point2, 4>& src,
                                  const std::array<Point2, 4>& dst) {
    double a[8][8] = {};
    double b[8] = {};
    for (int i = 0; i < 4; ++i) {
        const double x = src[i].x, y = src[i].y;
        const double u = dst[i].x, v = dst[i].y;
        double* r0 = a[2 * i];
        double* r1 = a[2 * i + 1];
        r0[0] = x;
        r0[1] = y;
        r0[2] = 1;
        r0[6] = -u * x;
        r0[7] = -u * y;
        b[2 * i] = u;
        r1[3] = x;
        r1[4] = y;
        r1[5] = 1;
        r1[6] = -v * x;
        r1[7] = -v * y;
        b[2 * i + 1] = v;
    }
    double h[8];
    solve_linear<8>(a, b, h);
    Homography out;
    for (int k = 0; k < 8; ++k) out.m[k] = h[k];
    out.m[8] = 1;
    return out;
}

std::array<Point2, 4> grow_quad(const std::array<Point2, 4>& quad, double margin) {
    // Shift each directed edge along its outward normal (for clockwise
    // corners in y-down coordinates that is (dy, -dx)), then intersect
    // consecutive offset lines to rebuild the corners.
    std::array<Point2, 4> starts{};
    std::array<Point2, 4> dirs{};
    for (int i = 0; i < 4; ++i) {
        const Point2 a = quad[static_cast<size_t>(i)];
        const Point2 b = quad[static_cast<size_t>((i + 1) % 4)];
        const double dx = b.x - a.x;
        const double dy = b.y - a.y;
        const double len = std::hypot(dx, dy);
        if (len < 1e-9) throw std::invalid_argument("grow_quad: degenerate edge");
        starts[static_cast<size_t>(i)] = {a.x + margin * dy / len, a.y - margin * dx / len};
        dirs[static_cast<size_t>(i)] = {dx, dy};
    }
    std::array<Point2, 4> out{};
    for (int i = 0; i < 4; ++i) {
        // Corner i is where edge i-1 meets edge i.
        const int p = (i + 3) % 4;
        const Point2 a1 = starts[static_cast<size_t>(p)];
        const Point2 d1 = dirs[static_cast<size_t>(p)];
        const Point2 a2 = starts[static_cast<size_t>(i)];
        const Point2 d2 = dirs[static_cast<size_t>(i)];
        const double det = d1.x * (-d2.y) - (-d2.x) * d1.y;
        if (std::abs(det) < 1e-12) throw std::invalid_argument("grow_quad: parallel edges");
        const double t = ((a2.x - a1.x) * (-d2.y) - (-d2.x) * (a2.y - a1.y)) / det;
        out[static_cast<size_t>(i)] = {a1.x + t * d1.x, a1.y + t * d1.y};
    }
    return out;
}

GrayImage warp_patch(const GrayImage& img, const std::array<Point2, 4>& quad, int32_t out_w,
                     int32_t out_h) {
    if (out_w <= 0 || out_h <= 0) throw std::invalid_argument("warp_patch: empty output size");
    const std::array<Point2, 4> canon{{{0, 0},
                                       {static_cast<double>(out_w), 0},
                                       {static_cast<double>(out_w), static_cast<double>(out_h)},
                                       {0, static_cast<double>(out_h)}}};
    const Homography h = homography_from_points(canon, quad);

    auto sample = [&](int32_t x, int32_t y) -> double {
        return img.in_bounds(x, y) ? static_cast<double>(img.at(x, y)) : 255.0;
    };

    GrayImage out;
    out.width = out_w;
    out.height = out_h;
    out.pixels.resize(static_cast<size_t>(out_w) * out_h);
    for (int32_t y = 0; y < out_h; ++y) {
        for (int32_t x = 0; x < out_w; ++x) {
            const Point2 s = h.apply({x + 0.5, y + 0.5});
            const double u = s.x - 0.5;
            const double v = s.y - 0.5;
            const auto x0 = static_cast<int32_t>(std::floor(u));
            const auto y0 = static_cast<int32_t>(std::floor(v));
            const double fx = u - x0;
            const double fy = v - y0;
            const double top = sample(x0, y0) * (1 - fx) + sample(x0 + 1, y0) * fx;
            const double bot = sample(x0, y0 + 1) * (1 - fx) + sample(x0 + 1, y0 + 1) * fx;
            const double value = top * (1 - fy) + bot * fy;
            out.pixels[static_cast<size_t>(y) * out_w + x] =
                static_cast<uint8_t>(std::floor(value + 0.5));
        }
    }
    return out;
}

}  // namespace arc
