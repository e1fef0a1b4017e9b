#include "arc/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <unordered_map>
#include <utility>

namespace arc {

namespace {

/// 8-neighborhood, clockwise starting north (y grows downward).
constexpr int kDx[8] = {0, 1, 1, 1, 0, -1, -1, -1};
constexpr int kDy[8] = {-1, -1, 0, 1, 1, 1, 0, -1};

/// Direction index for a unit delta, indexed [dy + 1][dx + 1]; -1 marks the
/// center and is never read.
constexpr int kDirIndex[3][3] = {{7, 0, 1}, {6, -1, 2}, {5, 4, 3}};

struct Component {
    PointI first;  ///< Raster-first pixel (the labeling seed).
    uint64_t count = 0;
    int32_t min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    bool touches_border = false;
    int32_t parent = -1;  ///< Opposite-color component above `first`.
};

struct Labeling {
    std::vector<int32_t> label;  ///< Per pixel, -1 where the predicate fails.
    std::vector<Component> comps;
};

/// Labels the connected components of `predicate` over the image grid.
/// Components are numbered in raster order of their first pixel and use the
/// full 8-neighborhood when `eight` is set, the 4-neighborhood otherwise.
template <typename Pred>
Labeling label_components(int32_t w, int32_t h, Pred predicate, bool eight) {
    Labeling out;
    out.label.assign(static_cast<size_t>(w) * h, -1);
    std::vector<PointI> stack;
    for (int32_t y = 0; y < h; ++y) {
        for (int32_t x = 0; x < w; ++x) {
            if (!predicate(x, y) || out.label[static_cast<size_t>(y) * w + x] >= 0) continue;
            const auto id = static_cast<int32_t>(out.comps.size());
            Component comp;
            comp.first = {x, y};
            comp.min_x = comp.max_x = x;
            comp.min_y = comp.max_y = y;
            out.comps.push_back(comp);
            out.label[static_cast<size_t>(y) * w + x] = id;
            stack.assign(1, {x, y});
            Component& c = out.comps.back();
            while (!stack.empty()) {
                const PointI p = stack.back();
                stack.pop_back();
                ++c.count;
                c.min_x = std::min(c.min_x, p.x);
                c.max_x = std::max(c.max_x, p.x);
                c.min_y = std::min(c.min_y, p.y);
                c.max_y = std::max(c.max_y, p.y);
                if (p.x == 0 || p.y == 0 || p.x == w - 1 || p.y == h - 1)
                    c.touches_border = true;
                for (int d = 0; d < 8; ++d) {
                    if (!eight && (d & 1) != 0) continue;
                    const int32_t nx = p.x + kDx[d];
                    const int32_t ny = p.y + kDy[d];
                    if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
                    auto& lbl = out.label[static_cast<size_t>(ny) * w + nx];
                    if (lbl >= 0 || !predicate(nx, ny)) continue;
                    lbl = id;
                    stack.push_back({nx, ny});
                }
            }
        }
    }
    return out;
}

/// Follows the Moore boundary of the component containing `start` clockwise.
///
/// The walk is a deterministic map on (pixel, backtrack-direction) states, so
/// it eventually revisits a state; the points of that state cycle are exactly
/// the closed boundary circuit.  Rotated so the raster-smallest point leads.
template <typename Member>
std::vector<PointI> moore_trace(PointI start, Member member) {
    std::vector<PointI> seq;
    std::unordered_map<uint64_t, size_t> seen;
    int32_t x = start.x;
    int32_t y = start.y;
    int bd = 6;  // West of a raster-first pixel is never a member.
    for (;;) {
        const uint64_t key = (static_cast<uint64_t>(static_cast<uint32_t>(x)) << 33) |
                             (static_cast<uint64_t>(static_cast<uint32_t>(y)) << 3) |
                             static_cast<uint64_t>(bd);
        const auto [it, inserted] = seen.emplace(key, seq.size());
        if (!inserted) {
            // Closed the boundary circuit; drop any lead-in before it.
            seq.erase(seq.begin(), seq.begin() + static_cast<ptrdiff_t>(it->second));
            break;
        }
        seq.push_back({x, y});
        int found = 0;
        for (int k = 1; k <= 8; ++k) {
            const int d = (bd + k) & 7;
            if (member(x + kDx[d], y + kDy[d])) {
                found = k;
                break;
            }
        }
        if (found == 0) break;  // Isolated pixel: the circuit is the point itself.
        const int d = (bd + found) & 7;
        const int back = (bd + found - 1) & 7;  // Last non-member scanned.
        const int32_t bx = x + kDx[back];
        const int32_t by = y + kDy[back];
        x += kDx[d];
        y += kDy[d];
        bd = kDirIndex[by - y + 1][bx - x + 1];
    }
    size_t lead = 0;
    for (size_t i = 1; i < seq.size(); ++i) {
        if (seq[i].y < seq[lead].y || (seq[i].y == seq[lead].y && seq[i].x < seq[lead].x))
            lead = i;
    }
    std::rotate(seq.begin(), seq.begin() + static_cast<ptrdiff_t>(lead), seq.end());
    return seq;
}

double seg_dist_sq(Point2 p, Point2 a, Point2 b) {
    const double vx = b.x - a.x;
    const double vy = b.y - a.y;
    const double wx = p.x - a.x;
    const double wy = p.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? (wx * vx + wy * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx);
    const double dy = p.y - (a.y + t * vy);
    return dx * dx + dy * dy;
}

double seg_dist_sq(PointI p, PointI a, PointI b) {
    return seg_dist_sq(Point2{static_cast<double>(p.x), static_cast<double>(p.y)},
                       Point2{static_cast<double>(a.x), static_cast<double>(a.y)},
                       Point2{static_cast<double>(b.x), static_cast<double>(b.y)});
}

/// Marks the points an open polyline keeps under recursive simplification.
void rdp_mark(const std::vector<PointI>& pts, size_t i, size_t j, double eps2,
              std::vector<char>& keep) {
    if (j <= i + 1) return;
    size_t split = 0;
    double max_d2 = -1.0;
    for (size_t k = i + 1; k < j; ++k) {
        const double d2 = seg_dist_sq(pts[k], pts[i], pts[j]);
        if (d2 > max_d2) {
            max_d2 = d2;
            split = k;
        }
    }
    if (max_d2 > eps2) {
        keep[split] = 1;
        rdp_mark(pts, i, split, eps2, keep);
        rdp_mark(pts, split, j, eps2, keep);
    }
}

std::vector<PointI> rdp_open(const std::vector<PointI>& pts, double eps) {
    std::vector<char> keep(pts.size(), 0);
    keep.front() = keep.back() = 1;
    rdp_mark(pts, 0, pts.size() - 1, eps * eps, keep);
    std::vector<PointI> out;
    for (size_t k = 0; k < pts.size(); ++k)
        if (keep[k]) out.push_back(pts[k]);
    return out;
}

}  // namespace

std::vector<RegionNode> trace_contours(const BinaryImage& mask) {
    const auto w = static_cast<int32_t>(mask.width());
    const auto h = static_cast<int32_t>(mask.height());
    if (w <= 0 || h <= 0) return {};

    const Labeling fg = label_components(
        w, h, [&](int32_t x, int32_t y) { return mask.get(x, y); }, true);
    const Labeling bg = label_components(
        w, h, [&](int32_t x, int32_t y) { return !mask.get(x, y); }, false);

    // The pixel directly above a component's raster-first pixel always
    // belongs to the opposite color (a same-color pixel there would have
    // been labeled earlier into the same component), which makes it the
    // enclosing component of the opposite kind.
    std::vector<Component> fg_comps = fg.comps;
    std::vector<Component> bg_comps = bg.comps;
    for (auto& c : fg_comps) {
        if (c.first.y == 0) continue;
        c.parent = bg.label[static_cast<size_t>(c.first.y - 1) * w + c.first.x];
        if (c.parent < 0) throw std::logic_error("contour hierarchy: missing enclosing region");
    }
    for (auto& c : bg_comps) {
        if (c.touches_border) continue;
        c.parent = fg.label[static_cast<size_t>(c.first.y - 1) * w + c.first.x];
        if (c.parent < 0) throw std::logic_error("contour hierarchy: missing enclosing region");
    }

    std::vector<RegionNode> fg_nodes(fg_comps.size());
    std::vector<RegionNode> hole_nodes(bg_comps.size());
    std::vector<std::vector<int32_t>> fg_children(fg_comps.size());
    std::vector<std::vector<int32_t>> hole_children(bg_comps.size());

    for (size_t i = 0; i < fg_comps.size(); ++i) {
        const Component& c = fg_comps[i];
        RegionNode& n = fg_nodes[i];
        n.contour.kind = Contour::Kind::Outer;
        n.contour.points = moore_trace(c.first, [&](int32_t x, int32_t y) {
            return x >= 0 && y >= 0 && x < w && y < h &&
                   fg.label[static_cast<size_t>(y) * w + x] == static_cast<int32_t>(i);
        });
        n.pixel_count = c.count;
        n.min_x = c.min_x;
        n.min_y = c.min_y;
        n.max_x = c.max_x;
        n.max_y = c.max_y;
        if (c.parent >= 0 && !bg_comps[c.parent].touches_border)
            hole_children[c.parent].push_back(static_cast<int32_t>(i));
    }
    for (size_t j = 0; j < bg_comps.size(); ++j) {
        const Component& c = bg_comps[j];
        if (c.touches_border) continue;
        RegionNode& n = hole_nodes[j];
        n.contour.kind = Contour::Kind::Hole;
        n.contour.points = moore_trace(c.first, [&](int32_t x, int32_t y) {
            return x >= 0 && y >= 0 && x < w && y < h &&
                   bg.label[static_cast<size_t>(y) * w + x] == static_cast<int32_t>(j);
        });
        n.pixel_count = c.count;
        n.min_x = c.min_x;
        n.min_y = c.min_y;
        n.max_x = c.max_x;
        n.max_y = c.max_y;
        fg_children[c.parent].push_back(static_cast<int32_t>(j));
    }

    // Materialize the tree bottom-up through mutually recursive moves.
    auto build_fg = [&](auto&& self, int32_t i) -> RegionNode {
        RegionNode n = std::move(fg_nodes[i]);
        for (const int32_t j : fg_children[i]) {
            RegionNode hole = std::move(hole_nodes[j]);
            for (const int32_t k : hole_children[j]) hole.children.push_back(self(self, k));
            n.children.push_back(std::move(hole));
        }
        return n;
    };

    std::vector<RegionNode> roots;
    for (size_t i = 0; i < fg_comps.size(); ++i) {
        const int32_t parent = fg_comps[i].parent;
        if (parent < 0 || bg_comps[parent].touches_border)
            roots.push_back(build_fg(build_fg, static_cast<int32_t>(i)));
    }
    return roots;
}

std::vector<PointI> polygon_approx(const Contour& contour, double eps) {
    const std::vector<PointI>& pts = contour.points;
    if (pts.empty()) throw std::invalid_argument("polygon_approx: empty contour");
    if (eps < 0) throw std::invalid_argument("polygon_approx: negative tolerance");
    const size_t n = pts.size();
    if (n <= 2) return pts;

    // Cut the loop at the two mutually farthest points (first pair on ties).
    size_t cut_a = 0, cut_b = 1;
    int64_t best_d2 = -1;
    for (size_t i = 0; i + 1 < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            const int64_t dx = pts[j].x - pts[i].x;
            const int64_t dy = pts[j].y - pts[i].y;
            const int64_t d2 = dx * dx + dy * dy;
            if (d2 > best_d2) {
                best_d2 = d2;
                cut_a = i;
                cut_b = j;
            }
        }
    }

    std::vector<PointI> arc1(pts.begin() + static_cast<ptrdiff_t>(cut_a),
                             pts.begin() + static_cast<ptrdiff_t>(cut_b) + 1);
    std::vector<PointI> arc2(pts.begin() + static_cast<ptrdiff_t>(cut_b), pts.end());
    arc2.insert(arc2.end(), pts.begin(), pts.begin() + static_cast<ptrdiff_t>(cut_a) + 1);

    std::vector<PointI> out = rdp_open(arc1, eps);
    const std::vector<PointI> back = rdp_open(arc2, eps);
    out.insert(out.end(), back.begin() + 1, back.end() - 1);
    return out;
}

std::vector<QuadCandidate> find_quads(const std::vector<RegionNode>& nodes, double min_area,
                                      double eps_frac) {
    std::vector<QuadCandidate> quads;

    auto consider = [&](const Contour& contour) {
        const std::vector<PointI>& pts = contour.points;
        const size_t n = pts.size();
        if (n < 4) return;
        double perimeter = 0;
        for (size_t i = 0; i < n; ++i) {
            const PointI a = pts[i];
            const PointI b = pts[(i + 1) % n];
            perimeter += std::hypot(static_cast<double>(b.x - a.x), static_cast<double>(b.y - a.y));
        }
        const double eps = eps_frac * perimeter;
        std::vector<PointI> poly = polygon_approx(contour, eps);
        if (poly.size() != 4) return;

        // Strict convexity: consecutive edge cross products share one sign.
        int64_t cross[4];
        for (int i = 0; i < 4; ++i) {
            const PointI a = poly[i];
            const PointI b = poly[(i + 1) % 4];
            const PointI c = poly[(i + 2) % 4];
            cross[i] = static_cast<int64_t>(b.x - a.x) * (c.y - b.y) -
                       static_cast<int64_t>(b.y - a.y) * (c.x - b.x);
        }
        bool convex = true;
        for (int i = 0; i < 4; ++i)
            if (cross[i] == 0 || (cross[i] > 0) != (cross[0] > 0)) convex = false;
        if (!convex) return;

        int64_t shoelace = 0;
        for (int i = 0; i < 4; ++i) {
            const PointI a = poly[i];
            const PointI b = poly[(i + 1) % 4];
            shoelace += static_cast<int64_t>(a.x) * b.y - static_cast<int64_t>(b.x) * a.y;
        }
        const double area = std::abs(static_cast<double>(shoelace)) / 2.0;
        if (area < min_area) return;

        // A genuine quadrilateral hugs its four edges; smooth blobs that the
        // simplification happens to collapse to four vertices do not.
        const double dev_tol2 = (0.45 * eps) * (0.45 * eps);
        for (const PointI p : pts) {
            double d2 = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 4; ++i) d2 = std::min(d2, seg_dist_sq(p, poly[i], poly[(i + 1) % 4]));
            if (d2 > dev_tol2) return;
        }

        // Clockwise in image coordinates (y down) means positive shoelace.
        if (shoelace < 0) std::reverse(poly.begin(), poly.end());
        size_t lead = 0;
        int64_t best_r2 = std::numeric_limits<int64_t>::max();
        for (size_t i = 0; i < 4; ++i) {
            const int64_t r2 = static_cast<int64_t>(poly[i].x) * poly[i].x +
                               static_cast<int64_t>(poly[i].y) * poly[i].y;
            if (r2 < best_r2) {
                best_r2 = r2;
                lead = i;
            }
        }

        QuadCandidate q;
        q.area = area;
        for (size_t i = 0; i < 4; ++i) {
            const PointI p = poly[(lead + i) % 4];
            q.corners[i] = {static_cast<double>(p.x), static_cast<double>(p.y)};
        }
        for (int i = 0; i < 4; ++i) {
            const Point2 a = q.corners[i];
            const Point2 b = q.corners[(i + 1) % 4];
            q.perimeter += std::hypot(b.x - a.x, b.y - a.y);
        }
        quads.push_back(q);
    };

    auto walk = [&](auto&& self, const RegionNode& node) -> void {
        if (node.contour.kind == Contour::Kind::Outer) consider(node.contour);
        for (const RegionNode& child : node.children) self(self, child);
    };
    for (const RegionNode& node : nodes) walk(walk, node);
    return quads;
}

RegionMask region_pixels(const RegionNode& node, const BinaryImage& mask) {
    if (node.contour.points.empty() || node.pixel_count == 0)
        throw std::invalid_argument("region_pixels: empty region");
    const bool fg = node.contour.kind == Contour::Kind::Outer;
    RegionMask out;
    out.off_x = node.min_x;
    out.off_y = node.min_y;
    out.mask = BinaryImage(node.max_x - node.min_x + 1, node.max_y - node.min_y + 1);

    // Flood fill from the contour start; connectivity matches the labeling
    // (8 for foreground regions, 4 for holes) so the fill is exactly the
    // component and cannot leak into neighbors of the same color.
    std::vector<PointI> stack{node.contour.points.front()};
    out.mask.set(stack[0].x - out.off_x, stack[0].y - out.off_y, true);
    while (!stack.empty()) {
        const PointI p = stack.back();
        stack.pop_back();
        for (int d = 0; d < 8; ++d) {
            if (!fg && (d & 1) != 0) continue;
            const int32_t nx = p.x + kDx[d];
            const int32_t ny = p.y + kDy[d];
            if (nx < node.min_x || ny < node.min_y || nx > node.max_x || ny > node.max_y) continue;
            if (!mask.in_bounds(nx, ny) || mask.get(nx, ny) != fg) continue;
            if (out.mask.get(nx - out.off_x, ny - out.off_y)) continue;
            out.mask.set(nx - out.off_x, ny - out.off_y, true);
            stack.push_back({nx, ny});
        }
    }
    return out;
}

Point2 centroid(const RegionNode& node, const BinaryImage& mask) {
    const RegionMask region = region_pixels(node, mask);
    uint64_t count = 0;
    double sum_x = 0, sum_y = 0;
    for (int32_t y = 0; y < static_cast<int32_t>(region.mask.height()); ++y) {
        for (int32_t x = 0; x < static_cast<int32_t>(region.mask.width()); ++x) {
            if (!region.mask.get(x, y)) continue;
            ++count;
            sum_x += x + region.off_x;
            sum_y += y + region.off_y;
        }
    }
    return {sum_x / static_cast<double>(count), sum_y / static_cast<double>(count)};
}

}  // namespace arc
