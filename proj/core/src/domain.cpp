#include "meshpde/domain.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

namespace meshpde {

namespace {

constexpr int kCurveSubdivisions = 256;

double point_segment_distance(Vec2 p, Vec2 a, Vec2 b) {
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    if (len2 == 0.0) return (p - a).norm();
    const double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
    const auto orient = [](Vec2 p, Vec2 q, Vec2 r) {
        const double v = cross(q - p, r - p);
        if (v > 0) return 1;
        if (v < 0) return -1;
        return 0;
    };
    const int o1 = orient(a, b, c), o2 = orient(a, b, d);
    const int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    const auto on_segment = [](Vec2 p, Vec2 q, Vec2 r) {
        return std::min(p.x, r.x) <= q.x && q.x <= std::max(p.x, r.x) &&
               std::min(p.y, r.y) <= q.y && q.y <= std::max(p.y, r.y);
    };
    if (o1 == 0 && on_segment(a, c, b)) return true;
    if (o2 == 0 && on_segment(a, d, b)) return true;
    if (o3 == 0 && on_segment(c, a, d)) return true;
    if (o4 == 0 && on_segment(c, b, d)) return true;
    return false;
}

BoundarySegment straight_segment(std::string name, Vec2 a, Vec2 b) {
    BoundarySegment s;
    s.name = std::move(name);
    s.curve = [a, b](double t) { return a + (b - a) * t; };
    s.straight = true;
    return s;
}

}  // namespace

double BoundarySegment::length() const {
    const auto pts = polyline();
    double len = 0.0;
    for (size_t i = 1; i < pts.size(); ++i) len += (pts[i] - pts[i - 1]).norm();
    return len;
}

std::vector<Vec2> BoundarySegment::polyline() const {
    const int n = straight ? 1 : kCurveSubdivisions;
    std::vector<Vec2> pts;
    pts.reserve(n + 1);
    for (int i = 0; i <= n; ++i) pts.push_back(curve(static_cast<double>(i) / n));
    return pts;
}

std::vector<Vec2> Domain::boundary_polyline() const {
    std::vector<Vec2> loop;
    for (const auto& seg : segments) {
        auto pts = seg.polyline();
        pts.pop_back();  // next segment supplies its start point
        loop.insert(loop.end(), pts.begin(), pts.end());
    }
    return loop;
}

bool Domain::closed_loop(double tol) const {
    if (segments.empty()) return periodic();
    for (size_t i = 0; i < segments.size(); ++i) {
        const Vec2 end = segments[i].end();
        const Vec2 next = segments[(i + 1) % segments.size()].start();
        if ((end - next).norm() > tol) return false;
    }
    return true;
}

bool Domain::contains(Vec2 p) const {
    if (periodic()) {
        return p.x >= 0.0 && p.x < side && p.y >= 0.0 && p.y < side;
    }
    // even-odd crossing test against the boundary polyline
    const auto loop = boundary_polyline();
    bool inside = false;
    for (size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
        const Vec2 a = loop[j], b = loop[i];
        if ((b.y > p.y) != (a.y > p.y)) {
            const double x_cross = b.x + (p.y - b.y) * (a.x - b.x) / (a.y - b.y);
            if (p.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

double Domain::signed_area() const {
    if (periodic()) return side * side;
    const auto loop = boundary_polyline();
    double acc = 0.0;
    for (size_t i = 0, j = loop.size() - 1; i < loop.size(); j = i++) {
        acc += cross(loop[j], loop[i]);
    }
    return 0.5 * acc;
}

double Domain::diameter() const {
    if (periodic()) return side * std::numbers::sqrt2;
    const auto loop = boundary_polyline();
    double best = 0.0;
    for (size_t i = 0; i < loop.size(); ++i) {
        for (size_t j = i + 1; j < loop.size(); ++j) {
            best = std::max(best, (loop[i] - loop[j]).norm());
        }
    }
    return best;
}

void Domain::bounding_box(Vec2& lo, Vec2& hi) const {
    if (periodic()) {
        lo = {0.0, 0.0};
        hi = {side, side};
        return;
    }
    lo = {std::numeric_limits<double>::max(), std::numeric_limits<double>::max()};
    hi = {std::numeric_limits<double>::lowest(), std::numeric_limits<double>::lowest()};
    for (const Vec2 p : boundary_polyline()) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
}

double Domain::boundary_distance(Vec2 p) const {
    if (periodic()) return std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& seg : segments) {
        const auto pts = seg.polyline();
        for (size_t i = 1; i < pts.size(); ++i) {
            best = std::min(best, point_segment_distance(p, pts[i - 1], pts[i]));
        }
    }
    return best;
}

int Domain::segment_containing(Vec2 p, double tol) const {
    for (size_t s = 0; s < segments.size(); ++s) {
        const auto pts = segments[s].polyline();
        for (size_t i = 1; i < pts.size(); ++i) {
            if (point_segment_distance(p, pts[i - 1], pts[i]) <= tol) {
                return static_cast<int>(s);
            }
        }
    }
    return -1;
}

Domain make_unit_square() {
    Domain d;
    d.kind = DomainKind::UnitSquare;
    d.side = 1.0;
    d.segments.push_back(straight_segment("bottom", {0, 0}, {1, 0}));
    d.segments.push_back(straight_segment("right", {1, 0}, {1, 1}));
    d.segments.push_back(straight_segment("top", {1, 1}, {0, 1}));
    d.segments.push_back(straight_segment("left", {0, 1}, {0, 0}));
    return d;
}

Domain make_periodic_square(double side) {
    if (side <= 0.0) throw GeometryError("periodic square side must be positive");
    Domain d;
    d.kind = DomainKind::PeriodicSquare;
    d.side = side;
    return d;
}

Domain make_distorted_domain(const DistortedParams& params) {
    if (params.wall_height < 0.0 || params.wall_height >= 1.0) {
        throw GeometryError("distorted domain: wall_height must lie in [0, 1)");
    }
    if (params.top_left_shift >= 1.0 + params.top_right_shift) {
        throw GeometryError("distorted domain: top corners out of order");
    }
    if (params.bump_amplitude <= -0.9) {
        throw GeometryError("distorted domain: bump collapses the domain");
    }

    const Vec2 bl{0, 0};
    const Vec2 br{1, 0};
    const Vec2 wall_top{1, params.wall_height};
    const Vec2 tr{1.0 + params.top_right_shift, 1.0};
    const Vec2 tl{params.top_left_shift, 1.0};
    const double amp = params.bump_amplitude;

    Domain d;
    d.kind = DomainKind::Distorted;
    d.distorted = params;
    d.segments.push_back(straight_segment("bottom", bl, br));
    d.segments.push_back(straight_segment("wall", br, wall_top));
    d.segments.push_back(straight_segment("right", wall_top, tr));
    BoundarySegment top;
    top.name = "top";
    top.straight = (amp == 0.0);
    top.curve = [tr, tl, amp](double t) {
        return Vec2{tr.x + (tl.x - tr.x) * t, tr.y + amp * std::sin(std::numbers::pi * t)};
    };
    d.segments.push_back(std::move(top));
    d.segments.push_back(straight_segment("left", tl, bl));

    if (!polyline_is_simple(d.boundary_polyline())) {
        throw GeometryError("distorted domain: boundary self-intersects");
    }
    return d;
}

bool polyline_is_simple(const std::vector<Vec2>& loop) {
    const size_t n = loop.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2 a = loop[i], b = loop[(i + 1) % n];
        for (size_t j = i + 1; j < n; ++j) {
            // skip edges sharing an endpoint
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_intersect(a, b, loop[j], loop[(j + 1) % n])) return false;
        }
    }
    return true;
}

}  // namespace meshpde
