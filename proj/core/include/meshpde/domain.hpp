#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace meshpde {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2&) const = default;
    double norm() const { return std::hypot(x, y); }
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One named piece of the boundary loop, parameterized over t in [0, 1].
/// Curved segments carry a polyline discretization for distance/containment
/// queries; straight segments keep it at a single span.
struct BoundarySegment {
    std::string name;
    std::function<Vec2(double)> curve;
    bool straight = true;

    Vec2 start() const { return curve(0.0); }
    Vec2 end() const { return curve(1.0); }
    double length() const;
    /// Polyline approximation (straight: 2 points; curved: dense).
    std::vector<Vec2> polyline() const;
};

enum class DomainKind : uint8_t { UnitSquare = 0, PeriodicSquare = 1, Distorted = 2 };

/// Shape parameters for the distorted test domain: a flat bottom, a vertical
/// wall on the lower right, an inclined upper-right edge, a sinusoidal-bump
/// top, and an inclined left edge. All zeros reduce it to the unit square.
struct DistortedParams {
    double bump_amplitude = 0.15;  // height of the sine bump on the top edge
    double wall_height = 0.5;      // where the vertical right wall hands over to the incline
    double top_right_shift = 0.25;  // x-offset of the top-right corner from x=1
    double top_left_shift = -0.15;  // x-offset of the top-left corner from x=0
};

struct Domain {
    DomainKind kind = DomainKind::UnitSquare;
    double side = 1.0;  // period length for PeriodicSquare
    DistortedParams distorted;
    std::vector<BoundarySegment> segments;  // empty for PeriodicSquare

    bool periodic() const { return kind == DomainKind::PeriodicSquare; }
    /// Boundary loop as a single closed polyline (first point not repeated).
    std::vector<Vec2> boundary_polyline() const;
    bool closed_loop(double tol = 1e-9) const;
    bool contains(Vec2 p) const;
    double signed_area() const;
    double area() const { return std::abs(signed_area()); }
    double diameter() const;
    void bounding_box(Vec2& lo, Vec2& hi) const;
    /// Distance from p to the nearest boundary point; +inf when periodic.
    double boundary_distance(Vec2 p) const;
    /// Index of the first segment whose polyline passes within tol of p, or -1.
    int segment_containing(Vec2 p, double tol) const;
};

Domain make_unit_square();
Domain make_periodic_square(double side);
/// Throws GeometryError when the parameters self-intersect or collapse.
Domain make_distorted_domain(const DistortedParams& params = {});

/// Brute-force simplicity check of a closed polyline (no two non-adjacent
/// edges intersect).
bool polyline_is_simple(const std::vector<Vec2>& loop);

}  // namespace meshpde
