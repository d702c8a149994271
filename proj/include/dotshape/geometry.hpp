#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace dotshape {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    Vec2& operator+=(const Vec2& o) {
        x += o.x;
        y += o.y;
        return *this;
    }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
    double norm_sq() const { return x * x + y * y; }
    Vec2 normalized() const {
        const double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    /// Rotate by -90 degrees: the right-hand normal of a direction vector.
    Vec2 right_normal() const { return {y, -x}; }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }

/// Closed polygonal chain; the segment from back() to front() is implied.
struct Polyline {
    std::vector<Vec2> pts;

    std::size_t size() const { return pts.size(); }
};

enum class CurveKind {
    Circle,     ///< rho(t) = r
    CosineStar, ///< rho(t) = base + amp*cos(lobes*t)
    Peanut,     ///< built-in two-lobe curve with a concave waist
    Polygon,    ///< explicit vertex list, arc-length parametrized
};

/// Closed parametric interface curve, t in [0, 2pi).
struct ParametricCurve {
    CurveKind kind = CurveKind::Circle;
    Vec2 center{0.0, 0.0};
    double radius = 1.0;               // Circle
    double base = 0.0, amp = 0.0;      // CosineStar
    int lobes = 0;                     // CosineStar
    std::vector<Vec2> vertices;        // Polygon (absolute coordinates)

    Vec2 point_at(double t) const;
    /// min over t of |point_at(t) - center| (exact for the analytic kinds).
    double min_radius() const;
    double max_radius() const;
    /// Throws GeometryError if the curve violates its invariants.
    void validate() const;

    static ParametricCurve circle(Vec2 c, double r);
    static ParametricCurve cosine_star(Vec2 c, double base, double amp, int lobes);
    static ParametricCurve peanut(Vec2 c);
    static ParametricCurve polygon(std::vector<Vec2> vertices);
};

/// n points at equispaced parameter values (arc length for polygons). n >= 8
/// except for analytic kinds, where any n >= 3 is accepted for convenience.
Polyline sample_curve(const ParametricCurve& curve, int n);

double polyline_perimeter(const Polyline& p);

/// Symmetric Hausdorff distance, max over vertex-to-segment distances in both
/// directions.
double hausdorff_distance(const Polyline& a, const Polyline& b);

/// Signed area (positive for counterclockwise orientation).
double polyline_signed_area(const Polyline& p);

bool polyline_is_simple(const Polyline& p);

/// Crossing-number point-in-polygon test.
bool point_in_polyline(const Polyline& p, const Vec2& q);

double point_segment_distance(const Vec2& q, const Vec2& a, const Vec2& b);

} // namespace dotshape
