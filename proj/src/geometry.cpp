#include "dotshape/geometry.hpp"

#include <algorithm>
#include <limits>
#include <numbers>

#include "dotshape/errors.hpp"

namespace dotshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Peanut preset: rho(t) = 1.1*(1 + 0.45*cos 2t). Concave waist at t = pi/2.
constexpr double kPeanutBase = 1.1;
constexpr double kPeanutAmp = 0.45;

std::vector<double> polygon_cumlen(const std::vector<Vec2>& v) {
    std::vector<double> s(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const Vec2& a = v[i];
        const Vec2& b = v[(i + 1) % v.size()];
        s[i + 1] = s[i] + (b - a).norm();
    }
    return s;
}

} // namespace

Vec2 ParametricCurve::point_at(double t) const {
    t = std::fmod(t, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    switch (kind) {
    case CurveKind::Circle:
        return center + Vec2{radius * std::cos(t), radius * std::sin(t)};
    case CurveKind::CosineStar: {
        const double rho = base + amp * std::cos(lobes * t);
        return center + Vec2{rho * std::cos(t), rho * std::sin(t)};
    }
    case CurveKind::Peanut: {
        const double rho = kPeanutBase * (1.0 + kPeanutAmp * std::cos(2.0 * t));
        return center + Vec2{rho * std::cos(t), rho * std::sin(t)};
    }
    case CurveKind::Polygon: {
        const auto s = polygon_cumlen(vertices);
        const double total = s.back();
        double target = total * t / kTwoPi;
        auto it = std::upper_bound(s.begin(), s.end(), target);
        std::size_t i = std::min<std::size_t>(it - s.begin() - 1, vertices.size() - 1);
        const Vec2& a = vertices[i];
        const Vec2& b = vertices[(i + 1) % vertices.size()];
        const double seg = s[i + 1] - s[i];
        const double w = seg > 0.0 ? (target - s[i]) / seg : 0.0;
        return a + (b - a) * w;
    }
    }
    return center;
}

double ParametricCurve::min_radius() const {
    switch (kind) {
    case CurveKind::Circle:
        return radius;
    case CurveKind::CosineStar:
        return base - std::abs(amp);
    case CurveKind::Peanut:
        return kPeanutBase * (1.0 - kPeanutAmp);
    case CurveKind::Polygon: {
        double m = std::numeric_limits<double>::max();
        for (const auto& v : vertices) m = std::min(m, (v - center).norm());
        return m;
    }
    }
    return 0.0;
}

double ParametricCurve::max_radius() const {
    switch (kind) {
    case CurveKind::Circle:
        return radius;
    case CurveKind::CosineStar:
        return base + std::abs(amp);
    case CurveKind::Peanut:
        return kPeanutBase * (1.0 + kPeanutAmp);
    case CurveKind::Polygon: {
        double m = 0.0;
        for (const auto& v : vertices) m = std::max(m, (v - center).norm());
        return m;
    }
    }
    return 0.0;
}

void ParametricCurve::validate() const {
    if (kind == CurveKind::Polygon) {
        if (vertices.size() < 3)
            throw GeometryError("polygon curve needs at least 3 vertices");
        Polyline p{vertices};
        if (!polyline_is_simple(p))
            throw GeometryError("polygon curve is self-intersecting");
        return;
    }
    if (min_radius() <= 0.0)
        throw GeometryError("curve radius function is not strictly positive");
}

ParametricCurve ParametricCurve::circle(Vec2 c, double r) {
    ParametricCurve k;
    k.kind = CurveKind::Circle;
    k.center = c;
    k.radius = r;
    k.validate();
    return k;
}

ParametricCurve ParametricCurve::cosine_star(Vec2 c, double base, double amp, int lobes) {
    ParametricCurve k;
    k.kind = CurveKind::CosineStar;
    k.center = c;
    k.base = base;
    k.amp = amp;
    k.lobes = lobes;
    k.validate();
    return k;
}

ParametricCurve ParametricCurve::peanut(Vec2 c) {
    ParametricCurve k;
    k.kind = CurveKind::Peanut;
    k.center = c;
    return k;
}

ParametricCurve ParametricCurve::polygon(std::vector<Vec2> vertices) {
    ParametricCurve k;
    k.kind = CurveKind::Polygon;
    k.vertices = std::move(vertices);
    Vec2 c{0.0, 0.0};
    for (const auto& v : k.vertices) c += v;
    k.center = c * (1.0 / static_cast<double>(k.vertices.size()));
    k.validate();
    return k;
}

Polyline sample_curve(const ParametricCurve& curve, int n) {
    const int min_n = curve.kind == CurveKind::Polygon ? 8 : 3;
    if (n < min_n)
        throw GeometryError("sample_curve: n too small");
    Polyline p;
    p.pts.reserve(n);
    for (int i = 0; i < n; ++i)
        p.pts.push_back(curve.point_at(kTwoPi * i / n));
    return p;
}

double polyline_perimeter(const Polyline& p) {
    if (p.size() < 3)
        throw GeometryError("polyline needs at least 3 points");
    double len = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        len += (p.pts[(i + 1) % p.size()] - p.pts[i]).norm();
    return len;
}

double point_segment_distance(const Vec2& q, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double len_sq = ab.norm_sq();
    if (len_sq == 0.0) return (q - a).norm();
    const double t = std::clamp((q - a).dot(ab) / len_sq, 0.0, 1.0);
    return (q - (a + ab * t)).norm();
}

namespace {

double directed_hausdorff(const Polyline& a, const Polyline& b) {
    double worst = 0.0;
    for (const auto& q : a.pts) {
        double best = std::numeric_limits<double>::max();
        for (std::size_t i = 0; i < b.size(); ++i) {
            const double d =
                point_segment_distance(q, b.pts[i], b.pts[(i + 1) % b.size()]);
            best = std::min(best, d);
            if (best == 0.0) break;
        }
        worst = std::max(worst, best);
    }
    return worst;
}

bool segments_properly_intersect(const Vec2& a, const Vec2& b, const Vec2& c,
                                 const Vec2& d) {
    const double d1 = (b - a).cross(c - a);
    const double d2 = (b - a).cross(d - a);
    const double d3 = (d - c).cross(a - c);
    const double d4 = (d - c).cross(b - c);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

} // namespace

double hausdorff_distance(const Polyline& a, const Polyline& b) {
    if (a.size() < 3 || b.size() < 3)
        throw GeometryError("hausdorff_distance: degenerate polyline");
    return std::max(directed_hausdorff(a, b), directed_hausdorff(b, a));
}

double polyline_signed_area(const Polyline& p) {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        s += p.pts[i].cross(p.pts[(i + 1) % p.size()]);
    return 0.5 * s;
}

bool polyline_is_simple(const Polyline& p) {
    const std::size_t n = p.size();
    if (n < 3) return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = p.pts[i];
        const Vec2& b = p.pts[(i + 1) % n];
        if ((b - a).norm() == 0.0) return false;
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip the shared-endpoint neighbours.
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            if (segments_properly_intersect(a, b, p.pts[j], p.pts[(j + 1) % n]))
                return false;
        }
    }
    return true;
}

bool point_in_polyline(const Polyline& p, const Vec2& q) {
    bool inside = false;
    const std::size_t n = p.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = p.pts[i];
        const Vec2& b = p.pts[j];
        if ((a.y > q.y) != (b.y > q.y)) {
            const double x_cross = a.x + (q.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if (q.x < x_cross) inside = !inside;
        }
    }
    return inside;
}

} // namespace dotshape
