#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dotshape/errors.hpp"
#include "dotshape/geometry.hpp"

using namespace dotshape;

namespace {
constexpr double kPi = std::numbers::pi;

Polyline unit_square() {
    return Polyline{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
}

Polyline translated(const Polyline& p, Vec2 d) {
    Polyline q = p;
    for (auto& v : q.pts) v += d;
    return q;
}

Polyline rotated(const Polyline& p, double th) {
    Polyline q = p;
    for (auto& v : q.pts)
        v = {v.x * std::cos(th) - v.y * std::sin(th),
             v.x * std::sin(th) + v.y * std::cos(th)};
    return q;
}

Polyline random_polyline(std::mt19937& rng) {
    std::uniform_real_distribution<double> ur(0.5, 2.0);
    const int n = 8 + static_cast<int>(rng() % 8);
    Polyline p;
    for (int i = 0; i < n; ++i) {
        const double th = 2.0 * kPi * i / n;
        const double r = ur(rng);
        p.pts.push_back({r * std::cos(th), r * std::sin(th)});
    }
    return p;
}
} // namespace

TEST_CASE("sample_curve: circle cardinal points") {
    const auto c = ParametricCurve::circle({0, 0}, 1.5);
    const auto p = sample_curve(c, 4);
    REQUIRE(p.size() == 4);
    CHECK(p.pts[0].x == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(p.pts[0].y == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p.pts[1].x == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(p.pts[1].y == doctest::Approx(1.5).epsilon(1e-14));
    CHECK(p.pts[2].x == doctest::Approx(-1.5).epsilon(1e-14));
    CHECK(p.pts[3].y == doctest::Approx(-1.5).epsilon(1e-14));
}

TEST_CASE("sample_curve: cosine star radius extrema") {
    const auto c = ParametricCurve::cosine_star({0, 0}, 2.0, 0.3, 3);
    const auto p = sample_curve(c, 4096);
    double rmin = 1e300, rmax = 0.0;
    for (const auto& v : p.pts) {
        rmin = std::min(rmin, v.norm());
        rmax = std::max(rmax, v.norm());
    }
    CHECK(rmax == doctest::Approx(2.3).epsilon(1e-5));
    CHECK(rmin == doctest::Approx(1.7).epsilon(1e-5));
}

TEST_CASE("sample_curve: flower preset max |x| = 2.3") {
    // 5*(0.4 + 0.06 cos 3t) == 2 + 0.3 cos 3t
    const auto c = ParametricCurve::cosine_star({0, 0}, 5.0 * 0.4, 5.0 * 0.06, 3);
    const auto p = sample_curve(c, 360);
    double max_abs_x = 0.0;
    for (const auto& v : p.pts) max_abs_x = std::max(max_abs_x, std::abs(v.x));
    CHECK(max_abs_x == doctest::Approx(2.3).epsilon(1e-9));
}

TEST_CASE("polyline_perimeter") {
    CHECK(polyline_perimeter(unit_square()) == doctest::Approx(4.0).epsilon(1e-15));

    const auto circ = sample_curve(ParametricCurve::circle({0, 0}, 1.5), 1024);
    CHECK(polyline_perimeter(circ) ==
          doctest::Approx(2.0 * kPi * 1.5).epsilon(1e-4));

    Polyline degenerate{{{0, 0}, {1, 0}}};
    CHECK_THROWS_AS(polyline_perimeter(degenerate), GeometryError);
}

TEST_CASE("polyline_perimeter is rigid-motion invariant") {
    std::mt19937 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
        const auto p = random_polyline(rng);
        const double len = polyline_perimeter(p);
        const auto q = translated(rotated(p, 0.37 + trial), {1.25, -7.5});
        CHECK(polyline_perimeter(q) == doctest::Approx(len).epsilon(1e-12));
    }
}

TEST_CASE("hausdorff_distance: basic values") {
    const auto sq = unit_square();
    CHECK(hausdorff_distance(sq, sq) == doctest::Approx(0.0));

    const auto a = sample_curve(ParametricCurve::circle({0, 0}, 1.5), 2048);
    const auto b = sample_curve(ParametricCurve::circle({0, 0}, 1.6), 2048);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(0.1).epsilon(1e-3));

    CHECK(hausdorff_distance(sq, translated(sq, {0.2, 0.0})) ==
          doctest::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("hausdorff_distance: symmetry and triangle inequality") {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 25; ++trial) {
        const auto a = random_polyline(rng);
        const auto b = random_polyline(rng);
        const auto c = random_polyline(rng);
        const double ab = hausdorff_distance(a, b);
        const double ba = hausdorff_distance(b, a);
        CHECK(ab == doctest::Approx(ba).epsilon(1e-12));
        const double ac = hausdorff_distance(a, c);
        const double cb = hausdorff_distance(c, b);
        CHECK(ab <= ac + cb + 1e-12);
    }
}

TEST_CASE("curve validation") {
    CHECK_THROWS_AS(ParametricCurve::cosine_star({0, 0}, 0.2, 0.5, 4).validate(),
                    GeometryError);
    CHECK_THROWS_AS(ParametricCurve::polygon({{0, 0}, {1, 0}}), GeometryError);
    // Bow-tie polygon self-intersects.
    CHECK_THROWS_AS(ParametricCurve::polygon({{0, 0}, {1, 1}, {1, 0}, {0, 1}}),
                    GeometryError);
}

TEST_CASE("point_in_polyline") {
    const auto sq = unit_square();
    CHECK(point_in_polyline(sq, {0.5, 0.5}));
    CHECK_FALSE(point_in_polyline(sq, {1.5, 0.5}));
    const auto star = sample_curve(ParametricCurve::cosine_star({0, 0}, 2, 0.3, 3), 256);
    CHECK(point_in_polyline(star, {0, 0}));
    CHECK_FALSE(point_in_polyline(star, {2.6, 0}));
}
