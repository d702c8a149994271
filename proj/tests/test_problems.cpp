#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dotshape/errors.hpp"
#include "dotshape/problems.hpp"
#include "dotshape/radial.hpp"

using namespace dotshape;

namespace {
constexpr double kPi = std::numbers::pi;

MeshPtr disk_mesh(double h, double r_iface = 1.5, double R = 3.0) {
    return std::make_shared<const Mesh>(
        build_disk_mesh(R, h, ParametricCurve::circle({0, 0}, r_iface)));
}

Coefficients radial_coeffs(double mu_in = 1.2) {
    Coefficients c;
    c.mu_out = 1.0;
    c.mu_in = mu_in;
    c.zeta = 0.3;
    return c;
}

double h1_norm(const Field& f) { return std::sqrt(h1_norm_sq(f)); }

Field field_diff(const Field& a, const Field& b) {
    Field d = a;
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] -= b.values[i];
    return d;
}
} // namespace

TEST_CASE("solve_state: zero source, radial oracle match, contrast invariance") {
    const auto mesh = disk_mesh(0.1);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);

    const auto u0 = solve_state(sys, SourceSpec::constant(0.0));
    for (const double v : u0.values) CHECK(v == 0.0);

    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    RadialProblem rp;
    const auto ref = radial_solve(rp, 100000);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < mesh->nodes.size(); ++i) {
        const double ue = ref.value_at(mesh->nodes[i].norm());
        num += (u.values[i] - ue) * (u.values[i] - ue);
        den += ue * ue;
    }
    CHECK(std::sqrt(num / den) <= 2e-2);

    // No contrast: the interface location cannot matter.
    Coefficients flat = radial_coeffs(1.0);
    const auto ua = solve_state(disk_mesh(0.15, 1.5), flat, SourceSpec::constant(1.0));
    const auto ub = solve_state(disk_mesh(0.15, 1.0), flat, SourceSpec::constant(1.0));
    const auto ta = boundary_trace(ua);
    const auto tb = boundary_trace(ub);
    for (int k = 0; k < 64; ++k) {
        const double s = ta.total_arc * k / 64.0;
        CHECK(ta.value_at(s) ==
              doctest::Approx(tb.value_at(s * tb.total_arc / ta.total_arc))
                  .epsilon(1e-3));
    }
}

TEST_CASE("solve_adjoint: exact data gives p = 0") {
    const auto mesh = disk_mesh(0.2);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    const auto h = boundary_trace(u);
    const auto p = solve_adjoint(sys, u, h);
    for (const double v : p.values) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("solve_adjoint: constant boundary misfit satisfies the v=1 identity") {
    const auto mesh = disk_mesh(0.2);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));

    const double shift = 0.75;
    Measurement h = boundary_trace(u);
    for (double& v : h.value) v -= shift; // u - h = shift on the boundary

    const auto p = solve_adjoint(sys, u, h);

    // Plug v = 1 into the weak form: int mu p + (1/zeta) int_bdy p = c|dOmega|.
    double vol_term = 0.0;
    for (const auto& t : mesh->triangles) {
        const double area = triangle_signed_area(
            mesh->nodes[t.v[0]], mesh->nodes[t.v[1]], mesh->nodes[t.v[2]]);
        const double mu = c.mu(t.region);
        vol_term += mu * area / 3.0 *
                    (p.values[t.v[0]] + p.values[t.v[1]] + p.values[t.v[2]]);
    }
    double bdy_term = 0.0;
    double bdy_len = 0.0;
    for (const auto& e : mesh->boundary_edges) {
        const double len = (mesh->nodes[e.b] - mesh->nodes[e.a]).norm();
        bdy_term += 0.5 * len * (p.values[e.a] + p.values[e.b]) / c.zeta;
        bdy_len += len;
    }
    CHECK(vol_term + bdy_term ==
          doctest::Approx(shift * bdy_len).epsilon(1e-10));
}

TEST_CASE("solve_adjoint: radial mismatch keeps radial symmetry") {
    const auto mesh = disk_mesh(0.15);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    Measurement h = boundary_trace(u);
    for (double& v : h.value) v *= 0.9; // radially symmetric mismatch
    const auto p = solve_adjoint(sys, u, h);

    // Sample p along two radii; profiles agree within discretization error.
    for (const double r : {0.5, 1.0, 2.0, 2.8}) {
        const double p0 = field_value_at(p, {r, 0.0});
        const double p1 = field_value_at(p, {0.0, r});
        const double p2 = field_value_at(p, {-r / std::sqrt(2.0), r / std::sqrt(2.0)});
        CHECK(std::abs(p1 - p0) <= 1e-3 * std::abs(field_value_at(p, {0.0, 0.0})) + 1e-3 * std::abs(p0));
        CHECK(std::abs(p2 - p0) <= 1e-3 * std::abs(field_value_at(p, {0.0, 0.0})) + 1e-3 * std::abs(p0));
    }
}

TEST_CASE("solve_sensitivity: zero direction, FD consistency, sign") {
    const auto mesh = disk_mesh(0.2);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));

    const auto zero = solve_sensitivity(sys, u, {Region::Inside, 0.0});
    for (const double v : zero.values) CHECK(v == 0.0);

    const MuDirection nu{Region::Inside, 1.0};
    const auto udot = solve_sensitivity(sys, u, nu);

    // ||F(mu + d nu) - F(mu) - d*udot|| = O(d^2): halving d quarters it.
    auto residual_at = [&](double d) {
        Coefficients cd = c;
        cd.mu_in += d;
        const auto ud = solve_state(assemble(mesh, cd, 1), SourceSpec::constant(1.0));
        Field r = field_diff(ud, u);
        for (std::size_t i = 0; i < r.values.size(); ++i)
            r.values[i] -= d * udot.values[i];
        return h1_norm(r);
    };
    const double r1 = residual_at(0.08);
    const double r2 = residual_at(0.04);
    CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.25));

    // More absorption -> less light: the sensitivity trace is non-positive.
    const auto tr = boundary_trace(udot);
    for (const double v : tr.value) CHECK(v <= 1e-12);
}

TEST_CASE("solve_second_sensitivity: zero, symmetry, FD consistency") {
    const auto mesh = disk_mesh(0.25);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));

    const MuDirection nu1{Region::Inside, 1.0};
    const MuDirection nu2{Region::Outside, 1.0};
    const auto udot1 = solve_sensitivity(sys, u, nu1);
    const auto udot2 = solve_sensitivity(sys, u, nu2);

    const auto z = solve_second_sensitivity(sys, udot1, {Region::Inside, 0.0},
                                            udot2, {Region::Outside, 0.0});
    for (const double v : z.values) CHECK(v == 0.0);

    const auto uddot_a = solve_second_sensitivity(sys, udot1, nu1, udot2, nu2);
    const auto uddot_b = solve_second_sensitivity(sys, udot2, nu2, udot1, nu1);
    for (std::size_t i = 0; i < uddot_a.values.size(); ++i)
        CHECK(uddot_a.values[i] == doctest::Approx(uddot_b.values[i]).epsilon(1e-10));

    // (DF(mu + d nu1)nu2 - DF(mu)nu2)/d -> uddot with O(d) error.
    auto dir_diff = [&](double d) {
        Coefficients cd = c;
        cd.mu_in += d;
        const auto sysd = assemble(mesh, cd, 1);
        const auto ud = solve_state(sysd, SourceSpec::constant(1.0));
        const auto udotd = solve_sensitivity(sysd, ud, nu2);
        Field r = field_diff(udotd, udot2);
        for (std::size_t i = 0; i < r.values.size(); ++i)
            r.values[i] = r.values[i] / d - uddot_a.values[i];
        return h1_norm(r);
    };
    const double e1 = dir_diff(0.08);
    const double e2 = dir_diff(0.04);
    CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.3));
}

TEST_CASE("evaluate_cost: zero case, closed form, decomposition") {
    const auto mesh = disk_mesh(0.2);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    const auto iface = interface_polyline(*mesh);

    const auto exact = evaluate_cost(u, boundary_trace(u), c, 0.0, 0.0, iface);
    CHECK(exact.total == 0.0);

    // u - h = 1 on the boundary polygon: J = 1/2 * |polygon perimeter|.
    Measurement h = boundary_trace(u);
    for (double& v : h.value) v -= 1.0;
    const auto unit = evaluate_cost(u, h, c, 0.0, 0.0, iface);
    CHECK(unit.misfit == doctest::Approx(0.5 * h.total_arc).epsilon(1e-12));
    CHECK(unit.misfit == doctest::Approx(3.0 * kPi).epsilon(1e-3));

    const auto full = evaluate_cost(u, h, c, 2e-4, 0.1, iface);
    CHECK(full.total ==
          full.misfit + full.tikhonov + full.perimeter_term); // exact identity
    CHECK(full.perimeter_term ==
          doctest::Approx(0.05 * polyline_perimeter(iface)).epsilon(1e-12));
}

TEST_CASE("evaluate_cost: flower tikhonov term from polygon areas") {
    const auto curve = ParametricCurve::cosine_star({0, 0}, 2.0, 0.3, 3);
    const auto mesh =
        std::make_shared<const Mesh>(build_disk_mesh(3.0, 0.15, curve));
    const Coefficients c = radial_coeffs();
    const auto u = solve_state(mesh, c, SourceSpec::constant(1.0));
    const auto iface = interface_polyline(*mesh);
    const auto cost = evaluate_cost(u, boundary_trace(u), c, 2e-4, 0.0, iface);

    // Brute-force polygon areas: the interface polyline bounds omega and the
    // hull polygon bounds the whole mesh.
    const double area_in = polyline_signed_area(iface);
    Polyline hull;
    for (const auto& e : mesh->boundary_edges) hull.pts.push_back(mesh->nodes[e.a]);
    const double area_out = polyline_signed_area(hull) - area_in;
    const double expect =
        1e-4 * (c.mu_out * c.mu_out * area_out + c.mu_in * c.mu_in * area_in);
    CHECK(cost.tikhonov == doctest::Approx(expect).epsilon(1e-9));
}

TEST_CASE("adjoint consistency identity ties sensitivity and adjoint") {
    // int_(dOmega) (u - h) udot = -int_Omega nu u p, the discrete statement of
    // a(p, udot) = a(udot, p).
    const auto mesh = disk_mesh(0.2);
    const Coefficients c = radial_coeffs();
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    Measurement h = boundary_trace(u);
    for (std::size_t i = 0; i < h.value.size(); ++i)
        h.value[i] *= 0.9 + 0.05 * std::sin(3.0 * h.arc[i]);
    const auto p = solve_adjoint(sys, u, h);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        const MuDirection nu{trial % 2 == 0 ? Region::Inside : Region::Outside,
                             ur(rng)};
        const auto udot = solve_sensitivity(sys, u, nu);

        // Left side: boundary quadrature of (u - h) * udot.
        const auto hb = boundary_values_from(h, *mesh, 1);
        const BoundaryParam bp = build_boundary_param(*mesh, 1);
        double lhs = 0.0;
        for (std::size_t e = 0; e < mesh->boundary_edges.size(); ++e) {
            const int a = bp.dofs[e];
            const int b = bp.dofs[(e + 1) % bp.dofs.size()];
            const double len = (mesh->nodes[b] - mesh->nodes[a]).norm();
            const double ma = u.values[a] - hb[a];
            const double mb = u.values[b] - hb[b];
            lhs += len / 6.0 *
                   (2.0 * ma * udot.values[a] + ma * udot.values[b] +
                    mb * udot.values[a] + 2.0 * mb * udot.values[b]);
        }
        // Right side: -int nu u p over the tagged region (exact P1 quadrature).
        double rhs = 0.0;
        for (const auto& t : mesh->triangles) {
            if (t.region != nu.region) continue;
            const double area = triangle_signed_area(
                mesh->nodes[t.v[0]], mesh->nodes[t.v[1]], mesh->nodes[t.v[2]]);
            const double lam[3][3] = {{2. / 3, 1. / 6, 1. / 6},
                                      {1. / 6, 2. / 3, 1. / 6},
                                      {1. / 6, 1. / 6, 2. / 3}};
            for (int q = 0; q < 3; ++q) {
                double uq = 0.0, pq = 0.0;
                for (int i = 0; i < 3; ++i) {
                    uq += lam[q][i] * u.values[t.v[i]];
                    pq += lam[q][i] * p.values[t.v[i]];
                }
                rhs -= nu.scale * area / 3.0 * uq * pq;
            }
        }
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-8));
    }
}

TEST_CASE("cost directional derivative matches the sensitivity formula") {
    // FD of J_rho in a direction nu matches int (u-h) udot + rho (mu, nu).
    const auto mesh = disk_mesh(0.2);
    Coefficients c = radial_coeffs(1.4);
    const double rho = 1e-3;
    const auto sys = assemble(mesh, c, 1);
    const auto u = solve_state(sys, SourceSpec::constant(1.0));
    Measurement h = boundary_trace(u);
    for (double& v : h.value) v *= 0.93;
    const auto iface = interface_polyline(*mesh);

    const MuDirection nu{Region::Inside, 1.0};
    const auto udot = solve_sensitivity(sys, u, nu);

    const auto hb = boundary_values_from(h, *mesh, 1);
    const BoundaryParam bp = build_boundary_param(*mesh, 1);
    double misfit_term = 0.0;
    for (std::size_t e = 0; e < mesh->boundary_edges.size(); ++e) {
        const int a = bp.dofs[e];
        const int b = bp.dofs[(e + 1) % bp.dofs.size()];
        const double len = (mesh->nodes[b] - mesh->nodes[a]).norm();
        const double ma = u.values[a] - hb[a];
        const double mb = u.values[b] - hb[b];
        misfit_term += len / 6.0 *
                       (2.0 * ma * udot.values[a] + ma * udot.values[b] +
                        mb * udot.values[a] + 2.0 * mb * udot.values[b]);
    }
    const double area_in = region_areas(*mesh)[static_cast<int>(Region::Inside)];
    const double predicted = misfit_term + rho * c.mu_in * nu.scale * area_in;

    auto j_at = [&](double mu_in) {
        Coefficients cd = c;
        cd.mu_in = mu_in;
        const auto ud = solve_state(assemble(mesh, cd, 1), SourceSpec::constant(1.0));
        return evaluate_cost(ud, h, cd, rho, 0.0, iface).total;
    };
    const double d = 1e-5;
    const double fd = (j_at(c.mu_in + d) - j_at(c.mu_in - d)) / (2.0 * d);
    CHECK(fd == doctest::Approx(predicted).epsilon(1e-6));
}
