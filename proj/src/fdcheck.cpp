#include "dotshape/fdcheck.hpp"

#include <cmath>
#include <random>

#include "dotshape/errors.hpp"

namespace dotshape {

double fd_parameter_gradient(MeshPtr mesh, const Coefficients& c, const SourceSpec& s,
                             const Measurement& h, double rho, double delta) {
    if (!(delta > 0.0)) throw ValidationError("fd_parameter_gradient: delta > 0");
    const Polyline iface = interface_polyline(*mesh);
    auto j_at = [&](double mu_in) {
        Coefficients cd = c;
        cd.mu_in = mu_in;
        const auto u = solve_state(assemble(mesh, cd, 1), s);
        return evaluate_cost(u, h, cd, rho, 0.0, iface).total;
    };
    return (j_at(c.mu_in + delta) - j_at(c.mu_in - delta)) / (2.0 * delta);
}

double fd_shape_derivative(MeshPtr mesh, const Coefficients& c, const SourceSpec& s,
                           const Measurement& h, const DeformationField& V, double t) {
    if (!(t > 0.0)) throw ValidationError("fd_shape_derivative: t > 0");
    auto j_on = [&](const Mesh& m) {
        auto mp = std::make_shared<const Mesh>(m);
        const auto u = solve_state(assemble(mp, c, 1), s);
        return boundary_misfit(u, h);
    };
    for (int attempt = 0; attempt < 8; ++attempt, t *= 0.5) {
        const Mesh plus = deform_unchecked(*mesh, V, t);
        const Mesh minus = deform_unchecked(*mesh, V, -t);
        if (min_signed_area(plus) <= 0.0 || min_signed_area(minus) <= 0.0) continue;
        return (j_on(plus) - j_on(minus)) / (2.0 * t);
    }
    throw GeometryError("fd_shape_derivative: no valid step after 8 halvings");
}

DeformationField random_smooth_field(const Mesh& mesh, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    struct Mode {
        double ax, ay, kx, ky, px, py;
    };
    std::vector<Mode> modes(3);
    for (auto& m : modes)
        m = {ur(rng), ur(rng), 1.5 * ur(rng), 1.5 * ur(rng), 3.0 * ur(rng),
             3.0 * ur(rng)};

    const double R = mesh.domain_radius;
    DeformationField V;
    V.v.assign(mesh.nodes.size(), Vec2{0.0, 0.0});
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        if (mesh.is_boundary_node(static_cast<int>(i))) continue;
        const Vec2& x = mesh.nodes[i];
        const double cutoff = std::max(0.0, 1.0 - x.norm_sq() / (R * R));
        Vec2 v{0.0, 0.0};
        for (const auto& m : modes) {
            v.x += m.ax * std::sin(m.kx * x.x + m.px) * std::cos(m.ky * x.y);
            v.y += m.ay * std::cos(m.kx * x.x) * std::sin(m.ky * x.y + m.py);
        }
        V.v[i] = v * cutoff;
    }
    return V;
}

} // namespace dotshape
