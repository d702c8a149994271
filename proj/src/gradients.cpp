#include "dotshape/gradients.hpp"

#include <Eigen/SparseCholesky>
#include <cmath>
#include <unordered_map>

#include "dotshape/errors.hpp"

namespace dotshape {

namespace {

Vec2 p1_gradient(const Mesh& mesh, const Triangle& t, const Field& f) {
    const Vec2& a = mesh.nodes[t.v[0]];
    const Vec2& b = mesh.nodes[t.v[1]];
    const Vec2& c = mesh.nodes[t.v[2]];
    const double inv = 1.0 / (2.0 * triangle_signed_area(a, b, c));
    auto rot90 = [](const Vec2& v) { return Vec2{-v.y, v.x}; };
    return (rot90(c - b) * f.values[t.v[0]] + rot90(a - c) * f.values[t.v[1]] +
            rot90(b - a) * f.values[t.v[2]]) *
           inv;
}

void require_order1(const Field& f, const char* what) {
    if (f.order != 1)
        throw ValidationError(std::string(what) + ": inversion fields are order-1");
}

} // namespace

double parameter_gradient(const Field& u, const Field& p, const Coefficients& c,
                          double rho, const Mesh& mesh) {
    require_order1(u, "parameter_gradient");
    require_order1(p, "parameter_gradient");
    // -int_omega u p with the degree-2 rule (exact for the P1 product), the
    // same integral the adjoint identity produces.
    static const double lam[3][3] = {
        {2. / 3, 1. / 6, 1. / 6}, {1. / 6, 2. / 3, 1. / 6}, {1. / 6, 1. / 6, 2. / 3}};
    double misfit_term = 0.0;
    double area_in = 0.0;
    for (const auto& t : mesh.triangles) {
        if (t.region != Region::Inside) continue;
        const double area = triangle_signed_area(mesh.nodes[t.v[0]],
                                                 mesh.nodes[t.v[1]],
                                                 mesh.nodes[t.v[2]]);
        area_in += area;
        for (int q = 0; q < 3; ++q) {
            double uq = 0.0, pq = 0.0;
            for (int i = 0; i < 3; ++i) {
                uq += lam[q][i] * u.values[t.v[i]];
                pq += lam[q][i] * p.values[t.v[i]];
            }
            misfit_term -= area / 3.0 * uq * pq;
        }
    }
    return misfit_term + rho * c.mu_in * area_in;
}

InterfaceKernel shape_gradient_kernel(const Field& u, const Field& p,
                                      const Coefficients& c, const SourceSpec& s,
                                      const Mesh& mesh, FTermVariant variant) {
    require_order1(u, "shape_gradient_kernel");
    require_order1(p, "shape_gradient_kernel");
    const auto nrm = interface_normals(mesh);
    const auto adj = interface_edge_triangles(mesh);

    InterfaceKernel out;
    out.nodes = nrm.nodes;
    out.value.assign(nrm.nodes.size(), 0.0);

    // Jumps are inside minus outside: the sign the finite-difference oracle
    // confirms for the mu term (an outward step converts an annulus of mu_out
    // into mu_in, so the sensitivity load carries mu_in - mu_out).
    const double dalpha = c.alpha_in - c.alpha_out;
    const double dmu = c.mu_in - c.mu_out;

    for (const auto& e : mesh.interface_edges) {
        const auto pair = adj.at(edge_key(e.a, e.b));
        const Triangle& tri_in = mesh.triangles[pair[0]];
        const Triangle& tri_out = mesh.triangles[pair[1]];

        const Vec2 pa = mesh.nodes[e.a];
        const Vec2 pb = mesh.nodes[e.b];
        const Vec2 tau = (pb - pa).normalized();
        const Vec2 n = tau.right_normal(); // omega on the left, n points outside
        const double len = (pb - pa).norm();

        const Vec2 gu_in = p1_gradient(mesh, tri_in, u);
        const Vec2 gu_out = p1_gradient(mesh, tri_out, u);
        const Vec2 gp_in = p1_gradient(mesh, tri_in, p);
        const Vec2 gp_out = p1_gradient(mesh, tri_out, p);

        // Tangential traces agree up to discretization; use the average.
        const double gtu = 0.5 * (gu_in.dot(tau) + gu_out.dot(tau));
        const double gtp = 0.5 * (gp_in.dot(tau) + gp_out.dot(tau));

        const double u_mid = 0.5 * (u.values[e.a] + u.values[e.b]);
        const double p_mid = 0.5 * (p.values[e.a] + p.values[e.b]);

        double g = -dalpha * gtu * gtp - dmu * u_mid * p_mid;
        if (variant == FTermVariant::PlainF) {
            g += c.alpha_in * gu_in.dot(n) * gp_in.dot(n) -
                 c.alpha_out * gu_out.dot(n) * gp_out.dot(n);
            if (s.kind != SourceSpec::Kind::Point)
                g += s.evaluate((pa + pb) * 0.5) * p_mid;
            // A point source vanishes on the interface, so f p contributes 0.
        }
        // JumpF: sources are single-valued across the interface, [[f]] p = 0.

        const double half = 0.5 * len * g;
        out.value[nrm.slot_of(e.a)] += half;
        out.value[nrm.slot_of(e.b)] += half;
    }
    for (std::size_t k = 0; k < out.value.size(); ++k)
        out.value[k] /= nrm.lumped_len[k];
    return out;
}

InterfaceKernel normal_flux_jump_term(const Field& u, const Field& p,
                                      const Coefficients& c, const Mesh& mesh) {
    const auto nrm = interface_normals(mesh);
    const auto adj = interface_edge_triangles(mesh);
    InterfaceKernel out;
    out.nodes = nrm.nodes;
    out.value.assign(nrm.nodes.size(), 0.0);
    for (const auto& e : mesh.interface_edges) {
        const auto pair = adj.at(edge_key(e.a, e.b));
        const Vec2 pa = mesh.nodes[e.a];
        const Vec2 pb = mesh.nodes[e.b];
        const Vec2 n = (pb - pa).normalized().right_normal();
        const double len = (pb - pa).norm();
        const Vec2 gu_in = p1_gradient(mesh, mesh.triangles[pair[0]], u);
        const Vec2 gu_out = p1_gradient(mesh, mesh.triangles[pair[1]], u);
        const Vec2 gp_in = p1_gradient(mesh, mesh.triangles[pair[0]], p);
        const Vec2 gp_out = p1_gradient(mesh, mesh.triangles[pair[1]], p);
        const double g = c.alpha_in * gu_in.dot(n) * gp_in.dot(n) -
                         c.alpha_out * gu_out.dot(n) * gp_out.dot(n);
        out.value[nrm.slot_of(e.a)] += 0.5 * len * g;
        out.value[nrm.slot_of(e.b)] += 0.5 * len * g;
    }
    for (std::size_t k = 0; k < out.value.size(); ++k)
        out.value[k] /= nrm.lumped_len[k];
    return out;
}

double directional_shape_derivative(const InterfaceKernel& kernel,
                                    const DeformationField& V, const Mesh& mesh) {
    if (V.v.size() != mesh.nodes.size())
        throw ValidationError("directional_shape_derivative: field size mismatch");
    const auto nrm = interface_normals(mesh);
    double acc = 0.0;
    for (std::size_t k = 0; k < nrm.nodes.size(); ++k) {
        const double vn = V.v[nrm.nodes[k]].dot(nrm.normal[k]);
        acc += nrm.lumped_len[k] * kernel.value[k] * vn;
    }
    return acc;
}

InterfaceKernel perimeter_kernel(const Mesh& mesh) {
    const auto nrm = interface_normals(mesh);
    const auto loops = interface_loops(mesh);
    InterfaceKernel out;
    out.nodes = nrm.nodes;
    out.value.assign(nrm.nodes.size(), 0.0);
    for (const auto& loop : loops) {
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& prev = mesh.nodes[loop[(i + n - 1) % n]];
            const Vec2& cur = mesh.nodes[loop[i]];
            const Vec2& nxt = mesh.nodes[loop[(i + 1) % n]];
            const Vec2 d_in = (cur - prev).normalized();
            const Vec2 d_out = (nxt - cur).normalized();
            const double turn = std::atan2(d_in.cross(d_out), d_in.dot(d_out));
            const int slot = nrm.slot_of(loop[i]);
            out.value[slot] = turn / nrm.lumped_len[slot];
        }
    }
    return out;
}

InterfaceKernel combined_kernel(const InterfaceKernel& shape_kernel, double rho1,
                                const Mesh& mesh) {
    if (rho1 == 0.0) return shape_kernel;
    InterfaceKernel total = shape_kernel;
    const auto kappa = perimeter_kernel(mesh);
    for (std::size_t k = 0; k < total.value.size(); ++k)
        total.value[k] += rho1 * kappa.value[k];
    return total;
}

DeformationField sobolev_extension(const InterfaceKernel& shape_kernel, double rho1,
                                   MeshPtr mesh) {
    const Mesh& m = *mesh;
    const InterfaceKernel total = combined_kernel(shape_kernel, rho1, m);
    const auto nrm = interface_normals(m);

    // Reduced H1 system on the non-boundary nodes (Dirichlet rows removed).
    const int n = static_cast<int>(m.nodes.size());
    std::vector<int> free_id(n, -1);
    int n_free = 0;
    for (int i = 0; i < n; ++i)
        if (!m.is_boundary_node(i)) free_id[i] = n_free++;

    const Eigen::SparseMatrix<double> H1 = assemble_h1(m, 1);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(H1.nonZeros());
    for (int k = 0; k < H1.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(H1, k); it; ++it)
            if (free_id[it.row()] >= 0 && free_id[it.col()] >= 0)
                trip.emplace_back(free_id[it.row()], free_id[it.col()], it.value());
    Eigen::SparseMatrix<double> K(n_free, n_free);
    K.setFromTriplets(trip.begin(), trip.end());

    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    if (ldlt.info() != Eigen::Success)
        throw SolverError("sobolev_extension: factorization failed", 1.0);

    DeformationField out;
    out.v.assign(m.nodes.size(), Vec2{0.0, 0.0});
    double norm_sq = 0.0;
    for (int d = 0; d < 2; ++d) {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n_free);
        for (std::size_t k = 0; k < nrm.nodes.size(); ++k) {
            const int fi = free_id[nrm.nodes[k]];
            if (fi < 0) continue;
            const double nd = d == 0 ? nrm.normal[k].x : nrm.normal[k].y;
            rhs[fi] -= nrm.lumped_len[k] * total.value[k] * nd;
        }
        const Eigen::VectorXd x = ldlt.solve(rhs);
        const double res = (K * x - rhs).norm();
        if (!(res <= 1e-10 * std::max(1.0, rhs.norm())))
            throw SolverError("sobolev_extension: residual contract missed", res);
        norm_sq += x.dot(K * x);
        for (int i = 0; i < n; ++i)
            if (free_id[i] >= 0) {
                if (d == 0)
                    out.v[i].x = x[free_id[i]];
                else
                    out.v[i].y = x[free_id[i]];
            }
    }
    out.h1_norm_sq = norm_sq;
    return out;
}

} // namespace dotshape
