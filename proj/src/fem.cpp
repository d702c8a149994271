#include "dotshape/fem.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <numbers>
#include <unordered_map>

#include <Eigen/IterativeLinearSolvers>

#include "dotshape/errors.hpp"

namespace dotshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct TriQuadPoint {
    double l0, l1, l2, w;
};

// Degree-2 symmetric rule.
constexpr TriQuadPoint kTri3[] = {
    {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0, 1.0 / 3.0},
    {1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0},
};

// Degree-4 symmetric rule (Dunavant).
constexpr double kA1 = 0.816847572980459, kB1 = 0.091576213509771,
                 kW1 = 0.109951743655322;
constexpr double kA2 = 0.108103018168070, kB2 = 0.445948490915965,
                 kW2 = 0.223381589678011;
constexpr TriQuadPoint kTri6[] = {
    {kA1, kB1, kB1, kW1}, {kB1, kA1, kB1, kW1}, {kB1, kB1, kA1, kW1},
    {kA2, kB2, kB2, kW2}, {kB2, kA2, kB2, kW2}, {kB2, kB2, kA2, kW2},
};

struct EdgeQuadPoint {
    double t, w;
};

constexpr double kG2 = 0.288675134594813; // 1/(2 sqrt 3)
constexpr EdgeQuadPoint kEdge2[] = {{0.5 - kG2, 0.5}, {0.5 + kG2, 0.5}};
constexpr double kG3 = 0.387298334620742; // sqrt(3/5)/2
constexpr EdgeQuadPoint kEdge3[] = {
    {0.5 - kG3, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + kG3, 5.0 / 18.0}};

std::span<const TriQuadPoint> tri_rule(int order) {
    return order == 1 ? std::span<const TriQuadPoint>(kTri3)
                      : std::span<const TriQuadPoint>(kTri6);
}

std::span<const EdgeQuadPoint> edge_rule(int order) {
    return order == 1 ? std::span<const EdgeQuadPoint>(kEdge2)
                      : std::span<const EdgeQuadPoint>(kEdge3);
}

int basis_count(int order) { return order == 1 ? 3 : 6; }

// Lagrange basis values at a barycentric point. Local DOFs: vertices 0..2,
// then (for order 2) midpoints of edges (0,1), (1,2), (2,0).
void basis_values(int order, double l0, double l1, double l2, double* out) {
    if (order == 1) {
        out[0] = l0;
        out[1] = l1;
        out[2] = l2;
        return;
    }
    out[0] = l0 * (2.0 * l0 - 1.0);
    out[1] = l1 * (2.0 * l1 - 1.0);
    out[2] = l2 * (2.0 * l2 - 1.0);
    out[3] = 4.0 * l0 * l1;
    out[4] = 4.0 * l1 * l2;
    out[5] = 4.0 * l2 * l0;
}

void basis_grads(int order, double l0, double l1, double l2, const Vec2 g[3],
                 Vec2* out) {
    if (order == 1) {
        out[0] = g[0];
        out[1] = g[1];
        out[2] = g[2];
        return;
    }
    out[0] = g[0] * (4.0 * l0 - 1.0);
    out[1] = g[1] * (4.0 * l1 - 1.0);
    out[2] = g[2] * (4.0 * l2 - 1.0);
    out[3] = (g[0] * l1 + g[1] * l0) * 4.0;
    out[4] = (g[1] * l2 + g[2] * l1) * 4.0;
    out[5] = (g[2] * l0 + g[0] * l2) * 4.0;
}

// Edge-restricted basis values at parameter t in [0,1] (a -> b). Local DOFs:
// endpoint a, endpoint b, then (order 2) the midpoint.
void edge_basis_values(int order, double t, double* out) {
    if (order == 1) {
        out[0] = 1.0 - t;
        out[1] = t;
        return;
    }
    out[0] = (1.0 - t) * (1.0 - 2.0 * t);
    out[1] = t * (2.0 * t - 1.0);
    out[2] = 4.0 * t * (1.0 - t);
}

struct EdgeIndex {
    std::unordered_map<std::uint64_t, int> id;
    int count = 0;
};

EdgeIndex build_edge_index(const Mesh& mesh) {
    EdgeIndex idx;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) {
            const auto key = edge_key(t.v[k], t.v[(k + 1) % 3]);
            if (idx.id.emplace(key, idx.count).second) ++idx.count;
        }
    return idx;
}

// Per-triangle P1 gradients of the barycentric coordinates.
void barycentric_grads(const Vec2& a, const Vec2& b, const Vec2& c, Vec2 g[3],
                       double& area) {
    area = triangle_signed_area(a, b, c);
    const double inv = 1.0 / (2.0 * area);
    auto rot90 = [](const Vec2& v) { return Vec2{-v.y, v.x}; };
    g[0] = rot90(c - b) * inv;
    g[1] = rot90(a - c) * inv;
    g[2] = rot90(b - a) * inv;
}

void element_dofs(const Mesh& mesh, const EdgeIndex* edges, int order, int ti,
                  int* dofs) {
    const auto& t = mesh.triangles[ti];
    dofs[0] = t.v[0];
    dofs[1] = t.v[1];
    dofs[2] = t.v[2];
    if (order == 2) {
        const int n = static_cast<int>(mesh.nodes.size());
        for (int k = 0; k < 3; ++k)
            dofs[3 + k] = n + edges->id.at(edge_key(t.v[k], t.v[(k + 1) % 3]));
    }
}

using Triplet = Eigen::Triplet<double>;

void add_domain_terms(const Mesh& mesh, int order,
                      const std::function<double(Region)>& alpha,
                      const std::function<double(Region)>& mu,
                      std::vector<Triplet>& trip) {
    const auto rule = tri_rule(order);
    const int nb = basis_count(order);
    const EdgeIndex edges = order == 2 ? build_edge_index(mesh) : EdgeIndex{};
    int dofs[6];
    double vals[6];
    Vec2 grads[6];
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        const Vec2& a = mesh.nodes[t.v[0]];
        const Vec2& b = mesh.nodes[t.v[1]];
        const Vec2& c = mesh.nodes[t.v[2]];
        Vec2 g[3];
        double area;
        barycentric_grads(a, b, c, g, area);
        element_dofs(mesh, &edges, order, static_cast<int>(ti), dofs);
        const double al = alpha(t.region);
        const double mu_v = mu(t.region);
        double ke[6][6] = {};
        for (const auto& q : rule) {
            basis_values(order, q.l0, q.l1, q.l2, vals);
            basis_grads(order, q.l0, q.l1, q.l2, g, grads);
            const double w = q.w * area;
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j)
                    ke[i][j] += w * (al * grads[i].dot(grads[j]) +
                                     mu_v * vals[i] * vals[j]);
        }
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j)
                trip.emplace_back(dofs[i], dofs[j], ke[i][j]);
    }
}

void add_robin_terms(const Mesh& mesh, int order, double inv_zeta,
                     std::vector<Triplet>& trip) {
    if (inv_zeta == 0.0) return;
    const auto rule = edge_rule(order);
    const int nb = order == 1 ? 2 : 3;
    const EdgeIndex edges = order == 2 ? build_edge_index(mesh) : EdgeIndex{};
    double vals[3];
    for (const auto& e : mesh.boundary_edges) {
        const double len = (mesh.nodes[e.b] - mesh.nodes[e.a]).norm();
        int dofs[3] = {e.a, e.b, -1};
        if (order == 2)
            dofs[2] = static_cast<int>(mesh.nodes.size()) +
                      edges.id.at(edge_key(e.a, e.b));
        double ke[3][3] = {};
        for (const auto& q : rule) {
            edge_basis_values(order, q.t, vals);
            const double w = q.w * len * inv_zeta;
            for (int i = 0; i < nb; ++i)
                for (int j = 0; j < nb; ++j) ke[i][j] += w * vals[i] * vals[j];
        }
        for (int i = 0; i < nb; ++i)
            for (int j = 0; j < nb; ++j) trip.emplace_back(dofs[i], dofs[j], ke[i][j]);
    }
}

} // namespace

void Coefficients::validate() const {
    if (!(alpha_out > 0.0 && alpha_in > 0.0 && mu_out > 0.0 && mu_in > 0.0 &&
          zeta > 0.0))
        throw ValidationError("coefficients must be strictly positive");
    if (!(mu_min <= mu_in && mu_in <= mu_max && mu_min <= mu_out && mu_out <= mu_max))
        throw ValidationError("mu values must lie in [mu_min, mu_max]");
}

double SourceSpec::evaluate(const Vec2& x) const {
    switch (kind) {
    case Kind::Constant:
        return value;
    case Kind::Point:
        throw ValidationError("point sources have no pointwise value");
    case Kind::GaussianSum: {
        double s = 0.0;
        for (const double th : angles) {
            const Vec2 xi{ring_radius * std::cos(th), ring_radius * std::sin(th)};
            s += std::exp(1.0 - (x - xi).norm_sq() / (eps * eps));
        }
        return amplitude * s;
    }
    }
    return 0.0;
}

void SourceSpec::validate(double domain_radius) const {
    switch (kind) {
    case Kind::Constant:
        break;
    case Kind::Point:
        if (point.norm() >= domain_radius)
            throw ValidationError("point source must lie inside the domain");
        break;
    case Kind::GaussianSum:
        if (!(eps > 0.0)) throw ValidationError("gaussian source needs eps > 0");
        if (!(ring_radius > 0.0 && ring_radius < domain_radius))
            throw ValidationError("gaussian source ring must satisfy 0 < R_f < R");
        if (angles.empty())
            throw ValidationError("gaussian source needs at least one angle");
        break;
    }
}

SourceSpec SourceSpec::constant(double c) {
    SourceSpec s;
    s.kind = Kind::Constant;
    s.value = c;
    return s;
}

SourceSpec SourceSpec::point_source(Vec2 x0, double strength) {
    SourceSpec s;
    s.kind = Kind::Point;
    s.point = x0;
    s.strength = strength;
    return s;
}

SourceSpec SourceSpec::gaussian_ring(std::vector<double> angles, double eps,
                                     double ring_radius, double amplitude) {
    SourceSpec s;
    s.kind = Kind::GaussianSum;
    s.angles = std::move(angles);
    s.eps = eps;
    s.ring_radius = ring_radius;
    s.amplitude = amplitude;
    return s;
}

int dof_count(const Mesh& mesh, int order) {
    if (order == 1) return static_cast<int>(mesh.nodes.size());
    return static_cast<int>(mesh.nodes.size()) + build_edge_index(mesh).count;
}

SparseSystem assemble(MeshPtr mesh, const Coefficients& c, int order) {
    if (order != 1 && order != 2)
        throw ValidationError("assemble: order must be 1 or 2");
    c.validate();
    const int n = dof_count(*mesh, order);
    std::vector<Triplet> trip;
    trip.reserve(mesh->triangles.size() * (order == 1 ? 9 : 36));
    add_domain_terms(
        *mesh, order, [&](Region r) { return c.alpha(r); },
        [&](Region r) { return c.mu(r); }, trip);
    add_robin_terms(*mesh, order, 1.0 / c.zeta, trip);

    SparseSystem sys;
    sys.A.resize(n, n);
    sys.A.setFromTriplets(trip.begin(), trip.end());
    sys.order = order;
    sys.coeffs = c;
    sys.mesh = std::move(mesh);
    return sys;
}

Eigen::SparseMatrix<double> assemble_h1(const Mesh& mesh, int order) {
    const int n = dof_count(mesh, order);
    std::vector<Triplet> trip;
    add_domain_terms(
        mesh, order, [](Region) { return 1.0; }, [](Region) { return 1.0; }, trip);
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    return A;
}

std::vector<double> assemble_load(const Mesh& mesh, const SourceSpec& s, int order) {
    const int n = dof_count(mesh, order);
    std::vector<double> load(n, 0.0);
    const int nb = basis_count(order);
    const EdgeIndex edges = order == 2 ? build_edge_index(mesh) : EdgeIndex{};
    int dofs[6];
    double vals[6];

    if (s.kind == SourceSpec::Kind::Point) {
        const int ti = locate_triangle(mesh, s.point);
        if (ti < 0)
            throw ValidationError("point source lies outside the mesh");
        const auto& t = mesh.triangles[ti];
        const Vec2& a = mesh.nodes[t.v[0]];
        const Vec2& b = mesh.nodes[t.v[1]];
        const Vec2& c = mesh.nodes[t.v[2]];
        const double area = triangle_signed_area(a, b, c);
        const double l0 = triangle_signed_area(s.point, b, c) / area;
        const double l1 = triangle_signed_area(a, s.point, c) / area;
        const double l2 = 1.0 - l0 - l1;
        element_dofs(mesh, &edges, order, ti, dofs);
        basis_values(order, l0, l1, l2, vals);
        for (int i = 0; i < nb; ++i) load[dofs[i]] += s.strength * vals[i];
        return load;
    }

    // Smooth sources: the gaussian sum uses the degree-4 rule at either order.
    const auto rule =
        s.kind == SourceSpec::Kind::GaussianSum ? std::span<const TriQuadPoint>(kTri6)
                                                : tri_rule(order);
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        const Vec2& a = mesh.nodes[t.v[0]];
        const Vec2& b = mesh.nodes[t.v[1]];
        const Vec2& c = mesh.nodes[t.v[2]];
        const double area = triangle_signed_area(a, b, c);
        element_dofs(mesh, &edges, order, static_cast<int>(ti), dofs);
        for (const auto& q : rule) {
            const Vec2 x = a * q.l0 + b * q.l1 + c * q.l2;
            const double f = s.evaluate(x);
            basis_values(order, q.l0, q.l1, q.l2, vals);
            for (int i = 0; i < nb; ++i) load[dofs[i]] += q.w * area * f * vals[i];
        }
    }
    return load;
}

struct SparseSystem::Factor {
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
    bool ok = false;
};

Field solve(const SparseSystem& sys, const std::vector<double>& rhs) {
    if (static_cast<int>(rhs.size()) != sys.A.rows())
        throw ValidationError("solve: rhs length does not match system size");
    const Eigen::Map<const Eigen::VectorXd> b(rhs.data(), rhs.size());

    if (!sys.factor) {
        auto f = std::make_shared<SparseSystem::Factor>();
        f->ldlt.compute(sys.A);
        f->ok = f->ldlt.info() == Eigen::Success;
        sys.factor = std::move(f);
    }

    Eigen::VectorXd x;
    const double bnorm = b.norm();
    double residual = 0.0;
    if (sys.factor->ok) {
        x = sys.factor->ldlt.solve(b);
        residual = bnorm > 0.0 ? (sys.A * x - b).norm() / bnorm : 0.0;
    }
    if (!sys.factor->ok || residual > 1e-10) {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper>
            cg;
        cg.setMaxIterations(20000);
        cg.setTolerance(1e-13);
        cg.compute(sys.A);
        x = sys.factor->ok ? cg.solveWithGuess(b, x).eval() : cg.solve(b).eval();
        residual = bnorm > 0.0 ? (sys.A * x - b).norm() / bnorm : 0.0;
        if (residual > 1e-10)
            throw SolverError("linear solve missed the 1e-10 residual contract",
                              residual);
    }

    Field out;
    out.mesh = sys.mesh;
    out.order = sys.order;
    out.values.assign(x.data(), x.data() + x.size());
    return out;
}

double Measurement::value_at(double s) const {
    if (arc.empty()) throw ValidationError("empty measurement");
    if (closed && total_arc > 0.0) {
        s = std::fmod(s, total_arc);
        if (s < 0.0) s += total_arc;
    }
    const auto it = std::upper_bound(arc.begin(), arc.end(), s);
    if (it == arc.begin()) {
        if (!closed) return value.front();
        // Wrap: between the last sample and the first (through s = 0).
        const double s0 = arc.back() - total_arc;
        const double seg = arc.front() - s0;
        const double w = seg > 0.0 ? (s - s0) / seg : 0.0;
        return value.back() + (value.front() - value.back()) * w;
    }
    if (it == arc.end()) {
        if (!closed) return value.back();
        const double seg = total_arc + arc.front() - arc.back();
        const double w = seg > 0.0 ? (s - arc.back()) / seg : 0.0;
        return value.back() + (value.front() - value.back()) * w;
    }
    const std::size_t i = it - arc.begin();
    const double seg = arc[i] - arc[i - 1];
    const double w = seg > 0.0 ? (s - arc[i - 1]) / seg : 0.0;
    return value[i - 1] + (value[i] - value[i - 1]) * w;
}

double Measurement::max_abs() const {
    double m = 0.0;
    for (const double v : value) m = std::max(m, std::abs(v));
    return m;
}

BoundaryParam build_boundary_param(const Mesh& mesh, int order) {
    // Chain the boundary edges into the closed hull loop.
    std::unordered_map<int, int> next;
    for (const auto& e : mesh.boundary_edges) next[e.a] = e.b;
    if (next.empty()) throw TopologyError("mesh has no boundary edges");

    // Start at the node with polar angle closest to zero so that traces from
    // different meshes of the same disk share their arc-length origin.
    int start = mesh.boundary_edges[0].a;
    double best = std::numeric_limits<double>::max();
    for (const auto& e : mesh.boundary_edges) {
        double th = std::atan2(mesh.nodes[e.a].y, mesh.nodes[e.a].x);
        if (th < 0.0) th += kTwoPi;
        if (th < best) {
            best = th;
            start = e.a;
        }
    }

    const EdgeIndex edges = order == 2 ? build_edge_index(mesh) : EdgeIndex{};
    BoundaryParam bp;
    int cur = start;
    double s = 0.0;
    do {
        const auto it = next.find(cur);
        if (it == next.end()) throw TopologyError("boundary loop is not closed");
        const int nxt = it->second;
        const Vec2& a = mesh.nodes[cur];
        const Vec2& b = mesh.nodes[nxt];
        const double len = (b - a).norm();
        bp.dofs.push_back(cur);
        bp.s.push_back(s);
        bp.angle.push_back(std::atan2(a.y, a.x));
        if (order == 2) {
            bp.dofs.push_back(static_cast<int>(mesh.nodes.size()) +
                              edges.id.at(edge_key(cur, nxt)));
            bp.s.push_back(s + 0.5 * len);
            const Vec2 m = (a + b) * 0.5;
            bp.angle.push_back(std::atan2(m.y, m.x));
        }
        s += len;
        cur = nxt;
    } while (cur != start && bp.dofs.size() <= 2 * next.size() + 2);
    if (cur != start) throw TopologyError("boundary loop is not closed");
    bp.total = s;
    return bp;
}

Measurement boundary_trace(const Field& f, std::optional<BoundaryMask> mask) {
    const BoundaryParam bp = build_boundary_param(*f.mesh, f.order);
    Measurement m;
    m.total_arc = bp.total;
    m.closed = !mask.has_value();
    for (std::size_t i = 0; i < bp.dofs.size(); ++i) {
        if (mask) {
            double th = bp.angle[i] - mask->theta0;
            th = std::fmod(th, kTwoPi);
            if (th < 0.0) th += kTwoPi;
            double span = mask->theta1 - mask->theta0;
            span = std::fmod(span, kTwoPi);
            if (span <= 0.0) span += kTwoPi;
            if (th > span) continue;
        }
        m.arc.push_back(bp.s[i]);
        m.value.push_back(f.values[bp.dofs[i]]);
    }
    if (m.arc.empty()) throw ValidationError("boundary mask selects no samples");
    return m;
}

double field_value_at(const Field& f, const Vec2& x) {
    const Mesh& mesh = *f.mesh;
    const int ti = locate_triangle(mesh, x);
    if (ti < 0) throw ValidationError("field_value_at: point outside the mesh");
    const auto& t = mesh.triangles[ti];
    const Vec2& a = mesh.nodes[t.v[0]];
    const Vec2& b = mesh.nodes[t.v[1]];
    const Vec2& c = mesh.nodes[t.v[2]];
    const double area = triangle_signed_area(a, b, c);
    const double l0 = triangle_signed_area(x, b, c) / area;
    const double l1 = triangle_signed_area(a, x, c) / area;
    const double l2 = 1.0 - l0 - l1;
    const EdgeIndex edges = f.order == 2 ? build_edge_index(mesh) : EdgeIndex{};
    int dofs[6];
    double vals[6];
    element_dofs(mesh, &edges, f.order, ti, dofs);
    basis_values(f.order, l0, l1, l2, vals);
    double out = 0.0;
    for (int i = 0; i < basis_count(f.order); ++i) out += vals[i] * f.values[dofs[i]];
    return out;
}

double h1_norm_sq(const Field& f) {
    const auto A = assemble_h1(*f.mesh, f.order);
    const Eigen::Map<const Eigen::VectorXd> x(f.values.data(), f.values.size());
    return x.dot(A * x);
}

} // namespace dotshape
