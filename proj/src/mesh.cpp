#include "dotshape/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "delaunay.hpp"
#include "dotshape/errors.hpp"

namespace dotshape {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Deterministic hash-based jitter in [-0.5, 0.5].
double jitter(std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = a * 0x9E3779B97F4A7C15ull ^ (b + 0x7F4A7C15u);
    h ^= h >> 33;
    h *= 0xFF51AFD7ED558CCDull;
    h ^= h >> 33;
    return static_cast<double>(h % 1000003u) / 1000003.0 - 0.5;
}

std::uint64_t seed_from(double h_target) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(h_target));
    std::memcpy(&bits, &h_target, sizeof(bits));
    return bits;
}

// Points on the curve at near-uniform arc-length spacing. Analytic kinds get
// a small deterministic parameter jitter (cocircular node sets break the
// incircle predicate's sign otherwise); polygon vertices are kept exact.
std::vector<Vec2> sample_interface(const ParametricCurve& curve, double h,
                                   std::uint64_t seed) {
    std::vector<Vec2> out;
    if (curve.kind == CurveKind::Polygon) {
        const auto& v = curve.vertices;
        const bool ccw = polyline_signed_area(Polyline{v}) > 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) {
            const Vec2& a = v[ccw ? k : v.size() - 1 - k];
            const Vec2& b = v[ccw ? (k + 1) % v.size() : (v.size() - k) % v.size()];
            const double len = (b - a).norm();
            const int n = std::max(1, static_cast<int>(std::round(len / h)));
            for (int i = 0; i < n; ++i) {
                double w = static_cast<double>(i) / n;
                if (i > 0) w += 0.08 * jitter(seed, k * 131 + i) / n;
                out.push_back(a + (b - a) * w);
            }
        }
        return out;
    }

    // Arc-length table from a dense sweep, then invert.
    const int dense = 8192;
    std::vector<double> cum(dense + 1, 0.0);
    Vec2 prev = curve.point_at(0.0);
    for (int i = 1; i <= dense; ++i) {
        const Vec2 p = curve.point_at(kTwoPi * i / dense);
        cum[i] = cum[i - 1] + (p - prev).norm();
        prev = p;
    }
    const double total = cum.back();
    const int n = std::max(8, static_cast<int>(std::round(total / h)));
    out.reserve(n);
    for (int k = 0; k < n; ++k) {
        double s = total * (k + 0.08 * jitter(seed, 7777 + k)) / n;
        if (s < 0.0) s += total;
        const auto it = std::upper_bound(cum.begin(), cum.end(), s);
        const int i = std::min<int>(static_cast<int>(it - cum.begin()) - 1, dense - 1);
        const double seg = cum[i + 1] - cum[i];
        const double w = seg > 0.0 ? (s - cum[i]) / seg : 0.0;
        out.push_back(curve.point_at(kTwoPi * (i + w) / dense));
    }
    return out;
}

double dist_to_closed_polyline(const std::vector<Vec2>& poly, const Vec2& q) {
    double best = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < poly.size(); ++i)
        best = std::min(best,
                        point_segment_distance(q, poly[i], poly[(i + 1) % poly.size()]));
    return best;
}

} // namespace

double triangle_signed_area(const Vec2& a, const Vec2& b, const Vec2& c) {
    return 0.5 * (b - a).cross(c - a);
}

void Mesh::refresh_node_flags() {
    boundary_flag_.assign(nodes.size(), 0);
    interface_flag_.assign(nodes.size(), 0);
    for (const auto& e : boundary_edges) {
        boundary_flag_[e.a] = 1;
        boundary_flag_[e.b] = 1;
    }
    for (const auto& e : interface_edges) {
        interface_flag_[e.a] = 1;
        interface_flag_[e.b] = 1;
    }
}

Mesh build_disk_mesh(double radius, double h_target, const ParametricCurve& interface) {
    if (!(radius > 0.0))
        throw GeometryError("build_disk_mesh: radius must be positive");
    if (!(h_target > 0.0 && h_target < radius))
        throw GeometryError("build_disk_mesh: h_target must lie in (0, radius)");
    interface.validate();

    const std::uint64_t seed = seed_from(h_target) ^ seed_from(radius);
    const auto iface = sample_interface(interface, h_target, seed);
    if (iface.size() < 3)
        throw GeometryError("build_disk_mesh: interface under-resolved");

    Polyline iface_poly{iface};
    if (!polyline_is_simple(iface_poly))
        throw GeometryError(
            "build_disk_mesh: interface polyline self-intersects at this resolution");
    for (const auto& p : iface)
        if (p.norm() > radius - 1.2 * h_target + 1e-12 * radius)
            throw GeometryError("build_disk_mesh: interface too close to the outer "
                                "boundary (needs 1.2*h clearance)");

    std::vector<Vec2> pts = iface;
    const int n_if = static_cast<int>(iface.size());

    // Outer boundary ring; the first node sits at polar angle ~0 so traces
    // from different meshes share a common arc-length origin.
    const int n_b = std::max(16, static_cast<int>(std::round(kTwoPi * radius / h_target)));
    for (int k = 0; k < n_b; ++k) {
        const double th = kTwoPi * (k + 0.08 * jitter(seed, 31337 + k)) / n_b;
        pts.push_back({radius * std::cos(th), radius * std::sin(th)});
    }

    // Hexagonal interior fill, kept clear of the fixed polylines.
    const double clearance = 0.55 * h_target;
    const double dy = h_target * std::sqrt(3.0) / 2.0;
    const int jmax = static_cast<int>(std::floor(radius / dy));
    for (int j = -jmax; j <= jmax; ++j) {
        const double y = j * dy;
        const double x0 = (j & 1) ? 0.5 * h_target : 0.0;
        const int imax = static_cast<int>(std::floor((radius + h_target) / h_target));
        for (int i = -imax; i <= imax; ++i) {
            Vec2 p{x0 + i * h_target, y};
            p.x += 0.12 * h_target * jitter(seed, (i + 40000) * 100003ull + j);
            p.y += 0.12 * h_target * jitter(seed ^ 0xABCDu, (i + 40000) * 100003ull + j);
            if (p.norm() > radius - clearance) continue;
            if (dist_to_closed_polyline(iface, p) < clearance) continue;
            pts.push_back(p);
        }
    }

    detail::Triangulator tri(pts);
    for (int k = 0; k < n_if; ++k) tri.recover_edge(k, (k + 1) % n_if);
    for (int k = 0; k < n_b; ++k) {
        // Ring nodes are in convex position, so hull edges are already there.
        if (!tri.edge_exists(n_if + k, n_if + (k + 1) % n_b))
            throw GeometryError("build_disk_mesh: outer boundary edge missing");
    }

    Mesh mesh;
    mesh.nodes = std::move(pts);
    mesh.domain_radius = radius;
    const bool iface_ccw = polyline_signed_area(iface_poly) > 0.0;
    for (const auto& t : tri.triangles()) {
        Triangle out;
        out.v = t;
        if (triangle_signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]) <
            0.0)
            std::swap(out.v[1], out.v[2]);
        const Vec2 c =
            (mesh.nodes[out.v[0]] + mesh.nodes[out.v[1]] + mesh.nodes[out.v[2]]) *
            (1.0 / 3.0);
        out.region = point_in_polyline(iface_poly, c) ? Region::Inside : Region::Outside;
        mesh.triangles.push_back(out);
    }

    for (int k = 0; k < n_b; ++k)
        mesh.boundary_edges.push_back({n_if + k, n_if + (k + 1) % n_b});
    for (int k = 0; k < n_if; ++k) {
        if (iface_ccw)
            mesh.interface_edges.push_back({k, (k + 1) % n_if});
        else
            mesh.interface_edges.push_back({(k + 1) % n_if, k});
    }
    mesh.refresh_node_flags();

    relax_interior_nodes(mesh, 8);

    check_mesh(mesh);
    return mesh;
}

void relax_interior_nodes(Mesh& mesh, int passes) {
    std::vector<std::vector<int>> node_tris(mesh.nodes.size());
    std::vector<std::vector<int>> node_nbrs(mesh.nodes.size());
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& tv = mesh.triangles[ti].v;
        for (int k = 0; k < 3; ++k) {
            node_tris[tv[k]].push_back(static_cast<int>(ti));
            node_nbrs[tv[k]].push_back(tv[(k + 1) % 3]);
            node_nbrs[tv[k]].push_back(tv[(k + 2) % 3]);
        }
    }
    auto min_incident_area = [&](int node) {
        double m = std::numeric_limits<double>::max();
        for (const int ti : node_tris[node]) {
            const auto& tv = mesh.triangles[ti].v;
            m = std::min(m, triangle_signed_area(mesh.nodes[tv[0]], mesh.nodes[tv[1]],
                                                 mesh.nodes[tv[2]]));
        }
        return m;
    };
    for (int pass = 0; pass < passes; ++pass) {
        for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
            if (mesh.is_boundary_node(static_cast<int>(i)) ||
                mesh.is_interface_node(static_cast<int>(i)))
                continue;
            Vec2 avg{0.0, 0.0};
            for (const int nb : node_nbrs[i]) avg += mesh.nodes[nb];
            avg = avg * (1.0 / static_cast<double>(node_nbrs[i].size()));
            const Vec2 old = mesh.nodes[i];
            const double before = min_incident_area(static_cast<int>(i));
            mesh.nodes[i] = avg;
            const double after = min_incident_area(static_cast<int>(i));
            // Monotone in the local minimum area: relaxation must never
            // degrade the quality the line search just certified.
            if (after < before) mesh.nodes[i] = old;
        }
    }
}

Mesh deform_unchecked(const Mesh& mesh, const DeformationField& V, double t) {
    if (V.v.size() != mesh.nodes.size())
        throw GeometryError("deform: field size does not match node count");
    Mesh out = mesh;
    for (std::size_t i = 0; i < out.nodes.size(); ++i) {
        if (mesh.is_boundary_node(static_cast<int>(i))) {
            if (V.v[i].x != 0.0 || V.v[i].y != 0.0)
                throw GeometryError("deform: field must vanish on the outer boundary");
            continue;
        }
        out.nodes[i] += V.v[i] * t;
    }
    return out;
}

Mesh deform(const Mesh& mesh, const DeformationField& V, double t) {
    Mesh out = deform_unchecked(mesh, V, t);
    if (min_signed_area(out) <= 0.0)
        throw GeometryError("deform: step inverted a triangle; shrink t");
    return out;
}

double min_signed_area(const Mesh& mesh) {
    double m = std::numeric_limits<double>::max();
    for (const auto& t : mesh.triangles)
        m = std::min(m, triangle_signed_area(mesh.nodes[t.v[0]], mesh.nodes[t.v[1]],
                                             mesh.nodes[t.v[2]]));
    return m;
}

std::vector<std::vector<int>> interface_loops(const Mesh& mesh) {
    std::unordered_map<int, int> next;
    next.reserve(mesh.interface_edges.size() * 2);
    for (const auto& e : mesh.interface_edges) {
        if (!next.emplace(e.a, e.b).second)
            throw TopologyError("interface edges do not form simple loops");
    }
    std::vector<std::vector<int>> loops;
    std::unordered_set<int> seen;
    std::vector<int> starts;
    for (const auto& e : mesh.interface_edges) starts.push_back(e.a);
    std::sort(starts.begin(), starts.end());
    for (const int s : starts) {
        if (seen.count(s)) continue;
        std::vector<int> loop;
        int cur = s;
        do {
            loop.push_back(cur);
            seen.insert(cur);
            const auto it = next.find(cur);
            if (it == next.end())
                throw TopologyError("interface polyline is not closed");
            cur = it->second;
        } while (cur != s && loop.size() <= mesh.interface_edges.size());
        if (cur != s) throw TopologyError("interface polyline is not closed");
        loops.push_back(std::move(loop));
    }
    return loops;
}

Polyline interface_polyline(const Mesh& mesh) {
    const auto loops = interface_loops(mesh);
    if (loops.empty()) throw TopologyError("mesh has no interface");
    Polyline p;
    p.pts.reserve(loops[0].size());
    for (const int n : loops[0]) p.pts.push_back(mesh.nodes[n]);
    return p;
}

InterfaceNormals interface_normals(const Mesh& mesh) {
    InterfaceNormals out;
    const auto loops = interface_loops(mesh);
    for (const auto& loop : loops) {
        out.loop_start.push_back(static_cast<int>(out.nodes.size()));
        const std::size_t n = loop.size();
        for (std::size_t i = 0; i < n; ++i) {
            const Vec2& prev = mesh.nodes[loop[(i + n - 1) % n]];
            const Vec2& cur = mesh.nodes[loop[i]];
            const Vec2& nxt = mesh.nodes[loop[(i + 1) % n]];
            const Vec2 d_in = cur - prev;
            const Vec2 d_out = nxt - cur;
            // Loops run counterclockwise around omega, so the right-hand
            // normal points from omega into the exterior region.
            const Vec2 nrm =
                (d_in.normalized().right_normal() + d_out.normalized().right_normal())
                    .normalized();
            out.slot_[loop[i]] = static_cast<int>(out.nodes.size());
            out.nodes.push_back(loop[i]);
            out.normal.push_back(nrm);
            out.lumped_len.push_back(0.5 * (d_in.norm() + d_out.norm()));
        }
    }
    return out;
}

std::array<double, 2> region_areas(const Mesh& mesh) {
    std::array<double, 2> areas{0.0, 0.0};
    for (const auto& t : mesh.triangles)
        areas[static_cast<int>(t.region)] += triangle_signed_area(
            mesh.nodes[t.v[0]], mesh.nodes[t.v[1]], mesh.nodes[t.v[2]]);
    return areas;
}

std::unordered_map<std::uint64_t, std::array<int, 2>>
interface_edge_triangles(const Mesh& mesh) {
    std::unordered_set<std::uint64_t> iface_keys;
    for (const auto& e : mesh.interface_edges) iface_keys.insert(edge_key(e.a, e.b));
    std::unordered_map<std::uint64_t, std::array<int, 2>> out;
    for (const auto& k : iface_keys) out[k] = {-1, -1};
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        for (int k = 0; k < 3; ++k) {
            const std::uint64_t key = edge_key(t.v[k], t.v[(k + 1) % 3]);
            auto it = out.find(key);
            if (it == out.end()) continue;
            const int slot = t.region == Region::Inside ? 0 : 1;
            if (it->second[slot] != -1)
                throw TopologyError("interface edge shared by two same-region triangles");
            it->second[slot] = static_cast<int>(ti);
        }
    }
    for (const auto& [key, pair] : out)
        if (pair[0] < 0 || pair[1] < 0)
            throw TopologyError("interface edge lacks a one-sided triangle");
    return out;
}

int locate_triangle(const Mesh& mesh, const Vec2& p) {
    for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
        const auto& t = mesh.triangles[ti];
        const Vec2& a = mesh.nodes[t.v[0]];
        const Vec2& b = mesh.nodes[t.v[1]];
        const Vec2& c = mesh.nodes[t.v[2]];
        const double area = triangle_signed_area(a, b, c);
        if (area <= 0.0) continue;
        const double l0 = triangle_signed_area(p, b, c) / area;
        const double l1 = triangle_signed_area(a, p, c) / area;
        const double l2 = triangle_signed_area(a, b, p) / area;
        if (l0 >= -1e-12 && l1 >= -1e-12 && l2 >= -1e-12)
            return static_cast<int>(ti);
    }
    return -1;
}

void check_mesh(const Mesh& mesh) {
    if (mesh.nodes.empty() || mesh.triangles.empty())
        throw TopologyError("check_mesh: empty mesh");
    if (min_signed_area(mesh) <= 0.0)
        throw GeometryError("check_mesh: non-positive triangle area");

    // Boundary: one adjacent triangle per edge, closed loop on the hull.
    std::unordered_map<std::uint64_t, int> edge_count;
    for (const auto& t : mesh.triangles)
        for (int k = 0; k < 3; ++k) ++edge_count[edge_key(t.v[k], t.v[(k + 1) % 3])];
    for (const auto& e : mesh.boundary_edges) {
        const auto it = edge_count.find(edge_key(e.a, e.b));
        if (it == edge_count.end() || it->second != 1)
            throw TopologyError("check_mesh: boundary edge not on the hull");
    }
    // Interface loops closed and strictly inside, with one triangle per side.
    const auto loops = interface_loops(mesh);
    for (const auto& loop : loops)
        for (const int n : loop)
            if (mesh.nodes[n].norm() >= mesh.domain_radius - 1e-12)
                throw TopologyError("check_mesh: interface touches the outer boundary");
    interface_edge_triangles(mesh);
}

} // namespace dotshape
