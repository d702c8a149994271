#pragma once

#include <array>
#include <memory>
#include <unordered_map>
#include <vector>

#include "dotshape/geometry.hpp"

namespace dotshape {

/// Region tag of a triangle relative to the interface curve.
enum class Region : int {
    Outside = 0, ///< Omega \ closure(omega)
    Inside = 1,  ///< omega
};

struct Triangle {
    std::array<int, 3> v{};
    Region region = Region::Outside;
};

/// Directed edge (orientation matters for boundary/interface loops).
struct Edge {
    int a = -1;
    int b = -1;
};

/// Interface-fitted triangulation of the disk domain.
///
/// Conventions:
///   - triangles are counterclockwise (positive signed area)
///   - boundary_edges run counterclockwise around the outer boundary
///   - interface_edges run counterclockwise around omega (omega on the left)
struct Mesh {
    std::vector<Vec2> nodes;
    std::vector<Triangle> triangles;
    std::vector<Edge> boundary_edges;
    std::vector<Edge> interface_edges;
    int order = 1; ///< polynomial order of attached fields (1 or 2)

    double domain_radius = 0.0;

    bool is_boundary_node(int i) const { return boundary_flag_[i] != 0; }
    bool is_interface_node(int i) const { return interface_flag_[i] != 0; }

    /// Rebuilds the per-node boundary/interface flags from the edge lists.
    void refresh_node_flags();

    std::vector<char> boundary_flag_;
    std::vector<char> interface_flag_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// Nodal vector field over the whole mesh; the optimizer's descent direction.
/// Zero on every outer-boundary node by construction.
struct DeformationField {
    std::vector<Vec2> v;
    double h1_norm_sq = 0.0;
};

/// Per-interface-node unit normals (pointing from omega into the exterior
/// region) and lumped edge lengths, in interface-loop order.
struct InterfaceNormals {
    std::vector<int> nodes;          ///< node indices, concatenated loop order
    std::vector<Vec2> normal;        ///< unit normals
    std::vector<double> lumped_len;  ///< half the sum of adjacent edge lengths
    std::vector<int> loop_start;     ///< offsets into nodes for each closed loop

    int slot_of(int node) const {
        auto it = slot_.find(node);
        return it == slot_.end() ? -1 : it->second;
    }

    std::unordered_map<int, int> slot_;
};

double triangle_signed_area(const Vec2& a, const Vec2& b, const Vec2& c);

/// Builds an interface-fitted triangulation of the disk of the given radius.
/// The interface polyline interpolates the curve at spacing ~ h_target; the
/// curve must stay at least 2*h_target away from the outer boundary.
Mesh build_disk_mesh(double radius, double h_target, const ParametricCurve& interface);

/// x -> x + t*V(x). Throws GeometryError if a triangle inverts; boundary
/// nodes require V = 0 there.
Mesh deform(const Mesh& mesh, const DeformationField& V, double t);

/// Same as deform but returns the mesh even if triangles inverted (line
/// search probes use this together with min_signed_area).
Mesh deform_unchecked(const Mesh& mesh, const DeformationField& V, double t);

double min_signed_area(const Mesh& mesh);

/// Laplacian relaxation of the free interior nodes (boundary and interface
/// nodes stay put; connectivity is untouched). Inversion-guarded.
void relax_interior_nodes(Mesh& mesh, int passes);

InterfaceNormals interface_normals(const Mesh& mesh);

/// Interface node loops in counterclockwise order (omega on the left).
std::vector<std::vector<int>> interface_loops(const Mesh& mesh);

/// The interface as a closed polyline (first loop; presets have exactly one).
Polyline interface_polyline(const Mesh& mesh);

/// Region areas (sum of triangle areas per tag): {outside, inside}.
std::array<double, 2> region_areas(const Mesh& mesh);

/// For every interface edge, the adjacent (inside, outside) triangle indices.
/// Keyed by the undirected edge (min,max) packed into a 64-bit value.
std::unordered_map<std::uint64_t, std::array<int, 2>>
interface_edge_triangles(const Mesh& mesh);

/// Linear walk point location; returns triangle index or -1.
int locate_triangle(const Mesh& mesh, const Vec2& p);

/// Verifies all Mesh invariants; throws GeometryError/TopologyError.
void check_mesh(const Mesh& mesh);

inline std::uint64_t edge_key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

} // namespace dotshape
