#pragma once

#include <array>
#include <utility>
#include <vector>

#include "dotshape/geometry.hpp"

namespace dotshape::detail {

/// Incremental Bowyer-Watson Delaunay triangulation with constrained-edge
/// recovery by edge flips. Points must be pairwise distinct.
class Triangulator {
public:
    explicit Triangulator(const std::vector<Vec2>& points);

    /// Flip edges until (a, b) is an edge of the triangulation.
    void recover_edge(int a, int b);

    bool edge_exists(int a, int b) const;

    /// Triangles not touching the super-triangle, counterclockwise.
    std::vector<std::array<int, 3>> triangles() const;

private:
    struct Tri {
        std::array<int, 3> v{};   // vertices, counterclockwise
        std::array<int, 3> n{};   // n[i]: neighbour across edge opposite v[i]
    };

    std::vector<Vec2> pts_;
    std::vector<Tri> tris_;
    std::vector<char> alive_;
    std::vector<int> vert2tri_;
    std::vector<int> stamp_;
    int stamp_gen_ = 0;
    int n_user_ = 0;
    int walk_hint_ = 0;

    void insert(int ip);
    int locate(const Vec2& q) const;
    bool in_circumcircle(const Tri& t, const Vec2& q) const;
    int local_index(const Tri& t, int v) const;
    void relink(int old_tri, int new_tri, int va, int vb);
    int fan_next(int tri, int around, bool ccw) const;
    int find_crossing_triangle(int a, int b) const;
    void flip(int t1, int i1);
};

} // namespace dotshape::detail
