#include "delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "dotshape/errors.hpp"

namespace dotshape::detail {

namespace {

double orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (b - a).cross(c - a);
}

bool properly_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double d1 = orient(a, b, c);
    const double d2 = orient(a, b, d);
    const double d3 = orient(c, d, a);
    const double d4 = orient(c, d, b);
    return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

} // namespace

Triangulator::Triangulator(const std::vector<Vec2>& points) : pts_(points) {
    n_user_ = static_cast<int>(points.size());
    if (n_user_ < 3) throw GeometryError("triangulation needs at least 3 points");

    Vec2 lo = pts_[0], hi = pts_[0];
    for (const auto& p : pts_) {
        lo.x = std::min(lo.x, p.x);
        lo.y = std::min(lo.y, p.y);
        hi.x = std::max(hi.x, p.x);
        hi.y = std::max(hi.y, p.y);
    }
    const Vec2 mid = (lo + hi) * 0.5;
    const double span = std::max({hi.x - lo.x, hi.y - lo.y, 1e-12});
    const double big = 64.0 * span;
    pts_.push_back(mid + Vec2{0.0, big});
    pts_.push_back(mid + Vec2{-0.95 * big, -0.7 * big});
    pts_.push_back(mid + Vec2{0.95 * big, -0.7 * big});

    vert2tri_.assign(pts_.size(), -1);
    tris_.push_back({{n_user_, n_user_ + 1, n_user_ + 2}, {-1, -1, -1}});
    alive_.push_back(1);
    stamp_.push_back(0);
    for (int k = 0; k < 3; ++k) vert2tri_[n_user_ + k] = 0;

    for (int i = 0; i < n_user_; ++i) insert(i);
}

int Triangulator::local_index(const Tri& t, int v) const {
    for (int i = 0; i < 3; ++i)
        if (t.v[i] == v) return i;
    return -1;
}

bool Triangulator::in_circumcircle(const Tri& t, const Vec2& q) const {
    const Vec2& a = pts_[t.v[0]];
    const Vec2& b = pts_[t.v[1]];
    const Vec2& c = pts_[t.v[2]];
    const long double ax = a.x - q.x, ay = a.y - q.y;
    const long double bx = b.x - q.x, by = b.y - q.y;
    const long double cx = c.x - q.x, cy = c.y - q.y;
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    const long double det =
        ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    const long double m = std::max({a2, b2, c2});
    return det > 1e-14L * m * m;
}

int Triangulator::locate(const Vec2& q) const {
    int cur = walk_hint_;
    if (cur < 0 || cur >= static_cast<int>(tris_.size()) || !alive_[cur]) {
        cur = -1;
        for (int i = static_cast<int>(tris_.size()) - 1; i >= 0; --i)
            if (alive_[i]) {
                cur = i;
                break;
            }
    }
    const int cap = 4 * static_cast<int>(tris_.size()) + 64;
    for (int step = 0; step < cap && cur >= 0; ++step) {
        const Tri& t = tris_[cur];
        int next = -1;
        for (int i = 0; i < 3; ++i) {
            const Vec2& a = pts_[t.v[(i + 1) % 3]];
            const Vec2& b = pts_[t.v[(i + 2) % 3]];
            if (orient(a, b, q) < 0.0) {
                next = t.n[i];
                break;
            }
        }
        if (next == -1) return cur;
        cur = next;
    }
    // Walk failed (degenerate configuration); fall back to a full scan.
    for (int i = 0; i < static_cast<int>(tris_.size()); ++i) {
        if (!alive_[i]) continue;
        const Tri& t = tris_[i];
        bool ok = true;
        for (int k = 0; k < 3 && ok; ++k)
            ok = orient(pts_[t.v[(k + 1) % 3]], pts_[t.v[(k + 2) % 3]], q) >= 0.0;
        if (ok) return i;
    }
    throw GeometryError("delaunay: point location failed");
}

void Triangulator::relink(int old_tri, int new_tri, int va, int vb) {
    if (old_tri < 0) return;
    Tri& t = tris_[old_tri];
    for (int i = 0; i < 3; ++i) {
        const int ea = t.v[(i + 1) % 3];
        const int eb = t.v[(i + 2) % 3];
        if ((ea == va && eb == vb) || (ea == vb && eb == va)) {
            t.n[i] = new_tri;
            return;
        }
    }
}

void Triangulator::insert(int ip) {
    const Vec2& q = pts_[ip];
    const int seed = locate(q);

    // Conflict cavity: every alive triangle whose circumcircle contains q.
    ++stamp_gen_;
    std::vector<int> cavity;
    std::vector<int> work{seed};
    stamp_[seed] = stamp_gen_;
    while (!work.empty()) {
        const int cur = work.back();
        work.pop_back();
        cavity.push_back(cur);
        for (int i = 0; i < 3; ++i) {
            const int nb = tris_[cur].n[i];
            if (nb < 0 || stamp_[nb] == stamp_gen_) continue;
            if (in_circumcircle(tris_[nb], q)) {
                stamp_[nb] = stamp_gen_;
                work.push_back(nb);
            }
        }
    }

    struct Rim {
        int a, b, outer;
    };
    std::vector<Rim> rim;
    for (const int ct : cavity) {
        const Tri& t = tris_[ct];
        for (int i = 0; i < 3; ++i) {
            const int nb = t.n[i];
            if (nb >= 0 && stamp_[nb] == stamp_gen_) continue;
            rim.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], nb});
        }
    }
    for (const int ct : cavity) alive_[ct] = 0;

    // Retriangulate the cavity as a fan around q. Rim edges are directed with
    // the cavity (hence q) on their left, so (a, b, q) is counterclockwise.
    std::unordered_map<int, int> starting_at, ending_at;
    starting_at.reserve(rim.size() * 2);
    ending_at.reserve(rim.size() * 2);
    std::vector<int> fresh;
    fresh.reserve(rim.size());
    for (const Rim& r : rim) {
        const int id = static_cast<int>(tris_.size());
        tris_.push_back({{r.a, r.b, ip}, {-1, -1, r.outer}});
        alive_.push_back(1);
        stamp_.push_back(0);
        relink(r.outer, id, r.a, r.b);
        starting_at[r.a] = id;
        ending_at[r.b] = id;
        vert2tri_[r.a] = id;
        vert2tri_[r.b] = id;
        fresh.push_back(id);
    }
    for (const int id : fresh) {
        Tri& t = tris_[id];
        const auto s = starting_at.find(t.v[1]);
        const auto e = ending_at.find(t.v[0]);
        if (s == starting_at.end() || e == ending_at.end())
            throw GeometryError("delaunay: cavity rim is not a closed cycle");
        t.n[0] = s->second; // across (b, q)
        t.n[1] = e->second; // across (q, a)
    }

    if (!fresh.empty()) {
        vert2tri_[ip] = fresh.front();
        walk_hint_ = fresh.front();
    }
}

int Triangulator::fan_next(int tri, int around, bool ccw) const {
    const Tri& t = tris_[tri];
    const int li = local_index(t, around);
    // Rotating counterclockwise around the vertex crosses the edge
    // (around, v[li+1]), which is the edge opposite v[li+2].
    return ccw ? t.n[(li + 2) % 3] : t.n[(li + 1) % 3];
}

bool Triangulator::edge_exists(int a, int b) const {
    const int start = vert2tri_[a];
    if (start < 0) return false;
    int cur = start;
    do {
        if (local_index(tris_[cur], b) >= 0) return true;
        cur = fan_next(cur, a, true);
    } while (cur != start && cur >= 0);
    return false;
}

int Triangulator::find_crossing_triangle(int a, int b) const {
    const Vec2& pa = pts_[a];
    const Vec2& pb = pts_[b];
    const int start = vert2tri_[a];
    int cur = start;
    do {
        const Tri& t = tris_[cur];
        const int li = local_index(t, a);
        const int x = t.v[(li + 1) % 3];
        const int y = t.v[(li + 2) % 3];
        if (orient(pa, pb, pts_[x]) > 0.0 && orient(pa, pb, pts_[y]) < 0.0)
            return cur;
        cur = fan_next(cur, a, true);
    } while (cur != start && cur >= 0);
    return -1;
}

void Triangulator::flip(int t1, int i1) {
    const int t2 = tris_[t1].n[i1];
    const int c1 = tris_[t1].v[i1];
    const int x = tris_[t1].v[(i1 + 1) % 3];
    const int y = tris_[t1].v[(i1 + 2) % 3];
    const Tri& s2 = tris_[t2];
    int i2 = -1;
    for (int i = 0; i < 3; ++i)
        if (s2.v[i] != x && s2.v[i] != y) i2 = i;
    const int c2 = s2.v[i2];

    const int n_t1_x = tris_[t1].n[(i1 + 1) % 3]; // across (y, c1)
    const int n_t1_y = tris_[t1].n[(i1 + 2) % 3]; // across (c1, x)
    const int n_t2_y = s2.n[local_index(s2, y)];  // across (x, c2)
    const int n_t2_x = s2.n[local_index(s2, x)];  // across (c2, y)

    tris_[t1] = {{c1, x, c2}, {n_t2_y, t2, n_t1_y}};
    tris_[t2] = {{c2, y, c1}, {n_t1_x, t1, n_t2_x}};
    relink(n_t2_y, t1, x, c2);
    relink(n_t1_y, t1, c1, x);
    relink(n_t1_x, t2, y, c1);
    relink(n_t2_x, t2, c2, y);
    for (const int v : {c1, x, c2}) vert2tri_[v] = t1;
    vert2tri_[y] = t2;
}

void Triangulator::recover_edge(int a, int b) {
    const Vec2& pa = pts_[a];
    const Vec2& pb = pts_[b];
    for (int guard = 0; guard < 4096; ++guard) {
        if (edge_exists(a, b)) return;
        int cur = find_crossing_triangle(a, b);
        if (cur < 0)
            throw GeometryError("delaunay: constrained edge recovery failed");
        int li = local_index(tris_[cur], a);
        int x = tris_[cur].v[(li + 1) % 3];
        int y = tris_[cur].v[(li + 2) % 3];

        // March along the segment until a crossing edge with a convex quad
        // shows up, then flip it.
        bool flipped = false;
        for (int steps = 0; steps < 4096 && !flipped; ++steps) {
            int i1 = -1;
            for (int i = 0; i < 3; ++i)
                if (tris_[cur].v[i] != x && tris_[cur].v[i] != y) i1 = i;
            const int c1 = tris_[cur].v[i1];
            const int t2 = tris_[cur].n[i1];
            if (t2 < 0)
                throw GeometryError("delaunay: crossing walk left the mesh");
            const Tri& s2 = tris_[t2];
            int c2 = -1;
            for (int i = 0; i < 3; ++i)
                if (s2.v[i] != x && s2.v[i] != y) c2 = s2.v[i];

            if (properly_cross(pts_[c1], pts_[c2], pts_[x], pts_[y])) {
                flip(cur, i1);
                flipped = true;
            } else if (c2 == b) {
                break; // reached the far endpoint without a flippable edge
            } else {
                if (orient(pa, pb, pts_[c2]) > 0.0)
                    x = c2;
                else
                    y = c2;
                cur = t2;
            }
        }
        if (!flipped)
            throw GeometryError("delaunay: constrained edge recovery stalled");
    }
    throw GeometryError("delaunay: constrained edge recovery did not converge");
}

std::vector<std::array<int, 3>> Triangulator::triangles() const {
    std::vector<std::array<int, 3>> out;
    out.reserve(tris_.size());
    for (std::size_t i = 0; i < tris_.size(); ++i) {
        if (!alive_[i]) continue;
        const Tri& t = tris_[i];
        if (t.v[0] >= n_user_ || t.v[1] >= n_user_ || t.v[2] >= n_user_) continue;
        out.push_back(t.v);
    }
    return out;
}

} // namespace dotshape::detail
