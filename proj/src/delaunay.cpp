#include "stt/delaunay.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "stt/errors.hpp"

namespace stt {

namespace {

// Positive if d lies inside the circumcircle of (a, b, c), where (a, b, c)
// is counter-clockwise. Evaluated in extended precision.
long double incircle(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                     const PixelPoint& d) {
    const long double ax = a.x() - d.x(), ay = a.y() - d.y();
    const long double bx = b.x() - d.x(), by = b.y() - d.y();
    const long double cx = c.x() - d.x(), cy = c.y() - d.y();
    const long double a2 = ax * ax + ay * ay;
    const long double b2 = bx * bx + by * by;
    const long double c2 = cx * cx + cy * cy;
    return ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
}

long double orient(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c) {
    return (long double)(b.x() - a.x()) * (c.y() - a.y()) -
           (long double)(b.y() - a.y()) * (c.x() - a.x());
}

} // namespace

Triangulation delaunay(const std::vector<PixelPoint>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw MeshDegenerate("delaunay: need at least 3 points");

    // Fixed insertion order for order-independence.
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&points](int i, int j) {
        if (points[i].x() != points[j].x()) return points[i].x() < points[j].x();
        return points[i].y() < points[j].y();
    });
    for (int k = 1; k < n; ++k)
        if (points[order[k]] == points[order[k - 1]])
            throw MeshDegenerate("delaunay: duplicate points");

    // Super-triangle comfortably containing everything.
    double min_x = points[0].x(), max_x = min_x, min_y = points[0].y(), max_y = min_y;
    for (const auto& p : points) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    const double span = std::max({max_x - min_x, max_y - min_y, 1.0});
    const double mx = 0.5 * (min_x + max_x), my = 0.5 * (min_y + max_y);
    std::vector<PixelPoint> pts(points);
    pts.emplace_back(mx - 40.0 * span, my - 20.0 * span);
    pts.emplace_back(mx + 40.0 * span, my - 20.0 * span);
    pts.emplace_back(mx, my + 40.0 * span);

    struct Tri {
        int a, b, c;  // counter-clockwise
        bool alive = true;
    };
    std::vector<Tri> tris;
    tris.push_back({n, n + 1, n + 2});

    for (int idx : order) {
        const PixelPoint& p = pts[idx];
        // Cavity = all triangles whose circumcircle contains p.
        std::vector<int> bad;
        for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
            if (!tris[t].alive) continue;
            if (incircle(pts[tris[t].a], pts[tris[t].b], pts[tris[t].c], p) > 0.0L)
                bad.push_back(t);
        }
        // Boundary of the cavity: edges appearing exactly once.
        std::vector<std::pair<int, int>> edges;
        for (int t : bad) {
            const Tri& tr = tris[t];
            edges.emplace_back(tr.a, tr.b);
            edges.emplace_back(tr.b, tr.c);
            edges.emplace_back(tr.c, tr.a);
            tris[t].alive = false;
        }
        std::vector<std::pair<int, int>> boundary;
        for (const auto& e : edges) {
            bool shared = false;
            for (const auto& f : edges)
                if (e.first == f.second && e.second == f.first) {
                    shared = true;
                    break;
                }
            if (!shared) boundary.push_back(e);
        }
        for (const auto& e : boundary) {
            Tri t{e.first, e.second, idx};
            if (orient(pts[t.a], pts[t.b], pts[t.c]) <= 0.0L) std::swap(t.b, t.c);
            tris.push_back(t);
        }
    }

    Triangulation out;
    out.neighbors.assign(n, {});
    std::set<std::pair<int, int>> seen;
    for (const auto& t : tris) {
        if (!t.alive) continue;
        if (t.a >= n || t.b >= n || t.c >= n) continue;  // touches super-triangle
        std::array<int, 3> tri{t.a, t.b, t.c};
        out.triangles.push_back(tri);
        for (int i = 0; i < 3; ++i) {
            int u = tri[i], v = tri[(i + 1) % 3];
            if (u > v) std::swap(u, v);
            if (seen.insert({u, v}).second) {
                out.neighbors[u].push_back(v);
                out.neighbors[v].push_back(u);
            }
        }
    }
    if (out.triangles.empty())
        throw MeshDegenerate("delaunay: degenerate (collinear) point configuration");
    for (auto& adj : out.neighbors) std::sort(adj.begin(), adj.end());
    return out;
}

} // namespace stt
