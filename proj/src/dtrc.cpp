#include "stt/dtrc.hpp"

#include <algorithm>
#include <array>
#include <unordered_map>
#include <unordered_set>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>

#include "stt/delaunay.hpp"
#include "stt/errors.hpp"

namespace stt {

void PatternSpec::validate() const {
    if (links != 12 && links != 16) throw ConfigError("pattern links must be 12 or 16");
    if (layers < 1) throw ConfigError("pattern layers must be >= 1");
    if (expected_count < 1) throw ConfigError("pattern expected_count must be >= 1");
}

PatternSpec pattern_circular() { return {12, 9, 217, "circular"}; }
PatternSpec pattern_hexagon() { return {12, 7, 127, "hexagon"}; }
PatternSpec pattern_square() { return {16, 6, 121, "square"}; }

PatternSpec pattern_by_name(const std::string& name) {
    if (name == "circular") return pattern_circular();
    if (name == "hexagon") return pattern_hexagon();
    if (name == "square") return pattern_square();
    throw ConfigError("unknown pattern: " + name + " (circular|hexagon|square)");
}

bool MarkerMesh::adjacent(int a, int b) const {
    const auto& adj = neighbors[a];
    return std::binary_search(adj.begin(), adj.end(), b);
}

namespace {

bool segments_cross(const PixelPoint& a, const PixelPoint& b, const PixelPoint& c,
                    const PixelPoint& d) {
    auto orient = [](const PixelPoint& p, const PixelPoint& q, const PixelPoint& r) {
        return (q.x() - p.x()) * (r.y() - p.y()) - (q.y() - p.y()) * (r.x() - p.x());
    };
    return orient(a, b, c) * orient(a, b, d) < 0.0 && orient(c, d, a) * orient(c, d, b) < 0.0;
}

// On a (deformed) square lattice, Delaunay picks one diagonal per cell; the
// queen-move adjacency needs both. Adds the opposite diagonal of every quad
// whose two diagonals cross and have similar length, which selects lattice
// cells and rejects quads straddling two cells.
void add_square_diagonals(const std::vector<PixelPoint>& points, const Triangulation& tri,
                          std::vector<std::vector<int>>& adj) {
    std::map<std::pair<int, int>, std::vector<int>> edge_opposite;
    for (const auto& t : tri.triangles)
        for (int i = 0; i < 3; ++i) {
            int u = t[i], v = t[(i + 1) % 3], w = t[(i + 2) % 3];
            if (u > v) std::swap(u, v);
            edge_opposite[{u, v}].push_back(w);
        }
    for (const auto& [edge, opp] : edge_opposite) {
        if (opp.size() != 2) continue;
        const auto [a, b] = edge;
        const int c = opp[0], d = opp[1];
        const double lab = (points[a] - points[b]).norm();
        const double lcd = (points[c] - points[d]).norm();
        if (std::abs(lab - lcd) > 0.3 * lab) continue;
        if (!segments_cross(points[a], points[b], points[c], points[d])) continue;
        adj[c].push_back(d);
        adj[d].push_back(c);
    }
    for (auto& list : adj) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

// The convex hull of a deformed lattice bridges concave stretches of the
// boundary with sliver triangles, which inflates rim link counts. Peel off
// boundary triangles whose exposed edge is much longer than the lattice
// spacing (alpha-shape style) until the boundary is tight.
void prune_hull_slivers(const std::vector<PixelPoint>& points, Triangulation& tri) {
    auto edge_key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
    std::vector<double> lengths;
    for (const auto& t : tri.triangles)
        for (int i = 0; i < 3; ++i)
            lengths.push_back((points[t[i]] - points[t[(i + 1) % 3]]).norm());
    if (lengths.empty()) return;
    std::nth_element(lengths.begin(), lengths.begin() + lengths.size() / 2, lengths.end());
    const double limit = 1.5 * lengths[lengths.size() / 2];

    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::pair<int, int>, int> edge_count;
        for (const auto& t : tri.triangles)
            for (int i = 0; i < 3; ++i) edge_count[edge_key(t[i], t[(i + 1) % 3])] += 1;
        std::vector<std::array<int, 3>> kept;
        for (const auto& t : tri.triangles) {
            bool drop = false;
            for (int i = 0; i < 3; ++i) {
                const int a = t[i], b = t[(i + 1) % 3];
                if (edge_count[edge_key(a, b)] == 1 && (points[a] - points[b]).norm() > limit)
                    drop = true;
            }
            if (drop)
                changed = true;
            else
                kept.push_back(t);
        }
        tri.triangles = std::move(kept);
    }

    for (auto& list : tri.neighbors) list.clear();
    for (const auto& t : tri.triangles)
        for (int i = 0; i < 3; ++i) {
            tri.neighbors[t[i]].push_back(t[(i + 1) % 3]);
            tri.neighbors[t[i]].push_back(t[(i + 2) % 3]);
        }
    for (auto& list : tri.neighbors) {
        std::sort(list.begin(), list.end());
        list.erase(std::unique(list.begin(), list.end()), list.end());
    }
}

} // namespace

MarkerMesh build_mesh(const std::vector<PixelPoint>& points, const PatternSpec& spec) {
    spec.validate();
    Triangulation tri = delaunay(points);
    prune_hull_slivers(points, tri);
    MarkerMesh mesh;
    mesh.nodes = points;
    mesh.neighbors = std::move(tri.neighbors);
    mesh.on_boundary.assign(points.size(), 0);
    {
        std::map<std::pair<int, int>, int> edge_count;
        auto key = [](int a, int b) { return std::make_pair(std::min(a, b), std::max(a, b)); };
        for (const auto& t : tri.triangles)
            for (int i = 0; i < 3; ++i) edge_count[key(t[i], t[(i + 1) % 3])] += 1;
        for (const auto& [edge, count] : edge_count)
            if (count == 1) {
                mesh.on_boundary[edge.first] = 1;
                mesh.on_boundary[edge.second] = 1;
            }
    }
    if (spec.links == 16) add_square_diagonals(points, tri, mesh.neighbors);
    return mesh;
}

namespace {

// Counter-clockwise angular order around the centroid, starting at the
// smallest non-negative angle.
std::vector<int> order_ring(const std::vector<PixelPoint>& pts, const std::vector<int>& nodes) {
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (int i : nodes) centroid += pts[i];
    centroid /= static_cast<double>(nodes.size());

    struct Entry {
        int node;
        double angle, radius;
    };
    std::vector<Entry> entries;
    entries.reserve(nodes.size());
    for (int i : nodes) {
        const Eigen::Vector2d rel = pts[i] - centroid;
        double ang = std::atan2(rel.y(), rel.x());
        // tolerance keeps a node sitting exactly on the 0-angle boundary from
        // flipping to the ring's tail under floating-point jitter
        if (ang < -1e-9) ang += 2.0 * std::numbers::pi;
        entries.push_back({i, ang, rel.norm()});
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        if (a.angle != b.angle) return a.angle < b.angle;
        return a.radius < b.radius;
    });
    std::vector<int> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.node);
    return out;
}

// Walks the ring along mesh adjacency, so rings that are not star-shaped
// around their centroid still come out in traversal order. Orientation is
// forced counter-clockwise (shoelace sign) and the start node is the angular
// anchor of order_ring, keeping ids stable across views. Returns empty when
// the nodes do not form a simple cycle in the mesh.
std::vector<int> order_ring_on_mesh(const MarkerMesh& mesh, const std::vector<int>& nodes) {
    if (nodes.size() < 3) return {};
    std::unordered_set<int> in_ring(nodes.begin(), nodes.end());
    std::unordered_map<int, std::array<int, 2>> ring_nb;
    for (int n : nodes) {
        std::array<int, 2> nb{-1, -1};
        int deg = 0;
        for (int m : mesh.neighbors[n]) {
            if (!in_ring.count(m)) continue;
            if (deg < 2) nb[deg] = m;
            ++deg;
        }
        if (deg != 2) return {};
        ring_nb[n] = nb;
    }

    std::vector<int> cycle;
    cycle.reserve(nodes.size());
    int prev = -1, cur = nodes.front();
    for (size_t step = 0; step < nodes.size(); ++step) {
        cycle.push_back(cur);
        const auto& nb = ring_nb[cur];
        const int next = (nb[0] == prev) ? nb[1] : nb[0];
        prev = cur;
        cur = next;
    }
    if (cur != nodes.front()) return {};  // not a single closed cycle
    {
        std::vector<int> sorted = cycle;
        std::sort(sorted.begin(), sorted.end());
        std::vector<int> expected(nodes.begin(), nodes.end());
        std::sort(expected.begin(), expected.end());
        if (sorted != expected) return {};
    }

    double area2 = 0.0;
    for (size_t i = 0; i < cycle.size(); ++i) {
        const auto& a = mesh.nodes[cycle[i]];
        const auto& b = mesh.nodes[cycle[(i + 1) % cycle.size()]];
        area2 += a.x() * b.y() - b.x() * a.y();
    }
    if (area2 < 0.0) std::reverse(cycle.begin(), cycle.end());

    const int anchor = order_ring(mesh.nodes, nodes).front();
    const auto it = std::find(cycle.begin(), cycle.end(), anchor);
    std::rotate(cycle.begin(), it, cycle.end());
    return cycle;
}

} // namespace

std::vector<int> extract_edge_ring(const MarkerMesh& mesh, const PatternSpec& spec) {
    std::vector<int> edge_nodes;
    for (int i = 0; i < static_cast<int>(mesh.nodes.size()); ++i)
        if (mesh.link_count(i) < spec.links && mesh.on_boundary[i]) edge_nodes.push_back(i);
    if (edge_nodes.empty())
        throw RingTopologyError("extract_edge_ring: no edge nodes (all internal)");

    std::vector<int> ring = order_ring_on_mesh(mesh, edge_nodes);
    if (ring.empty()) ring = order_ring(mesh.nodes, edge_nodes);
    if (ring.size() >= 3) {
        for (size_t i = 0; i < ring.size(); ++i) {
            const int a = ring[i], b = ring[(i + 1) % ring.size()];
            if (!mesh.adjacent(a, b))
                throw RingTopologyError("extract_edge_ring: edge nodes do not form a closed cycle");
        }
    }
    return ring;
}

CodedFrame code_frame(const std::vector<PixelPoint>& points, const PatternSpec& spec) {
    spec.validate();
    if (static_cast<int>(points.size()) != spec.expected_count)
        throw PatternMismatch("code_frame: expected " + std::to_string(spec.expected_count) +
                              " markers, got " + std::to_string(points.size()));

    CodedFrame frame;
    frame.pattern = spec;
    std::vector<int> remaining(points.size());
    for (size_t i = 0; i < points.size(); ++i) remaining[i] = static_cast<int>(i);

    int layer = 0;
    int next_id = 0;
    while (!remaining.empty()) {
        if (layer >= spec.layers)
            throw PatternMismatch("code_frame: leftover markers after " +
                                  std::to_string(spec.layers) + " peels");
        std::vector<int> ring_local;  // indices into `remaining`
        if (remaining.size() < 3) {
            std::vector<int> all(remaining.size());
            for (size_t i = 0; i < remaining.size(); ++i) all[i] = static_cast<int>(i);
            std::vector<PixelPoint> pts;
            for (int i : remaining) pts.push_back(points[i]);
            ring_local = order_ring(pts, all);
        } else {
            std::vector<PixelPoint> pts;
            pts.reserve(remaining.size());
            for (int i : remaining) pts.push_back(points[i]);
            MarkerMesh mesh;
            try {
                mesh = build_mesh(pts, spec);
            } catch (const MeshDegenerate& e) {
                throw PatternMismatch(std::string("code_frame: peel failed: ") + e.what());
            }
            std::vector<int> edge_nodes;
            // deformation can starve an interior node of links, so edge
            // status also requires sitting on the mesh boundary
            for (int i = 0; i < static_cast<int>(pts.size()); ++i)
                if (mesh.link_count(i) < spec.links && mesh.on_boundary[i]) edge_nodes.push_back(i);
            if (edge_nodes.empty()) {
                // Final core: everything forms the last ring.
                for (int i = 0; i < static_cast<int>(pts.size()); ++i) edge_nodes.push_back(i);
            }
            ring_local = order_ring_on_mesh(mesh, edge_nodes);
            if (ring_local.empty()) ring_local = order_ring(pts, edge_nodes);
            if (ring_local.size() >= 3 &&
                ring_local.size() < pts.size()) {  // interior remains: validate the cycle
                for (size_t i = 0; i < ring_local.size(); ++i)
                    if (!mesh.adjacent(ring_local[i], ring_local[(i + 1) % ring_local.size()]))
                        throw PatternMismatch("code_frame: peel ring is not a closed cycle");
            }
        }

        std::vector<char> peeled(remaining.size(), 0);
        for (size_t k = 0; k < ring_local.size(); ++k) {
            const int global = remaining[ring_local[k]];
            frame.markers.push_back(
                {next_id++, points[global], layer, static_cast<int>(k)});
            peeled[ring_local[k]] = 1;
        }
        std::vector<int> next;
        for (size_t i = 0; i < remaining.size(); ++i)
            if (!peeled[i]) next.push_back(remaining[i]);
        remaining = std::move(next);
        ++layer;
    }
    if (layer != spec.layers)
        throw PatternMismatch("code_frame: pattern peeled in " + std::to_string(layer) +
                              " rings, expected " + std::to_string(spec.layers));
    return frame;
}

DisparityFrame match_stereo(const CodedFrame& left, const CodedFrame& right) {
    if (left.markers.size() != right.markers.size())
        throw MatchCardinalityError("match_stereo: frames carry different marker counts");
    DisparityFrame out;
    out.entries.reserve(left.markers.size());
    for (size_t i = 0; i < left.markers.size(); ++i) {
        const auto& l = left.markers[i];
        const auto& r = right.markers[i];
        if (l.id != r.id) throw MatchCardinalityError("match_stereo: id sets differ");
        out.entries.push_back({l.id, l.position, r.position, r.position.x() - l.position.x()});
    }
    return out;
}

std::vector<TrackEntry> track(const CodedFrame& prev, const CodedFrame& curr) {
    if (prev.markers.size() != curr.markers.size())
        throw MatchCardinalityError("track: frames carry different marker counts");
    std::vector<TrackEntry> out;
    out.reserve(prev.markers.size());
    for (size_t i = 0; i < prev.markers.size(); ++i) {
        if (prev.markers[i].id != curr.markers[i].id)
            throw MatchCardinalityError("track: id sets differ");
        out.push_back({prev.markers[i].id,
                       curr.markers[i].position - prev.markers[i].position});
    }
    return out;
}

void save_disparity_csv(const CodedFrame& left, const DisparityFrame& frame,
                        const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << "id,layer,ring_index,u_l,v_l,u_r,v_r,d\n";
    out.precision(12);
    for (size_t i = 0; i < frame.entries.size(); ++i) {
        const auto& e = frame.entries[i];
        const auto& m = left.markers[i];
        out << e.id << ',' << m.layer << ',' << m.ring_index << ',' << e.left.x() << ','
            << e.left.y() << ',' << e.right.x() << ',' << e.right.y() << ',' << e.d << '\n';
    }
}

void save_coded_csv(const CodedFrame& frame, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write: " + path);
    out << "id,layer,ring_index,u,v\n";
    out.precision(12);
    for (const auto& m : frame.markers)
        out << m.id << ',' << m.layer << ',' << m.ring_index << ',' << m.position.x() << ','
            << m.position.y() << '\n';
}

} // namespace stt
