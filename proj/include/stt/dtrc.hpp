#ifndef STT_DTRC_HPP
#define STT_DTRC_HPP

#include <string>
#include <vector>

#include "stt/camera.hpp"

namespace stt {

// Table of supported marker patterns: circular (l=12, m=9), hexagon
// (l=12, m=7), square (l=16, m=6).
struct PatternSpec {
    int links = 12;          // reciprocal link count of an internal marker
    int layers = 7;          // number of ring peels
    int expected_count = 127;
    std::string name = "hexagon";

    void validate() const;
};

PatternSpec pattern_circular();
PatternSpec pattern_hexagon();
PatternSpec pattern_square();
PatternSpec pattern_by_name(const std::string& name);

struct MarkerMesh {
    std::vector<PixelPoint> nodes;
    std::vector<std::vector<int>> neighbors;  // symmetric, sorted
    std::vector<char> on_boundary;            // incident to an unshared triangle edge

    // Reciprocal links (each undirected edge counts twice at a node).
    int link_count(int node) const { return 2 * static_cast<int>(neighbors[node].size()); }
    bool adjacent(int a, int b) const;
};

struct CodedMarker {
    int id = 0;
    PixelPoint position;
    int layer = 0;       // 0 = outermost peel
    int ring_index = 0;  // position along the ring, counter-clockwise
};

struct CodedFrame {
    PatternSpec pattern;
    std::vector<CodedMarker> markers;  // sorted by id; ids are 0..n-1
};

struct DisparityEntry {
    int id = 0;
    PixelPoint left, right;
    double d = 0.0;  // x_r - x_l
};

struct DisparityFrame {
    std::vector<DisparityEntry> entries;  // one per id, ascending
};

// Delaunay mesh of the marker centers. Square patterns (links = 16) get the
// second diagonal of every lattice cell so internal nodes reach 8 geometric
// neighbors. Throws MeshDegenerate on collinear input.
MarkerMesh build_mesh(const std::vector<PixelPoint>& points, const PatternSpec& spec);

// Edge nodes (link count < l, on the mesh boundary) ordered counter-clockwise
// along the boundary, starting at the smallest non-negative polar angle
// around the ring centroid. Validates that consecutive ring nodes are
// mesh-adjacent (RingTopologyError).
std::vector<int> extract_edge_ring(const MarkerMesh& mesh, const PatternSpec& spec);

// Full ring coding: peels exactly spec.layers rings and assigns ids in
// (layer, ring_index) lexicographic order. Throws PatternMismatch when the
// point count or the peel count disagrees with the pattern.
CodedFrame code_frame(const std::vector<PixelPoint>& points, const PatternSpec& spec);

// Pairs markers by DTRC id; d = x_r - x_l. Throws MatchCardinalityError
// when the id sets differ.
DisparityFrame match_stereo(const CodedFrame& left, const CodedFrame& right);

struct TrackEntry {
    int id = 0;
    Eigen::Vector2d displacement;  // curr - prev, pixels
};

// Frame-to-frame correspondence by id (exact whenever coding succeeds).
std::vector<TrackEntry> track(const CodedFrame& prev, const CodedFrame& curr);

// CSV: id,layer,ring_index,u_l,v_l,u_r,v_r,d
void save_disparity_csv(const CodedFrame& left, const DisparityFrame& frame,
                        const std::string& path);
void save_coded_csv(const CodedFrame& frame, const std::string& path);

} // namespace stt

#endif
