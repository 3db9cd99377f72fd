#ifndef STT_DELAUNAY_HPP
#define STT_DELAUNAY_HPP

#include <array>
#include <vector>

#include "stt/camera.hpp"

namespace stt {

struct Triangulation {
    std::vector<std::array<int, 3>> triangles;  // indices into the input points
    std::vector<std::vector<int>> neighbors;    // sorted adjacency per point
};

// Bowyer-Watson Delaunay triangulation. Insertion order is fixed internally
// (lexicographic), so the result does not depend on input point order.
// Throws MeshDegenerate for < 3 points or an all-collinear configuration.
Triangulation delaunay(const std::vector<PixelPoint>& points);

} // namespace stt

#endif
