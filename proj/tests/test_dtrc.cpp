#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "stt/dtrc.hpp"
#include "stt/sim.hpp"

#include "helpers.hpp"

using namespace stt;

namespace {

// Analytic lattice slightly rotated so no site sits on the ring-anchor
// zero-angle boundary.
std::vector<PixelPoint> lattice_points(const PatternSpec& spec, double rotation = 0.0574) {
    const auto lat = marker_lattice(spec, 2.54, rotation);
    std::vector<PixelPoint> pts(lat.begin(), lat.end());
    return pts;
}

std::vector<int> ring_sizes(const CodedFrame& frame) {
    std::vector<int> sizes;
    for (const auto& m : frame.markers) {
        if (m.layer >= static_cast<int>(sizes.size())) sizes.resize(m.layer + 1, 0);
        ++sizes[m.layer];
    }
    return sizes;
}

} // namespace

TEST_CASE("pattern table") {
    CHECK(pattern_circular().links == 12);
    CHECK(pattern_circular().layers == 9);
    CHECK(pattern_hexagon().links == 12);
    CHECK(pattern_hexagon().layers == 7);
    CHECK(pattern_hexagon().expected_count == 127);
    CHECK(pattern_square().links == 16);
    CHECK(pattern_square().layers == 6);
    CHECK(pattern_by_name("square").name == "square");
    CHECK_THROWS_AS(pattern_by_name("rhombus"), ConfigError);
}

TEST_CASE("tiny hexagon mesh has the right link counts") {
    PatternSpec spec = pattern_hexagon();
    spec.layers = 1;  // peel just the outer ring for this 7-point fixture
    spec.expected_count = 7;
    std::vector<PixelPoint> pts = {{0, 0}};
    for (int k = 0; k < 6; ++k) {
        const double a = 0.1 + k * std::numbers::pi / 3.0;
        pts.emplace_back(std::cos(a), std::sin(a));
    }
    const MarkerMesh mesh = build_mesh(pts, spec);
    CHECK(mesh.link_count(0) == 12);  // internal node: 6 neighbors, counted both ways
    for (int k = 1; k <= 6; ++k) CHECK(mesh.link_count(k) < 12);
    const auto ring = extract_edge_ring(mesh, spec);
    CHECK(ring.size() == 6);
    CHECK(std::find(ring.begin(), ring.end(), 0) == ring.end());
}

TEST_CASE("coding terminates in exactly m peels for every pattern") {
    struct Expect {
        PatternSpec spec;
        std::vector<int> rings;
    };
    const std::vector<Expect> table = {
        {pattern_hexagon(), {36, 30, 24, 18, 12, 6, 1}},
        {pattern_circular(), {48, 42, 36, 30, 24, 18, 12, 6, 1}},
        {pattern_square(), {40, 32, 24, 16, 8, 1}},
    };
    for (const auto& t : table) {
        CAPTURE(t.spec.name);
        const auto pts = lattice_points(t.spec);
        REQUIRE(static_cast<int>(pts.size()) == t.spec.expected_count);
        const CodedFrame frame = code_frame(pts, t.spec);
        CHECK(ring_sizes(frame) == t.rings);
        // ids are a bijection onto 0..n-1, sorted
        for (int i = 0; i < static_cast<int>(frame.markers.size()); ++i)
            CHECK(frame.markers[i].id == i);
    }
}

TEST_CASE("square lattice internal nodes reach 16 links") {
    const PatternSpec spec = pattern_square();
    const auto pts = lattice_points(spec);
    const MarkerMesh mesh = build_mesh(pts, spec);
    int internal = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        if (mesh.link_count(static_cast<int>(i)) >= spec.links) ++internal;
    CHECK(internal == 9 * 9);  // the 11x11 grid minus its boundary
}

TEST_CASE("coding is deterministic and translation invariant") {
    const PatternSpec spec = pattern_hexagon();
    auto pts = lattice_points(spec);
    const CodedFrame a = code_frame(pts, spec);
    const CodedFrame b = code_frame(pts, spec);
    for (size_t i = 0; i < a.markers.size(); ++i)
        CHECK(a.markers[i].position == b.markers[i].position);

    for (auto& p : pts) p += PixelPoint(123.4, -56.7);
    const CodedFrame c = code_frame(pts, spec);
    for (size_t i = 0; i < a.markers.size(); ++i) {
        CHECK(c.markers[i].layer == a.markers[i].layer);
        CHECK(c.markers[i].ring_index == a.markers[i].ring_index);
        CHECK((c.markers[i].position - a.markers[i].position - PixelPoint(123.4, -56.7)).norm() ==
              doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("coding is invariant to input permutation") {
    const PatternSpec spec = pattern_hexagon();
    auto pts = lattice_points(spec);
    const CodedFrame a = code_frame(pts, spec);
    std::mt19937_64 rng(17);
    std::shuffle(pts.begin(), pts.end(), rng);
    const CodedFrame b = code_frame(pts, spec);
    for (size_t i = 0; i < a.markers.size(); ++i)
        CHECK((a.markers[i].position - b.markers[i].position).norm() == doctest::Approx(0.0));
}

TEST_CASE("wrong point count raises PatternMismatch") {
    const PatternSpec spec = pattern_hexagon();
    auto pts = lattice_points(spec);
    pts.pop_back();
    CHECK_THROWS_AS(code_frame(pts, spec), PatternMismatch);
}

TEST_CASE("match_stereo on a uniform shift gives constant disparity") {
    const PatternSpec spec = pattern_hexagon();
    auto pts = lattice_points(spec);
    const CodedFrame left = code_frame(pts, spec);
    for (auto& p : pts) p.x() -= 10.0;
    const CodedFrame right = code_frame(pts, spec);
    const DisparityFrame d = match_stereo(left, right);
    REQUIRE(d.entries.size() == pts.size());
    for (const auto& e : d.entries) CHECK(e.d == doctest::Approx(-10.0).epsilon(1e-12));
}

TEST_CASE("track of an identical frame reports zero displacement") {
    const PatternSpec spec = pattern_square();
    const auto pts = lattice_points(spec);
    const CodedFrame f = code_frame(pts, spec);
    const auto tracks = track(f, f);
    REQUIRE(tracks.size() == pts.size());
    for (const auto& t : tracks) CHECK(t.displacement.norm() == doctest::Approx(0.0));
}

TEST_CASE("disparity and coded CSV round out with headers") {
    testutil::TempDir tmp("dtrc_csv");
    const PatternSpec spec = pattern_hexagon();
    auto pts = lattice_points(spec);
    const CodedFrame left = code_frame(pts, spec);
    for (auto& p : pts) p.x() -= 8.0;
    const CodedFrame right = code_frame(pts, spec);
    const DisparityFrame d = match_stereo(left, right);
    CHECK_NOTHROW(save_disparity_csv(left, d, tmp.str("d.csv")));
    CHECK_NOTHROW(save_coded_csv(left, tmp.str("c.csv")));
    std::ifstream in(tmp.str("d.csv"));
    std::string header;
    REQUIRE(std::getline(in, header));
    CHECK(header == "id,layer,ring_index,u_l,v_l,u_r,v_r,d");
}

TEST_CASE("rest-frame disparity follows the stereo model") {
    // A flat press observed by the simulator: every marker shares one depth,
    // so every DTRC disparity must equal f*b/z.
    SceneConfig cfg = scene_preset("flat");
    cfg.press_depth = 0.5;
    const Scene scene = simulate_scene(cfg);
    const auto& obs = scene.presses[0].observation;
    const CodedFrame left = code_frame(obs.left, cfg.pattern);
    const CodedFrame right = code_frame(obs.right, cfg.pattern);
    const DisparityFrame d = match_stereo(left, right);
    const double z = obs.apparent_depth[0];
    // raw x_r - x_l carries the principal-point offset between the cameras
    const double expected =
        cfg.rig.left.fx * cfg.rig.baseline() / z + (cfg.rig.right.cx - cfg.rig.left.cx);
    for (const auto& e : d.entries) CHECK(e.d == doctest::Approx(expected).epsilon(1e-3));
}

TEST_CASE("stereo correspondences from a pressed scene are exact") {
    SceneConfig cfg = scene_preset("gaussian-s50");
    cfg.press_depth = 5.0;
    const Scene scene = simulate_scene(cfg);
    const auto& obs = scene.presses[0].observation;
    const CodedFrame left = code_frame(obs.left, cfg.pattern);
    const CodedFrame right = code_frame(obs.right, cfg.pattern);
    const DisparityFrame d = match_stereo(left, right);

    auto obs_index = [](const std::vector<PixelPoint>& pts, const PixelPoint& q) {
        for (size_t i = 0; i < pts.size(); ++i)
            if (pts[i] == q) return static_cast<int>(i);
        return -1;
    };
    for (const auto& e : d.entries) {
        const int il = obs_index(obs.left, e.left);
        const int ir = obs_index(obs.right, e.right);
        REQUIRE(il >= 0);
        REQUIRE(ir >= 0);
        CHECK(obs.ids[il] == obs.ids[ir]);
    }
}

TEST_CASE("rapid jump defeats nearest-neighbor matching but not ring coding") {
    // A full-depth press lands within one frame interval: markers on the
    // bump flank jump laterally by more than half the projected pitch.
    SceneConfig cfg = scene_preset("gaussian-s50over3");
    cfg.press_depth = 0.5;
    SceneConfig cfg2 = scene_preset("gaussian-s50over3");
    cfg2.press_depth = 5.0;
    const Scene a = simulate_scene(cfg);
    const Scene b = simulate_scene(cfg2);
    const auto& oa = a.presses[0].observation;
    const auto& ob = b.presses[0].observation;

    // ring coding ids attach to the lattice topology, so track() pairs
    // every marker with its true successor
    const CodedFrame fa = code_frame(oa.left, cfg.pattern);
    const CodedFrame fb = code_frame(ob.left, cfg.pattern);
    const auto tracks = track(fa, fb);
    REQUIRE(tracks.size() == fa.markers.size());
    auto obs_index = [](const std::vector<PixelPoint>& pts, const PixelPoint& q) {
        for (size_t i = 0; i < pts.size(); ++i)
            if (pts[i] == q) return static_cast<int>(i);
        return -1;
    };
    double max_jump = 0.0;
    for (size_t k = 0; k < fa.markers.size(); ++k) {
        const int ia = obs_index(oa.left, fa.markers[k].position);
        const int ib = obs_index(ob.left, fb.markers[k].position);
        REQUIRE(ia >= 0);
        REQUIRE(ib >= 0);
        CHECK(oa.ids[ia] == ob.ids[ib]);
        max_jump = std::max(max_jump, tracks[k].displacement.norm());
    }
    CHECK(max_jump > 7.0);  // beyond half the projected pitch

    // KNN baseline: nearest pixel in the next frame.
    int knn_mismatch = 0;
    for (size_t i = 0; i < oa.left.size(); ++i) {
        int best = -1;
        double best_d = 1e18;
        for (size_t j = 0; j < ob.left.size(); ++j) {
            const double dd = (ob.left[j] - oa.left[i]).squaredNorm();
            if (dd < best_d) { best_d = dd; best = static_cast<int>(j); }
        }
        if (ob.ids[best] != oa.ids[i]) ++knn_mismatch;
    }
    CHECK(knn_mismatch >= 1);
}

TEST_CASE("match_stereo rejects mismatched id sets") {
    const PatternSpec spec = pattern_hexagon();
    const auto pts = lattice_points(spec);
    const CodedFrame left = code_frame(pts, spec);
    CodedFrame right = left;
    right.markers.pop_back();
    CHECK_THROWS_AS(match_stereo(left, right), MatchCardinalityError);
}
