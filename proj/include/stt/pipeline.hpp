#ifndef STT_PIPELINE_HPP
#define STT_PIPELINE_HPP

#include <string>
#include <vector>

#include "stt/dtrc.hpp"
#include "stt/sim.hpp"
#include "stt/stitch.hpp"
#include "stt/surface.hpp"

namespace stt {

// One press through the full chain: code both views, match, triangulate,
// undo refraction, move to the global frame, offset markers to the skin.
struct PressReconstruction {
    int press_id = 0;
    CodedFrame left_coded, right_coded;
    DisparityFrame disparity;
    std::vector<WorldPoint> markers_cam;     // refraction-corrected, camera frame
    std::vector<WorldPoint> markers_global;
    ContactPatch patch;                      // skin points, global frame
};

PressReconstruction reconstruct_press(const SceneManifest& scene, const PressManifest& press);

struct SkippedPress {
    int press_id = 0;
    std::string reason;
};

struct SceneReconstruction {
    std::vector<PressReconstruction> presses;  // in press order
    std::vector<SkippedPress> skipped;         // coding failures, reported not interpolated
};

// Presses are independent; `jobs` worker threads, deterministic output order.
SceneReconstruction reconstruct_scene(const SceneManifest& scene, int jobs = 1);

} // namespace stt

#endif
