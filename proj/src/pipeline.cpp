#include "stt/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <thread>

#include "stt/errors.hpp"
#include "stt/refraction.hpp"

namespace stt {

PressReconstruction reconstruct_press(const SceneManifest& scene, const PressManifest& press) {
    const SceneConfig& cfg = scene.config;
    PressReconstruction rec;
    rec.press_id = press.press_id;

    std::vector<PixelPoint> left = scene.load_pixels(press.press_id, false);
    std::vector<PixelPoint> right = scene.load_pixels(press.press_id, true);
    if (cfg.with_distortion) {
        for (auto& p : left) p = undistort(p, cfg.rig.left);
        for (auto& p : right) p = undistort(p, cfg.rig.right);
    }

    rec.left_coded = code_frame(left, cfg.pattern);
    rec.right_coded = code_frame(right, cfg.pattern);
    rec.disparity = match_stereo(rec.left_coded, rec.right_coded);

    const double rest = cfg.rest_marker_depth();
    rec.markers_cam.reserve(rec.disparity.entries.size());
    rec.markers_global.reserve(rec.disparity.entries.size());
    for (const DisparityEntry& e : rec.disparity.entries) {
        WorldPoint p = triangulate(e.left, e.right, cfg.rig);
        // the gel shrinks depth displacement only; lateral position is direct
        p.z() = correct_depth(rest, p.z() - rest, cfg.refraction);
        rec.markers_cam.push_back(p);
        rec.markers_global.push_back(apply_pose(press.pose, p));
    }

    rec.patch.contact_id = press.press_id;
    rec.patch.pose = press.pose;
    rec.patch.points = skin_points(rec.markers_global, cfg.skin);
    return rec;
}

SceneReconstruction reconstruct_scene(const SceneManifest& scene, int jobs) {
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    const int n = static_cast<int>(scene.presses.size());
    std::vector<PressReconstruction> done(n);
    std::vector<char> ok(n, 0);
    std::vector<SkippedPress> skipped;
    std::mutex skip_mutex;
    std::atomic<int> next{0};

    auto worker = [&] {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
            try {
                done[i] = reconstruct_press(scene, scene.presses[i]);
                ok[i] = 1;
            } catch (const Error& e) {
                std::lock_guard<std::mutex> lock(skip_mutex);
                skipped.push_back({scene.presses[i].press_id, e.what()});
            }
        }
    };

    if (jobs == 1 || n <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < std::min(jobs, n); ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SceneReconstruction result;
    for (int i = 0; i < n; ++i)
        if (ok[i]) result.presses.push_back(std::move(done[i]));
    std::sort(skipped.begin(), skipped.end(),
              [](const SkippedPress& a, const SkippedPress& b) { return a.press_id < b.press_id; });
    result.skipped = std::move(skipped);
    return result;
}

} // namespace stt
