#ifndef STT_SIM_HPP
#define STT_SIM_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "stt/camera.hpp"
#include "stt/dtrc.hpp"
#include "stt/image.hpp"
#include "stt/refraction.hpp"
#include "stt/stitch.hpp"
#include "stt/surface.hpp"

namespace stt {

// Ground-truth object height field z = g(x, y) in the global frame (z up,
// object base at z = 0).
class ObjectSurface {
  public:
    enum class Kind { Flat, Gaussian, Sine, Heightmap };

    static ObjectSurface flat(double height = 0.0);
    static ObjectSurface gaussian(double h, double sigma2);           // h*exp(-r^2/(2*sigma2))
    static ObjectSurface sine(double amplitude, double omega);        // A*sin(omega*x)
    static ObjectSurface heightmap(HeightGrid grid);                  // bilinear

    double evaluate(double x, double y) const;
    Eigen::Vector2d gradient(double x, double y) const;

    Kind kind() const { return kind_; }
    double gaussian_height() const { return a_; }
    double gaussian_sigma2() const { return b_; }
    double sine_amplitude() const { return a_; }
    double sine_omega() const { return b_; }
    const HeightGrid& heightmap_grid() const { return grid_; }

  private:
    Kind kind_ = Kind::Flat;
    double a_ = 0.0, b_ = 1.0;  // kind-specific parameters
    HeightGrid grid_;
};

struct PressSpec {
    double center_x = 0.0, center_y = 0.0;  // mm, global
    double press_depth = 5.0;               // mm below first contact
    double approach_height = 8.0;           // mm, start height above contact

    void validate() const;
};

struct ScanPlan {
    std::vector<PressSpec> presses;  // zigzag order
    double step = 15.0;              // mm
};

// Boustrophedon press grid covering [x0, x1] x [y0, y1] with the given step.
ScanPlan plan_zigzag(double x0, double y0, double x1, double y1, double step,
                     double press_depth = 5.0);

// Membrane contact model: skin height = max(object, pressed plane) over the
// circular footprint.
struct SkinField {
    ObjectSurface object;
    double plane_height = 0.0;  // global z of the pressed flat part
    double center_x = 0.0, center_y = 0.0;
    double radius = 0.0;  // footprint radius
    double blend = 0.5;   // mm, smooth-max width; membrane tension rounds the
                          // contact boundary instead of creasing

    double evaluate(double x, double y) const;
    Eigen::Vector2d gradient(double x, double y) const;
    bool in_contact(double x, double y) const;  // object above the plane here
};

SkinField deform_skin(const ObjectSurface& obj, const PressSpec& press, const SkinParams& skin,
                      double footprint_radius, double blend = 0.5);

// Marker lattice in the sensor plane (local xy, mm): centered hexagonal,
// concentric-ring circular, or square grid per the pattern spec.
std::vector<Eigen::Vector2d> marker_lattice(const PatternSpec& pattern, double pitch,
                                            double rotation = 0.0);

// Markers = skin point + (H + T) * n_hat at every lattice site.
std::vector<WorldPoint> place_markers(const SkinField& field, const SkinParams& skin,
                                      double lattice_rotation = 0.0);

// Rigid camera -> global transform of one press: x stays, y and z flip
// (cameras look down), origin at the reference camera center.
Eigen::Matrix4d press_pose(double center_x, double center_y, double camera_height);
WorldPoint apply_pose(const Eigen::Matrix4d& pose, const WorldPoint& p);
WorldPoint apply_pose_inverse(const Eigen::Matrix4d& pose, const WorldPoint& p);

struct StereoObservation {
    std::vector<PixelPoint> left, right;   // index-aligned with marker ids
    std::vector<int> ids;                  // ground-truth id map (test oracle)
    std::vector<double> apparent_depth;    // camera-frame z after refraction
};

// Refraction-distorted stereo projection: apparent depth = rest depth +
// (z - rest depth) / n_gel, then pinhole projection into both cameras.
StereoObservation observe(const std::vector<WorldPoint>& markers_cam, const CameraRig& rig,
                          const RefractionParams& refr, double rest_marker_depth,
                          bool with_distortion = false);

// Isotropic Gaussian spots on black background; sigma follows the marker's
// projected radius. Optional additive pixel noise.
GrayImage render(const std::vector<PixelPoint>& pixels, int width, int height,
                 double spot_sigma_px, double noise_sigma = 0.0, std::uint64_t seed = 0);

// --- scene description & generation -------------------------------------

struct SceneConfig {
    ObjectSurface object = ObjectSurface::gaussian(5.0, 50.0);
    SkinParams skin;
    RefractionParams refraction;
    CameraRig rig = default_rig();
    PatternSpec pattern = pattern_hexagon();
    double rest_skin_depth = 45.0;  // camera-frame depth of the undeformed skin
    double footprint_radius = 0.0;  // 0 = derived from the pattern extent
    double press_depth = 5.0;
    double noise_sigma = 0.0;       // pixel-intensity noise for rendering
    bool render_images = false;     // PNG frames instead of pixel CSV
    bool with_distortion = false;
    double periphery_bias = 0.0;    // mm, injected rim overestimation
    // keeps lattice nodes away from the ring-anchor 0-angle boundary
    double lattice_rotation = 0.0574;  // rad
    std::uint64_t seed = 0;
    // region scanned by a zigzag plan; a single press when x0==x1 && y0==y1
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
    double step = 15.0;

    double rest_marker_depth() const { return rest_skin_depth - skin.offset(); }
    double effective_footprint() const;
};

SceneConfig scene_preset(const std::string& name);  // gaussian-s50, sine-w15, ...

struct PressRecord {
    int press_id = 0;
    PressSpec press;
    double camera_height = 0.0;
    Eigen::Matrix4d pose;  // camera -> global
    StereoObservation observation;
    std::vector<WorldPoint> markers_global;  // truth
    std::vector<WorldPoint> skin_global;     // truth skin points at the lattice
};

struct Scene {
    SceneConfig config;
    ScanPlan plan;
    std::vector<PressRecord> presses;
};

Scene simulate_scene(const SceneConfig& config);

// Scene directory: manifest.json + per-press frames (CSV with shuffled rows,
// or a concatenated stereo PNG) + ground-truth sidecars.
void write_scene(const Scene& scene, const std::string& dir);

// Everything the reconstruction side is allowed to see (no ground truth).
struct PressManifest {
    int press_id = 0;
    PressSpec press;
    double camera_height = 0.0;
    Eigen::Matrix4d pose;
};

struct SceneManifest {
    SceneConfig config;
    std::vector<PressManifest> presses;
    std::string dir;

    // Unordered pixel detections of one press, from CSV or rendered PNG.
    std::vector<PixelPoint> load_pixels(int press_id, bool right_camera) const;
    std::vector<WorldPoint> load_truth_markers(int press_id) const;
    std::vector<WorldPoint> load_truth_skin(int press_id) const;
};

SceneManifest load_scene(const std::string& dir);

} // namespace stt

#endif
