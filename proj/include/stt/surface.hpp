#ifndef STT_SURFACE_HPP
#define STT_SURFACE_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "stt/camera.hpp"
#include "stt/dtrc.hpp"

namespace stt {

struct SkinParams {
    double pin_height = 1.5;    // H, mm
    double skin_thickness = 0.5;  // T, mm
    double marker_pitch = 2.54;   // mm
    PatternSpec pattern = pattern_hexagon();

    double offset() const { return pin_height + skin_thickness; }
    void validate() const;
};

struct OrientedPoint {
    WorldPoint position;
    Eigen::Vector3d normal;  // unit, positive z-component
};

// Thin-plate-spline height field z = f(x, y) through scattered points, with
// closed-form gradient. Immutable after fitting; evaluation is thread-safe.
class SurfaceModel {
  public:
    double evaluate(double x, double y) const;
    Eigen::Vector2d gradient(double x, double y) const;  // (df/dx, df/dy)

    const std::vector<WorldPoint>& fit_points() const { return points_; }

    friend SurfaceModel fit_surface(const std::vector<WorldPoint>& points);

  private:
    std::vector<WorldPoint> points_;
    Eigen::VectorXd weights_;       // one per point
    Eigen::Vector3d affine_;        // a0 + a1*x + a2*y
};

// C1 scattered-data interpolant through >= 3 points not collinear in (x, y).
// Reproduces planes exactly. Throws FitDegenerate on rank-deficient input.
SurfaceModel fit_surface(const std::vector<WorldPoint>& points);

// Unit normals of F(x, y, z) = f(x, y) - z at the given (x, y) locations,
// oriented with positive z-component.
std::vector<OrientedPoint> surface_normals(const SurfaceModel& s,
                                           const std::vector<WorldPoint>& at);

// P_s = P - (H + T) * N per point.
std::vector<WorldPoint> offset_to_skin(const std::vector<OrientedPoint>& pts,
                                       const SkinParams& skin);

// fit_surface -> surface_normals -> offset_to_skin -> fit_surface.
SurfaceModel reconstruct_skin(const std::vector<WorldPoint>& marker_points,
                              const SkinParams& skin);

// Skin points after the normal offset (the intermediate point set of
// reconstruct_skin); these are the per-contact patch points.
std::vector<WorldPoint> skin_points(const std::vector<WorldPoint>& marker_points,
                                    const SkinParams& skin);

// ASCII PLY with per-vertex normals.
void save_ply(const std::vector<OrientedPoint>& points, const std::string& path);
void save_ply(const std::vector<WorldPoint>& points, const std::string& path);
std::vector<WorldPoint> load_ply(const std::string& path);

// Raster heightmap CSV: surface sampled on a regular grid over the fit
// footprint's bounding box.
void save_heightmap_csv(const SurfaceModel& s, double resolution, const std::string& path);

} // namespace stt

#endif
