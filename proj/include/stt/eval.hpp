#ifndef STT_EVAL_HPP
#define STT_EVAL_HPP

#include <string>
#include <vector>

#include "stt/camera.hpp"
#include "stt/sim.hpp"
#include "stt/stitch.hpp"

namespace stt {

struct ErrorStats {
    double rms = 0.0;
    double mean_abs = 0.0;
    double max_abs = 0.0;
    int count = 0;
};

ErrorStats compute_stats(const std::vector<double>& errors);

// Signed height errors of reconstructed points against the analytic object.
std::vector<double> height_errors(const std::vector<WorldPoint>& points,
                                  const ObjectSurface& truth);
ErrorStats point_errors(const std::vector<WorldPoint>& points, const ObjectSurface& truth);

// Occupied raster cells against the analytic object.
ErrorStats grid_errors(const HeightGrid& grid, const ObjectSurface& truth);

// Mean absolute height error binned by distance from (cx, cy).
struct RadialProfile {
    double bin_width = 1.0;
    std::vector<double> radius;          // bin centers
    std::vector<double> mean_abs_error;
    std::vector<int> count;              // 0 marks an absent bin
    std::vector<double> reference_curvature;  // truth mean curvature at the bin center
};

RadialProfile radial_error(const std::vector<WorldPoint>& points, const ObjectSurface& truth,
                           double bin_width, double max_radius, double cx = 0.0, double cy = 0.0);

// Mean curvature of the height field, positive for a convex bump
// (Gaussian apex: h / sigma^2).
double mean_curvature(const ObjectSurface& obj, double x, double y);

// Sine-wave contact diagnostics: RMS over the upper half (truth z > 0) and,
// per period, how far above the wave bottom the skin bridges the valley.
struct SineErrors {
    double upper_rms = 0.0;
    double mean_valley_gap = 0.0;
    std::vector<double> valley_gaps;  // one per valley covered by the points
};

SineErrors sine_errors(const std::vector<WorldPoint>& points, double amplitude, double omega);

void save_radial_csv(const RadialProfile& profile, const std::string& path);
void save_stats_json(const ErrorStats& stats, const std::string& path);

} // namespace stt

#endif
