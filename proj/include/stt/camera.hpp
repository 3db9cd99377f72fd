#ifndef STT_CAMERA_HPP
#define STT_CAMERA_HPP

#include <Eigen/Core>
#include <string>
#include <utility>

#include "stt/errors.hpp"

namespace stt {

using PixelPoint = Eigen::Vector2d;
using WorldPoint = Eigen::Vector3d;

struct CameraIntrinsics {
    double fx = 0.0, fy = 0.0;   // focal length [px]
    double cx = 0.0, cy = 0.0;   // principal point [px]
    double k1 = 0.0, k2 = 0.0;   // radial distortion
    double p1 = 0.0, p2 = 0.0;   // tangential distortion

    void validate() const;
};

// Stereo pair. The reference (left) camera sits at the world origin with z
// along the optical axis; the right camera is displaced along x by the
// baseline so that the principal-point-relative disparity
// d = (u_r - cx_r) - (u_l - cx_l) is positive for points in front of the rig.
struct CameraRig {
    CameraIntrinsics left;
    CameraIntrinsics right;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();
    int image_width = 640;   // per camera
    int image_height = 480;

    double baseline() const { return translation.norm(); }
    void validate() const;
};

// Calibration values of the physical sensor's stereo pair.
CameraRig default_rig();

CameraRig load_rig(const std::string& path);
void save_rig(const CameraRig& rig, const std::string& path);

// Forward Brown distortion model, pixel in -> pixel out.
PixelPoint apply_distortion(const PixelPoint& p, const CameraIntrinsics& cam);

// Inverse of apply_distortion via fixed-point iteration (1e-10 px).
// Throws UndistortDiverged after 50 iterations without convergence.
PixelPoint undistort(const PixelPoint& p, const CameraIntrinsics& cam);

// Pinhole projection into both cameras. Distortion optional; when disabled
// triangulate() inverts this exactly.
std::pair<PixelPoint, PixelPoint> project(const WorldPoint& p, const CameraRig& rig,
                                          bool with_distortion = false);

inline constexpr double kMinDisparityPx = 0.05;

// Disparity triangulation: z = b*f/d with d the principal-point-relative
// disparity; x, y from the left-camera ray. Inputs are ideal (undistorted)
// pixels. Throws DegenerateDisparity when |d| <= d_min or z <= 0.
WorldPoint triangulate(const PixelPoint& pl, const PixelPoint& pr, const CameraRig& rig,
                       double d_min = kMinDisparityPx);

} // namespace stt

#endif
