#include "stt/camera.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

namespace stt {

using nlohmann::json;

void CameraIntrinsics::validate() const {
    if (!(fx > 0.0) || !(fy > 0.0))
        throw ConfigError("camera focal length must be positive");
    if (!std::isfinite(cx) || !std::isfinite(cy))
        throw ConfigError("camera principal point must be finite");
}

void CameraRig::validate() const {
    left.validate();
    right.validate();
    Eigen::Matrix3d rtr = rotation.transpose() * rotation;
    if ((rtr - Eigen::Matrix3d::Identity()).norm() > 1e-9)
        throw ConfigError("rig rotation is not orthonormal");
    if (!(baseline() > 0.0))
        throw ConfigError("rig baseline must be positive");
    if (image_width <= 0 || image_height <= 0)
        throw ConfigError("rig image size must be positive");
}

CameraRig default_rig() {
    CameraRig rig;
    rig.left = {442.37, 442.51, 315.67, 237.97, -0.74, -0.03, 0.00017, -0.00075};
    rig.right = {435.66, 435.76, 324.72, 237.97, -0.07, -0.05, 0.00060, -0.00064};
    Eigen::Matrix3d r;
    r << 0.9878, 0.0106, -0.1554,
        -0.0104, 0.9999, 0.0022,
         0.1554, -0.0005, 0.9879;
    // Calibration tables list the rotation to four decimals; snap to the
    // nearest true rotation.
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(r, Eigen::ComputeFullU | Eigen::ComputeFullV);
    rig.rotation = svd.matrixU() * svd.matrixV().transpose();
    rig.translation = Eigen::Vector3d(12.49, -0.08, 0.59);
    rig.image_width = 640;
    rig.image_height = 480;
    return rig;
}

static CameraIntrinsics intrinsics_from_json(const json& j) {
    CameraIntrinsics c;
    c.fx = j.at("fx").get<double>();
    c.fy = j.at("fy").get<double>();
    c.cx = j.at("cx").get<double>();
    c.cy = j.at("cy").get<double>();
    c.k1 = j.value("k1", 0.0);
    c.k2 = j.value("k2", 0.0);
    c.p1 = j.value("p1", 0.0);
    c.p2 = j.value("p2", 0.0);
    return c;
}

static json intrinsics_to_json(const CameraIntrinsics& c) {
    return json{{"fx", c.fx}, {"fy", c.fy}, {"cx", c.cx}, {"cy", c.cy},
                {"k1", c.k1}, {"k2", c.k2}, {"p1", c.p1}, {"p2", c.p2}};
}

CameraRig load_rig(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open rig config: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("rig config parse error in " + path + ": " + e.what());
    }
    CameraRig rig;
    try {
        rig.left = intrinsics_from_json(j.at("left"));
        rig.right = intrinsics_from_json(j.at("right"));
        auto rv = j.at("R").get<std::vector<double>>();
        if (rv.size() != 9) throw ConfigError("rig R must have 9 entries (row-major)");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rig.rotation(r, c) = rv[3 * r + c];
        auto tv = j.at("t").get<std::vector<double>>();
        if (tv.size() != 3) throw ConfigError("rig t must have 3 entries");
        rig.translation = Eigen::Vector3d(tv[0], tv[1], tv[2]);
        rig.image_width = j.value("image_width", 640);
        rig.image_height = j.value("image_height", 480);
    } catch (const json::exception& e) {
        throw ConfigError("rig config field error in " + path + ": " + e.what());
    }
    // Tolerate rotations quoted to limited precision.
    Eigen::Matrix3d rtr = rig.rotation.transpose() * rig.rotation;
    double dev = (rtr - Eigen::Matrix3d::Identity()).norm();
    if (dev > 1e-3) throw ConfigError("rig rotation is far from orthonormal");
    if (dev > 1e-12) {
        Eigen::JacobiSVD<Eigen::Matrix3d> svd(rig.rotation,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        rig.rotation = svd.matrixU() * svd.matrixV().transpose();
    }
    rig.validate();
    return rig;
}

void save_rig(const CameraRig& rig, const std::string& path) {
    json j;
    j["left"] = intrinsics_to_json(rig.left);
    j["right"] = intrinsics_to_json(rig.right);
    std::vector<double> rv(9);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rv[3 * r + c] = rig.rotation(r, c);
    j["R"] = rv;
    j["t"] = std::vector<double>{rig.translation.x(), rig.translation.y(), rig.translation.z()};
    j["image_width"] = rig.image_width;
    j["image_height"] = rig.image_height;
    std::ofstream out(path);
    if (!out) throw IoError("cannot write rig config: " + path);
    out << j.dump(2) << "\n";
}

PixelPoint apply_distortion(const PixelPoint& p, const CameraIntrinsics& cam) {
    const double xn = (p.x() - cam.cx) / cam.fx;
    const double yn = (p.y() - cam.cy) / cam.fy;
    const double r2 = xn * xn + yn * yn;
    const double radial = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
    const double xd = xn * radial + 2.0 * cam.p1 * xn * yn + cam.p2 * (r2 + 2.0 * xn * xn);
    const double yd = yn * radial + cam.p1 * (r2 + 2.0 * yn * yn) + 2.0 * cam.p2 * xn * yn;
    return {cam.cx + cam.fx * xd, cam.cy + cam.fy * yd};
}

PixelPoint undistort(const PixelPoint& p, const CameraIntrinsics& cam) {
    if (!p.allFinite()) throw Error("undistort: non-finite pixel");
    const double xd = (p.x() - cam.cx) / cam.fx;
    const double yd = (p.y() - cam.cy) / cam.fy;
    double xn = xd, yn = yd;
    const double tol = 1e-10 / std::max(cam.fx, cam.fy);  // 1e-10 px in normalized units
    for (int it = 0; it < 50; ++it) {
        const double r2 = xn * xn + yn * yn;
        const double radial = 1.0 + cam.k1 * r2 + cam.k2 * r2 * r2;
        const double dx = 2.0 * cam.p1 * xn * yn + cam.p2 * (r2 + 2.0 * xn * xn);
        const double dy = cam.p1 * (r2 + 2.0 * yn * yn) + 2.0 * cam.p2 * xn * yn;
        const double xn_new = (xd - dx) / radial;
        const double yn_new = (yd - dy) / radial;
        const double step = std::hypot(xn_new - xn, yn_new - yn);
        xn = xn_new;
        yn = yn_new;
        if (step < tol)
            return {cam.cx + cam.fx * xn, cam.cy + cam.fy * yn};
    }
    throw UndistortDiverged("undistort: fixed-point iteration did not converge");
}

std::pair<PixelPoint, PixelPoint> project(const WorldPoint& p, const CameraRig& rig,
                                          bool with_distortion) {
    if (!(p.z() > 0.0)) throw BehindCamera("project: point has z <= 0");
    const double b = rig.baseline();
    const double f = rig.left.fx;
    PixelPoint pl(rig.left.cx + f * p.x() / p.z(),
                  rig.left.cy + rig.left.fy * p.y() / p.z());
    PixelPoint pr(rig.right.cx + f * (p.x() + b) / p.z(),
                  rig.right.cy + rig.right.fy * p.y() / p.z());
    if (with_distortion) {
        pl = apply_distortion(pl, rig.left);
        pr = apply_distortion(pr, rig.right);
    }
    return {pl, pr};
}

WorldPoint triangulate(const PixelPoint& pl, const PixelPoint& pr, const CameraRig& rig,
                       double d_min) {
    const double d = (pr.x() - rig.right.cx) - (pl.x() - rig.left.cx);
    if (std::abs(d) <= d_min)
        throw DegenerateDisparity("triangulate: |d| <= d_min, point at effective infinity");
    const double b = rig.baseline();
    const double f = rig.left.fx;
    const double z = b * f / d;
    if (!(z > 0.0))
        throw DegenerateDisparity("triangulate: disparity sign places point behind cameras");
    const double x = (pl.x() - rig.left.cx) * z / f;
    const double y = (pl.y() - rig.left.cy) * z / rig.left.fy;
    return {x, y, z};
}

} // namespace stt
