#include "stt/surface.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stt/errors.hpp"

namespace stt {

void SkinParams::validate() const {
    if (!(pin_height > 0.0)) throw ConfigError("pin height must be positive");
    if (!(skin_thickness > 0.0)) throw ConfigError("skin thickness must be positive");
    if (!(marker_pitch > 0.0)) throw ConfigError("marker pitch must be positive");
    pattern.validate();
}

namespace {

// TPS radial basis r^2 log r, written in terms of r^2.
inline double tps_phi(double r2) {
    if (r2 <= 0.0) return 0.0;
    return 0.5 * r2 * std::log(r2);
}

// d/dx [phi] = x * (log r^2 + 1), and symmetrically for y.
inline double tps_dphi_factor(double r2) {
    if (r2 <= 0.0) return 0.0;
    return std::log(r2) + 1.0;
}

} // namespace

SurfaceModel fit_surface(const std::vector<WorldPoint>& points) {
    const int n = static_cast<int>(points.size());
    if (n < 3) throw FitDegenerate("fit_surface: need at least 3 points");
    for (const auto& p : points)
        if (!p.allFinite()) throw FitDegenerate("fit_surface: non-finite input point");

    const int m = n + 3;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double dx = points[i].x() - points[j].x();
            const double dy = points[i].y() - points[j].y();
            a(i, j) = tps_phi(dx * dx + dy * dy);
        }
        a(i, n) = 1.0;
        a(i, n + 1) = points[i].x();
        a(i, n + 2) = points[i].y();
        a(n, i) = 1.0;
        a(n + 1, i) = points[i].x();
        a(n + 2, i) = points[i].y();
        rhs(i) = points[i].z();
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible())
        throw FitDegenerate("fit_surface: rank-deficient configuration (collinear points?)");
    const Eigen::VectorXd sol = lu.solve(rhs);

    SurfaceModel model;
    model.points_ = points;
    model.weights_ = sol.head(n);
    model.affine_ = sol.tail(3);
    return model;
}

double SurfaceModel::evaluate(double x, double y) const {
    double z = affine_(0) + affine_(1) * x + affine_(2) * y;
    for (size_t i = 0; i < points_.size(); ++i) {
        const double dx = x - points_[i].x();
        const double dy = y - points_[i].y();
        z += weights_(static_cast<int>(i)) * tps_phi(dx * dx + dy * dy);
    }
    return z;
}

Eigen::Vector2d SurfaceModel::gradient(double x, double y) const {
    Eigen::Vector2d g(affine_(1), affine_(2));
    for (size_t i = 0; i < points_.size(); ++i) {
        const double dx = x - points_[i].x();
        const double dy = y - points_[i].y();
        const double f = weights_(static_cast<int>(i)) * tps_dphi_factor(dx * dx + dy * dy);
        g.x() += f * dx;
        g.y() += f * dy;
    }
    return g;
}

std::vector<OrientedPoint> surface_normals(const SurfaceModel& s,
                                           const std::vector<WorldPoint>& at) {
    std::vector<OrientedPoint> out;
    out.reserve(at.size());
    for (const auto& p : at) {
        const Eigen::Vector2d g = s.gradient(p.x(), p.y());
        // grad F with F = f(x,y) - z is (fx, fy, -1); flip to the +z side.
        Eigen::Vector3d n(-g.x(), -g.y(), 1.0);
        n.normalize();
        out.push_back({p, n});
    }
    return out;
}

std::vector<WorldPoint> offset_to_skin(const std::vector<OrientedPoint>& pts,
                                       const SkinParams& skin) {
    skin.validate();
    std::vector<WorldPoint> out;
    out.reserve(pts.size());
    const double h = skin.offset();
    for (const auto& p : pts) out.push_back(p.position - h * p.normal);
    return out;
}

std::vector<WorldPoint> skin_points(const std::vector<WorldPoint>& marker_points,
                                    const SkinParams& skin) {
    const SurfaceModel fm = fit_surface(marker_points);
    return offset_to_skin(surface_normals(fm, marker_points), skin);
}

SurfaceModel reconstruct_skin(const std::vector<WorldPoint>& marker_points,
                              const SkinParams& skin) {
    return fit_surface(skin_points(marker_points, skin));
}

void save_ply(const std::vector<OrientedPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write PLY: " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\n"
           "property double nx\nproperty double ny\nproperty double nz\nend_header\n";
    out.precision(12);
    for (const auto& p : points)
        out << p.position.x() << ' ' << p.position.y() << ' ' << p.position.z() << ' '
            << p.normal.x() << ' ' << p.normal.y() << ' ' << p.normal.z() << '\n';
}

void save_ply(const std::vector<WorldPoint>& points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write PLY: " + path);
    out << "ply\nformat ascii 1.0\nelement vertex " << points.size()
        << "\nproperty double x\nproperty double y\nproperty double z\nend_header\n";
    out.precision(12);
    for (const auto& p : points) out << p.x() << ' ' << p.y() << ' ' << p.z() << '\n';
}

std::vector<WorldPoint> load_ply(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open PLY: " + path);
    std::string line;
    size_t count = 0;
    bool ascii = false;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "format") {
            ss >> tok;
            ascii = tok == "ascii";
        } else if (tok == "element") {
            ss >> tok;
            if (tok == "vertex") ss >> count;
        } else if (tok == "end_header") {
            break;
        }
    }
    if (!ascii) throw IoError("only ascii PLY supported: " + path);
    std::vector<WorldPoint> out;
    out.reserve(count);
    for (size_t i = 0; i < count; ++i) {
        if (!std::getline(in, line)) throw IoError("truncated PLY: " + path);
        std::istringstream ss(line);
        WorldPoint p;
        if (!(ss >> p.x() >> p.y() >> p.z())) throw IoError("bad PLY vertex: " + path);
        out.push_back(p);
    }
    return out;
}

void save_heightmap_csv(const SurfaceModel& s, double resolution, const std::string& path) {
    if (!(resolution > 0.0)) throw ConfigError("heightmap resolution must be positive");
    const auto& pts = s.fit_points();
    double min_x = pts[0].x(), max_x = min_x, min_y = pts[0].y(), max_y = min_y;
    for (const auto& p : pts) {
        min_x = std::min(min_x, p.x());
        max_x = std::max(max_x, p.x());
        min_y = std::min(min_y, p.y());
        max_y = std::max(max_y, p.y());
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot write heightmap: " + path);
    out.precision(12);
    out << "# origin_x=" << min_x << " origin_y=" << min_y << " resolution=" << resolution
        << "\n";
    const int nx = static_cast<int>(std::floor((max_x - min_x) / resolution)) + 1;
    const int ny = static_cast<int>(std::floor((max_y - min_y) / resolution)) + 1;
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            if (i) out << ',';
            out << s.evaluate(min_x + i * resolution, min_y + j * resolution);
        }
        out << '\n';
    }
}

} // namespace stt
