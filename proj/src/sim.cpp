#include "stt/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stt/detect.hpp"
#include "stt/errors.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace stt {

// --- object surfaces ------------------------------------------------------

ObjectSurface ObjectSurface::flat(double height) {
    ObjectSurface s;
    s.kind_ = Kind::Flat;
    s.a_ = height;
    return s;
}

ObjectSurface ObjectSurface::gaussian(double h, double sigma2) {
    if (sigma2 <= 0.0) throw ConfigError("gaussian object needs sigma2 > 0");
    ObjectSurface s;
    s.kind_ = Kind::Gaussian;
    s.a_ = h;
    s.b_ = sigma2;
    return s;
}

ObjectSurface ObjectSurface::sine(double amplitude, double omega) {
    if (omega <= 0.0) throw ConfigError("sine object needs omega > 0");
    ObjectSurface s;
    s.kind_ = Kind::Sine;
    s.a_ = amplitude;
    s.b_ = omega;
    return s;
}

ObjectSurface ObjectSurface::heightmap(HeightGrid grid) {
    if (grid.nx() < 2 || grid.ny() < 2 || grid.resolution <= 0.0)
        throw ConfigError("heightmap object needs a 2x2 grid at least");
    ObjectSurface s;
    s.kind_ = Kind::Heightmap;
    s.grid_ = std::move(grid);
    return s;
}

namespace {

// Bilinear sample clamped to the grid border; unoccupied cells read as 0.
double grid_value(const HeightGrid& g, int i, int j) {
    i = std::clamp(i, 0, g.nx() - 1);
    j = std::clamp(j, 0, g.ny() - 1);
    return g.mask(j, i) ? g.heights(j, i) : 0.0;
}

double grid_bilinear(const HeightGrid& g, double x, double y) {
    const double u = (x - g.origin_x) / g.resolution - 0.5;
    const double v = (y - g.origin_y) / g.resolution - 0.5;
    const int i0 = static_cast<int>(std::floor(u));
    const int j0 = static_cast<int>(std::floor(v));
    const double fu = u - i0, fv = v - j0;
    const double z00 = grid_value(g, i0, j0), z10 = grid_value(g, i0 + 1, j0);
    const double z01 = grid_value(g, i0, j0 + 1), z11 = grid_value(g, i0 + 1, j0 + 1);
    return (1 - fv) * ((1 - fu) * z00 + fu * z10) + fv * ((1 - fu) * z01 + fu * z11);
}

} // namespace

double ObjectSurface::evaluate(double x, double y) const {
    switch (kind_) {
        case Kind::Flat: return a_;
        case Kind::Gaussian: return a_ * std::exp(-(x * x + y * y) / (2.0 * b_));
        case Kind::Sine: return a_ * std::sin(b_ * x);
        case Kind::Heightmap: return grid_bilinear(grid_, x, y);
    }
    return 0.0;
}

Eigen::Vector2d ObjectSurface::gradient(double x, double y) const {
    switch (kind_) {
        case Kind::Flat: return {0.0, 0.0};
        case Kind::Gaussian: {
            const double z = a_ * std::exp(-(x * x + y * y) / (2.0 * b_));
            return {-x / b_ * z, -y / b_ * z};
        }
        case Kind::Sine: return {a_ * b_ * std::cos(b_ * x), 0.0};
        case Kind::Heightmap: {
            const double h = 0.5 * grid_.resolution;
            return {(grid_bilinear(grid_, x + h, y) - grid_bilinear(grid_, x - h, y)) / (2 * h),
                    (grid_bilinear(grid_, x, y + h) - grid_bilinear(grid_, x, y - h)) / (2 * h)};
        }
    }
    return {0.0, 0.0};
}

// --- press planning -------------------------------------------------------

void PressSpec::validate() const {
    if (press_depth <= 0.0) throw ConfigError("press_depth must be positive");
    if (approach_height < 0.0) throw ConfigError("approach_height must be non-negative");
}

ScanPlan plan_zigzag(double x0, double y0, double x1, double y1, double step,
                     double press_depth) {
    if (step <= 0.0) throw ConfigError("zigzag step must be positive");
    if (x1 < x0 || y1 < y0) throw ConfigError("zigzag region is inverted");
    auto count = [step](double lo, double hi) {
        return 1 + static_cast<int>(std::ceil((hi - lo) / step - 1e-9));
    };
    const int nx = count(x0, x1), ny = count(y0, y1);
    const double dx = nx > 1 ? (x1 - x0) / (nx - 1) : 0.0;
    const double dy = ny > 1 ? (y1 - y0) / (ny - 1) : 0.0;
    ScanPlan plan;
    plan.step = step;
    for (int j = 0; j < ny; ++j) {
        for (int k = 0; k < nx; ++k) {
            const int i = (j % 2 == 0) ? k : nx - 1 - k;  // serpentine rows
            PressSpec p;
            p.center_x = x0 + i * dx;
            p.center_y = y0 + j * dy;
            p.press_depth = press_depth;
            plan.presses.push_back(p);
        }
    }
    return plan;
}

// --- contact model --------------------------------------------------------

double SkinField::evaluate(double x, double y) const {
    const double g = object.evaluate(x, y);
    if (blend <= 0.0) return std::max(g, plane_height);
    const double u = (g - plane_height) / blend;  // softplus smooth-max
    if (u > 40.0) return g;
    if (u < -40.0) return plane_height;
    return plane_height + blend * std::log1p(std::exp(u));
}

bool SkinField::in_contact(double x, double y) const {
    return object.evaluate(x, y) > plane_height;
}

Eigen::Vector2d SkinField::gradient(double x, double y) const {
    const Eigen::Vector2d g = object.gradient(x, y);
    if (blend <= 0.0) return in_contact(x, y) ? g : Eigen::Vector2d::Zero();
    const double u = (object.evaluate(x, y) - plane_height) / blend;
    if (u > 40.0) return g;
    if (u < -40.0) return Eigen::Vector2d::Zero();
    return g / (1.0 + std::exp(-u));
}

SkinField deform_skin(const ObjectSurface& obj, const PressSpec& press, const SkinParams& skin,
                      double footprint_radius, double blend) {
    press.validate();
    skin.validate();
    if (footprint_radius <= 0.0) throw ConfigError("footprint radius must be positive");

    // Highest object point under the footprint = first contact.
    const double res = 0.05;
    double g_max = -std::numeric_limits<double>::infinity();
    const int n = static_cast<int>(std::ceil(footprint_radius / res));
    for (int j = -n; j <= n; ++j) {
        for (int i = -n; i <= n; ++i) {
            const double x = press.center_x + i * res, y = press.center_y + j * res;
            const double dx = i * res, dy = j * res;
            if (dx * dx + dy * dy > footprint_radius * footprint_radius) continue;
            g_max = std::max(g_max, obj.evaluate(x, y));
        }
    }

    SkinField field;
    field.object = obj;
    field.plane_height = g_max - press.press_depth;
    field.center_x = press.center_x;
    field.center_y = press.center_y;
    field.radius = footprint_radius;
    field.blend = blend;
    return field;
}

// --- marker lattice -------------------------------------------------------

namespace {

// Hexagonal lattice out to `rings` rings, axial coordinates -> cartesian.
std::vector<Eigen::Vector2d> hex_lattice(int rings, double pitch) {
    std::vector<Eigen::Vector2d> pts;
    for (int q = -rings; q <= rings; ++q) {
        for (int r = std::max(-rings, -q - rings); r <= std::min(rings, -q + rings); ++r) {
            pts.emplace_back(pitch * (q + 0.5 * r), pitch * (std::numbers::sqrt3 / 2.0) * r);
        }
    }
    return pts;
}

int hex_ring_of(const Eigen::Vector2d& p, double pitch) {
    // back to axial coordinates, then hex distance
    const double q = p.x() / pitch - p.y() / (pitch * std::numbers::sqrt3);
    const double r = 2.0 * p.y() / (pitch * std::numbers::sqrt3);
    const long qi = std::lround(q), ri = std::lround(r);
    return static_cast<int>((std::abs(qi) + std::abs(ri) + std::abs(qi + ri)) / 2);
}

} // namespace

std::vector<Eigen::Vector2d> marker_lattice(const PatternSpec& pattern, double pitch,
                                            double rotation) {
    pattern.validate();
    if (pitch <= 0.0) throw ConfigError("marker pitch must be positive");
    std::vector<Eigen::Vector2d> pts;
    if (pattern.name == "square") {
        const int side = 2 * pattern.layers - 1;
        const double half = (side - 1) / 2.0;
        for (int j = 0; j < side; ++j)
            for (int i = 0; i < side; ++i)
                pts.emplace_back((i - half) * pitch, (j - half) * pitch);
    } else if (pattern.name == "hexagon") {
        pts = hex_lattice(pattern.layers - 1, pitch);
    } else if (pattern.name == "circular") {
        // hex lattice with every ring snapped onto its circumscribing circle
        pts = hex_lattice(pattern.layers - 1, pitch);
        for (auto& p : pts) {
            const int ring = hex_ring_of(p, pitch);
            const double norm = p.norm();
            if (ring > 0 && norm > 0.0) p *= ring * pitch / norm;
        }
    } else {
        throw ConfigError("no lattice generator for pattern '" + pattern.name + "'");
    }
    if (static_cast<int>(pts.size()) != pattern.expected_count)
        throw ConfigError("lattice size does not match the pattern spec");
    if (rotation != 0.0) {
        const Eigen::Rotation2Dd rot(rotation);
        for (auto& p : pts) p = rot * p;
    }
    return pts;
}

std::vector<WorldPoint> place_markers(const SkinField& field, const SkinParams& skin,
                                      double lattice_rotation) {
    const auto lattice = marker_lattice(skin.pattern, skin.marker_pitch, lattice_rotation);
    std::vector<WorldPoint> markers;
    markers.reserve(lattice.size());
    for (const auto& l : lattice) {
        const double x = field.center_x + l.x(), y = field.center_y + l.y();
        const double z = field.evaluate(x, y);
        const Eigen::Vector2d g = field.gradient(x, y);
        Eigen::Vector3d n(-g.x(), -g.y(), 1.0);
        n.normalize();
        markers.push_back(WorldPoint(x, y, z) + skin.offset() * n);
    }
    return markers;
}

// --- poses ----------------------------------------------------------------

Eigen::Matrix4d press_pose(double center_x, double center_y, double camera_height) {
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
    pose(1, 1) = -1.0;  // camera y is image-down, global y is up
    pose(2, 2) = -1.0;  // camera looks down the global -z
    pose(0, 3) = center_x;
    pose(1, 3) = center_y;
    pose(2, 3) = camera_height;
    return pose;
}

WorldPoint apply_pose(const Eigen::Matrix4d& pose, const WorldPoint& p) {
    return pose.topLeftCorner<3, 3>() * p + pose.topRightCorner<3, 1>();
}

WorldPoint apply_pose_inverse(const Eigen::Matrix4d& pose, const WorldPoint& p) {
    return pose.topLeftCorner<3, 3>().transpose() * (p - pose.topRightCorner<3, 1>());
}

// --- observation & rendering ----------------------------------------------

StereoObservation observe(const std::vector<WorldPoint>& markers_cam, const CameraRig& rig,
                          const RefractionParams& refr, double rest_marker_depth,
                          bool with_distortion) {
    refr.validate();
    StereoObservation obs;
    obs.left.reserve(markers_cam.size());
    obs.right.reserve(markers_cam.size());
    for (std::size_t i = 0; i < markers_cam.size(); ++i) {
        const WorldPoint& m = markers_cam[i];
        if (m.z() <= 0.0) throw BehindCamera("simulated marker behind the camera");
        // Marker displacement toward the camera looks shrunk by n_gel.
        const double z_app = rest_marker_depth + (m.z() - rest_marker_depth) / refr.n_gel;
        const WorldPoint apparent(m.x(), m.y(), z_app);
        auto [pl, pr] = project(apparent, rig, with_distortion);
        obs.left.push_back(pl);
        obs.right.push_back(pr);
        obs.ids.push_back(static_cast<int>(i));
        obs.apparent_depth.push_back(z_app);
    }
    return obs;
}

GrayImage render(const std::vector<PixelPoint>& pixels, int width, int height,
                 double spot_sigma_px, double noise_sigma, std::uint64_t seed) {
    if (width <= 0 || height <= 0 || spot_sigma_px <= 0.0)
        throw ConfigError("render needs positive size and spot sigma");
    GrayImage img;
    img.data = Eigen::MatrixXd::Zero(height, width);
    const int win = static_cast<int>(std::ceil(4.0 * spot_sigma_px));
    const double inv2s2 = 1.0 / (2.0 * spot_sigma_px * spot_sigma_px);
    for (const auto& p : pixels) {
        const int u0 = static_cast<int>(std::lround(p.x()));
        const int v0 = static_cast<int>(std::lround(p.y()));
        for (int v = std::max(0, v0 - win); v <= std::min(height - 1, v0 + win); ++v) {
            for (int u = std::max(0, u0 - win); u <= std::min(width - 1, u0 + win); ++u) {
                const double du = u - p.x(), dv = v - p.y();
                img.data(v, u) += std::exp(-(du * du + dv * dv) * inv2s2);
            }
        }
    }
    if (noise_sigma > 0.0) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> noise(0.0, noise_sigma);
        for (int v = 0; v < height; ++v)
            for (int u = 0; u < width; ++u) img.data(v, u) += noise(rng);
    }
    img.data = img.data.cwiseMax(0.0).cwiseMin(1.0);
    return img;
}

// --- scenes -----------------------------------------------------------------

double SceneConfig::effective_footprint() const {
    if (footprint_radius > 0.0) return footprint_radius;
    double r = 0.0;
    for (const auto& p : marker_lattice(pattern, skin.marker_pitch)) r = std::max(r, p.norm());
    return r + skin.marker_pitch;
}

SceneConfig scene_preset(const std::string& name) {
    SceneConfig cfg;
    if (name == "flat") {
        cfg.object = ObjectSurface::flat(0.0);
    } else if (name == "gaussian-s50") {
        cfg.object = ObjectSurface::gaussian(5.0, 50.0);
    } else if (name == "gaussian-s50over3") {
        cfg.object = ObjectSurface::gaussian(5.0, 50.0 / 3.0);
    } else if (name == "gaussian-s10") {
        cfg.object = ObjectSurface::gaussian(5.0, 10.0);
    } else if (name == "gaussian-s5") {
        cfg.object = ObjectSurface::gaussian(5.0, 5.0);
    } else if (name == "gaussian-s5over3") {
        cfg.object = ObjectSurface::gaussian(5.0, 5.0 / 3.0);
    } else if (name.rfind("sine-w", 0) == 0) {
        const double wavelength = std::stod(name.substr(6));
        cfg.object = ObjectSurface::sine(2.5, 2.0 * std::numbers::pi / wavelength);
    } else {
        throw ConfigError("unknown scene preset '" + name + "'");
    }
    return cfg;
}

Scene simulate_scene(const SceneConfig& config) {
    config.skin.validate();
    config.rig.validate();
    Scene scene;
    scene.config = config;
    scene.config.skin.pattern = config.pattern;  // the lattice follows the scene pattern
    scene.config.footprint_radius = config.effective_footprint();
    const SkinParams& skin = scene.config.skin;

    const bool single = config.x0 == config.x1 && config.y0 == config.y1;
    if (single) {
        PressSpec p;
        p.center_x = config.x0;
        p.center_y = config.y0;
        p.press_depth = config.press_depth;
        scene.plan.presses = {p};
        scene.plan.step = config.step;
    } else {
        scene.plan = plan_zigzag(config.x0, config.y0, config.x1, config.y1, config.step,
                                 config.press_depth);
    }

    const auto lattice =
        marker_lattice(config.pattern, skin.marker_pitch, config.lattice_rotation);
    double lattice_r = 0.0;
    for (const auto& l : lattice) lattice_r = std::max(lattice_r, l.norm());

    for (std::size_t i = 0; i < scene.plan.presses.size(); ++i) {
        const PressSpec& press = scene.plan.presses[i];
        const SkinField field =
            deform_skin(config.object, press, skin, scene.config.footprint_radius);

        PressRecord rec;
        rec.press_id = static_cast<int>(i);
        rec.press = press;
        rec.camera_height = field.plane_height + config.rest_skin_depth;
        rec.pose = press_pose(press.center_x, press.center_y, rec.camera_height);

        rec.markers_global = place_markers(field, skin, config.lattice_rotation);
        rec.skin_global.reserve(lattice.size());
        for (const auto& l : lattice) {
            const double x = press.center_x + l.x(), y = press.center_y + l.y();
            rec.skin_global.emplace_back(x, y, field.evaluate(x, y));
        }

        std::vector<WorldPoint> markers_cam;
        markers_cam.reserve(rec.markers_global.size());
        for (std::size_t k = 0; k < rec.markers_global.size(); ++k) {
            WorldPoint m = apply_pose_inverse(rec.pose, rec.markers_global[k]);
            // optional systematic rim error: outermost ring rides too close
            if (config.periphery_bias != 0.0 && lattice[k].norm() >= lattice_r - 0.5 * skin.marker_pitch)
                m.z() -= config.periphery_bias;
            markers_cam.push_back(m);
        }
        rec.observation = observe(markers_cam, config.rig, config.refraction,
                                  config.rest_marker_depth(), config.with_distortion);
        scene.presses.push_back(std::move(rec));
    }
    return scene;
}

// --- scene persistence ------------------------------------------------------

namespace {

std::string press_stem(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "press_%03d", id);
    return buf;
}

json object_to_json(const ObjectSurface& obj, const std::string& dir) {
    json j;
    switch (obj.kind()) {
        case ObjectSurface::Kind::Flat:
            j = {{"kind", "flat"}, {"height", obj.evaluate(0, 0)}};
            break;
        case ObjectSurface::Kind::Gaussian:
            j = {{"kind", "gaussian"},
                 {"height", obj.gaussian_height()},
                 {"sigma2", obj.gaussian_sigma2()}};
            break;
        case ObjectSurface::Kind::Sine:
            j = {{"kind", "sine"}, {"amplitude", obj.sine_amplitude()}, {"omega", obj.sine_omega()}};
            break;
        case ObjectSurface::Kind::Heightmap:
            j = {{"kind", "heightmap"}, {"png", "object.png"}, {"sidecar", "object.json"}};
            (void)dir;
            break;
    }
    return j;
}

ObjectSurface object_from_json(const json& j, const std::string& dir) {
    const std::string kind = j.at("kind");
    if (kind == "flat") return ObjectSurface::flat(j.at("height"));
    if (kind == "gaussian") return ObjectSurface::gaussian(j.at("height"), j.at("sigma2"));
    if (kind == "sine") return ObjectSurface::sine(j.at("amplitude"), j.at("omega"));
    if (kind == "heightmap")
        return ObjectSurface::heightmap(load_grid_png16(
            dir + "/" + j.at("png").get<std::string>(),
            dir + "/" + j.at("sidecar").get<std::string>()));
    throw ConfigError("unknown object kind '" + kind + "'");
}

void write_pixel_csv(const std::vector<PixelPoint>& pixels, std::uint64_t seed,
                     const std::string& path) {
    std::vector<PixelPoint> rows = pixels;
    std::mt19937_64 rng(seed);
    std::shuffle(rows.begin(), rows.end(), rng);  // correspondence is DTRC's job
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "u,v\n";
    out.precision(12);
    for (const auto& p : rows) out << p.x() << "," << p.y() << "\n";
}

std::vector<PixelPoint> read_pixel_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string line;
    std::getline(in, line);  // header
    std::vector<PixelPoint> pixels;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double u, v;
        char comma;
        if (!(ls >> u >> comma >> v)) throw IoError("malformed pixel CSV row in " + path);
        pixels.emplace_back(u, v);
    }
    return pixels;
}

json points_to_json(const std::vector<WorldPoint>& pts) {
    json arr = json::array();
    for (const auto& p : pts) arr.push_back({p.x(), p.y(), p.z()});
    return arr;
}

std::vector<WorldPoint> points_from_json(const json& arr) {
    std::vector<WorldPoint> pts;
    for (const auto& p : arr) pts.emplace_back(p.at(0), p.at(1), p.at(2));
    return pts;
}

} // namespace

void write_scene(const Scene& scene, const std::string& dir) {
    fs::create_directories(dir);
    const SceneConfig& cfg = scene.config;
    save_rig(cfg.rig, dir + "/rig.json");
    if (cfg.object.kind() == ObjectSurface::Kind::Heightmap)
        save_grid_png16(cfg.object.heightmap_grid(), dir + "/object.png", dir + "/object.json");

    json manifest;
    manifest["pattern"] = cfg.pattern.name;
    manifest["skin"] = {{"pin_height", cfg.skin.pin_height},
                        {"skin_thickness", cfg.skin.skin_thickness},
                        {"marker_pitch", cfg.skin.marker_pitch}};
    manifest["refraction"] = {{"n_gel", cfg.refraction.n_gel}, {"n_air", cfg.refraction.n_air}};
    manifest["rig"] = "rig.json";
    manifest["object"] = object_to_json(cfg.object, dir);
    manifest["rest_skin_depth"] = cfg.rest_skin_depth;
    manifest["footprint_radius"] = cfg.footprint_radius;
    manifest["press_depth"] = cfg.press_depth;
    manifest["noise_sigma"] = cfg.noise_sigma;
    manifest["render_images"] = cfg.render_images;
    manifest["with_distortion"] = cfg.with_distortion;
    manifest["periphery_bias"] = cfg.periphery_bias;
    manifest["lattice_rotation"] = cfg.lattice_rotation;
    manifest["seed"] = cfg.seed;
    manifest["region"] = {cfg.x0, cfg.y0, cfg.x1, cfg.y1};
    manifest["step"] = cfg.step;

    json presses = json::array();
    for (const auto& rec : scene.presses) {
        json jp;
        jp["id"] = rec.press_id;
        jp["center"] = {rec.press.center_x, rec.press.center_y};
        jp["press_depth"] = rec.press.press_depth;
        jp["camera_height"] = rec.camera_height;
        json rot = json::array(), tr = json::array();
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) rot.push_back(rec.pose(r, c));
        for (int r = 0; r < 3; ++r) tr.push_back(rec.pose(r, 3));
        jp["pose_r"] = rot;
        jp["pose_t"] = tr;
        presses.push_back(jp);

        const std::string stem = dir + "/" + press_stem(rec.press_id);
        if (cfg.render_images) {
            const double depth = rec.observation.apparent_depth.empty()
                                     ? cfg.rest_marker_depth()
                                     : rec.observation.apparent_depth.front();
            const double sigma = 0.6 * 0.5 * cfg.rig.left.fx / depth;  // 0.5 mm marker radius
            GrayImage left = render(rec.observation.left, cfg.rig.image_width,
                                    cfg.rig.image_height, sigma, cfg.noise_sigma,
                                    cfg.seed + 2 * rec.press_id + 1);
            GrayImage right = render(rec.observation.right, cfg.rig.image_width,
                                     cfg.rig.image_height, sigma, cfg.noise_sigma,
                                     cfg.seed + 2 * rec.press_id + 2);
            GrayImage stereo;
            stereo.data.resize(left.data.rows(), left.data.cols() + right.data.cols());
            stereo.data << left.data, right.data;
            save_png_gray8(stereo, stem + ".png");
        } else {
            write_pixel_csv(rec.observation.left, cfg.seed + 2 * rec.press_id + 1,
                            stem + "_left.csv");
            write_pixel_csv(rec.observation.right, cfg.seed + 2 * rec.press_id + 2,
                            stem + "_right.csv");
        }

        json truth;
        truth["ids"] = rec.observation.ids;
        truth["markers"] = points_to_json(rec.markers_global);
        truth["skin"] = points_to_json(rec.skin_global);
        std::ofstream tout(stem + "_truth.json");
        if (!tout) throw IoError("cannot write " + stem + "_truth.json");
        tout << truth.dump(2) << "\n";
    }
    manifest["presses"] = presses;

    std::ofstream out(dir + "/manifest.json");
    if (!out) throw IoError("cannot write " + dir + "/manifest.json");
    out << manifest.dump(2) << "\n";
}

SceneManifest load_scene(const std::string& dir) {
    std::ifstream in(dir + "/manifest.json");
    if (!in) throw IoError("cannot read " + dir + "/manifest.json");
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw IoError("malformed manifest: " + std::string(e.what()));
    }

    SceneManifest sm;
    sm.dir = dir;
    SceneConfig& cfg = sm.config;
    try {
        cfg.pattern = pattern_by_name(manifest.at("pattern"));
        cfg.skin.pattern = cfg.pattern;
        const json& skin = manifest.at("skin");
        cfg.skin.pin_height = skin.at("pin_height");
        cfg.skin.skin_thickness = skin.at("skin_thickness");
        cfg.skin.marker_pitch = skin.at("marker_pitch");
        cfg.refraction.n_gel = manifest.at("refraction").at("n_gel");
        cfg.refraction.n_air = manifest.at("refraction").at("n_air");
        cfg.rig = load_rig(dir + "/" + manifest.at("rig").get<std::string>());
        cfg.object = object_from_json(manifest.at("object"), dir);
        cfg.rest_skin_depth = manifest.at("rest_skin_depth");
        cfg.footprint_radius = manifest.at("footprint_radius");
        cfg.press_depth = manifest.at("press_depth");
        cfg.noise_sigma = manifest.at("noise_sigma");
        cfg.render_images = manifest.at("render_images");
        cfg.with_distortion = manifest.at("with_distortion");
        cfg.periphery_bias = manifest.at("periphery_bias");
        cfg.lattice_rotation = manifest.at("lattice_rotation");
        cfg.seed = manifest.at("seed");
        cfg.x0 = manifest.at("region").at(0);
        cfg.y0 = manifest.at("region").at(1);
        cfg.x1 = manifest.at("region").at(2);
        cfg.y1 = manifest.at("region").at(3);
        cfg.step = manifest.at("step");

        for (const json& jp : manifest.at("presses")) {
            PressManifest pm;
            pm.press_id = jp.at("id");
            pm.press.center_x = jp.at("center").at(0);
            pm.press.center_y = jp.at("center").at(1);
            pm.press.press_depth = jp.at("press_depth");
            pm.camera_height = jp.at("camera_height");
            pm.pose = Eigen::Matrix4d::Identity();
            const json& rot = jp.at("pose_r");
            const json& tr = jp.at("pose_t");
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) pm.pose(r, c) = rot.at(3 * r + c);
            for (int r = 0; r < 3; ++r) pm.pose(r, 3) = tr.at(r);
            sm.presses.push_back(pm);
        }
    } catch (const json::exception& e) {
        throw IoError("manifest missing fields: " + std::string(e.what()));
    }
    return sm;
}

std::vector<PixelPoint> SceneManifest::load_pixels(int press_id, bool right_camera) const {
    const std::string stem = dir + "/" + press_stem(press_id);
    if (config.render_images) {
        const GrayImage stereo = load_png_gray(stem + ".png");
        auto [left, right] = split_stereo_frame(stereo);
        const GrayImage& img = right_camera ? right : left;
        std::vector<PixelPoint> pixels;
        for (const Blob& b : detect_markers(img, DetectorSettings{})) pixels.push_back(b.center);
        return pixels;
    }
    return read_pixel_csv(stem + (right_camera ? "_right.csv" : "_left.csv"));
}

namespace {

std::vector<WorldPoint> load_truth_field(const std::string& path, const char* key) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    json j;
    in >> j;
    return points_from_json(j.at(key));
}

} // namespace

std::vector<WorldPoint> SceneManifest::load_truth_markers(int press_id) const {
    return load_truth_field(dir + "/" + press_stem(press_id) + "_truth.json", "markers");
}

std::vector<WorldPoint> SceneManifest::load_truth_skin(int press_id) const {
    return load_truth_field(dir + "/" + press_stem(press_id) + "_truth.json", "skin");
}

} // namespace stt
