#include "stt/stitch.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include <nlohmann/json.hpp>

#include "stt/errors.hpp"
#include "stt/image.hpp"

namespace stt {

void StitchParams::validate() const {
    if (!(overlap_threshold > 0.0)) throw ConfigError("overlap threshold must be positive");
    if (!(mollifier_epsilon > 0.0)) throw ConfigError("mollifier epsilon must be positive");
    if (!(raster_resolution > 0.0)) throw ConfigError("raster resolution must be positive");
}

double HeightGrid::occupied_mean() const {
    double sum = 0.0;
    long count = 0;
    for (int j = 0; j < ny(); ++j)
        for (int i = 0; i < nx(); ++i)
            if (mask(j, i)) {
                sum += heights(j, i);
                ++count;
            }
    return count ? sum / static_cast<double>(count) : 0.0;
}

namespace {

// Nearest neighbor in the (x, y)-plane; brute force (patches carry a few
// hundred points).
int nearest_xy(const WorldPoint& q, const std::vector<WorldPoint>& pts) {
    int best = -1;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < static_cast<int>(pts.size()); ++i) {
        const double dx = q.x() - pts[i].x();
        const double dy = q.y() - pts[i].y();
        const double d2 = dx * dx + dy * dy;
        if (d2 < best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return best;
}

double dist_xy(const WorldPoint& a, const WorldPoint& b) {
    return std::hypot(a.x() - b.x(), a.y() - b.y());
}

} // namespace

OverlapPartition classify_overlap(const ContactPatch& a, const ContactPatch& b,
                                  const StitchParams& p) {
    p.validate();
    OverlapPartition out;
    for (int i = 0; i < static_cast<int>(a.points.size()); ++i) {
        const int j = nearest_xy(a.points[i], b.points);
        const bool overlap = j >= 0 && dist_xy(a.points[i], b.points[j]) < p.overlap_threshold;
        (overlap ? out.overlap_a : out.nonoverlap_a).push_back(i);
    }
    for (int j = 0; j < static_cast<int>(b.points.size()); ++j) {
        const int i = nearest_xy(b.points[j], a.points);
        const bool overlap = i >= 0 && dist_xy(b.points[j], a.points[i]) < p.overlap_threshold;
        (overlap ? out.overlap_b : out.nonoverlap_b).push_back(j);
    }
    return out;
}

std::vector<TaggedPoint> extract_contiguous(const ContactPatch& a, const ContactPatch& b,
                                            const OverlapPartition& part) {
    std::set<std::pair<int, int>> kept;  // (0, index into a) or (1, index into b)
    auto keep_lower = [&](int ia, int ib) {
        const double za = a.points[ia].z();
        const double zb = b.points[ib].z();
        if (za < zb) {
            kept.insert({0, ia});
        } else if (zb < za) {
            kept.insert({1, ib});
        } else {
            // tie: earlier contact id wins
            if (a.contact_id <= b.contact_id)
                kept.insert({0, ia});
            else
                kept.insert({1, ib});
        }
    };
    for (int ia : part.overlap_a) keep_lower(ia, nearest_xy(a.points[ia], b.points));
    for (int ib : part.overlap_b) keep_lower(nearest_xy(b.points[ib], a.points), ib);

    std::vector<TaggedPoint> out;
    out.reserve(kept.size());
    for (const auto& [side, idx] : kept)
        out.push_back(side == 0 ? TaggedPoint{a.points[idx], a.contact_id}
                                : TaggedPoint{b.points[idx], b.contact_id});
    return out;
}

GlobalSurface merge_patches(const std::vector<ContactPatch>& patches, const StitchParams& p) {
    p.validate();
    if (patches.empty()) throw ConfigError("merge_patches: need at least one patch");

    std::vector<TaggedPoint> acc;
    acc.reserve(patches.front().points.size());
    for (const auto& pt : patches.front().points)
        acc.push_back({pt, patches.front().contact_id});

    for (size_t k = 1; k < patches.size(); ++k) {
        const ContactPatch& b = patches[k];
        std::vector<WorldPoint> acc_pts;
        acc_pts.reserve(acc.size());
        for (const auto& t : acc) acc_pts.push_back(t.point);

        std::vector<TaggedPoint> merged;
        std::set<std::pair<int, int>> kept;  // (0, acc index) / (1, b index)
        auto keep_lower = [&](int ia, int ib) {
            const double za = acc[ia].point.z();
            const double zb = b.points[ib].z();
            if (za < zb || (za == zb && acc[ia].contact_id <= b.contact_id))
                kept.insert({0, ia});
            else
                kept.insert({1, ib});
        };
        for (int ia = 0; ia < static_cast<int>(acc.size()); ++ia) {
            const int jb = nearest_xy(acc[ia].point, b.points);
            if (jb >= 0 && dist_xy(acc[ia].point, b.points[jb]) < p.overlap_threshold)
                keep_lower(ia, jb);
            else
                merged.push_back(acc[ia]);
        }
        for (int jb = 0; jb < static_cast<int>(b.points.size()); ++jb) {
            const int ia = nearest_xy(b.points[jb], acc_pts);
            if (ia >= 0 && dist_xy(b.points[jb], acc_pts[ia]) < p.overlap_threshold)
                keep_lower(ia, jb);
            else
                merged.push_back({b.points[jb], b.contact_id});
        }
        for (const auto& [side, idx] : kept)
            merged.push_back(side == 0 ? acc[idx] : TaggedPoint{b.points[idx], b.contact_id});
        acc = std::move(merged);
    }
    GlobalSurface surface;
    surface.points = std::move(acc);
    return surface;
}

HeightGrid rasterize(const std::vector<TaggedPoint>& points, double resolution) {
    if (points.empty()) throw ConfigError("rasterize: need at least one point");
    if (!(resolution > 0.0)) throw ConfigError("rasterize: resolution must be positive");

    double min_x = points[0].point.x(), max_x = min_x;
    double min_y = points[0].point.y(), max_y = min_y;
    for (const auto& t : points) {
        min_x = std::min(min_x, t.point.x());
        max_x = std::max(max_x, t.point.x());
        min_y = std::min(min_y, t.point.y());
        max_y = std::max(max_y, t.point.y());
    }
    HeightGrid grid;
    grid.origin_x = min_x;
    grid.origin_y = min_y;
    grid.resolution = resolution;
    const int nx = std::max(1, static_cast<int>(std::ceil((max_x - min_x) / resolution)));
    const int ny = std::max(1, static_cast<int>(std::ceil((max_y - min_y) / resolution)));
    grid.heights = Eigen::MatrixXd::Zero(ny, nx);
    grid.mask.setConstant(ny, nx, false);

    // Bin points for locality, then IDW over the cell's 3x3 neighborhood.
    std::vector<std::vector<int>> bins(static_cast<size_t>(nx) * ny);
    for (int k = 0; k < static_cast<int>(points.size()); ++k) {
        int i = std::clamp(static_cast<int>((points[k].point.x() - min_x) / resolution), 0, nx - 1);
        int j = std::clamp(static_cast<int>((points[k].point.y() - min_y) / resolution), 0, ny - 1);
        bins[static_cast<size_t>(j) * nx + i].push_back(k);
    }
    const double eps = 1e-9 * resolution;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            const double cx = grid.cell_x(i);
            const double cy = grid.cell_y(j);
            double wsum = 0.0, zsum = 0.0;
            for (int dj = -2; dj <= 2; ++dj)
                for (int di = -2; di <= 2; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= nx || jj >= ny) continue;
                    for (int k : bins[static_cast<size_t>(jj) * nx + ii]) {
                        const double d = std::hypot(points[k].point.x() - cx,
                                                    points[k].point.y() - cy);
                        if (d > resolution) continue;
                        const double w = 1.0 / std::max(d, eps);
                        wsum += w;
                        zsum += w * points[k].point.z();
                    }
                }
            if (wsum > 0.0) {
                grid.heights(j, i) = zsum / wsum;
                grid.mask(j, i) = true;
            }
        }
    return grid;
}

double mollifier_normalization() {
    // I = 2*pi * int_0^1 rho * exp(-1/(1-rho^2)) d(rho), computed once by
    // composite Simpson on a fine grid (integrand vanishes smoothly at 1).
    static const double value = [] {
        const int n = 1 << 16;
        const double h = 1.0 / n;
        auto f = [](double r) {
            const double t = 1.0 - r * r;
            return t > 0.0 ? r * std::exp(-1.0 / t) : 0.0;
        };
        double acc = f(0.0) + f(1.0);
        for (int i = 1; i < n; ++i) acc += f(i * h) * (i % 2 ? 4.0 : 2.0);
        return 2.0 * M_PI * acc * h / 3.0;
    }();
    return value;
}

double mollifier_phi(double rho) {
    if (rho >= 1.0) return 0.0;
    const double t = 1.0 - rho * rho;
    return std::exp(-1.0 / t) / mollifier_normalization();
}

double mollifier_phi_eps(double rho, double eps) {
    return mollifier_phi(rho / eps) / (eps * eps);
}

GlobalSurface mollify(const GlobalSurface& surface, const StitchParams& p) {
    p.validate();
    const HeightGrid& in = surface.grid;
    if (in.nx() == 0 || in.ny() == 0)
        throw ConfigError("mollify: surface has no raster grid (run rasterize first)");
    const double eps = p.mollifier_epsilon;
    if (in.resolution > eps / 2.0 + 1e-12)
        throw KernelUnresolved("mollify: grid resolution " + std::to_string(in.resolution) +
                               " exceeds epsilon/2 = " + std::to_string(eps / 2.0));

    const int radius = static_cast<int>(std::ceil(eps / in.resolution));
    Eigen::MatrixXd kernel(2 * radius + 1, 2 * radius + 1);
    for (int dj = -radius; dj <= radius; ++dj)
        for (int di = -radius; di <= radius; ++di) {
            const double rho = std::hypot(di * in.resolution, dj * in.resolution);
            kernel(dj + radius, di + radius) = mollifier_phi_eps(rho, eps);
        }

    GlobalSurface out = surface;
    out.grid.heights = Eigen::MatrixXd::Zero(in.ny(), in.nx());
    for (int j = 0; j < in.ny(); ++j)
        for (int i = 0; i < in.nx(); ++i) {
            if (!in.mask(j, i)) continue;
            double wsum = 0.0, zsum = 0.0;
            for (int dj = -radius; dj <= radius; ++dj)
                for (int di = -radius; di <= radius; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || jj < 0 || ii >= in.nx() || jj >= in.ny()) continue;
                    if (!in.mask(jj, ii)) continue;
                    const double w = kernel(dj + radius, di + radius);
                    wsum += w;
                    zsum += w * in.heights(jj, ii);
                }
            out.grid.heights(j, i) = zsum / wsum;  // wsum > 0: the center cell is occupied
        }
    // Boundary renormalization skews the DC level slightly; restore the
    // occupied-cell mean.
    const double shift = in.occupied_mean() - out.grid.occupied_mean();
    for (int j = 0; j < in.ny(); ++j)
        for (int i = 0; i < in.nx(); ++i)
            if (in.mask(j, i)) out.grid.heights(j, i) += shift;
    return out;
}

void save_grid_csv(const HeightGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write grid CSV: " + path);
    out.precision(12);
    out << "# origin_x=" << grid.origin_x << " origin_y=" << grid.origin_y
        << " resolution=" << grid.resolution << "\n";
    for (int j = 0; j < grid.ny(); ++j) {
        for (int i = 0; i < grid.nx(); ++i) {
            if (i) out << ',';
            if (grid.mask(j, i))
                out << grid.heights(j, i);
            else
                out << "nan";
        }
        out << '\n';
    }
}

void save_grid_png16(const HeightGrid& grid, const std::string& png_path,
                     const std::string& sidecar_path) {
    double z_min = std::numeric_limits<double>::infinity();
    double z_max = -std::numeric_limits<double>::infinity();
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
            if (grid.mask(j, i)) {
                z_min = std::min(z_min, grid.heights(j, i));
                z_max = std::max(z_max, grid.heights(j, i));
            }
    if (!(z_min <= z_max)) {
        z_min = 0.0;
        z_max = 1.0;
    }
    // Intensity 0 marks unoccupied; occupied values live in [1, 65535].
    const double scale = z_max > z_min ? 65534.0 / (z_max - z_min) : 0.0;
    Eigen::MatrixXd raw = Eigen::MatrixXd::Zero(grid.ny(), grid.nx());
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
            if (grid.mask(j, i)) raw(j, i) = 1.0 + (grid.heights(j, i) - z_min) * scale;
    save_png_gray16(raw, png_path);

    nlohmann::json j;
    j["origin_x"] = grid.origin_x;
    j["origin_y"] = grid.origin_y;
    j["resolution"] = grid.resolution;
    j["z_min"] = z_min;
    j["z_max"] = z_max;
    j["mm_per_unit"] = scale > 0.0 ? 1.0 / scale : 0.0;
    std::ofstream out(sidecar_path);
    if (!out) throw IoError("cannot write grid sidecar: " + sidecar_path);
    out << j.dump(2) << "\n";
}

HeightGrid load_grid_png16(const std::string& png_path, const std::string& sidecar_path) {
    std::ifstream in(sidecar_path);
    if (!in) throw IoError("cannot open grid sidecar: " + sidecar_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("grid sidecar parse error: " + std::string(e.what()));
    }
    HeightGrid grid;
    grid.origin_x = j.value("origin_x", 0.0);
    grid.origin_y = j.value("origin_y", 0.0);
    grid.resolution = j.at("resolution").get<double>();
    const double z_min = j.value("z_min", 0.0);
    const double z_max = j.value("z_max", 1.0);
    const Eigen::MatrixXd raw = load_png_gray16(png_path);
    grid.heights = Eigen::MatrixXd::Zero(raw.rows(), raw.cols());
    grid.mask.setConstant(raw.rows(), raw.cols(), false);
    const double inv = z_max > z_min ? (z_max - z_min) / 65534.0 : 0.0;
    for (int r = 0; r < raw.rows(); ++r)
        for (int c = 0; c < raw.cols(); ++c)
            if (raw(r, c) >= 1.0) {
                grid.heights(r, c) = z_min + (raw(r, c) - 1.0) * inv;
                grid.mask(r, c) = true;
            }
    return grid;
}

} // namespace stt
