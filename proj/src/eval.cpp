#include "stt/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <nlohmann/json.hpp>

#include "stt/errors.hpp"

namespace stt {

ErrorStats compute_stats(const std::vector<double>& errors) {
    ErrorStats s;
    s.count = static_cast<int>(errors.size());
    if (errors.empty()) return s;
    double sq = 0.0, abs_sum = 0.0;
    for (double e : errors) {
        sq += e * e;
        abs_sum += std::abs(e);
        s.max_abs = std::max(s.max_abs, std::abs(e));
    }
    s.rms = std::sqrt(sq / errors.size());
    s.mean_abs = abs_sum / errors.size();
    return s;
}

std::vector<double> height_errors(const std::vector<WorldPoint>& points,
                                  const ObjectSurface& truth) {
    std::vector<double> errs;
    errs.reserve(points.size());
    for (const auto& p : points) errs.push_back(p.z() - truth.evaluate(p.x(), p.y()));
    return errs;
}

ErrorStats point_errors(const std::vector<WorldPoint>& points, const ObjectSurface& truth) {
    return compute_stats(height_errors(points, truth));
}

ErrorStats grid_errors(const HeightGrid& grid, const ObjectSurface& truth) {
    std::vector<double> errs;
    for (int j = 0; j < grid.ny(); ++j)
        for (int i = 0; i < grid.nx(); ++i)
            if (grid.mask(j, i))
                errs.push_back(grid.heights(j, i) - truth.evaluate(grid.cell_x(i), grid.cell_y(j)));
    return compute_stats(errs);
}

RadialProfile radial_error(const std::vector<WorldPoint>& points, const ObjectSurface& truth,
                           double bin_width, double max_radius, double cx, double cy) {
    if (bin_width <= 0.0 || max_radius <= 0.0)
        throw ConfigError("radial_error needs positive bin width and radius");
    const int nbins = static_cast<int>(std::ceil(max_radius / bin_width));
    RadialProfile prof;
    prof.bin_width = bin_width;
    prof.radius.resize(nbins);
    prof.mean_abs_error.assign(nbins, 0.0);
    prof.count.assign(nbins, 0);
    prof.reference_curvature.resize(nbins);
    for (int b = 0; b < nbins; ++b) {
        prof.radius[b] = (b + 0.5) * bin_width;
        prof.reference_curvature[b] = mean_curvature(truth, cx + prof.radius[b], cy);
    }
    for (const auto& p : points) {
        const double r = std::hypot(p.x() - cx, p.y() - cy);
        const int b = static_cast<int>(r / bin_width);
        if (b >= nbins) continue;
        prof.mean_abs_error[b] += std::abs(p.z() - truth.evaluate(p.x(), p.y()));
        prof.count[b] += 1;
    }
    for (int b = 0; b < nbins; ++b)
        if (prof.count[b] > 0) prof.mean_abs_error[b] /= prof.count[b];
    return prof;
}

double mean_curvature(const ObjectSurface& obj, double x, double y) {
    const double h = 1e-5;
    const Eigen::Vector2d g = obj.gradient(x, y);
    const Eigen::Vector2d gxp = obj.gradient(x + h, y), gxm = obj.gradient(x - h, y);
    const Eigen::Vector2d gyp = obj.gradient(x, y + h), gym = obj.gradient(x, y - h);
    const double fxx = (gxp.x() - gxm.x()) / (2 * h);
    const double fyy = (gyp.y() - gym.y()) / (2 * h);
    const double fxy = 0.5 * ((gxp.y() - gxm.y()) / (2 * h) + (gyp.x() - gym.x()) / (2 * h));
    const double fx = g.x(), fy = g.y();
    const double num =
        (1 + fy * fy) * fxx - 2 * fx * fy * fxy + (1 + fx * fx) * fyy;
    const double den = 2 * std::pow(1 + fx * fx + fy * fy, 1.5);
    return -num / den;  // convex bump positive
}

SineErrors sine_errors(const std::vector<WorldPoint>& points, double amplitude, double omega) {
    if (omega <= 0.0) throw ConfigError("sine_errors needs omega > 0");
    SineErrors se;
    std::vector<double> upper;
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    for (const auto& p : points) {
        const double truth = amplitude * std::sin(omega * p.x());
        if (truth > 0.0) upper.push_back(p.z() - truth);
        x_min = std::min(x_min, p.x());
        x_max = std::max(x_max, p.x());
    }
    se.upper_rms = compute_stats(upper).rms;

    if (points.empty()) return se;
    const double wavelength = 2.0 * std::numbers::pi / omega;
    // valleys at omega*x = -pi/2 + 2*pi*k
    const long k0 = std::lround(std::ceil((x_min * omega + std::numbers::pi / 2) /
                                          (2 * std::numbers::pi)));
    for (long k = k0;; ++k) {
        const double xv = (-std::numbers::pi / 2 + 2 * std::numbers::pi * k) / omega;
        if (xv > x_max) break;
        double z_min = std::numeric_limits<double>::infinity();
        for (const auto& p : points)
            if (std::abs(p.x() - xv) <= wavelength / 8.0) z_min = std::min(z_min, p.z());
        if (std::isfinite(z_min)) se.valley_gaps.push_back(z_min - (-amplitude));
    }
    if (!se.valley_gaps.empty()) {
        for (double g : se.valley_gaps) se.mean_valley_gap += g;
        se.mean_valley_gap /= static_cast<double>(se.valley_gaps.size());
    }
    return se;
}

void save_radial_csv(const RadialProfile& profile, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "radius_mm,mean_abs_error_mm,count,reference_curvature_per_mm\n";
    out.precision(10);
    for (std::size_t b = 0; b < profile.radius.size(); ++b)
        out << profile.radius[b] << "," << profile.mean_abs_error[b] << "," << profile.count[b]
            << "," << profile.reference_curvature[b] << "\n";
}

void save_stats_json(const ErrorStats& stats, const std::string& path) {
    nlohmann::json j = {{"rms_mm", stats.rms},
                        {"mean_abs_mm", stats.mean_abs},
                        {"max_abs_mm", stats.max_abs},
                        {"count", stats.count}};
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

} // namespace stt
