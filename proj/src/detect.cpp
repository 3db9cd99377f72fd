#include "stt/detect.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <vector>

namespace stt {

namespace {

// Reflect index i into [0, n): ... 2 1 0 | 0 1 2 ... n-1 | n-1 n-2 ...
inline int reflect(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * n;
    i = ((i % period) + period) % period;
    return i < n ? i : period - 1 - i;
}

Eigen::VectorXd gaussian_kernel(double sigma) {
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    Eigen::VectorXd k(2 * radius + 1);
    for (int i = -radius; i <= radius; ++i)
        k(i + radius) = std::exp(-0.5 * (i * i) / (sigma * sigma));
    k /= k.sum();
    return k;
}

} // namespace

Eigen::MatrixXd gaussian_smooth(const Eigen::MatrixXd& img, double sigma) {
    const Eigen::VectorXd k = gaussian_kernel(sigma);
    const int radius = static_cast<int>(k.size()) / 2;
    const int rows = static_cast<int>(img.rows());
    const int cols = static_cast<int>(img.cols());

    Eigen::MatrixXd tmp(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k(i + radius) * img(r, reflect(c + i, cols));
            tmp(r, c) = acc;
        }
    Eigen::MatrixXd out(rows, cols);
    for (int c = 0; c < cols; ++c)
        for (int r = 0; r < rows; ++r) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i)
                acc += k(i + radius) * tmp(reflect(r + i, rows), c);
            out(r, c) = acc;
        }
    return out;
}

namespace {

// Scale-normalized det(Hessian) of the sigma-smoothed image.
Eigen::MatrixXd doh_response(const Eigen::MatrixXd& img, double sigma) {
    const Eigen::MatrixXd s = gaussian_smooth(img, sigma);
    const int rows = static_cast<int>(img.rows());
    const int cols = static_cast<int>(img.cols());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    const double norm = sigma * sigma * sigma * sigma;
    for (int r = 1; r + 1 < rows; ++r)
        for (int c = 1; c + 1 < cols; ++c) {
            const double lxx = s(r, c - 1) - 2.0 * s(r, c) + s(r, c + 1);
            const double lyy = s(r - 1, c) - 2.0 * s(r, c) + s(r + 1, c);
            const double lxy = 0.25 * (s(r + 1, c + 1) - s(r + 1, c - 1) -
                                       s(r - 1, c + 1) + s(r - 1, c - 1));
            out(r, c) = norm * (lxx * lyy - lxy * lxy);
        }
    return out;
}

struct Candidate {
    double u, v, sigma, strength;
};

} // namespace

std::vector<Blob> detect_markers(const GrayImage& img, const DetectorSettings& settings) {
    if (img.width() == 0 || img.height() == 0) throw Error("detect_markers: empty image");
    if (!(settings.sigma_min < settings.sigma_max))
        throw Error("detect_markers: require sigma_min < sigma_max");
    const int ns = std::max(settings.num_scales, 2);

    std::vector<double> sigmas(ns);
    const double log_min = std::log(settings.sigma_min);
    const double log_max = std::log(settings.sigma_max);
    for (int i = 0; i < ns; ++i)
        sigmas[i] = std::exp(log_min + (log_max - log_min) * i / (ns - 1));

    std::vector<Eigen::MatrixXd> stack(ns);
    for (int i = 0; i < ns; ++i) stack[i] = doh_response(img.data, sigmas[i]);

    double max_response = 0.0;
    for (const auto& m : stack) max_response = std::max(max_response, m.maxCoeff());
    if (max_response <= 0.0) return {};
    const double threshold = settings.rel_threshold * max_response;

    const int rows = img.height();
    const int cols = img.width();
    std::vector<Candidate> cands;
    for (int s = 0; s < ns; ++s) {
        const auto& m = stack[s];
        for (int r = 2; r + 2 < rows; ++r)
            for (int c = 2; c + 2 < cols; ++c) {
                const double x = m(r, c);
                if (x <= threshold) continue;
                bool is_max = true;
                for (int ds = -1; ds <= 1 && is_max; ++ds) {
                    if (s + ds < 0 || s + ds >= ns) continue;
                    const auto& n = stack[s + ds];
                    for (int dr = -1; dr <= 1 && is_max; ++dr)
                        for (int dc = -1; dc <= 1; ++dc) {
                            if (ds == 0 && dr == 0 && dc == 0) continue;
                            if (n(r + dr, c + dc) > x) {
                                is_max = false;
                                break;
                            }
                        }
                }
                if (!is_max) continue;

                // 3x3 quadratic fit for sub-pixel offset at this scale.
                const double dx = 0.5 * (m(r, c + 1) - m(r, c - 1));
                const double dy = 0.5 * (m(r + 1, c) - m(r - 1, c));
                const double dxx = m(r, c + 1) - 2.0 * x + m(r, c - 1);
                const double dyy = m(r + 1, c) - 2.0 * x + m(r - 1, c);
                const double dxy = 0.25 * (m(r + 1, c + 1) - m(r + 1, c - 1) -
                                           m(r - 1, c + 1) + m(r - 1, c - 1));
                double ou = 0.0, ov = 0.0;
                const double det = dxx * dyy - dxy * dxy;
                if (std::abs(det) > 1e-18) {
                    ou = -(dyy * dx - dxy * dy) / det;
                    ov = -(dxx * dy - dxy * dx) / det;
                    if (std::abs(ou) > 1.0 || std::abs(ov) > 1.0) ou = ov = 0.0;
                }
                cands.push_back({c + ou, r + ov, sigmas[s], x});
            }
    }

    // Non-maximum suppression within one blob diameter (2 * sqrt(2) * sigma).
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        if (a.v != b.v) return a.v < b.v;
        return a.u < b.u;
    });
    std::vector<Blob> blobs;
    for (const auto& c : cands) {
        bool suppressed = false;
        for (const auto& kept : blobs) {
            const double rad = 2.0 * std::numbers::sqrt2 * std::max(c.sigma, kept.scale);
            const double du = c.u - kept.center.x();
            const double dv = c.v - kept.center.y();
            if (du * du + dv * dv < rad * rad) {
                suppressed = true;
                break;
            }
        }
        if (!suppressed) blobs.push_back({PixelPoint(c.u, c.v), c.sigma, c.strength});
    }
    return blobs;
}

void save_detections_csv(int frame_id, const std::vector<Blob>& blobs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << "frame_id,u,v,scale,strength\n";
    out.precision(12);
    for (const Blob& b : blobs)
        out << frame_id << "," << b.center.x() << "," << b.center.y() << "," << b.scale << ","
            << b.strength << "\n";
}

} // namespace stt
