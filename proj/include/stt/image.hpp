#ifndef STT_IMAGE_HPP
#define STT_IMAGE_HPP

#include <Eigen/Core>
#include <string>
#include <utility>

#include "stt/errors.hpp"

namespace stt {

// Grayscale image, intensities in [0, 1], row-major indexing (v, u).
struct GrayImage {
    Eigen::MatrixXd data;  // data(v, u)

    GrayImage() = default;
    GrayImage(int width, int height) : data(Eigen::MatrixXd::Zero(height, width)) {}

    int width() const { return static_cast<int>(data.cols()); }
    int height() const { return static_cast<int>(data.rows()); }
    double& at(int u, int v) { return data(v, u); }
    double at(int u, int v) const { return data(v, u); }
};

// Splits a side-by-side stereo frame into (left, right).
// Throws MalformedFrame on odd width.
std::pair<GrayImage, GrayImage> split_stereo_frame(const GrayImage& img);

GrayImage load_image(const std::string& path);  // dispatches on extension (.png/.pgm)
GrayImage load_png_gray(const std::string& path);
GrayImage load_pgm(const std::string& path);

void save_png_gray8(const GrayImage& img, const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

// 16-bit grayscale PNG of raw values in [0, 65535].
void save_png_gray16(const Eigen::MatrixXd& values, const std::string& path);
Eigen::MatrixXd load_png_gray16(const std::string& path);

} // namespace stt

#endif
