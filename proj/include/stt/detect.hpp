#ifndef STT_DETECT_HPP
#define STT_DETECT_HPP

#include <string>
#include <vector>

#include "stt/camera.hpp"
#include "stt/image.hpp"

namespace stt {

struct Blob {
    PixelPoint center;
    double scale = 0.0;     // sigma of the best-responding scale [px]
    double strength = 0.0;  // scale-normalized determinant-of-Hessian response
};

struct DetectorSettings {
    double sigma_min = 1.5;
    double sigma_max = 6.0;
    int num_scales = 5;            // log-spaced across [sigma_min, sigma_max]
    double rel_threshold = 0.10;   // fraction of the frame's maximum response
};

// Scale-normalized determinant-of-Hessian blob detection with sub-pixel
// refinement (3x3 quadratic fit) and non-maximum suppression within one
// blob diameter. Bright blobs on dark background.
std::vector<Blob> detect_markers(const GrayImage& img, const DetectorSettings& settings = {});

// Separable Gaussian smoothing with reflected borders (exposed for tests).
Eigen::MatrixXd gaussian_smooth(const Eigen::MatrixXd& img, double sigma);

// CSV rows: frame_id,u,v,scale,strength
void save_detections_csv(int frame_id, const std::vector<Blob>& blobs, const std::string& path);

} // namespace stt

#endif
