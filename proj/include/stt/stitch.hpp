#ifndef STT_STITCH_HPP
#define STT_STITCH_HPP

#include <string>
#include <vector>

#include <Eigen/Core>

#include "stt/camera.hpp"

namespace stt {

struct ContactPatch {
    int contact_id = 0;
    std::vector<WorldPoint> points;  // global frame
    Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();  // camera -> global
};

struct StitchParams {
    double overlap_threshold = 0.6;   // T_ov, mm
    double mollifier_epsilon = 0.25;  // mm
    double raster_resolution = 0.25;  // mm (use <= epsilon/2 when mollifying)

    void validate() const;
};

struct TaggedPoint {
    WorldPoint point;
    int contact_id = 0;
};

// Raster height field with explicit occupancy.
struct HeightGrid {
    double origin_x = 0.0, origin_y = 0.0;
    double resolution = 0.0;
    Eigen::MatrixXd heights;                 // (ny, nx)
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> mask;

    int nx() const { return static_cast<int>(heights.cols()); }
    int ny() const { return static_cast<int>(heights.rows()); }
    double cell_x(int i) const { return origin_x + (i + 0.5) * resolution; }
    double cell_y(int j) const { return origin_y + (j + 0.5) * resolution; }
    double occupied_mean() const;
};

struct GlobalSurface {
    std::vector<TaggedPoint> points;  // R_new
    HeightGrid grid;                  // Z on a raster, filled by rasterize/mollify
};

struct OverlapPartition {
    std::vector<int> overlap_a, nonoverlap_a;  // indices into a.points
    std::vector<int> overlap_b, nonoverlap_b;  // indices into b.points
};

// A point is overlap iff its (x, y)-plane nearest neighbor in the other
// patch lies within the threshold. The partition is exhaustive and disjoint.
OverlapPartition classify_overlap(const ContactPatch& a, const ContactPatch& b,
                                  const StitchParams& p);

// From the overlap sets, each cross-patch nearest-neighbor pair contributes
// its lower-z member (ties keep the earlier contact_id).
std::vector<TaggedPoint> extract_contiguous(const ContactPatch& a, const ContactPatch& b,
                                            const OverlapPartition& part);

// Sequential pairwise merge in contact order: R_lower + both nonoverlap sets,
// folded left over the patch sequence.
GlobalSurface merge_patches(const std::vector<ContactPatch>& patches, const StitchParams& p);

// Inverse-distance-weighted rasterization; a cell is occupied when at least
// one point lies within one cell size of its center.
HeightGrid rasterize(const std::vector<TaggedPoint>& points, double resolution);

// Compactly supported bump kernel, phi(rho) = exp(-1/(1-rho^2)) / I on the
// unit disk with I chosen so the kernel integrates to 1.
double mollifier_phi(double rho);
double mollifier_normalization();  // I
double mollifier_phi_eps(double rho, double eps);  // phi(rho/eps) / eps^2

// Discrete convolution of the occupied cells with phi_eps; the kernel is
// renormalized over the occupied support and the occupied mean is preserved.
// Throws KernelUnresolved when grid.resolution > eps / 2.
GlobalSurface mollify(const GlobalSurface& surface, const StitchParams& p);

void save_grid_csv(const HeightGrid& grid, const std::string& path);
// 16-bit PNG plus a JSON sidecar (origin, resolution, z offset and scale).
void save_grid_png16(const HeightGrid& grid, const std::string& png_path,
                     const std::string& sidecar_path);
HeightGrid load_grid_png16(const std::string& png_path, const std::string& sidecar_path);

} // namespace stt

#endif
