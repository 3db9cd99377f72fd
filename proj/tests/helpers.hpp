#ifndef STT_TESTS_HELPERS_HPP
#define STT_TESTS_HELPERS_HPP

#include <cstdlib>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "stt/camera.hpp"

namespace stt::testutil {

// Fresh scratch directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        auto base = std::filesystem::temp_directory_path();
        for (int i = 0; i < 10000; ++i) {
            auto candidate = base / (tag + "_" + std::to_string(i));
            std::error_code ec;
            if (std::filesystem::create_directory(candidate, ec)) {
                path = candidate;
                return;
            }
        }
        throw std::runtime_error("could not create temp dir for " + tag);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string str(const std::string& rel = "") const {
        return rel.empty() ? path.string() : (path / rel).string();
    }
};

// Random world point that projects strictly inside both images of the rig.
inline WorldPoint random_visible_point(std::mt19937_64& rng, const CameraRig& rig,
                                       double z_min = 30.0, double z_max = 60.0) {
    std::uniform_real_distribution<double> uz(z_min, z_max);
    std::uniform_real_distribution<double> uu(20.0, rig.image_width - 20.0);
    std::uniform_real_distribution<double> uv(20.0, rig.image_height - 20.0);
    for (;;) {
        const double z = uz(rng);
        const double u = uu(rng), v = uv(rng);
        WorldPoint p((u - rig.left.cx) * z / rig.left.fx, (v - rig.left.cy) * z / rig.left.fy, z);
        const auto [pl, pr] = project(p, rig);
        if (pr.x() > 5.0 && pr.x() < rig.image_width - 5.0) return p;
    }
}

} // namespace stt::testutil

#endif
