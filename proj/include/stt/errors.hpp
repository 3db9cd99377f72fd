#ifndef STT_ERRORS_HPP
#define STT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace stt {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// stereo geometry
struct DegenerateDisparity : Error { using Error::Error; };
struct BehindCamera : Error { using Error::Error; };
struct UndistortDiverged : Error { using Error::Error; };

// image / detection
struct MalformedFrame : Error { using Error::Error; };

// dtrc
struct MeshDegenerate : Error { using Error::Error; };
struct RingTopologyError : Error { using Error::Error; };
struct PatternMismatch : Error { using Error::Error; };
struct MatchCardinalityError : Error { using Error::Error; };

// refraction
struct SingularGeometry : Error { using Error::Error; };
struct DegenerateCalibration : Error { using Error::Error; };

// surfaces
struct FitDegenerate : Error { using Error::Error; };

// stitching
struct KernelUnresolved : Error { using Error::Error; };

// configuration / I/O
struct ConfigError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

} // namespace stt

#endif
