#ifndef STT_REFRACTION_HPP
#define STT_REFRACTION_HPP

#include <string>
#include <vector>

namespace stt {

struct RefractionParams {
    double n_gel = 1.51;
    double n_air = 1.00027;

    double ratio() const { return n_gel / n_air; }
    void validate() const;
};

// Interface-ray geometry of the two-ray depth-displacement construction.
// theta2/theta4 are the in-medium (refraction) angles; theta1/theta3 the
// air-side angles; ac/bc the interface offsets |AC|, |BC|.
struct RayGeometry {
    double theta2 = 0.0, theta4 = 0.0;  // radians, in (0, pi/2)
    double ac = 1.0, bc = 1.0;          // mm
};

// True-to-observed displacement ratio
//   (n_gel/n_air) * (ac sin t4 cos t2 - bc sin t2 cos t4)
//                 / (ac sin t4 cos t1 - bc sin t2 cos t3)
// with t1, t3 recovered from t2, t4 by Snell's law. Throws SingularGeometry
// when the denominator vanishes.
double displacement_ratio(const RayGeometry& g, const RefractionParams& params);

// Relative deviation of displacement_ratio from the pure index ratio:
// E = ratio / (n_gel/n_air) - 1.
double error_term(const RayGeometry& g, const RefractionParams& params);

struct DisplacementPair {
    double true_disp = 0.0;      // |P_t1 P_t2|, mm
    double observed_disp = 0.0;  // |P'_t1 P'_t2|, mm
};

struct CalibrationResult {
    RefractionParams params;
    double residual_rms = 0.0;
};

// Least-squares slope through the origin of true vs observed displacement;
// the slope is the effective refractive index. Throws DegenerateCalibration
// when all observed displacements are zero or fewer than 2 pairs are given.
CalibrationResult calibrate_n_gel(const std::vector<DisplacementPair>& data,
                                  double n_air = 1.00027);

// z_c = z' + n_gel * observed_delta.
double correct_depth(double z_prime, double observed_delta, const RefractionParams& params);

// Forward (small-angle) model: observed = true_delta / n_gel.
double apparent_displacement(double true_delta, const RefractionParams& params);

// Calibration persistence (JSON: n_gel, residual_rms, timestamp).
void save_calibration(const CalibrationResult& result, const std::string& path);
CalibrationResult load_calibration(const std::string& path);

// CSV rows: step_index,true_disp_mm,observed_disp_mm
std::vector<DisplacementPair> load_calibration_sweep_csv(const std::string& path);
void save_calibration_sweep_csv(const std::vector<DisplacementPair>& data,
                                const std::string& path);

} // namespace stt

#endif
