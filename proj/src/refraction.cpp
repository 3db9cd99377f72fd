#include "stt/refraction.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stt/errors.hpp"

namespace stt {

void RefractionParams::validate() const {
    if (!(n_gel >= 1.0) || !(n_air >= 1.0))
        throw ConfigError("refractive indices must be >= 1");
}

double displacement_ratio(const RayGeometry& g, const RefractionParams& params) {
    params.validate();
    const double n = params.ratio();
    const double s2 = std::sin(g.theta2), c2 = std::cos(g.theta2);
    const double s4 = std::sin(g.theta4), c4 = std::cos(g.theta4);
    const double s1 = n * s2, s3 = n * s4;  // Snell's law
    if (s1 >= 1.0 || s3 >= 1.0)
        throw SingularGeometry("displacement_ratio: total internal reflection regime");
    const double c1 = std::sqrt(1.0 - s1 * s1);
    const double c3 = std::sqrt(1.0 - s3 * s3);
    const double num = g.ac * s4 * c2 - g.bc * s2 * c4;
    const double den = g.ac * s4 * c1 - g.bc * s2 * c3;
    if (std::abs(den) < 1e-12)
        throw SingularGeometry("displacement_ratio: vanishing observed displacement");
    return n * num / den;
}

double error_term(const RayGeometry& g, const RefractionParams& params) {
    return displacement_ratio(g, params) / params.ratio() - 1.0;
}

CalibrationResult calibrate_n_gel(const std::vector<DisplacementPair>& data, double n_air) {
    if (data.size() < 2)
        throw DegenerateCalibration("calibrate_n_gel: need at least 2 displacement pairs");
    double sxx = 0.0, sxy = 0.0;
    for (const auto& p : data) {
        sxx += p.observed_disp * p.observed_disp;
        sxy += p.observed_disp * p.true_disp;
    }
    if (sxx <= 0.0)
        throw DegenerateCalibration("calibrate_n_gel: all observed displacements are zero");
    const double slope = sxy / sxx;
    double ss = 0.0;
    for (const auto& p : data) {
        const double r = p.true_disp - slope * p.observed_disp;
        ss += r * r;
    }
    CalibrationResult out;
    out.params.n_gel = slope;
    out.params.n_air = n_air;
    out.residual_rms = std::sqrt(ss / static_cast<double>(data.size()));
    return out;
}

double correct_depth(double z_prime, double observed_delta, const RefractionParams& params) {
    params.validate();
    return z_prime + params.n_gel * observed_delta;
}

double apparent_displacement(double true_delta, const RefractionParams& params) {
    params.validate();
    return true_delta / params.n_gel;
}

void save_calibration(const CalibrationResult& result, const std::string& path) {
    nlohmann::json j;
    j["n_gel"] = result.params.n_gel;
    j["n_air"] = result.params.n_air;
    j["residual_rms"] = result.residual_rms;
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    j["timestamp"] = ts.str();
    std::ofstream out(path);
    if (!out) throw IoError("cannot write calibration file: " + path);
    out << j.dump(2) << "\n";
}

CalibrationResult load_calibration(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calibration file: " + path);
    nlohmann::json j;
    try {
        in >> j;
        CalibrationResult out;
        out.params.n_gel = j.at("n_gel").get<double>();
        out.params.n_air = j.value("n_air", 1.00027);
        out.residual_rms = j.value("residual_rms", 0.0);
        out.params.validate();
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("calibration file error in " + path + ": " + e.what());
    }
}

std::vector<DisplacementPair> load_calibration_sweep_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open calibration sweep: " + path);
    std::vector<DisplacementPair> out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');  // step index, unused
        DisplacementPair p;
        if (!std::getline(ss, tok, ',')) throw IoError("malformed sweep row in " + path);
        p.true_disp = std::stod(tok);
        if (!std::getline(ss, tok, ',')) throw IoError("malformed sweep row in " + path);
        p.observed_disp = std::stod(tok);
        out.push_back(p);
    }
    return out;
}

void save_calibration_sweep_csv(const std::vector<DisplacementPair>& data,
                                const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write calibration sweep: " + path);
    out << "step_index,true_disp_mm,observed_disp_mm\n";
    out.precision(12);
    for (size_t i = 0; i < data.size(); ++i)
        out << i << ',' << data[i].true_disp << ',' << data[i].observed_disp << '\n';
}

} // namespace stt
