#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>

#include "stt/refraction.hpp"
#include "stt/errors.hpp"

#include "helpers.hpp"

using namespace stt;

namespace {
constexpr double kDeg = std::numbers::pi / 180.0;
}

TEST_CASE("matched indices leave displacements untouched") {
    RefractionParams same;
    same.n_gel = same.n_air = 1.0;
    RayGeometry g{10.0 * kDeg, 8.0 * kDeg, 1.0, 1.1};
    CHECK(displacement_ratio(g, same) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(error_term(g, same) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("small angles collapse the ratio to the index ratio") {
    RefractionParams params;  // defaults: 1.51 / 1.00027
    RayGeometry g{1.0 * kDeg, 0.8 * kDeg, 1.0, 1.1};
    CHECK(displacement_ratio(g, params) ==
          doctest::Approx(params.ratio()).epsilon(1e-3));
    CHECK(std::abs(error_term(g, params)) < 1e-3);
}

TEST_CASE("error term shrinks towards zero along a fixed ray pair") {
    RefractionParams params;
    double prev = 1e9;
    for (double t2 = 10.0; t2 >= 0.5; t2 -= 0.5) {
        RayGeometry g{t2 * kDeg, 0.8 * t2 * kDeg, 1.0, 1.1};
        const double e = std::abs(error_term(g, params));
        CHECK(e < prev + 1e-12);
        prev = e;
    }
    CHECK(prev < 1e-4);
}

TEST_CASE("error term stays small over the physical viewing branch") {
    // Rays towards a displaced point: the near-interface angle is the larger
    // one (theta4 < theta2), angles within 10 degrees, |BC|/|AC| up to 1.2.
    RefractionParams params;
    double worst = 0.0;
    for (double t2 = 1.0; t2 <= 10.0; t2 += 0.5)
        for (double frac = 0.2; frac <= 0.95; frac += 0.15)
            for (double bc = 1.0; bc <= 1.2; bc += 0.05) {
                RayGeometry g{t2 * kDeg, frac * t2 * kDeg, 1.0, bc};
                worst = std::max(worst, std::abs(error_term(g, params)));
            }
    CHECK(worst < 0.03);
}

TEST_CASE("coincident interface points are singular") {
    RefractionParams params;
    RayGeometry g{8.0 * kDeg, 8.0 * kDeg, 1.0, 1.0};
    CHECK_THROWS_AS(displacement_ratio(g, params), SingularGeometry);
}

TEST_CASE("calibration recovers the index from an exact sweep") {
    std::vector<DisplacementPair> data;
    RefractionParams truth;
    for (int k = 1; k <= 8; ++k) {
        const double t = 1.0 * k;
        data.push_back({t, apparent_displacement(t, truth)});
    }
    const CalibrationResult r = calibrate_n_gel(data);
    CHECK(r.params.n_gel == doctest::Approx(1.51).epsilon(1e-9));
    CHECK(r.residual_rms < 1e-9);
}

TEST_CASE("calibration with unity index is the identity") {
    std::vector<DisplacementPair> data;
    for (int k = 1; k <= 5; ++k) data.push_back({0.5 * k, 0.5 * k});
    const CalibrationResult r = calibrate_n_gel(data, 1.0);
    CHECK(r.params.n_gel == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("calibration tolerates measurement noise") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> noise(0.0, 0.01);
    RefractionParams truth;
    int within = 0;
    double sum = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<DisplacementPair> data;
        for (int k = 1; k <= 8; ++k) {
            double observed = 0.0;
            for (int rep = 0; rep < 5; ++rep)
                observed += apparent_displacement(1.0 * k, truth) + noise(rng);
            data.push_back({1.0 * k, observed / 5.0});
        }
        const double n = calibrate_n_gel(data).params.n_gel;
        sum += n;
        if (std::abs(n - 1.51) < 0.01 * 1.51) ++within;
    }
    CHECK(within >= 95);
    CHECK(sum / 100.0 == doctest::Approx(1.51).epsilon(2e-3));
}

TEST_CASE("degenerate calibration input throws") {
    CHECK_THROWS_AS(calibrate_n_gel({{1.0, 1.0}}), DegenerateCalibration);
    CHECK_THROWS_AS(calibrate_n_gel({{1.0, 0.0}, {2.0, 0.0}}), DegenerateCalibration);
}

TEST_CASE("depth correction arithmetic") {
    RefractionParams params;
    params.n_gel = 1.51;
    CHECK(correct_depth(10.0, 2.0, params) == doctest::Approx(13.02).epsilon(1e-12));
    CHECK(correct_depth(10.0, 0.0, params) == doctest::Approx(10.0));
}

TEST_CASE("apparent displacement and depth correction invert each other") {
    RefractionParams params;
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> ud(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double rest = 40.0;
        const double delta = ud(rng);
        const double apparent = apparent_displacement(delta, params);
        CHECK(correct_depth(rest, apparent, params) ==
              doctest::Approx(rest + delta).epsilon(1e-12));
    }
}

TEST_CASE("calibration JSON and sweep CSV round trips") {
    testutil::TempDir tmp("refr_io");
    CalibrationResult r;
    r.params.n_gel = 1.4987;
    r.residual_rms = 3.2e-4;
    save_calibration(r, tmp.str("cal.json"));
    const CalibrationResult back = load_calibration(tmp.str("cal.json"));
    CHECK(back.params.n_gel == doctest::Approx(r.params.n_gel).epsilon(1e-12));
    CHECK(back.residual_rms == doctest::Approx(r.residual_rms).epsilon(1e-9));

    std::vector<DisplacementPair> data;
    for (int k = 1; k <= 8; ++k) data.push_back({1.0 * k, k / 1.51});
    save_calibration_sweep_csv(data, tmp.str("sweep.csv"));
    const auto loaded = load_calibration_sweep_csv(tmp.str("sweep.csv"));
    REQUIRE(loaded.size() == data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        CHECK(loaded[i].true_disp == doctest::Approx(data[i].true_disp).epsilon(1e-9));
        CHECK(loaded[i].observed_disp == doctest::Approx(data[i].observed_disp).epsilon(1e-9));
    }
}

TEST_CASE("invalid refraction parameters are rejected") {
    RefractionParams bad;
    bad.n_gel = 0.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
