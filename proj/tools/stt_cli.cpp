#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stt/errors.hpp"
#include "stt/eval.hpp"
#include "stt/pipeline.hpp"
#include "stt/refraction.hpp"
#include "stt/sim.hpp"

namespace fs = std::filesystem;
using namespace stt;

namespace {

std::string press_name(int id) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "press_%03d", id);
    return buf;
}

struct SimulateArgs {
    std::string preset = "gaussian-s50";
    std::string out;
    std::string pattern = "hexagon";
    std::vector<double> region;
    double step = 15.0;
    double press_depth = 5.0;
    double rest_skin_depth = 45.0;
    double noise = 0.0;
    double periphery_bias = 0.0;
    bool render = false;
    bool distortion = false;
};

int cmd_simulate(const SimulateArgs& a, std::uint64_t seed) {
    SceneConfig cfg = scene_preset(a.preset);
    cfg.pattern = pattern_by_name(a.pattern);
    cfg.skin.pattern = cfg.pattern;
    cfg.step = a.step;
    cfg.press_depth = a.press_depth;
    cfg.rest_skin_depth = a.rest_skin_depth;
    cfg.noise_sigma = a.noise;
    cfg.periphery_bias = a.periphery_bias;
    cfg.render_images = a.render;
    cfg.with_distortion = a.distortion;
    cfg.seed = seed;
    if (!a.region.empty()) {
        cfg.x0 = a.region[0];
        cfg.y0 = a.region[1];
        cfg.x1 = a.region[2];
        cfg.y1 = a.region[3];
    }
    const Scene scene = simulate_scene(cfg);
    write_scene(scene, a.out);
    std::cout << "wrote " << scene.presses.size() << " presses to " << a.out << "\n";
    return 0;
}

int cmd_calibrate(const std::string& sweep_csv, const std::string& out) {
    const auto data = load_calibration_sweep_csv(sweep_csv);
    const CalibrationResult result = calibrate_n_gel(data);
    save_calibration(result, out);
    std::cout << "n_gel = " << result.params.n_gel << " (residual rms "
              << result.residual_rms << " mm) -> " << out << "\n";
    return 0;
}

void report_skipped(const SceneReconstruction& recon) {
    for (const auto& s : recon.skipped)
        std::cerr << "press " << s.press_id << " skipped: " << s.reason << "\n";
}

SceneReconstruction run_reconstruction(const std::string& scene_dir,
                                       const std::string& calibration, int jobs,
                                       SceneManifest& scene) {
    scene = load_scene(scene_dir);
    if (!calibration.empty())
        scene.config.refraction = load_calibration(calibration).params;
    SceneReconstruction recon = reconstruct_scene(scene, jobs);
    report_skipped(recon);
    if (recon.presses.empty()) throw PatternMismatch("no press could be reconstructed");
    return recon;
}

int cmd_reconstruct(const std::string& scene_dir, const std::string& out,
                    const std::string& calibration, int jobs) {
    SceneManifest scene;
    const SceneReconstruction recon = run_reconstruction(scene_dir, calibration, jobs, scene);
    fs::create_directories(out);
    for (const auto& rec : recon.presses) {
        const std::string stem = out + "/" + press_name(rec.press_id);
        save_disparity_csv(rec.left_coded, rec.disparity, stem + "_disparity.csv");
        save_ply(rec.markers_global, stem + "_markers.ply");
        save_ply(rec.patch.points, stem + "_skin.ply");
    }
    std::cout << "reconstructed " << recon.presses.size() << " presses ("
              << recon.skipped.size() << " skipped) -> " << out << "\n";
    return 0;
}

std::vector<ContactPatch> load_patch_dir(const std::string& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".ply") files.push_back(e.path().string());
    // a reconstruct output dir holds marker and skin clouds; stitch the skin
    std::vector<std::string> skin;
    for (const auto& f : files)
        if (f.find("skin") != std::string::npos) skin.push_back(f);
    if (!skin.empty()) files = skin;
    if (files.empty()) throw ConfigError("no .ply patches in " + dir);
    std::sort(files.begin(), files.end());
    std::vector<ContactPatch> patches;
    for (std::size_t i = 0; i < files.size(); ++i) {
        ContactPatch p;
        p.contact_id = static_cast<int>(i);
        p.points = load_ply(files[i]);
        patches.push_back(std::move(p));
    }
    return patches;
}

int cmd_stitch(const std::string& scene_dir, const std::string& patch_dir, const std::string& out,
               const std::string& calibration, int jobs, bool mollify_grid,
               double resolution, double overlap) {
    std::vector<ContactPatch> patches;
    if (!patch_dir.empty()) {
        patches = load_patch_dir(patch_dir);
    } else {
        if (scene_dir.empty()) throw ConfigError("stitch needs --scene or --patches");
        SceneManifest scene;
        const SceneReconstruction recon = run_reconstruction(scene_dir, calibration, jobs, scene);
        for (const auto& rec : recon.presses) patches.push_back(rec.patch);
    }

    StitchParams params;
    params.overlap_threshold = overlap;
    if (resolution > 0.0)
        params.raster_resolution = resolution;
    else if (mollify_grid)
        params.raster_resolution = params.mollifier_epsilon / 2.0;
    params.validate();

    GlobalSurface surface = merge_patches(patches, params);
    surface.grid = rasterize(surface.points, params.raster_resolution);
    if (mollify_grid) surface = mollify(surface, params);

    fs::create_directories(out);
    std::vector<WorldPoint> merged;
    for (const auto& tp : surface.points) merged.push_back(tp.point);
    save_ply(merged, out + "/merged.ply");
    save_grid_csv(surface.grid, out + "/grid.csv");
    save_grid_png16(surface.grid, out + "/grid.png", out + "/grid.json");
    std::cout << "stitched " << patches.size() << " patches, " << merged.size()
              << " points -> " << out << "\n";
    return 0;
}

int cmd_evaluate(const std::string& scene_dir, const std::string& out,
                 const std::string& grid_png, const std::string& grid_sidecar, int jobs) {
    const SceneManifest scene = load_scene(scene_dir);
    fs::create_directories(out);

    ErrorStats stats;
    std::vector<WorldPoint> points;
    if (!grid_png.empty()) {
        const HeightGrid grid = load_grid_png16(grid_png, grid_sidecar);
        stats = grid_errors(grid, scene.config.object);
        for (int j = 0; j < grid.ny(); ++j)
            for (int i = 0; i < grid.nx(); ++i)
                if (grid.mask(j, i))
                    points.emplace_back(grid.cell_x(i), grid.cell_y(j), grid.heights(j, i));
    } else {
        SceneReconstruction recon = reconstruct_scene(scene, jobs);
        report_skipped(recon);
        if (recon.presses.empty()) throw PatternMismatch("no press could be reconstructed");
        for (const auto& rec : recon.presses)
            points.insert(points.end(), rec.patch.points.begin(), rec.patch.points.end());
        stats = point_errors(points, scene.config.object);
    }
    save_stats_json(stats, out + "/stats.json");

    double max_r = 1.0;
    for (const auto& p : points) max_r = std::max(max_r, p.head<2>().norm());
    save_radial_csv(radial_error(points, scene.config.object, 1.0, max_r), out + "/radial.csv");

    if (scene.config.object.kind() == ObjectSurface::Kind::Sine) {
        const SineErrors se = sine_errors(points, scene.config.object.sine_amplitude(),
                                          scene.config.object.sine_omega());
        std::cout << "sine upper rms = " << se.upper_rms << " mm over "
                  << se.valley_gaps.size() << " valleys\n";
    }
    std::cout << "rms = " << stats.rms << " mm, mean |e| = " << stats.mean_abs << " mm, max |e| = "
              << stats.max_abs << " mm over " << stats.count << " samples -> " << out << "\n";
    return 0;
}

int cmd_pattern_info(const std::string& name, double pitch) {
    const PatternSpec spec = pattern_by_name(name);
    const auto lattice = marker_lattice(spec, pitch);
    std::vector<PixelPoint> pts(lattice.begin(), lattice.end());
    const CodedFrame coded = code_frame(pts, spec);
    std::vector<int> ring_sizes(spec.layers, 0);
    for (const auto& m : coded.markers) ring_sizes[m.layer] += 1;
    std::cout << "pattern: " << spec.name << "\nlinks (l): " << spec.links
              << "\nlayers (m): " << spec.layers << "\nmarkers: " << spec.expected_count
              << "\npitch: " << pitch << " mm\nring sizes (outermost first):";
    for (int s : ring_sizes) std::cout << " " << s;
    std::cout << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"StereoTacTip stereo-tactile reconstruction pipeline"};
    app.require_subcommand(1);
    app.fallthrough(true);  // --seed may follow the subcommand
    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "RNG seed for everything stochastic");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "generate a synthetic press scene");
    simulate->add_option("--preset", sim.preset,
                         "flat | gaussian-s50 | gaussian-s50over3 | gaussian-s10 | gaussian-s5 | "
                         "gaussian-s5over3 | sine-w<wavelength-mm>");
    simulate->add_option("--out", sim.out, "scene directory")->required();
    simulate->add_option("--pattern", sim.pattern, "circular | hexagon | square");
    simulate->add_option("--region", sim.region, "zigzag region x0 y0 x1 y1 (mm)")->expected(4);
    simulate->add_option("--step", sim.step, "zigzag step (mm)");
    simulate->add_option("--press-depth", sim.press_depth, "indentation depth (mm)");
    simulate->add_option("--rest-depth", sim.rest_skin_depth, "camera-to-skin rest depth (mm)");
    simulate->add_option("--noise", sim.noise, "pixel intensity noise sigma");
    simulate->add_option("--periphery-bias", sim.periphery_bias,
                         "systematic rim depth error (mm)");
    simulate->add_flag("--render", sim.render, "write stereo PNG frames instead of pixel CSV");
    simulate->add_flag("--distortion", sim.distortion, "apply lens distortion");

    std::string sweep_csv, calib_out = "calibration.json";
    auto* calibrate = app.add_subcommand("calibrate", "fit n_gel from a displacement sweep");
    calibrate->add_option("--sweep", sweep_csv, "CSV: step_index,true_disp_mm,observed_disp_mm")
        ->required();
    calibrate->add_option("--out", calib_out, "calibration JSON");

    std::string scene_dir, out_dir, calibration;
    int jobs = 1;
    auto* reconstruct = app.add_subcommand("reconstruct", "per-press 3D skin reconstruction");
    reconstruct->add_option("--scene", scene_dir, "scene directory")->required();
    reconstruct->add_option("--out", out_dir, "output directory")->required();
    reconstruct->add_option("--calibration", calibration, "calibration JSON (overrides n_gel)");
    reconstruct->add_option("--jobs", jobs, "worker threads");

    bool mollify_grid = false;
    double resolution = 0.0, overlap = 0.6;
    std::string patch_dir;
    auto* stitch = app.add_subcommand("stitch", "merge presses into a global surface");
    stitch->add_option("--scene", scene_dir, "scene directory");
    stitch->add_option("--patches", patch_dir, "directory of per-press skin .ply patches");
    stitch->add_option("--out", out_dir, "output directory")->required();
    stitch->add_option("--calibration", calibration, "calibration JSON (overrides n_gel)");
    stitch->add_option("--jobs", jobs, "worker threads");
    stitch->add_option("--resolution", resolution, "raster resolution (mm)");
    stitch->add_option("--overlap", overlap, "overlap threshold T_ov (mm)");
    stitch->add_flag("--mollify", mollify_grid, "mollify the rasterized grid");

    std::string grid_png, grid_sidecar;
    auto* evaluate = app.add_subcommand("evaluate", "compare a reconstruction to ground truth");
    evaluate->add_option("--scene", scene_dir, "scene directory")->required();
    evaluate->add_option("--out", out_dir, "report directory")->required();
    evaluate->add_option("--grid", grid_png, "stitched 16-bit grid PNG (else re-reconstructs)");
    evaluate->add_option("--sidecar", grid_sidecar, "grid JSON sidecar");
    evaluate->add_option("--jobs", jobs, "worker threads");

    std::string pattern_name = "hexagon";
    double pitch = 2.54;
    auto* pattern_info = app.add_subcommand("pattern-info", "describe a marker pattern");
    pattern_info->add_option("pattern", pattern_name, "circular | hexagon | square");
    pattern_info->add_option("--pitch", pitch, "lattice pitch (mm)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim, seed);
        if (calibrate->parsed()) return cmd_calibrate(sweep_csv, calib_out);
        if (reconstruct->parsed()) return cmd_reconstruct(scene_dir, out_dir, calibration, jobs);
        if (stitch->parsed())
            return cmd_stitch(scene_dir, patch_dir, out_dir, calibration, jobs, mollify_grid,
                              resolution, overlap);
        if (evaluate->parsed())
            return cmd_evaluate(scene_dir, out_dir, grid_png, grid_sidecar, jobs);
        if (pattern_info->parsed()) return cmd_pattern_info(pattern_name, pitch);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
