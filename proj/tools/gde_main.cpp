#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "gde/camera_geometry.hpp"
#include "gde/csv.hpp"
#include "gde/errors.hpp"
#include "gde/fusion/model.hpp"
#include "gde/ground_depth.hpp"
#include "gde/kitti.hpp"
#include "gde/pose.hpp"
#include "gde/svg_plot.hpp"
#include "gde/synthetic.hpp"
#include "gde/types.hpp"

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr int kExitArgs = 2;
constexpr int kExitIo = 3;
constexpr int kExitEmptyObservations = 4;

uint64_t default_seed() {
    if (const char* env = std::getenv("GDE_SEED")) {
        return std::strtoull(env, nullptr, 10);
    }
    return 0;
}

struct DepthMapArgs {
    double fx = 0, fy = 0, cx = 0, cy = 0;
    std::string calib_path;
    int width = 640, height = 360;
    double el = 1.65, baseline = 0.54;
    double stabilizer = -1.0;  // <0 means the 0.01*fy*el default
    double stride = 1.0;
    double pitch_deg = 0.0, roll_deg = 0.0;
    int threads = 1;
    std::string csv_out, pgm_out;
};

int cmd_depth_map(const DepthMapArgs& a) {
    gde::CameraIntrinsics k{a.fx, a.fy, a.cx, a.cy};
    if (!a.calib_path.empty()) {
        k = gde::kitti::parse_calib(gde::read_file(a.calib_path)).intrinsics();
    }
    if (!k.valid()) {
        std::cerr << "error: intrinsics required (--fx/--fy/--cx/--cy or --calib)\n";
        return kExitArgs;
    }
    gde::GroundPlaneConfig ground{a.el, a.baseline, 0.0};
    ground.stabilizer = a.stabilizer >= 0.0 ? a.stabilizer : gde::default_stabilizer(k, ground);
    if (!ground.valid()) {
        std::cerr << "error: invalid ground-plane parameters\n";
        return kExitArgs;
    }

    const int width = static_cast<int>(a.width / a.stride);
    const int height = static_cast<int>(a.height / a.stride);
    const gde::CameraIntrinsics ks = gde::scale_intrinsics(k, a.stride);
    const gde::CameraPose pose(a.pitch_deg * kPi / 180.0, a.roll_deg * kPi / 180.0);
    const gde::GroundDepthMap map = gde::build_map(width, height, ks, pose, ground, a.threads);

    if (!a.csv_out.empty()) gde::write_file(a.csv_out, gde::to_csv(map));
    if (!a.pgm_out.empty()) gde::write_file(a.pgm_out, gde::to_pgm(map));

    double dmin = 0.0, dmax = 0.0;
    if (!map.encoded.empty()) {
        dmin = *std::min_element(map.encoded.begin(), map.encoded.end());
        dmax = *std::max_element(map.encoded.begin(), map.encoded.end());
    }
    std::cout << "size: " << width << "x" << height << "\n"
              << "horizon_row: " << gde::detect_horizon_row(map) << "\n"
              << "encoded_min: " << gde::format_double(dmin) << "\n"
              << "encoded_max: " << gde::format_double(dmax) << "\n";
    return 0;
}

struct FitPoseArgs {
    std::string input;
    double fx = 1000, fy = 1000, cx = 0, cy = 0;
    std::string json_out;
};

int cmd_fit_pose(const FitPoseArgs& a) {
    std::string text;
    try {
        text = gde::read_file(a.input);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    const gde::CameraIntrinsics k{a.fx, a.fy, a.cx, a.cy};
    const auto observations = gde::parse_observations_csv(text);
    gde::CameraPose fitted;
    try {
        fitted = gde::fit_pose(observations, k);
    } catch (const gde::EmptyObservations& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyObservations;
    }
    double final_loss = 0.0;
    for (const auto& o : observations) {
        final_loss += gde::pose_loss(fitted, gde::g_map(o.horizon, o.vp, k));
    }
    final_loss /= static_cast<double>(observations.size());

    const double pitch_deg = fitted.pitch() * 180.0 / kPi;
    const double roll_deg = fitted.roll() * 180.0 / kPi;
    std::cout << "pitch_deg: " << gde::format_double(pitch_deg) << "\n"
              << "roll_deg: " << gde::format_double(roll_deg) << "\n"
              << "l1_loss: " << gde::format_double(final_loss) << "\n";
    if (!a.json_out.empty()) {
        nlohmann::json j{{"pitch_deg", pitch_deg}, {"roll_deg", roll_deg}, {"l1_loss", final_loss},
                         {"observations", observations.size()}};
        gde::write_file(a.json_out, j.dump(2) + "\n");
    }
    return 0;
}

struct ExperimentArgs {
    gde::ExperimentConfig cfg;
    std::string out_prefix = "experiment";
    int seeds = 1;  // ablation: number of seeds, starting at cfg.seed
};

int cmd_experiment_robustness(ExperimentArgs& a) {
    if (a.cfg.trials < 1) {
        std::cerr << "error: --trials must be >= 1\n";
        return kExitArgs;
    }
    const gde::RobustnessResult result = gde::run_robustness(a.cfg);
    gde::write_file(a.out_prefix + "_rows.csv", gde::robustness_rows_csv(result));
    gde::write_file(a.out_prefix + "_summary.csv", gde::robustness_summary_csv(result));

    gde::SvgSeries uncorrected{"uncorrected", "#c0392b", {}, {}, {}};
    gde::SvgSeries corrected{"pose-corrected", "#2471a3", {}, {}, {}};
    for (const auto& s : result.summary) {
        uncorrected.x.push_back(s.sigma_deg);
        uncorrected.y.push_back(s.mean_abs_err_uncorrected);
        corrected.x.push_back(s.sigma_deg);
        corrected.y.push_back(s.mean_abs_err_corrected);
    }
    // error bars: std of per-object absolute error per sigma
    for (auto* series : {&uncorrected, &corrected}) {
        const bool corr = series == &corrected;
        for (double sigma : series->x) {
            double sum = 0, sum2 = 0;
            long n = 0;
            for (const auto& r : result.rows) {
                if (r.corrected == corr && r.sigma_deg == sigma) {
                    sum += r.abs_err;
                    sum2 += r.abs_err * r.abs_err;
                    ++n;
                }
            }
            const double mean = n ? sum / n : 0.0;
            series->yerr.push_back(n > 1 ? std::sqrt(std::max(0.0, sum2 / n - mean * mean)) : 0.0);
        }
    }
    gde::write_file(a.out_prefix + "_plot.svg",
                    gde::render_line_chart_svg("Depth error vs pose noise", "sigma (degrees)",
                                               "mean abs depth error (m)",
                                               {uncorrected, corrected}));

    for (const auto& s : result.summary) {
        std::cout << "sigma " << gde::format_double(s.sigma_deg)
                  << ": uncorrected " << gde::format_double(s.mean_abs_err_uncorrected)
                  << " m, corrected " << gde::format_double(s.mean_abs_err_corrected) << " m\n";
    }
    std::cout << "uncorrected error strictly increasing: "
              << (result.uncorrected_strictly_increasing ? "yes" : "no") << "\n";
    return 0;
}

int cmd_experiment_ablation(ExperimentArgs& a) {
    if (a.seeds < 1) {
        std::cerr << "error: --seeds must be >= 1\n";
        return kExitArgs;
    }
    std::string csv = "seed,model,near_mae_m,far_mae_m\n";
    int fused_wins_far = 0;
    for (int i = 0; i < a.seeds; ++i) {
        gde::ExperimentConfig cfg = a.cfg;
        cfg.seed = a.cfg.seed + static_cast<uint64_t>(i);
        const gde::AblationResult r = gde::run_ablation(cfg);
        if (r.fused.far_mae < r.baseline.far_mae) ++fused_wins_far;
        for (const auto& [name, b] :
             {std::pair<const char*, const gde::BucketError&>{"baseline", r.baseline},
              {"fused", r.fused},
              {"oracle", r.oracle}}) {
            csv += std::to_string(cfg.seed) + ',' + name + ',' + gde::format_double(b.near_mae) +
                   ',' + gde::format_double(b.far_mae) + '\n';
        }
        std::cout << "seed " << cfg.seed << ": baseline far "
                  << gde::format_double(r.baseline.far_mae) << " m, fused far "
                  << gde::format_double(r.fused.far_mae) << " m, oracle far "
                  << gde::format_double(r.oracle.far_mae) << " m\n";
    }
    gde::write_file(a.out_prefix + "_ablation.csv", csv);
    std::cout << "fused beats baseline on the far bucket in " << fused_wins_far << "/" << a.seeds
              << " seeds\n";
    return 0;
}

struct GradCheckArgs {
    uint64_t seed = 0;
    int configs = 20;
    bool break_gradient = false;
};

int cmd_grad_check(const GradCheckArgs& a) {
    constexpr double kTolerance = 1e-4;
    const gde::fusion::GradCheckReport report =
        gde::fusion::run_gradient_check(a.seed, a.configs, kTolerance, a.break_gradient);
    for (const auto& e : report.entries) {
        std::cout << e.param_class << ": " << gde::format_double(e.max_rel_err) << "\n";
    }
    std::cout << "worst: " << gde::format_double(report.worst) << " (tolerance "
              << gde::format_double(kTolerance) << ")\n";
    return report.passed ? 0 : 1;
}

int cmd_parse_kitti(const std::string& kind, const std::string& path, bool as_json) {
    const std::string text = gde::read_file(path);
    if (kind == "calib") {
        const gde::kitti::CalibRecord rec = gde::kitti::parse_calib(text);
        const gde::CameraIntrinsics k = rec.intrinsics();
        if (as_json) {
            nlohmann::json j{{"p2", rec.p2},
                             {"fx", k.fx},
                             {"fy", k.fy},
                             {"cx", k.cx},
                             {"cy", k.cy}};
            std::cout << j.dump(2) << "\n";
        } else {
            std::cout << "fx: " << gde::format_double(k.fx) << "\nfy: " << gde::format_double(k.fy)
                      << "\ncx: " << gde::format_double(k.cx) << "\ncy: " << gde::format_double(k.cy)
                      << "\n";
        }
        return 0;
    }
    const auto labels = gde::kitti::parse_labels(text);
    if (as_json) {
        nlohmann::json j = nlohmann::json::array();
        for (const auto& l : labels) {
            j.push_back({{"type", l.type},
                         {"truncated", l.truncated},
                         {"occluded", l.occluded},
                         {"alpha", l.alpha},
                         {"bbox", {l.bbox_left, l.bbox_top, l.bbox_right, l.bbox_bottom}},
                         {"dims", {l.height, l.width, l.length}},
                         {"location", {l.location.x, l.location.y, l.location.z}},
                         {"rotation_y", l.rotation_y}});
        }
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << labels.size() << " labels\n";
        for (const auto& l : labels) {
            std::cout << l.type << " z=" << gde::format_double(l.location.z)
                      << " h=" << gde::format_double(l.height) << "\n";
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ground-depth estimation toolkit"};
    app.require_subcommand(1);

    DepthMapArgs dm;
    auto* depth_map = app.add_subcommand("depth-map", "build a pose-specific ground-depth map");
    auto* opt_fx = depth_map->add_option("--fx", dm.fx, "focal length x, pixels");
    auto* opt_fy = depth_map->add_option("--fy", dm.fy, "focal length y, pixels");
    auto* opt_cx = depth_map->add_option("--cx", dm.cx, "principal point column, pixels");
    auto* opt_cy = depth_map->add_option("--cy", dm.cy, "principal point row, pixels");
    auto* opt_calib = depth_map->add_option("--calib", dm.calib_path, "KITTI calib file (uses P2)");
    opt_calib->excludes(opt_fx)->excludes(opt_fy)->excludes(opt_cx)->excludes(opt_cy);
    depth_map->add_option("--width", dm.width, "image width, pixels")->capture_default_str();
    depth_map->add_option("--height", dm.height, "image height, pixels")->capture_default_str();
    depth_map->add_option("--el", dm.el, "camera elevation above ground, meters")
        ->capture_default_str();
    depth_map->add_option("--baseline", dm.baseline, "virtual stereo baseline B, meters")
        ->capture_default_str();
    depth_map->add_option("--stabilizer", dm.stabilizer,
                          "stabilizer constant b, pixel-meters (default 0.01*fy*el)");
    depth_map->add_option("--stride", dm.stride,
                          "downsample factor s; map size and intrinsics scale by 1/s (default 1)");
    depth_map->add_option("--pitch", dm.pitch_deg, "camera pitch, degrees")->capture_default_str();
    depth_map->add_option("--roll", dm.roll_deg, "camera roll, degrees")->capture_default_str();
    depth_map->add_option("--threads", dm.threads, "worker threads (0 = hardware)")
        ->capture_default_str();
    depth_map->add_option("-o,--csv", dm.csv_out, "output CSV path (encoded d values)");
    depth_map->add_option("--pgm", dm.pgm_out, "output 16-bit PGM path");

    FitPoseArgs fp;
    auto* fit_pose_cmd =
        app.add_subcommand("fit-pose", "fit pitch/roll to an observation CSV "
                                       "(vp_u,vp_v,horizon_angle_rad,horizon_row)");
    fit_pose_cmd->add_option("input", fp.input, "observation CSV file")->required();
    fit_pose_cmd->add_option("--fx", fp.fx, "focal length x, pixels")->capture_default_str();
    fit_pose_cmd->add_option("--fy", fp.fy, "focal length y, pixels")->capture_default_str();
    fit_pose_cmd->add_option("--cx", fp.cx, "principal point column, pixels")
        ->capture_default_str();
    fit_pose_cmd->add_option("--cy", fp.cy, "principal point row, pixels")->capture_default_str();
    fit_pose_cmd->add_option("--json", fp.json_out, "also write a JSON result to this path");

    ExperimentArgs ex;
    ex.cfg.seed = default_seed();
    auto* experiment = app.add_subcommand("experiment", "synthetic-scene experiments");
    experiment->require_subcommand(1);
    auto* robustness = experiment->add_subcommand(
        "robustness", "depth error under Gaussian pose noise, with and without pose correction");
    auto* ablation = experiment->add_subcommand(
        "ablation", "fusion transformer vs encoder-only baseline on held-out scenes");
    for (auto* sub : {robustness, ablation}) {
        sub->add_option("--seed", ex.cfg.seed, "base RNG seed (default: GDE_SEED or 0)");
        sub->add_option("--objects", ex.cfg.objects_per_scene, "objects per scene")
            ->capture_default_str();
        sub->add_option("--depth-min", ex.cfg.depth_min, "nearest contact depth, meters")
            ->capture_default_str();
        sub->add_option("--depth-max", ex.cfg.depth_max, "farthest contact depth, meters")
            ->capture_default_str();
        sub->add_option("-o,--out", ex.out_prefix, "output path prefix")->capture_default_str();
    }
    robustness->add_option("--sigmas", ex.cfg.sigmas_deg, "pose noise sigmas, degrees")
        ->delimiter(',')
        ->capture_default_str();
    robustness->add_option("--trials", ex.cfg.trials, "trials per sigma")->capture_default_str();
    robustness->add_flag("--no-correction,!--correction", ex.cfg.use_pose_correction,
                         "read the corrected estimate from the identity map instead of the "
                         "true-pose map")
        ->capture_default_str();
    ablation->add_option("--seeds", ex.seeds, "number of seeds (seed, seed+1, ...)")
        ->capture_default_str();
    ablation->add_option("--train-steps", ex.cfg.train_steps, "optimizer steps per model")
        ->capture_default_str();
    ablation->add_option("--window-radius", ex.cfg.window_radius,
                         "attention window radius, feature pixels")
        ->capture_default_str();
    ablation->add_flag("--zero-depth-queries", ex.cfg.zero_depth_queries,
                       "ablate the ground path by zeroing the decoder depth queries");

    GradCheckArgs gc;
    gc.seed = default_seed();
    auto* grad_check = app.add_subcommand(
        "grad-check", "finite-difference check of the fusion transformer gradients");
    grad_check->add_option("--seed", gc.seed, "RNG seed (default: GDE_SEED or 0)");
    grad_check->add_option("--configs", gc.configs, "number of random configurations")
        ->capture_default_str();
    grad_check->add_flag("--break-gradient", gc.break_gradient,
                         "corrupt one analytic gradient (negative control)");

    std::string pk_kind, pk_path;
    bool pk_json = false;
    auto* parse_kitti = app.add_subcommand("parse-kitti", "parse KITTI calib / label files");
    parse_kitti->add_option("kind", pk_kind, "calib or labels")
        ->required()
        ->check(CLI::IsMember({"calib", "labels"}));
    parse_kitti->add_option("file", pk_path, "input file")->required();
    parse_kitti->add_flag("--json", pk_json, "emit JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitArgs;
    }

    try {
        if (depth_map->parsed()) return cmd_depth_map(dm);
        if (fit_pose_cmd->parsed()) return cmd_fit_pose(fp);
        if (robustness->parsed()) return cmd_experiment_robustness(ex);
        if (ablation->parsed()) return cmd_experiment_ablation(ex);
        if (grad_check->parsed()) return cmd_grad_check(gc);
        if (parse_kitti->parsed()) return cmd_parse_kitti(pk_kind, pk_path, pk_json);
    } catch (const gde::EmptyObservations& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitEmptyObservations;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitArgs;
}
