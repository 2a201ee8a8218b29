#include <algorithm>
#include <cmath>

#include "gde/camera_geometry.hpp"
#include "gde/csv.hpp"
#include "gde/errors.hpp"
#include "gde/rng.hpp"
#include "gde/synthetic.hpp"

namespace gde {

namespace {

constexpr double kDegToRad = 3.14159265358979323846 / 180.0;

/// Farthest depth an estimator may report. Near-horizon reads grow without
/// bound (1/row-offset), which would leave the mean absolute error dominated
/// by arbitrarily rare tail samples.
constexpr double kMaxEstimateDepth = 200.0;

/// Depth read from a ground-depth map function at a real-valued pixel; a
/// pixel at or above the horizon reads 0, matching the stored grids.
double read_ground_depth(const PixelCoord& p, const CameraIntrinsics& ks, const CameraPose& pose,
                         const GroundPlaneConfig& ground) {
    const auto z = ray_ground_intersection(p, ks, pose, ground);
    return z ? std::min(*z, kMaxEstimateDepth) : 0.0;
}

}  // namespace

RobustnessResult run_robustness(const ExperimentConfig& cfg) {
    if (cfg.trials < 1) throw Error("robustness experiment needs at least one trial");
    const CameraIntrinsics ks = cfg.feature_intrinsics();
    const CameraPose identity = CameraPose::identity();

    RobustnessResult result;
    for (size_t si = 0; si < cfg.sigmas_deg.size(); ++si) {
        const double sigma = cfg.sigmas_deg[si];
        double sum_uncorrected = 0.0, sum_corrected = 0.0;
        long count = 0;
        for (int trial = 0; trial < cfg.trials; ++trial) {
            std::mt19937_64 rng = derive_rng(cfg.seed, 0x101, si, static_cast<uint64_t>(trial));
            std::normal_distribution<double> pose_noise(0.0, sigma * kDegToRad);
            const double pitch = sigma > 0.0 ? pose_noise(rng) : 0.0;
            const double roll = sigma > 0.0 ? pose_noise(rng) : 0.0;
            const CameraPose pose(pitch, roll);

            // Ground-contact points drawn directly (no image-footprint
            // censoring, which would bias the error statistics): uniform
            // contact depth, uniform identity-view column.
            std::uniform_real_distribution<double> depth_dist(cfg.depth_min, cfg.depth_max);
            std::uniform_real_distribution<double> col_dist(1.0, cfg.feature_ws - 1.0);
            for (int j = 0; j < cfg.objects_per_scene; ++j) {
                const double truth = depth_dist(rng);
                const double x = (col_dist(rng) - ks.cx) * truth / ks.fx;
                const Eigen::Vector3d contact_cur =
                    pose.matrix().transpose() * Eigen::Vector3d(x, cfg.ground.el, truth);
                const PixelCoord contact =
                    project({contact_cur.x(), contact_cur.y(), contact_cur.z()}, ks);

                const double est_uncorrected = read_ground_depth(contact, ks, identity, cfg.ground);
                const CameraPose& correction_pose = cfg.use_pose_correction ? pose : identity;
                const double est_corrected =
                    read_ground_depth(contact, ks, correction_pose, cfg.ground);

                result.rows.push_back({sigma, trial, j, truth, est_uncorrected,
                                       std::abs(est_uncorrected - truth), false});
                result.rows.push_back({sigma, trial, j, truth, est_corrected,
                                       std::abs(est_corrected - truth), true});
                sum_uncorrected += std::abs(est_uncorrected - truth);
                sum_corrected += std::abs(est_corrected - truth);
                ++count;
            }
        }
        result.summary.push_back(
            {sigma, sum_uncorrected / count, sum_corrected / count});
    }

    result.uncorrected_strictly_increasing = result.summary.size() > 1;
    for (size_t i = 1; i < result.summary.size(); ++i) {
        if (result.summary[i].mean_abs_err_uncorrected <=
            result.summary[i - 1].mean_abs_err_uncorrected) {
            result.uncorrected_strictly_increasing = false;
        }
    }
    return result;
}

std::string robustness_rows_csv(const RobustnessResult& result) {
    std::string out = "sigma_deg,trial,object_id,true_depth_m,est_depth_m,abs_err_m,corrected\n";
    for (const auto& r : result.rows) {
        out += format_double(r.sigma_deg);
        out += ',' + std::to_string(r.trial);
        out += ',' + std::to_string(r.object_id);
        out += ',' + format_double(r.true_depth);
        out += ',' + format_double(r.est_depth);
        out += ',' + format_double(r.abs_err);
        out += ',';
        out += (r.corrected ? '1' : '0');
        out += '\n';
    }
    return out;
}

std::string robustness_summary_csv(const RobustnessResult& result) {
    std::string out = "sigma_deg,mean_abs_err_uncorrected_m,mean_abs_err_corrected_m\n";
    for (const auto& s : result.summary) {
        out += format_double(s.sigma_deg);
        out += ',' + format_double(s.mean_abs_err_uncorrected);
        out += ',' + format_double(s.mean_abs_err_corrected);
        out += '\n';
    }
    return out;
}

// ---- ablation ----

namespace {

// The toy heads regress inverse depth (scaled), which is close to linear in
// both the disparity-encoded ground-depth queries and the contact row, so
// optimization quality does not mask the geometric comparison. Evaluation
// converts back to meters.
constexpr double kInvDepthScale = 100.0;
constexpr double kMaxEvalDepth = 200.0;

double to_inverse_target(double depth_m) { return kInvDepthScale / depth_m; }

double from_head_output(double pred) {
    return kInvDepthScale / std::max(pred, kInvDepthScale / kMaxEvalDepth);
}

struct LabeledScene {
    SyntheticSample sample;
    std::vector<fusion::PixelTarget> targets;      // inverse-depth, rounded centroid pixels
    std::vector<double> true_depths;               // meters, for evaluation
};

LabeledScene make_labeled(const ExperimentConfig& cfg, uint64_t stream, uint64_t index) {
    std::mt19937_64 rng = derive_rng(cfg.seed, stream, index);
    std::normal_distribution<double> pose_noise(0.0, cfg.ablation_pose_sigma_deg * kDegToRad);
    const double pitch = cfg.ablation_pose_sigma_deg > 0.0 ? pose_noise(rng) : 0.0;
    const double roll = cfg.ablation_pose_sigma_deg > 0.0 ? pose_noise(rng) : 0.0;
    LabeledScene out{generate_scene(cfg, CameraPose(pitch, roll), rng), {}};
    if (!cfg.use_pose_correction) {
        // Stale prior: fuse the identity-pose map regardless of the true pose.
        out.sample.depth_map = build_map(cfg.feature_ws, cfg.feature_hs,
                                         cfg.feature_intrinsics(), CameraPose::identity(),
                                         cfg.ground);
    }
    for (size_t j = 0; j < out.sample.targets.size(); ++j) {
        const auto& px = out.sample.centroid_pixels[j];
        const int col = std::clamp(static_cast<int>(px.u), 0, cfg.feature_ws - 1);
        const int row = std::clamp(static_cast<int>(px.v), 0, cfg.feature_hs - 1);
        out.targets.push_back({row * cfg.feature_ws + col, to_inverse_target(out.sample.targets[j])});
        out.true_depths.push_back(out.sample.targets[j]);
    }
    return out;
}

void accumulate_bucket(BucketError& bucket, double truth, double estimate) {
    if (truth < kFarBucketBoundary) {
        bucket.near_mae += std::abs(estimate - truth);
        ++bucket.near_count;
    } else {
        bucket.far_mae += std::abs(estimate - truth);
        ++bucket.far_count;
    }
}

void finalize_bucket(BucketError& bucket) {
    if (bucket.near_count) bucket.near_mae /= bucket.near_count;
    if (bucket.far_count) bucket.far_mae /= bucket.far_count;
}

double train_model(fusion::FusionModel& model, const std::vector<LabeledScene>& train,
                   const ExperimentConfig& cfg, fusion::HeadMode mode) {
    constexpr int kWarmupSteps = 50;
    fusion::Adam optimizer(cfg.learning_rate);
    std::mt19937_64 batch_rng = derive_rng(cfg.seed, 0x777, mode == fusion::HeadMode::Fused);
    std::uniform_int_distribution<size_t> pick(0, train.size() - 1);
    double last_loss = 0.0;
    for (int step = 0; step < cfg.train_steps; ++step) {
        fusion::FusionWeights grads = fusion::zero_weights(model.config);
        double loss = 0.0;
        for (int b = 0; b < cfg.batch_scenes; ++b) {
            const LabeledScene& scene = train[pick(batch_rng)];
            loss += model.loss_and_gradients(scene.sample.features, &scene.sample.depth_map,
                                             scene.targets, mode, &grads);
        }
        const double inv = 1.0 / cfg.batch_scenes;
        grads.visit([&](const std::string&, Eigen::MatrixXd& g) { g *= inv; });
        const double warmup = std::min(1.0, (step + 1.0) / kWarmupSteps);
        const double cooldown = step >= cfg.train_steps * 3 / 4 ? 0.3 : 1.0;
        optimizer.set_lr(cfg.learning_rate * warmup * cooldown);
        optimizer.step(model.weights, grads);
        last_loss = loss * inv;
    }
    return last_loss;
}

}  // namespace

AblationResult run_ablation(const ExperimentConfig& cfg) {
    std::vector<LabeledScene> train, test;
    train.reserve(cfg.train_scenes);
    test.reserve(cfg.test_scenes);
    for (int i = 0; i < cfg.train_scenes; ++i) train.push_back(make_labeled(cfg, 0x201, i));
    for (int i = 0; i < cfg.test_scenes; ++i) test.push_back(make_labeled(cfg, 0x202, i));

    fusion::FusionConfig model_cfg;
    model_cfg.channels = cfg.channels;
    model_cfg.heads = cfg.heads;
    model_cfg.window_radius = cfg.window_radius;

    fusion::FusionModel baseline(model_cfg, derive_rng(cfg.seed, 0x301)());
    fusion::FusionModel fused(model_cfg, derive_rng(cfg.seed, 0x302)());

    // Optionally sever the ground path: the decoder still runs but its
    // location queries carry no depth signal.
    std::vector<LabeledScene> train_fused = train, test_fused = test;
    if (cfg.zero_depth_queries) {
        for (auto* split : {&train_fused, &test_fused}) {
            for (auto& s : *split) {
                std::fill(s.sample.depth_map.encoded.begin(), s.sample.depth_map.encoded.end(),
                          0.0);
            }
        }
    }

    AblationResult result;
    result.baseline_train_loss =
        train_model(baseline, train, cfg, fusion::HeadMode::EncoderOnly);
    result.fused_train_loss = train_model(fused, train_fused, cfg, fusion::HeadMode::Fused);

    const CameraIntrinsics ks = cfg.feature_intrinsics();
    for (size_t i = 0; i < test.size(); ++i) {
        const LabeledScene& scene = test[i];
        const Eigen::VectorXd pred_base = baseline.predict(
            scene.sample.features, nullptr, fusion::HeadMode::EncoderOnly);
        const Eigen::VectorXd pred_fused = fused.predict(
            test_fused[i].sample.features, &test_fused[i].sample.depth_map,
            fusion::HeadMode::Fused);
        for (size_t j = 0; j < scene.targets.size(); ++j) {
            const double truth = scene.true_depths[j];
            accumulate_bucket(result.baseline, truth,
                              from_head_output(pred_base(scene.targets[j].index)));
            accumulate_bucket(result.fused, truth,
                              from_head_output(pred_fused(scene.targets[j].index)));

            // Contact-row-lookup oracle: grid read at the true contact pixel.
            const auto& cpx = scene.sample.contact_pixels[j];
            const int col = std::clamp(static_cast<int>(cpx.u), 0, cfg.feature_ws - 1);
            const int row = std::clamp(static_cast<int>(cpx.v), 0, cfg.feature_hs - 1);
            accumulate_bucket(result.oracle, truth, scene.sample.depth_map.depth_at(col, row));
        }
    }
    finalize_bucket(result.baseline);
    finalize_bucket(result.fused);
    finalize_bucket(result.oracle);
    return result;
}

std::string ablation_summary_csv(const AblationResult& result) {
    std::string out = "model,near_mae_m,far_mae_m,near_count,far_count\n";
    auto line = [&](const char* name, const BucketError& b) {
        out += name;
        out += ',' + format_double(b.near_mae);
        out += ',' + format_double(b.far_mae);
        out += ',' + std::to_string(b.near_count);
        out += ',' + std::to_string(b.far_count);
        out += '\n';
    };
    line("baseline", result.baseline);
    line("fused", result.fused);
    line("oracle", result.oracle);
    return out;
}

}  // namespace gde
