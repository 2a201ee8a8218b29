#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gde/fusion/model.hpp"
#include "gde/ground_depth.hpp"
#include "gde/pose.hpp"
#include "gde/types.hpp"

namespace gde {

/// Ground-resting box: the bottom face lies exactly on the ground plane
/// (center.y = el - height/2) and the ground-contact reference point is the
/// bottom-front-edge center at depth center.z - length/2.
struct SceneObject {
    Point3D center;
    double height = 0.0, width = 0.0, length = 0.0;  // meters
};

/// One synthetic observation: pseudo image features (object blobs in
/// channel 0, a soft ground-contact indicator in channel 1, noise in all
/// channels), the pose-specific ground-depth map at feature resolution, and
/// per-object ground truth.
struct SyntheticSample {
    fusion::FeatureMap features;
    GroundDepthMap depth_map;
    CameraPose pose;
    std::vector<SceneObject> objects;
    std::vector<double> targets;              // ground-contact depths, meters
    std::vector<PixelCoord> contact_pixels;   // feature-map coordinates, exact
    std::vector<PixelCoord> centroid_pixels;  // feature-map coordinates, exact
};

struct ExperimentConfig {
    std::vector<double> sigmas_deg{0.0, 1.0, 2.0, 3.0};
    int trials = 100;
    uint64_t seed = 0;
    int objects_per_scene = 3;
    double depth_min = 5.0;
    double depth_max = 40.0;
    bool use_pose_correction = true;

    // Scene geometry. Intrinsics are full resolution; features and maps live
    // at resolution (feature_ws, feature_hs) = image/stride with intrinsics
    // scaled by 1/stride.
    int feature_ws = 12;
    int feature_hs = 20;
    int stride = 4;
    CameraIntrinsics intrinsics{192.0, 192.0, 24.0, 8.0};
    GroundPlaneConfig ground{1.65, 0.54, 0.0};
    double feature_noise_std = 0.1;

    // Fusion-model knobs used by the ablation. Every ablation scene draws
    // its own small pose perturbation; the fused model receives the
    // pose-corrected ground-depth map while the baseline sees image features
    // only, mirroring the image-only-versus-ground-aware comparison.
    double ablation_pose_sigma_deg = 2.0;
    int channels = 8;
    int heads = 1;
    int window_radius = 8;
    bool zero_depth_queries = false;  // disables the ground path
    int train_scenes = 160;
    int test_scenes = 128;
    int train_steps = 320;
    int batch_scenes = 5;
    double learning_rate = 8e-3;

    CameraIntrinsics feature_intrinsics() const {
        return scale_intrinsics(intrinsics, static_cast<double>(stride));
    }
};

/// Place objects (uniform ground-contact depth, non-overlapping image
/// footprints), project them under `pose` and synthesize features. Every
/// target is cross-checked against the exact ray depth at its contact pixel.
/// Throws PlacementFailure when footprints cannot be separated.
SyntheticSample generate_scene(const ExperimentConfig& cfg, const CameraPose& pose,
                               std::mt19937_64& rng);

// ---- robustness experiment ----

struct RobustnessRow {
    double sigma_deg = 0.0;
    int trial = 0;
    int object_id = 0;
    double true_depth = 0.0;
    double est_depth = 0.0;
    double abs_err = 0.0;
    bool corrected = false;
};

struct RobustnessSummary {
    double sigma_deg = 0.0;
    double mean_abs_err_uncorrected = 0.0;
    double mean_abs_err_corrected = 0.0;
};

struct RobustnessResult {
    std::vector<RobustnessRow> rows;
    std::vector<RobustnessSummary> summary;
    bool uncorrected_strictly_increasing = false;
};

/// Per-trial Gaussian pose noise (pitch and roll i.i.d., degrees); depth
/// estimates read the ground at the observed contact pixel, once assuming
/// the identity pose and once under the pose used for correction.
RobustnessResult run_robustness(const ExperimentConfig& cfg);

std::string robustness_rows_csv(const RobustnessResult& result);
std::string robustness_summary_csv(const RobustnessResult& result);

// ---- ablation experiment ----

struct BucketError {
    double near_mae = 0.0;  // targets < 20 m
    double far_mae = 0.0;   // targets >= 20 m
    int near_count = 0;
    int far_count = 0;
};

struct AblationResult {
    BucketError baseline;  // encoder-only model
    BucketError fused;     // encoder + ground-depth-query decoder
    BucketError oracle;    // grid lookup of the depth map at the true contact pixel
    double baseline_train_loss = 0.0;
    double fused_train_loss = 0.0;
};

/// Trains an encoder-only head and the fused encode+decode head on identical
/// scenes for a fixed budget, then reports held-out MAE per depth bucket
/// next to the contact-row-lookup oracle floor. Deterministic per seed.
AblationResult run_ablation(const ExperimentConfig& cfg);

std::string ablation_summary_csv(const AblationResult& result);

/// Near/far bucket boundary, meters.
inline constexpr double kFarBucketBoundary = 20.0;

}  // namespace gde
