#include "gde/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "gde/camera_geometry.hpp"
#include "gde/errors.hpp"

namespace gde {

namespace {

/// Current-frame coordinates of an aligned-frame point: the map path rotates
/// current rays by A into the aligned frame, so points go the other way.
Point3D to_current_frame(const Point3D& aligned, const CameraPose& pose) {
    const Eigen::Vector3d x = pose.matrix().transpose() * Eigen::Vector3d(aligned.x, aligned.y, aligned.z);
    return Point3D{x.x(), x.y(), x.z()};
}

void splat_bilinear(fusion::FeatureMap& fm, int channel, const PixelCoord& p, double amount) {
    const int c0 = static_cast<int>(std::floor(p.u - 0.5));
    const int r0 = static_cast<int>(std::floor(p.v - 0.5));
    const double fu = (p.u - 0.5) - c0;
    const double fv = (p.v - 0.5) - r0;
    const double w[2][2] = {{(1 - fv) * (1 - fu), (1 - fv) * fu}, {fv * (1 - fu), fv * fu}};
    for (int dr = 0; dr < 2; ++dr) {
        for (int dc = 0; dc < 2; ++dc) {
            const int r = r0 + dr, c = c0 + dc;
            if (r < 0 || r >= fm.hs || c < 0 || c >= fm.ws) continue;
            fm.data(fm.flat_index(r, c), channel) += amount * w[dr][dc];
        }
    }
}

void splat_gaussian(fusion::FeatureMap& fm, int channel, const PixelCoord& p, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const int uc = static_cast<int>(std::round(p.u - 0.5));
    const int vc = static_cast<int>(std::round(p.v - 0.5));
    for (int r = vc - radius; r <= vc + radius; ++r) {
        if (r < 0 || r >= fm.hs) continue;
        for (int c = uc - radius; c <= uc + radius; ++c) {
            if (c < 0 || c >= fm.ws) continue;
            const double du = (c + 0.5) - p.u;
            const double dv = (r + 0.5) - p.v;
            fm.data(fm.flat_index(r, c), channel) +=
                std::exp(-(du * du + dv * dv) / (2.0 * sigma * sigma));
        }
    }
}

}  // namespace

SyntheticSample generate_scene(const ExperimentConfig& cfg, const CameraPose& pose,
                               std::mt19937_64& rng) {
    const CameraIntrinsics ks = cfg.feature_intrinsics();
    SyntheticSample sample;
    sample.pose = pose;
    sample.features = fusion::make_feature_map(cfg.feature_ws, cfg.feature_hs, cfg.channels);
    sample.depth_map = build_map(cfg.feature_ws, cfg.feature_hs, ks, pose, cfg.ground);

    std::uniform_real_distribution<double> depth_dist(cfg.depth_min, cfg.depth_max);
    std::uniform_real_distribution<double> height_dist(1.2, 2.0);
    std::uniform_real_distribution<double> width_dist(1.5, 1.9);
    std::uniform_real_distribution<double> length_dist(3.2, 4.5);
    std::uniform_real_distribution<double> jitter_dist(-0.75, 0.75);

    constexpr int kMaxAttempts = 64;
    constexpr double kColumnSlotWidth = 3.5;  // image-footprint separation, feature pixels
    constexpr double kMargin = 2.0;

    // Non-overlapping footprints via shuffled column slots with jitter.
    std::vector<double> slots;
    for (double u = kMargin; u <= cfg.feature_ws - kMargin; u += kColumnSlotWidth) {
        slots.push_back(u);
    }
    std::shuffle(slots.begin(), slots.end(), rng);
    if (cfg.objects_per_scene > static_cast<int>(slots.size())) throw PlacementFailure();

    for (int obj = 0; obj < cfg.objects_per_scene; ++obj) {
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const double z_contact = depth_dist(rng);
            const double h = height_dist(rng);
            const double w = width_dist(rng);
            const double l = length_dist(rng);
            const double u_center = slots[obj] + jitter_dist(rng);

            SceneObject box;
            box.height = h;
            box.width = w;
            box.length = l;
            const double z_center = z_contact + l / 2.0;
            // The contact point owns the slot column; the centroid projects
            // strictly closer to the principal column since it sits deeper.
            const double x = (u_center - ks.cx) * z_contact / ks.fx;
            box.center = Point3D{x, cfg.ground.el - h / 2.0, z_center};

            const Point3D contact_aligned{x, cfg.ground.el, z_contact};
            const Point3D contact_cur = to_current_frame(contact_aligned, pose);
            const Point3D centroid_cur = to_current_frame(box.center, pose);
            if (contact_cur.z <= 0.0 || centroid_cur.z <= 0.0) continue;
            const PixelCoord contact_px = project(contact_cur, ks);
            const PixelCoord centroid_px = project(centroid_cur, ks);
            if (contact_px.v < 1.0 || contact_px.v > cfg.feature_hs - 1.0 || contact_px.u < 1.0 ||
                contact_px.u > cfg.feature_ws - 1.0) {
                continue;
            }

            // Generation consistency: the exact contact pixel must read back
            // the target depth from the sample's own map function.
            const auto check = ray_ground_intersection(contact_px, ks, pose, cfg.ground);
            if (!check || std::abs(*check - z_contact) > 1e-9 * std::max(1.0, z_contact)) {
                throw Error("scene generation lost the contact/target identity");
            }

            sample.objects.push_back(box);
            sample.targets.push_back(z_contact);
            sample.contact_pixels.push_back(contact_px);
            sample.centroid_pixels.push_back(centroid_px);
            placed = true;
        }
        if (!placed) throw PlacementFailure();
    }

    // Channel 0: object appearance, a fixed-size Gaussian blob at the
    // centroid. The blob size deliberately carries no depth information, so
    // depth must come from where the object sits, not how it looks.
    // Channel 1: soft ground-contact indicator, bilinear so the sub-pixel
    // contact row survives the grid.
    for (size_t j = 0; j < sample.objects.size(); ++j) {
        splat_gaussian(sample.features, 0, sample.centroid_pixels[j], 1.0);
        splat_bilinear(sample.features, 1, sample.contact_pixels[j], 2.0);
    }
    if (cfg.feature_noise_std > 0.0) {
        std::normal_distribution<double> noise(0.0, cfg.feature_noise_std);
        for (Eigen::Index i = 0; i < sample.features.data.rows(); ++i) {
            for (Eigen::Index c = 0; c < sample.features.data.cols(); ++c) {
                sample.features.data(i, c) += noise(rng);
            }
        }
    }
    return sample;
}

}  // namespace gde
