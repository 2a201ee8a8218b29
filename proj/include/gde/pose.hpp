#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "gde/types.hpp"

namespace gde {

/// Camera orientation relative to the ground-aligned frame, parameterized by
/// pitch (about the camera x-axis) and roll (about the camera z-axis).
///
/// Frame convention (fixed for the whole library): x right, y down, z
/// forward; image rows grow downward. The rotation matrix is
///
///     A = R_pitch(pitch) * R_roll(roll)
///
/// with R_pitch(t) = R_x(-t) and R_roll(t) = R_z(-t), so that
///   * the projected image of A*(0,0,1) sits fy*tan(pitch) rows below the
///     principal point, and
///   * rotating a pixel ray by A into the aligned frame places the ground
///     horizon at row cy - fy*tan(pitch).
class CameraPose {
public:
    CameraPose() : CameraPose(0.0, 0.0) {}
    CameraPose(double pitch_rad, double roll_rad);

    double pitch() const { return pitch_; }
    double roll() const { return roll_; }
    const Eigen::Matrix3d& matrix() const { return matrix_; }

    static CameraPose identity() { return CameraPose(0.0, 0.0); }

private:
    double pitch_;
    double roll_;
    Eigen::Matrix3d matrix_;
};

/// Forward vanishing point observation, pixels.
struct VanishingPoint {
    double u = 0.0;
    double v = 0.0;
};

/// Horizon line observation: inclination of the image line (atan of
/// dv/du, rows-down positive) and the row at which it crosses the
/// principal column.
struct HorizonLine {
    double angle = 0.0;      // radians, in (-pi/2, pi/2)
    double row_at_cx = 0.0;  // pixels
};

struct PoseObservation {
    HorizonLine horizon;
    VanishingPoint vp;
};

/// Pose from observations: pitch from the vanishing-point row, roll from the
/// horizon inclination (with the exact cos(pitch) and fx/fy factors so this
/// is the inverse of render_observations).
CameraPose g_map(const HorizonLine& gp, const VanishingPoint& vp, const CameraIntrinsics& k);

/// Forward observation model: vanishing point of the aligned forward
/// direction and the image line of aligned ground-parallel directions.
/// Exact inverse of g_map. Throws ForwardDirectionBehindCamera when the
/// rotated forward direction has non-positive z.
PoseObservation render_observations(const CameraPose& pose, const CameraIntrinsics& k);

/// Elementwise L1 distance between the two 3x3 pose matrices.
double pose_loss(const CameraPose& predicted, const CameraPose& target);

/// Fit (pitch, roll) minimizing the mean pose_loss against g_map of each
/// observation. Coordinate descent with golden-section line search from
/// (0, 0); deterministic. Throws EmptyObservations on an empty list.
CameraPose fit_pose(const std::vector<PoseObservation>& observations, const CameraIntrinsics& k);

/// Observation CSV: one `vp_u,vp_v,horizon_angle_rad,horizon_row` line per
/// observation. Blank lines are skipped; `#` starts a comment line.
std::vector<PoseObservation> parse_observations_csv(const std::string& text);

}  // namespace gde
