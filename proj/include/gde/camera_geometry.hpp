#pragma once

#include <optional>

#include "gde/pose.hpp"
#include "gde/types.hpp"

namespace gde {

/// Back-project pixel p at depth z: x = (u-cx)/fx * z, y = (v-cy)/fy * z.
Point3D back_project(const PixelCoord& p, double z, const CameraIntrinsics& k);

/// Pinhole projection, inverse of back_project. Throws NonPositiveDepth
/// when p.z <= 0.
PixelCoord project(const Point3D& p, const CameraIntrinsics& k);

/// Depth of the ground plane seen through pixel p under the given pose.
///
/// The pixel ray is rotated by pose.matrix() into the ground-aligned frame
/// and intersected with the plane {y = el}; the returned value is the
/// aligned-frame forward component of the intersection, so for the identity
/// pose it reduces exactly to fy*el/(v - cy). Returns nullopt when the
/// rotated ray's downward component is <= kHorizonEpsilon (pixel at or
/// above the horizon: no physical ground intersection).
std::optional<double> ray_ground_intersection(const PixelCoord& p, const CameraIntrinsics& k,
                                              const CameraPose& pose,
                                              const GroundPlaneConfig& cfg);

/// Depth a detector infers when it reads the ground at a pixel t_y rows
/// above the true ground contact of an object at depth z_r:
///
///     z = el*fy*z_r / (el*fy - z_r*t_y)
///
/// Throws DisplacementSingularity when the denominator magnitude falls
/// below kHorizonEpsilon. t_y == 0 returns z_r exactly.
double depth_from_displaced_contact(double z_r, double t_y, const CameraIntrinsics& k,
                                    const GroundPlaneConfig& cfg);

/// Threshold on the rotated ray's downward component below which a ground
/// intersection is treated as nonexistent.
inline constexpr double kHorizonEpsilon = 1e-9;

}  // namespace gde
