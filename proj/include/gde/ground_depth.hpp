#pragma once

#include <string>
#include <vector>

#include "gde/pose.hpp"
#include "gde/types.hpp"

namespace gde {

/// Per-pixel ground depth of the virtual ground plane, together with its
/// virtual-stereo disparity encoding. Row-major grids, index = v*width + u;
/// pixels with no ground intersection carry depth = 0 and encoded = 0.
struct GroundDepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> encoded;
    std::vector<double> depth;

    double encoded_at(int u, int v) const { return encoded[static_cast<size_t>(v) * width + u]; }
    double depth_at(int u, int v) const { return depth[static_cast<size_t>(v) * width + u]; }
};

/// Disparity encoding of a row offset below the principal row:
///
///     d = ReLU( fy * B * v_offset / (fy * el + b) )
///
/// Continuous everywhere, zero at and above the vanishing row.
double encode_disparity(double v_offset, const CameraIntrinsics& k, const GroundPlaneConfig& cfg);

/// Same encoding expressed in terms of the ground depth z > 0:
///
///     d = ReLU( fy^2 * B * el / (z * (fy * el + b)) )
///
/// Substituting z = fy*el/(v-cy) reproduces encode_disparity(v-cy) exactly.
/// Throws NonPositiveDepth when z <= 0.
double encode_disparity_from_depth(double z, const CameraIntrinsics& k,
                                   const GroundPlaneConfig& cfg);

/// Build the pose-specific ground-depth map. Pixel centers are sampled at
/// (u+0.5, v+0.5). Output is identical for any `threads` value; threads <= 0
/// selects hardware concurrency. Throws ZeroDimension when width or height
/// is < 1.
GroundDepthMap build_map(int width, int height, const CameraIntrinsics& k, const CameraPose& pose,
                         const GroundPlaneConfig& cfg, int threads = 1);

/// Index of the first row containing any encoded value > 0, or -1 when the
/// map has no ground pixels.
int detect_horizon_row(const GroundDepthMap& map);

/// 16-bit binary PGM (P5, big-endian samples) of the encoded grid, linearly
/// quantized over [0, d_max] with d_max declared in a header comment.
std::string to_pgm(const GroundDepthMap& map);

/// Full-precision CSV of the encoded grid, one image row per line.
std::string to_csv(const GroundDepthMap& map);

}  // namespace gde
