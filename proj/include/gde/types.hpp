#pragma once

#include <cmath>

namespace gde {

/// Pinhole intrinsics: focal lengths and principal point, all in pixels.
struct CameraIntrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && std::isfinite(fx) && std::isfinite(fy) &&
               std::isfinite(cx) && std::isfinite(cy);
    }
};

/// Camera-frame point: x right, y down, z forward (depth), meters.
struct Point3D {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
};

/// Real-valued image coordinate (column u, row v). Sub-pixel and
/// out-of-frame values are legal for geometry operations.
struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Ground-plane setup: camera elevation EL above the ground, the virtual
/// stereo baseline B used by the disparity encoding, and the stabilizer
/// constant b added to fy*EL in the encoding denominator.
struct GroundPlaneConfig {
    double el = 1.65;        // meters
    double baseline = 0.54;  // meters
    double stabilizer = 0.0; // pixel-meters, >= 0

    bool valid() const {
        return el > 0.0 && baseline > 0.0 && stabilizer >= 0.0 &&
               std::isfinite(el) && std::isfinite(baseline) && std::isfinite(stabilizer);
    }
};

/// Conventional stabilizer choice: 1% of fy*EL. Keeps the encoded values
/// just under their unstabilized magnitude while staying dimensionally
/// consistent with the denominator it joins.
inline double default_stabilizer(const CameraIntrinsics& k, const GroundPlaneConfig& cfg) {
    return 0.01 * k.fy * cfg.el;
}

/// Intrinsics for a feature map downsampled by integer factor s.
inline CameraIntrinsics scale_intrinsics(const CameraIntrinsics& k, double s) {
    return CameraIntrinsics{k.fx / s, k.fy / s, k.cx / s, k.cy / s};
}

}  // namespace gde
