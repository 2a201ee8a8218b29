#include "gde/camera_geometry.hpp"

#include <cmath>

#include "gde/errors.hpp"

namespace gde {

Point3D back_project(const PixelCoord& p, double z, const CameraIntrinsics& k) {
    return Point3D{(p.u - k.cx) / k.fx * z, (p.v - k.cy) / k.fy * z, z};
}

PixelCoord project(const Point3D& p, const CameraIntrinsics& k) {
    if (p.z <= 0.0) throw NonPositiveDepth(p.z);
    return PixelCoord{k.fx * p.x / p.z + k.cx, k.fy * p.y / p.z + k.cy};
}

std::optional<double> ray_ground_intersection(const PixelCoord& p, const CameraIntrinsics& k,
                                              const CameraPose& pose,
                                              const GroundPlaneConfig& cfg) {
    const Eigen::Vector3d ray((p.u - k.cx) / k.fx, (p.v - k.cy) / k.fy, 1.0);
    const Eigen::Vector3d aligned = pose.matrix() * ray;
    if (aligned.y() <= kHorizonEpsilon) return std::nullopt;
    return cfg.el * aligned.z() / aligned.y();
}

double depth_from_displaced_contact(double z_r, double t_y, const CameraIntrinsics& k,
                                    const GroundPlaneConfig& cfg) {
    if (t_y == 0.0) return z_r;
    const double denom = cfg.el * k.fy - z_r * t_y;
    if (std::abs(denom) < kHorizonEpsilon) throw DisplacementSingularity();
    return cfg.el * k.fy * z_r / denom;
}

}  // namespace gde
