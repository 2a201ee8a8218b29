#include "gde/pose.hpp"

#include <cmath>
#include <sstream>

#include "gde/errors.hpp"
#include "parse_util.hpp"

namespace gde {

namespace {

Eigen::Matrix3d rot_pitch(double t) {
    // R_x(-t) in the x-right / y-down / z-forward frame.
    const double c = std::cos(t), s = std::sin(t);
    Eigen::Matrix3d m;
    m << 1, 0, 0,
         0, c, s,
         0, -s, c;
    return m;
}

Eigen::Matrix3d rot_roll(double t) {
    // R_z(-t).
    const double c = std::cos(t), s = std::sin(t);
    Eigen::Matrix3d m;
    m << c, s, 0,
         -s, c, 0,
         0, 0, 1;
    return m;
}

}  // namespace

CameraPose::CameraPose(double pitch_rad, double roll_rad)
    : pitch_(pitch_rad), roll_(roll_rad), matrix_(rot_pitch(pitch_rad) * rot_roll(roll_rad)) {}

CameraPose g_map(const HorizonLine& gp, const VanishingPoint& vp, const CameraIntrinsics& k) {
    const double pitch = std::atan2(vp.v - k.cy, k.fy);
    // Inverse of the rendered horizon inclination; reduces to -gp.angle at
    // pitch = 0 and fx = fy.
    const double roll = -std::atan(std::tan(gp.angle) * (k.fx / k.fy) * std::cos(pitch));
    return CameraPose(pitch, roll);
}

PoseObservation render_observations(const CameraPose& pose, const CameraIntrinsics& k) {
    if (std::abs(pose.pitch()) >= 1.5707963267948966) throw ForwardDirectionBehindCamera();
    const Eigen::Vector3d fwd = pose.matrix() * Eigen::Vector3d(0, 0, 1);
    if (fwd.z() <= 0.0) throw ForwardDirectionBehindCamera();
    VanishingPoint vp{k.cx + k.fx * fwd.x() / fwd.z(), k.cy + k.fy * fwd.y() / fwd.z()};

    // Image line of aligned ground-parallel directions: rays r with
    // r . (A*ey) = 0.
    const Eigen::Vector3d n = pose.matrix() * Eigen::Vector3d(0, 1, 0);
    HorizonLine gp;
    gp.row_at_cx = k.cy + k.fy * (-n.z() / n.y());
    gp.angle = std::atan(-(k.fy / k.fx) * (n.x() / n.y()));
    return PoseObservation{gp, vp};
}

double pose_loss(const CameraPose& predicted, const CameraPose& target) {
    return (predicted.matrix() - target.matrix()).cwiseAbs().sum();
}

namespace {

// Golden-section minimization of f over [lo, hi] to interval width `tol`.
template <typename F>
double golden_section(F&& f, double lo, double hi, double tol) {
    constexpr double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > tol) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

}  // namespace

CameraPose fit_pose(const std::vector<PoseObservation>& observations, const CameraIntrinsics& k) {
    if (observations.empty()) throw EmptyObservations();

    std::vector<Eigen::Matrix3d> targets;
    targets.reserve(observations.size());
    for (const auto& o : observations) targets.push_back(g_map(o.horizon, o.vp, k).matrix());

    auto objective = [&](double p, double r) {
        const Eigen::Matrix3d a = rot_pitch(p) * rot_roll(r);
        double sum = 0.0;
        for (const auto& t : targets) sum += (a - t).cwiseAbs().sum();
        return sum / static_cast<double>(targets.size());
    };

    constexpr double kWindow = 0.8;     // radians searched around the current point
    constexpr double kLineTol = 1e-10;  // golden-section interval width
    constexpr double kStepTol = 1e-8;   // outer convergence, radians
    constexpr int kMaxIters = 200;

    double pitch = 0.0, roll = 0.0;
    for (int iter = 0; iter < kMaxIters; ++iter) {
        const double new_pitch = golden_section(
            [&](double p) { return objective(p, roll); }, pitch - kWindow, pitch + kWindow, kLineTol);
        const double new_roll = golden_section(
            [&](double r) { return objective(new_pitch, r); }, roll - kWindow, roll + kWindow, kLineTol);
        const double moved = std::abs(new_pitch - pitch) + std::abs(new_roll - roll);
        pitch = new_pitch;
        roll = new_roll;
        if (moved < kStepTol) break;
    }
    return CameraPose(pitch, roll);
}

std::vector<PoseObservation> parse_observations_csv(const std::string& text) {
    std::vector<PoseObservation> out;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        std::string_view sv(line);
        while (!sv.empty() && detail::is_space(sv.back())) sv.remove_suffix(1);
        while (!sv.empty() && detail::is_space(sv.front())) sv.remove_prefix(1);
        if (sv.empty() || sv.front() == '#') continue;
        auto fields = detail::split_char(sv, ',');
        if (fields.size() != 4) {
            throw ParseError("WrongFieldCount", line_no, 0,
                             "expected 4 fields, got " + std::to_string(fields.size()));
        }
        PoseObservation obs;
        obs.vp.u = detail::parse_double(fields[0], line_no, 1);
        obs.vp.v = detail::parse_double(fields[1], line_no, 2);
        obs.horizon.angle = detail::parse_double(fields[2], line_no, 3);
        obs.horizon.row_at_cx = detail::parse_double(fields[3], line_no, 4);
        out.push_back(obs);
    }
    return out;
}

}  // namespace gde
