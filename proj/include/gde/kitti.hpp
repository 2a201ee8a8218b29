#pragma once

#include <array>
#include <string>
#include <vector>

#include "gde/types.hpp"

namespace gde::kitti {

/// Parsed calibration file. The P2 (left color camera) projection matrix is
/// decoded; every other line is preserved verbatim so files round-trip.
struct CalibRecord {
    std::array<double, 12> p2{};           // row-major 3x4
    std::vector<std::string> other_lines;  // non-P2 lines, original text
    size_t p2_position = 0;                // index of the P2 line among all lines

    CameraIntrinsics intrinsics() const {
        return CameraIntrinsics{p2[0], p2[5], p2[2], p2[6]};
    }
};

/// One object row of a label_2 file, field-for-field.
struct LabelRecord {
    std::string type;
    double truncated = 0.0;
    int occluded = 0;
    double alpha = 0.0;
    double bbox_left = 0.0, bbox_top = 0.0, bbox_right = 0.0, bbox_bottom = 0.0;
    double height = 0.0, width = 0.0, length = 0.0;  // meters
    Point3D location;                                // bottom-center, camera frame
    double rotation_y = 0.0;

    bool dont_care = false;
};

/// Parse calibration text. Throws ParseError with kind "MissingP2Line",
/// "WrongFieldCount" or "MalformedFloat".
CalibRecord parse_calib(const std::string& text);

/// Re-emit a calibration file; P2 in the standard 12-digit scientific
/// format, other lines untouched.
std::string serialize_calib(const CalibRecord& calib);

/// Parse label_2 text, one record per non-empty line. DontCare rows are
/// retained with dont_care = true. Throws ParseError with line numbers.
std::vector<LabelRecord> parse_labels(const std::string& text);

/// Re-emit labels in the standard two-decimal format.
std::string serialize_labels(const std::vector<LabelRecord>& labels);

}  // namespace gde::kitti
