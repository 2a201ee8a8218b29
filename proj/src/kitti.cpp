#include "gde/kitti.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "gde/errors.hpp"
#include "parse_util.hpp"

namespace gde::kitti {

CalibRecord parse_calib(const std::string& text) {
    CalibRecord rec;
    bool found_p2 = false;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = detail::split_ws(line);
        if (!fields.empty() && fields[0] == "P2:") {
            if (fields.size() != 13) {
                throw ParseError("WrongFieldCount", line_no, 0,
                                 "P2 expects 12 values, got " + std::to_string(fields.size() - 1));
            }
            for (int i = 0; i < 12; ++i) {
                rec.p2[i] = detail::parse_double(fields[i + 1], line_no, i + 2);
            }
            rec.p2_position = rec.other_lines.size();
            found_p2 = true;
        } else {
            rec.other_lines.push_back(line);
        }
    }
    if (!found_p2) throw ParseError("MissingP2Line", 0, 0, "no line starts with 'P2:'");
    return rec;
}

std::string serialize_calib(const CalibRecord& calib) {
    std::string out;
    char buf[32];
    size_t emitted = 0;
    for (; emitted < calib.other_lines.size() && emitted < calib.p2_position; ++emitted) {
        out += calib.other_lines[emitted];
        out.push_back('\n');
    }
    out += "P2:";
    for (double v : calib.p2) {
        std::snprintf(buf, sizeof(buf), " %.12e", v);
        out += buf;
    }
    out.push_back('\n');
    for (; emitted < calib.other_lines.size(); ++emitted) {
        out += calib.other_lines[emitted];
        out.push_back('\n');
    }
    return out;
}

std::vector<LabelRecord> parse_labels(const std::string& text) {
    std::vector<LabelRecord> out;
    std::istringstream stream(text);
    std::string line;
    int line_no = 0;
    while (std::getline(stream, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (fields.size() != 15) {
            throw ParseError("WrongFieldCount", line_no, 0,
                             "expected 15 fields, got " + std::to_string(fields.size()));
        }
        LabelRecord rec;
        rec.type = std::string(fields[0]);
        rec.dont_care = (rec.type == "DontCare");
        double values[14];
        for (int i = 0; i < 14; ++i) {
            values[i] = detail::parse_double(fields[i + 1], line_no, i + 2);
        }
        rec.truncated = values[0];
        rec.occluded = static_cast<int>(values[1]);
        rec.alpha = values[2];
        rec.bbox_left = values[3];
        rec.bbox_top = values[4];
        rec.bbox_right = values[5];
        rec.bbox_bottom = values[6];
        rec.height = values[7];
        rec.width = values[8];
        rec.length = values[9];
        rec.location = Point3D{values[10], values[11], values[12]};
        rec.rotation_y = values[13];
        out.push_back(std::move(rec));
    }
    return out;
}

std::string serialize_labels(const std::vector<LabelRecord>& labels) {
    std::string out;
    char buf[256];
    for (const auto& r : labels) {
        std::snprintf(buf, sizeof(buf),
                      " %.2f %d %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f %.2f\n",
                      r.truncated, r.occluded, r.alpha, r.bbox_left, r.bbox_top, r.bbox_right,
                      r.bbox_bottom, r.height, r.width, r.length, r.location.x, r.location.y,
                      r.location.z, r.rotation_y);
        out += r.type;
        out += buf;
    }
    return out;
}

}  // namespace gde::kitti
