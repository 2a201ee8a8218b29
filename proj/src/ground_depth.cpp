#include "gde/ground_depth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <thread>

#include "gde/camera_geometry.hpp"
#include "gde/csv.hpp"
#include "gde/errors.hpp"

namespace gde {

double encode_disparity(double v_offset, const CameraIntrinsics& k, const GroundPlaneConfig& cfg) {
    const double d = k.fy * cfg.baseline * v_offset / (k.fy * cfg.el + cfg.stabilizer);
    return std::max(0.0, d);
}

double encode_disparity_from_depth(double z, const CameraIntrinsics& k,
                                   const GroundPlaneConfig& cfg) {
    if (z <= 0.0) throw NonPositiveDepth(z);
    const double d = k.fy * k.fy * cfg.baseline * cfg.el / (z * (k.fy * cfg.el + cfg.stabilizer));
    return std::max(0.0, d);
}

namespace {

void fill_rows(GroundDepthMap& map, int v_begin, int v_end, const CameraIntrinsics& k,
               const CameraPose& pose, const GroundPlaneConfig& cfg) {
    for (int v = v_begin; v < v_end; ++v) {
        for (int u = 0; u < map.width; ++u) {
            const PixelCoord center{u + 0.5, v + 0.5};
            const size_t i = static_cast<size_t>(v) * map.width + u;
            if (auto z = ray_ground_intersection(center, k, pose, cfg)) {
                map.depth[i] = *z;
                map.encoded[i] = encode_disparity_from_depth(*z, k, cfg);
            }
        }
    }
}

}  // namespace

GroundDepthMap build_map(int width, int height, const CameraIntrinsics& k, const CameraPose& pose,
                         const GroundPlaneConfig& cfg, int threads) {
    if (width < 1 || height < 1) throw ZeroDimension();

    GroundDepthMap map;
    map.width = width;
    map.height = height;
    map.encoded.assign(static_cast<size_t>(width) * height, 0.0);
    map.depth.assign(static_cast<size_t>(width) * height, 0.0);

    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, height);

    if (threads == 1) {
        fill_rows(map, 0, height, k, pose, cfg);
        return map;
    }

    // Row-chunked; every pixel is independent, so any partition produces
    // bitwise-identical output.
    std::vector<std::thread> workers;
    workers.reserve(threads);
    const int chunk = (height + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int begin = t * chunk;
        const int end = std::min(height, begin + chunk);
        if (begin >= end) break;
        workers.emplace_back([&, begin, end] { fill_rows(map, begin, end, k, pose, cfg); });
    }
    for (auto& w : workers) w.join();
    return map;
}

int detect_horizon_row(const GroundDepthMap& map) {
    for (int v = 0; v < map.height; ++v) {
        const size_t base = static_cast<size_t>(v) * map.width;
        for (int u = 0; u < map.width; ++u) {
            if (map.encoded[base + u] > 0.0) return v;
        }
    }
    return -1;
}

std::string to_pgm(const GroundDepthMap& map) {
    double d_max = 0.0;
    for (double d : map.encoded) d_max = std::max(d_max, d);
    if (d_max <= 0.0) d_max = 1.0;

    std::ostringstream out;
    out << "P5\n"
        << "# d_max " << format_double(d_max) << "\n"
        << map.width << " " << map.height << "\n"
        << "65535\n";
    std::string body;
    body.reserve(map.encoded.size() * 2);
    for (double d : map.encoded) {
        const auto q = static_cast<uint16_t>(std::lround(std::clamp(d / d_max, 0.0, 1.0) * 65535.0));
        body.push_back(static_cast<char>(q >> 8));  // most significant byte first
        body.push_back(static_cast<char>(q & 0xff));
    }
    return out.str() + body;
}

std::string to_csv(const GroundDepthMap& map) {
    std::string out;
    for (int v = 0; v < map.height; ++v) {
        for (int u = 0; u < map.width; ++u) {
            if (u) out.push_back(',');
            out += format_double(map.encoded_at(u, v));
        }
        out.push_back('\n');
    }
    return out;
}

}  // namespace gde
