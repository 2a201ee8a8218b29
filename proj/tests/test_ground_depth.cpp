#include <cmath>
#include <random>
#include <sstream>

#include <doctest.h>

#include "gde/camera_geometry.hpp"
#include "gde/errors.hpp"
#include "gde/ground_depth.hpp"

using namespace gde;

namespace {

constexpr CameraIntrinsics kK{1000.0, 1000.0, 320.0, 180.0};
constexpr GroundPlaneConfig kGround{1.65, 0.54, 0.0};

}  // namespace

TEST_CASE("encode_disparity hand values") {
    CHECK(encode_disparity(110.0, kK, kGround) == doctest::Approx(36.0).epsilon(1e-13));
    CHECK(encode_disparity(-50.0, kK, kGround) == 0.0);
    CHECK(encode_disparity(0.0, kK, kGround) == 0.0);
    // equal one-sided limits at the vanishing row
    CHECK(std::abs(encode_disparity(1e-12, kK, kGround)) < 1e-12);
    CHECK(encode_disparity(-1e-12, kK, kGround) == 0.0);
}

TEST_CASE("encode_disparity stabilizer shrinks the encoding") {
    GroundPlaneConfig stabilized = kGround;
    stabilized.stabilizer = default_stabilizer(kK, stabilized);
    CHECK(stabilized.stabilizer == doctest::Approx(16.5).epsilon(1e-12));
    const double plain = encode_disparity(110.0, kK, kGround);
    const double damped = encode_disparity(110.0, kK, stabilized);
    CHECK(damped < plain);
    CHECK(damped == doctest::Approx(plain / 1.01).epsilon(1e-12));
}

TEST_CASE("encode_disparity_from_depth matches the v-offset route") {
    CHECK(encode_disparity_from_depth(15.0, kK, kGround) == doctest::Approx(36.0).epsilon(1e-13));
    CHECK(encode_disparity_from_depth(1e9, kK, kGround) < 1e-5);
    CHECK_THROWS_AS(encode_disparity_from_depth(0.0, kK, kGround), NonPositiveDepth);
    CHECK_THROWS_AS(encode_disparity_from_depth(-3.0, kK, kGround), NonPositiveDepth);

    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> row(0.5, 400.0);
    for (int i = 0; i < 2000; ++i) {
        const double v_off = row(rng);
        const double z = kK.fy * kGround.el / v_off;
        const double via_depth = encode_disparity_from_depth(z, kK, kGround);
        const double via_offset = encode_disparity(v_off, kK, kGround);
        CHECK(std::abs(via_depth - via_offset) <= 1e-12 * std::max(1.0, via_offset));
    }
}

TEST_CASE("build_map identity reduction at every pixel") {
    const GroundDepthMap map = build_map(64, 96, kK, CameraPose::identity(), kGround);
    for (int v = 0; v < map.height; ++v) {
        const double expect = encode_disparity(v + 0.5 - kK.cy, kK, kGround);
        for (int u = 0; u < map.width; ++u) {
            CHECK(std::abs(map.encoded_at(u, v) - expect) <= 1e-12 * std::max(1.0, expect));
        }
    }
}

TEST_CASE("build_map rejects empty dimensions") {
    CHECK_THROWS_AS(build_map(0, 10, kK, CameraPose::identity(), kGround), ZeroDimension);
    CHECK_THROWS_AS(build_map(10, 0, kK, CameraPose::identity(), kGround), ZeroDimension);
}

TEST_CASE("1x1 map at the principal point has no ground") {
    const CameraIntrinsics k{1000.0, 1000.0, 0.5, 0.5};
    const GroundDepthMap map = build_map(1, 1, k, CameraPose::identity(), kGround);
    CHECK(map.encoded_at(0, 0) == 0.0);
    CHECK(map.depth_at(0, 0) == 0.0);
}

TEST_CASE("upside-down camera produces the 180-degree rotated map") {
    const CameraIntrinsics centered{800.0, 800.0, 32.0, 24.0};  // symmetric 64x48 grid
    const GroundDepthMap up = build_map(64, 48, centered, CameraPose::identity(), kGround);
    const GroundDepthMap down =
        build_map(64, 48, centered, CameraPose(0.0, 3.14159265358979323846), kGround);
    for (int v = 0; v < 48; ++v) {
        for (int u = 0; u < 64; ++u) {
            const double rotated = up.encoded_at(63 - u, 47 - v);
            CHECK(std::abs(down.encoded_at(u, v) - rotated) <= 1e-9 * std::max(1.0, rotated));
        }
    }
}

TEST_CASE("encoded and depth grids vanish together") {
    const GroundDepthMap map = build_map(80, 60, kK, CameraPose(0.02, -0.01), kGround);
    for (size_t i = 0; i < map.encoded.size(); ++i) {
        CHECK((map.depth[i] > 0.0) == (map.encoded[i] > 0.0));
    }
}

TEST_CASE("posed map stays a pure function of the ray geometry") {
    const CameraPose pose(0.03, 0.015);
    const GroundDepthMap map = build_map(40, 30, kK, pose, kGround);
    for (int v = 0; v < map.height; ++v) {
        for (int u = 0; u < map.width; ++u) {
            const auto z = ray_ground_intersection({u + 0.5, v + 0.5}, kK, pose, kGround);
            if (z) {
                CHECK(map.encoded_at(u, v) == encode_disparity_from_depth(*z, kK, kGround));
                CHECK(map.depth_at(u, v) == *z);
            } else {
                CHECK(map.encoded_at(u, v) == 0.0);
            }
        }
    }
}

TEST_CASE("pitched horizon row lands at cy - fy*tan(pitch)") {
    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    for (double deg : {-3.0, -2.0, -1.0, 1.0, 2.0, 3.0}) {
        const GroundDepthMap map = build_map(64, 360, kK, CameraPose(deg * kDeg, 0.0), kGround);
        const double expect = kK.cy - kK.fy * std::tan(deg * kDeg);
        const int detected = detect_horizon_row(map);
        REQUIRE(detected >= 0);
        CHECK(std::abs(detected - expect) <= 0.5);
    }
}

TEST_CASE("adjacent-row encoded difference is bounded by the encoding slope") {
    const GroundDepthMap map = build_map(16, 360, kK, CameraPose::identity(), kGround);
    const double slope = kK.fy * kGround.baseline / (kK.fy * kGround.el + kGround.stabilizer);
    for (int v = 1; v < map.height; ++v) {
        const double diff = std::abs(map.encoded_at(7, v) - map.encoded_at(7, v - 1));
        CHECK(diff <= slope + 1e-12);
    }
}

TEST_CASE("row chunking does not change the map") {
    const CameraPose pose(0.01, 0.03);
    const GroundDepthMap one = build_map(50, 41, kK, pose, kGround, 1);
    for (int threads : {2, 3, 8}) {
        const GroundDepthMap many = build_map(50, 41, kK, pose, kGround, threads);
        REQUIRE(many.encoded.size() == one.encoded.size());
        for (size_t i = 0; i < one.encoded.size(); ++i) {
            CHECK(many.encoded[i] == one.encoded[i]);
            CHECK(many.depth[i] == one.depth[i]);
        }
    }
}

TEST_CASE("PGM export layout") {
    const CameraIntrinsics k{48.0, 48.0, 4.0, 2.0};  // horizon inside the small map
    const GroundDepthMap map = build_map(8, 6, k, CameraPose::identity(), kGround);
    const std::string pgm = to_pgm(map);
    CHECK(pgm.rfind("P5\n", 0) == 0);
    CHECK(pgm.find("# d_max ") != std::string::npos);
    CHECK(pgm.find("\n8 6\n65535\n") != std::string::npos);
    const size_t header_end = pgm.find("65535\n") + 6;
    CHECK(pgm.size() - header_end == 8u * 6u * 2u);

    // brightest pixel is the bottom row, scaled to the full range
    const size_t last = pgm.size() - 2;
    const unsigned hi = static_cast<unsigned char>(pgm[last]);
    const unsigned lo = static_cast<unsigned char>(pgm[last + 1]);
    CHECK((hi << 8 | lo) == 65535u);
}

TEST_CASE("CSV export is lossless") {
    const GroundDepthMap map = build_map(5, 9, kK, CameraPose(0.004, 0.002), kGround);
    std::istringstream csv(to_csv(map));
    std::string line;
    int v = 0;
    while (std::getline(csv, line)) {
        std::istringstream fields(line);
        std::string cell;
        int u = 0;
        while (std::getline(fields, cell, ',')) {
            CHECK(std::stod(cell) == map.encoded_at(u, v));
            ++u;
        }
        CHECK(u == 5);
        ++v;
    }
    CHECK(v == 9);
}
