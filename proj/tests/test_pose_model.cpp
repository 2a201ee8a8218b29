#include <array>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "gde/errors.hpp"
#include "gde/pose.hpp"

using namespace gde;

namespace {

constexpr CameraIntrinsics kK{1000.0, 1000.0, 320.0, 180.0};
constexpr double kDeg = 3.14159265358979323846 / 180.0;

// Test-side rotation builder, independent of CameraPose.
void build_rotation(double pitch, double roll, double out[3][3]) {
    const double cp = std::cos(pitch), sp = std::sin(pitch);
    const double cr = std::cos(roll), sr = std::sin(roll);
    const double m[3][3] = {
        {cr, sr, 0.0},
        {-cp * sr, cp * cr, sp},
        {sp * sr, -sp * cr, cp},
    };
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = m[i][j];
}

}  // namespace

TEST_CASE("g_map hand values") {
    // aligned camera
    const CameraPose aligned = g_map({0.0, kK.cy}, {kK.cx, kK.cy}, kK);
    CHECK(aligned.pitch() == 0.0);
    CHECK(aligned.roll() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK((aligned.matrix() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-15);

    // vp 100 rows below the principal point
    const CameraPose pitched = g_map({0.0, kK.cy}, {kK.cx, kK.cy + 100.0}, kK);
    CHECK(pitched.pitch() == doctest::Approx(std::atan(0.1)).epsilon(1e-12));
    CHECK(pitched.pitch() == doctest::Approx(0.0996687).epsilon(1e-6));
    CHECK(pitched.roll() == 0.0);

    // horizon inclined by 0.1 rad, vp on the principal row
    const CameraPose rolled = g_map({0.1, kK.cy}, {kK.cx, kK.cy}, kK);
    CHECK(rolled.roll() == doctest::Approx(-0.1).epsilon(1e-12));
    CHECK(rolled.pitch() == 0.0);
}

TEST_CASE("render_observations hand values") {
    const PoseObservation identity = render_observations(CameraPose::identity(), kK);
    CHECK(identity.vp.u == kK.cx);
    CHECK(identity.vp.v == kK.cy);
    CHECK(identity.horizon.angle == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(identity.horizon.row_at_cx == doctest::Approx(kK.cy).epsilon(1e-15));

    const PoseObservation pitched = render_observations(CameraPose(std::atan(0.1), 0.0), kK);
    CHECK(pitched.vp.v - kK.cy == doctest::Approx(100.0).epsilon(1e-12));
    CHECK(pitched.vp.u == doctest::Approx(kK.cx).epsilon(1e-12));
    // the vanishing point always sits on the horizon line
    CHECK(pitched.horizon.row_at_cx == doctest::Approx(pitched.vp.v).epsilon(1e-12));

    CHECK_THROWS_AS(render_observations(CameraPose(3.14159265358979323846 / 2.0, 0.0), kK),
                    ForwardDirectionBehindCamera);
    CHECK_THROWS_AS(render_observations(CameraPose(1.8, 0.0), kK), ForwardDirectionBehindCamera);
}

TEST_CASE("pose matrices are orthonormal") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> angle(-1.2, 1.2);
    for (int i = 0; i < 200; ++i) {
        const CameraPose pose(angle(rng), angle(rng));
        const Eigen::Matrix3d err =
            pose.matrix().transpose() * pose.matrix() - Eigen::Matrix3d::Identity();
        CHECK(err.cwiseAbs().maxCoeff() < 1e-12);
        CHECK(pose.matrix().determinant() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pose matrix matches the independent builder") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> angle(-0.5, 0.5);
    for (int i = 0; i < 100; ++i) {
        const double p = angle(rng), r = angle(rng);
        double m[3][3];
        build_rotation(p, r, m);
        const CameraPose pose(p, r);
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) CHECK(pose.matrix()(a, b) == doctest::Approx(m[a][b]).epsilon(1e-15));
    }
}

TEST_CASE("g_map inverts render_observations over the working range") {
    for (int pi = -15; pi <= 15; pi += 3) {
        for (int ri = -15; ri <= 15; ri += 3) {
            const CameraPose truth(pi * kDeg, ri * kDeg);
            const PoseObservation obs = render_observations(truth, kK);
            const CameraPose recovered = g_map(obs.horizon, obs.vp, kK);
            CHECK(std::abs(recovered.pitch() - truth.pitch()) < 1e-9);
            CHECK(std::abs(recovered.roll() - truth.roll()) < 1e-9);
        }
    }
}

TEST_CASE("round trip holds with anisotropic focal lengths") {
    const CameraIntrinsics k{720.0, 1080.0, 300.0, 200.0};
    const CameraPose truth(0.12, -0.2);
    const PoseObservation obs = render_observations(truth, k);
    const CameraPose recovered = g_map(obs.horizon, obs.vp, k);
    CHECK(std::abs(recovered.pitch() - truth.pitch()) < 1e-9);
    CHECK(std::abs(recovered.roll() - truth.roll()) < 1e-9);
}

TEST_CASE("pose_loss hand values and metric behavior") {
    const CameraPose a(0.1, 0.0), b(0.0, 0.0);
    CHECK(pose_loss(a, a) == 0.0);
    const double expected = 2.0 * (1.0 - std::cos(0.1)) + 2.0 * std::sin(0.1);
    CHECK(pose_loss(b, a) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(pose_loss(a, b) == doctest::Approx(pose_loss(b, a)).epsilon(1e-15));
    CHECK(pose_loss(a, b) > 0.0);
}

TEST_CASE("g_map pitch is Lipschitz in the vanishing-point row") {
    const double delta = 0.37;
    for (double v = kK.cy - 300.0; v < kK.cy + 300.0; v += 13.0) {
        const double p0 = g_map({0.0, kK.cy}, {kK.cx, v}, kK).pitch();
        const double p1 = g_map({0.0, kK.cy}, {kK.cx, v + delta}, kK).pitch();
        CHECK(std::abs(p1 - p0) <= delta / kK.fy + 1e-15);
    }
}

TEST_CASE("fit_pose recovers a single noiseless observation") {
    const CameraPose truth(0.07, -0.03);
    const PoseObservation obs = render_observations(truth, kK);
    const CameraPose fitted = fit_pose({obs}, kK);
    CHECK(std::abs(fitted.pitch() - truth.pitch()) < 1e-6);
    CHECK(std::abs(fitted.roll() - truth.roll()) < 1e-6);
}

TEST_CASE("fit_pose rejects an empty observation list") {
    CHECK_THROWS_AS(fit_pose({}, kK), EmptyObservations);
}

TEST_CASE("fit_pose on 100 noisy observations matches the grid-search oracle") {
    const double true_pitch = 0.05, true_roll = 0.02;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> noise(-0.005, 0.005);
    std::vector<PoseObservation> observations;
    for (int i = 0; i < 100; ++i) {
        observations.push_back(
            render_observations(CameraPose(true_pitch + noise(rng), true_roll + noise(rng)), kK));
    }

    // Independent oracle: brute-force grid at 1e-4 rad over a window around
    // the truth, minimizing the same mean elementwise-L1 objective with the
    // test-side rotation builder.
    std::vector<std::array<std::array<double, 3>, 3>> targets;
    for (const auto& o : observations) {
        const CameraPose t = g_map(o.horizon, o.vp, kK);
        std::array<std::array<double, 3>, 3> m;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) m[a][b] = t.matrix()(a, b);
        targets.push_back(m);
    }
    auto objective = [&](double p, double r) {
        double rot[3][3];
        build_rotation(p, r, rot);
        double sum = 0.0;
        for (const auto& t : targets) {
            for (int a = 0; a < 3; ++a)
                for (int b = 0; b < 3; ++b) sum += std::abs(rot[a][b] - t[a][b]);
        }
        return sum / static_cast<double>(targets.size());
    };
    double best_p = 0, best_r = 0, best = std::numeric_limits<double>::infinity();
    for (double p = true_pitch - 0.01; p <= true_pitch + 0.01; p += 1e-4) {
        for (double r = true_roll - 0.01; r <= true_roll + 0.01; r += 1e-4) {
            const double val = objective(p, r);
            if (val < best) {
                best = val;
                best_p = p;
                best_r = r;
            }
        }
    }

    const CameraPose fitted = fit_pose(observations, kK);
    CHECK(std::abs(fitted.pitch() - best_p) < 2e-4);
    CHECK(std::abs(fitted.roll() - best_r) < 2e-4);
    CHECK(std::abs(fitted.pitch() - true_pitch) < 0.002);
    CHECK(std::abs(fitted.roll() - true_roll) < 0.002);
    CHECK(objective(fitted.pitch(), fitted.roll()) <= best + 1e-9);
}

TEST_CASE("observation CSV parsing") {
    const std::string text =
        "# vp_u,vp_v,horizon_angle_rad,horizon_row\n"
        "320.0,280.0,0.0,280.0\n"
        "\n"
        "321.5,279.0,0.01,279.2\n";
    const auto obs = parse_observations_csv(text);
    REQUIRE(obs.size() == 2);
    CHECK(obs[0].vp.v == 280.0);
    CHECK(obs[1].horizon.angle == 0.01);

    CHECK_THROWS_AS(parse_observations_csv("1,2,3\n"), ParseError);
    CHECK_THROWS_AS(parse_observations_csv("a,2,3,4\n"), ParseError);
}
