#include "mvmocap/geometry.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "support/fixtures.hpp"

using namespace mvmocap;
using mvmocap::testing::lookat_camera;
using mvmocap::testing::random_camera;

namespace {

CameraParams simple_camera(double f = 1000.0, double cx = 500.0, double cy = 500.0) {
    CameraParams cam;
    cam.id = 0;
    cam.intrinsics << f, 0, cx, 0, f, cy, 0, 0, 1;
    cam.width = static_cast<int>(2 * cx);
    cam.height = static_cast<int>(2 * cy);
    return cam;
}

TEST(Project, PrincipalPoint) {
    // Camera at origin with identity pose: a point on the optical axis maps
    // to the principal point.
    CameraParams cam = simple_camera();
    const Vec2 uv = project(Vec3(0, 0, 1.0), cam);
    EXPECT_DOUBLE_EQ(uv.x(), 500.0);
    EXPECT_DOUBLE_EQ(uv.y(), 500.0);
}

TEST(Project, HandEvaluated) {
    CameraParams cam = simple_camera();
    const Vec2 uv = project(Vec3(0.3, -0.2, 2.0), cam);
    EXPECT_NEAR(uv.x(), 650.0, 1e-12);
    EXPECT_NEAR(uv.y(), 400.0, 1e-12);
}

TEST(Project, ZeroDepthThrows) {
    CameraParams cam = simple_camera();
    EXPECT_THROW(project(Vec3(0.1, 0.1, 0.0), cam), DegenerateDepth);
    EXPECT_THROW(project(Vec3(0, 0, -1.0), cam), DegenerateDepth);
}

TEST(Project, NoClampingOutsideImage) {
    CameraParams cam = simple_camera();
    const Vec2 uv = project(Vec3(5.0, 0, 1.0), cam);
    EXPECT_GT(uv.x(), cam.width);
}

TEST(CameraParams, ValidateRejectsBadRotation) {
    CameraParams cam = simple_camera();
    cam.validate();
    cam.rotation(0, 0) = 2.0;
    EXPECT_THROW(cam.validate(), SchemaError);

    cam = simple_camera();
    cam.rotation.col(0) *= -1.0;  // det -1
    EXPECT_THROW(cam.validate(), SchemaError);
}

TEST(SampleBilinear, NodeIdentity) {
    std::vector<float> grid(16, 0.0f);
    grid[2 * 4 + 1] = 0.7f;  // (x=1, y=2)
    GridView view{grid.data(), 4, 4};
    EXPECT_DOUBLE_EQ(sample_bilinear(view, Vec2(1.0, 2.0)), 0.7f);
}

TEST(SampleBilinear, Midpoint) {
    std::vector<float> grid(16, 0.0f);
    grid[1] = 1.0f;  // (1, 0) = 1, (0, 0) = 0
    GridView view{grid.data(), 4, 4};
    EXPECT_DOUBLE_EQ(sample_bilinear(view, Vec2(0.5, 0.0)), 0.5);
}

TEST(SampleBilinear, OutsideGridIsZero) {
    std::vector<float> grid(16, 1.0f);
    GridView view{grid.data(), 4, 4};
    EXPECT_DOUBLE_EQ(sample_bilinear(view, Vec2(-5.0, 2.0)), 0.0);
    EXPECT_DOUBLE_EQ(sample_bilinear(view, Vec2(2.0, 100.0)), 0.0);
    // Just past the last node the value fades through the zero-padding band.
    EXPECT_LT(sample_bilinear(view, Vec2(3.5, 1.0)), 1.0);
}

TEST(SampleBilinear, LipschitzContinuity) {
    Rng rng(7);
    std::vector<float> grid(64 * 64);
    for (auto& v : grid) v = static_cast<float>(rng.uniform());
    GridView view{grid.data(), 64, 64};

    // Max adjacent cell difference bounds the directional slope per pixel.
    double lipschitz = 0.0;
    for (int y = 0; y < 64; ++y)
        for (int x = 0; x < 64; ++x) {
            if (x + 1 < 64)
                lipschitz = std::max(lipschitz, static_cast<double>(std::abs(view.at(x + 1, y) - view.at(x, y))));
            if (y + 1 < 64)
                lipschitz = std::max(lipschitz, static_cast<double>(std::abs(view.at(x, y + 1) - view.at(x, y))));
        }
    lipschitz = std::max(lipschitz, 1.0);  // padding step at the border

    for (int trial = 0; trial < 2000; ++trial) {
        const Vec2 p(rng.uniform(-2.0, 66.0), rng.uniform(-2.0, 66.0));
        const Vec2 d(rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05));
        const double lhs = std::abs(sample_bilinear(view, p + d) - sample_bilinear(view, p));
        EXPECT_LE(lhs, lipschitz * (std::abs(d.x()) + std::abs(d.y())) + 1e-12);
    }
}

TEST(Triangulate, NoiselessInversion) {
    auto rig = mvmocap::testing::ring_rig(2);
    const Vec3 x(0.2, -0.3, 1.1);
    std::vector<Observation> obs;
    for (const auto& cam : rig) obs.push_back({cam.id, project(x, cam)});
    const Vec3 recovered = triangulate(obs, rig);
    EXPECT_LT((recovered - x).norm(), 1e-6);
}

TEST(Triangulate, MoreViewsBeatTwoUnderNoise) {
    // Monte-Carlo oracle: with i.i.d. pixel noise, the 4-view least-squares
    // estimate has lower mean error than the 2-view one on the same point.
    auto rig = mvmocap::testing::ring_rig(4);
    const Vec3 x(0.1, 0.2, 1.0);
    Rng rng(11);
    double err2 = 0.0, err4 = 0.0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        std::vector<Observation> obs;
        for (const auto& cam : rig) {
            Vec2 noisy = project(x, cam) + Vec2(rng.normal(), rng.normal());
            obs.push_back({cam.id, noisy});
        }
        std::vector<Observation> two(obs.begin(), obs.begin() + 2);
        err2 += (triangulate(two, rig) - x).norm();
        err4 += (triangulate(obs, rig) - x).norm();
    }
    EXPECT_LT(err4, err2);
}

TEST(Triangulate, IdenticalCentersRankDeficient) {
    CameraParams a = simple_camera();
    CameraParams b = simple_camera();
    b.id = 1;
    std::vector<CameraParams> cams{a, b};
    std::vector<Observation> obs{{0, Vec2(500, 500)}, {1, Vec2(500, 500)}};
    EXPECT_THROW(triangulate(obs, cams), RankDeficient);
}

TEST(Triangulate, SingleObservationRejected) {
    auto rig = mvmocap::testing::ring_rig(2);
    std::vector<Observation> obs{{0, Vec2(100, 100)}};
    EXPECT_THROW(triangulate(obs, rig), RankDeficient);
}

TEST(Triangulate, ReorderInvariance) {
    auto rig = mvmocap::testing::ring_rig(5);
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const Vec3 x(rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5), rng.uniform(0.5, 1.5));
        std::vector<Observation> obs;
        for (const auto& cam : rig)
            obs.push_back({cam.id, project(x, cam) + Vec2(rng.normal(), rng.normal())});
        const Vec3 forward = triangulate(obs, rig);
        rng.shuffle(obs);
        const Vec3 shuffled = triangulate(obs, rig);
        EXPECT_LT((forward - shuffled).norm(), 1e-9);
    }
}

TEST(Triangulate, RoundTripRandomConfigurations) {
    // project -> triangulate -> project closes to < 1e-6 px.
    Rng rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const int view_count = 2 + static_cast<int>(rng.uniform_index(5));
        std::vector<CameraParams> cams;
        for (int v = 0; v < view_count; ++v) cams.push_back(random_camera(v, rng));
        const Vec3 x(rng.uniform(-0.6, 0.6), rng.uniform(-0.6, 0.6), rng.uniform(0.2, 1.8));
        std::vector<Observation> obs;
        for (const auto& cam : cams) obs.push_back({cam.id, project(x, cam)});
        const Vec3 recovered = triangulate(obs, cams);
        const auto errors = reprojection_error(recovered, obs, cams);
        for (double e : errors) EXPECT_LT(e, 1e-6);
    }
}

TEST(ReprojectionError, ExactProjectionsAreZero) {
    auto rig = mvmocap::testing::ring_rig(3);
    const Vec3 x(0.0, 0.1, 0.9);
    std::vector<Observation> obs;
    for (const auto& cam : rig) obs.push_back({cam.id, project(x, cam)});
    for (double e : reprojection_error(x, obs, rig)) EXPECT_NEAR(e, 0.0, 1e-9);
}

TEST(ReprojectionError, ThreeFourFive) {
    auto rig = mvmocap::testing::ring_rig(2);
    const Vec3 x(0.0, 0.0, 1.0);
    std::vector<Observation> obs;
    for (const auto& cam : rig) obs.push_back({cam.id, project(x, cam)});
    obs[1].pixel += Vec2(3.0, 4.0);
    const auto errors = reprojection_error(x, obs, rig);
    EXPECT_NEAR(errors[0], 0.0, 1e-9);
    EXPECT_NEAR(errors[1], 5.0, 1e-9);
}

TEST(ReprojectionError, BehindCameraIsInfinite) {
    auto rig = mvmocap::testing::ring_rig(2, 3.0);
    // A point far outside the ring is behind one of the two cameras.
    const Vec3 x(10.0, 0.0, 1.0);
    std::vector<Observation> obs{{0, Vec2(0, 0)}, {1, Vec2(0, 0)}};
    const auto errors = reprojection_error(x, obs, rig);
    EXPECT_TRUE(std::isinf(errors[0]) || std::isinf(errors[1]));
}

}  // namespace
