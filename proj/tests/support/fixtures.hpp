#pragma once

#include <cmath>
#include <vector>

#include "mvmocap/geometry.hpp"
#include "mvmocap/rng.hpp"

namespace mvmocap::testing {

/// Camera at `position` looking at `target`, world z mapped upward in the image.
inline CameraParams lookat_camera(int id, const Vec3& position, const Vec3& target,
                                  double focal, int width, int height,
                                  double downscale = 4.0) {
    Vec3 forward = (target - position).normalized();
    Vec3 world_up(0, 0, 1);
    if (std::abs(forward.dot(world_up)) > 0.999) world_up = Vec3(0, 1, 0);
    const Vec3 right = forward.cross(world_up).normalized();
    const Vec3 down = forward.cross(right).normalized();

    CameraParams cam;
    cam.id = id;
    cam.rotation.row(0) = right.transpose();
    cam.rotation.row(1) = down.transpose();
    cam.rotation.row(2) = forward.transpose();
    cam.translation = -cam.rotation * position;
    cam.intrinsics << focal, 0, width / 2.0, 0, focal, height / 2.0, 0, 0, 1;
    cam.width = width;
    cam.height = height;
    cam.heatmap_downscale = downscale;
    return cam;
}

/// Ring of cameras around the origin, all aimed at (0, 0, target_z).
inline std::vector<CameraParams> ring_rig(int count, double radius = 3.2, double cam_z = 1.6,
                                          double target_z = 0.9, double focal = 340.0,
                                          int width = 256, int height = 256,
                                          double downscale = 4.0) {
    std::vector<CameraParams> rig;
    rig.reserve(count);
    for (int i = 0; i < count; ++i) {
        const double angle = 2.0 * M_PI * i / count;
        const Vec3 pos(radius * std::cos(angle), radius * std::sin(angle), cam_z);
        rig.push_back(lookat_camera(i, pos, Vec3(0, 0, target_z), focal, width, height, downscale));
    }
    return rig;
}

/// Random camera on a sphere shell around the origin, aimed near the origin.
inline CameraParams random_camera(int id, Rng& rng) {
    const double radius = rng.uniform(2.5, 6.0);
    const double azim = rng.uniform(0.0, 2.0 * M_PI);
    const double elev = rng.uniform(-0.4, 0.9);
    const Vec3 pos(radius * std::cos(elev) * std::cos(azim),
                   radius * std::cos(elev) * std::sin(azim), radius * std::sin(elev) + 1.0);
    const Vec3 target(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(0.6, 1.2));
    const double focal = rng.uniform(300.0, 1100.0);
    const int width = 256 << static_cast<int>(rng.uniform_index(3));
    return lookat_camera(id, pos, target, focal, width, width);
}

/// Splat an isotropic Gaussian blob of the given peak into a grid (additive max).
inline void splat_gaussian(float* data, int width, int height, double cx, double cy,
                           double sigma, double peak) {
    const int radius = static_cast<int>(std::ceil(4.0 * sigma));
    const int x0 = std::max(0, static_cast<int>(std::floor(cx)) - radius);
    const int x1 = std::min(width - 1, static_cast<int>(std::ceil(cx)) + radius);
    const int y0 = std::max(0, static_cast<int>(std::floor(cy)) - radius);
    const int y1 = std::min(height - 1, static_cast<int>(std::ceil(cy)) + radius);
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double d2 = (x - cx) * (x - cx) + (y - cy) * (y - cy);
            const float v = static_cast<float>(peak * std::exp(-d2 / (2.0 * sigma * sigma)));
            float& cellv = data[static_cast<std::size_t>(y) * width + x];
            cellv = std::max(cellv, v);
        }
}

}  // namespace mvmocap::testing
