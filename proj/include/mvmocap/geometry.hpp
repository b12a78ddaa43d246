#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <limits>
#include <span>
#include <utility>
#include <vector>

#include "mvmocap/errors.hpp"

namespace mvmocap {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kMinDepth = 1e-9;  // meters; below this a point counts as on the camera

/// Calibrated pinhole camera: x_cam = R * x_world + t, pixel = dehom(K * x_cam).
struct CameraParams {
    int id = 0;
    Mat3 intrinsics = Mat3::Identity();   // pixels
    Mat3 rotation = Mat3::Identity();     // world -> camera
    Vec3 translation = Vec3::Zero();      // meters
    int width = 0;
    int height = 0;
    double heatmap_downscale = 4.0;       // image px per heatmap px

    Vec3 center() const { return -rotation.transpose() * translation; }

    /// Checks orthonormality (det +1), upper-triangular K with positive focal
    /// entries, and positive image size. Throws SchemaError on violation.
    void validate() const {
        const Mat3 rtr = rotation.transpose() * rotation;
        if ((rtr - Mat3::Identity()).cwiseAbs().maxCoeff() > 1e-8 ||
            std::abs(rotation.determinant() - 1.0) > 1e-8)
            throw SchemaError("camera " + std::to_string(id) + ": rotation is not a proper rotation");
        if (intrinsics(0, 0) <= 0.0 || intrinsics(1, 1) <= 0.0)
            throw SchemaError("camera " + std::to_string(id) + ": intrinsics focal entries must be positive");
        if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0)
            throw SchemaError("camera " + std::to_string(id) + ": intrinsics lower triangle must be zero");
        if (width <= 0 || height <= 0)
            throw SchemaError("camera " + std::to_string(id) + ": image_size must be positive");
        if (heatmap_downscale <= 0.0)
            throw SchemaError("camera " + std::to_string(id) + ": heatmap_downscale must be positive");
    }
};

/// Full-perspective projection to image pixels. No clamping to image bounds.
/// Throws DegenerateDepth for points at or behind the camera center.
inline Vec2 project(const Vec3& point, const CameraParams& cam) {
    const Vec3 pc = cam.rotation * point + cam.translation;
    if (!(pc.z() > kMinDepth))
        throw DegenerateDepth("projection depth " + std::to_string(pc.z()) + " <= " +
                              std::to_string(kMinDepth));
    const Vec3 h = cam.intrinsics * pc;
    return {h.x() / h.z(), h.y() / h.z()};
}

/// Non-owning single-channel response grid. Value (x, y) lives at integer
/// lattice position (x, y); x indexes columns.
struct GridView {
    const float* data = nullptr;
    int width = 0;
    int height = 0;

    float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

/// Bilinear sample with zero padding outside the grid, so empty regions and
/// out-of-image projections both read as zero response.
inline double sample_bilinear(const GridView& map, const Vec2& p) {
    const double x = p.x();
    const double y = p.y();
    if (!(x > -1.0) || !(y > -1.0) || !(x < map.width) || !(y < map.height)) return 0.0;
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    auto cell = [&](int cx, int cy) -> double {
        if (cx < 0 || cy < 0 || cx >= map.width || cy >= map.height) return 0.0;
        return map.at(cx, cy);
    };
    const double v00 = cell(x0, y0);
    const double v10 = cell(x0 + 1, y0);
    const double v01 = cell(x0, y0 + 1);
    const double v11 = cell(x0 + 1, y0 + 1);
    return (1.0 - fy) * ((1.0 - fx) * v00 + fx * v10) + fy * ((1.0 - fx) * v01 + fx * v11);
}

/// Per-view stack of per-joint response grids in [0, 1], at heatmap
/// resolution (image resolution divided by the camera's downscale factor).
struct ViewHeatmaps {
    int view_id = 0;
    int joints = 0;
    int width = 0;
    int height = 0;
    std::vector<float> values;  // [joint][row][col], row-major

    GridView joint_map(int j) const {
        return GridView{values.data() + static_cast<std::size_t>(j) * width * height, width, height};
    }
    float* joint_data(int j) {
        return values.data() + static_cast<std::size_t>(j) * width * height;
    }
};

struct HeatmapStack {
    int joints = 0;
    std::vector<ViewHeatmaps> views;

    const ViewHeatmaps* find_view(int view_id) const {
        for (const auto& v : views)
            if (v.view_id == view_id) return &v;
        return nullptr;
    }
};

/// One 2D observation of a 3D point: pixel position in a given view.
struct Observation {
    int view_id = 0;
    Vec2 pixel = Vec2::Zero();  // full image resolution
};

inline const CameraParams& camera_by_id(std::span<const CameraParams> cams, int id) {
    for (const auto& c : cams)
        if (c.id == id) return c;
    throw SchemaError("no camera with id " + std::to_string(id));
}

/// Linear (DLT) triangulation: least-squares solution of the stacked
/// cross-product constraints u * P3 - P1, v * P3 - P2 over all views.
/// Throws RankDeficient when the two smallest singular values coincide to
/// 1e-10 relative, i.e. the rays do not intersect in a unique point.
inline Vec3 triangulate(std::span<const Observation> observations,
                        std::span<const CameraParams> cams) {
    if (observations.size() < 2)
        throw RankDeficient("triangulation needs at least 2 observations, got " +
                            std::to_string(observations.size()));
    Eigen::MatrixXd a(2 * observations.size(), 4);
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const auto& obs = observations[i];
        const CameraParams& cam = camera_by_id(cams, obs.view_id);
        Eigen::Matrix<double, 3, 4> p;
        p.leftCols<3>() = cam.intrinsics * cam.rotation;
        p.col(3) = cam.intrinsics * cam.translation;
        a.row(2 * i) = obs.pixel.x() * p.row(2) - p.row(0);
        a.row(2 * i + 1) = obs.pixel.y() * p.row(2) - p.row(1);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s(2) - s(3) <= 1e-10 * s(0))
        throw RankDeficient("triangulation system is rank deficient (near-parallel rays)");
    const Eigen::Vector4d y = svd.matrixV().col(3);
    if (std::abs(y(3)) < 1e-15)
        throw RankDeficient("triangulated point at infinity");
    return y.head<3>() / y(3);
}

/// Pixel distance between each observation and the reprojected point.
/// Views where the point is at or behind the camera report +infinity.
inline std::vector<double> reprojection_error(const Vec3& point,
                                              std::span<const Observation> observations,
                                              std::span<const CameraParams> cams) {
    std::vector<double> errors;
    errors.reserve(observations.size());
    for (const auto& obs : observations) {
        const CameraParams& cam = camera_by_id(cams, obs.view_id);
        try {
            errors.push_back((project(point, cam) - obs.pixel).norm());
        } catch (const DegenerateDepth&) {
            errors.push_back(std::numeric_limits<double>::infinity());
        }
    }
    return errors;
}

inline double mean_finite(const std::vector<double>& values) {
    if (values.empty()) return std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : values) {
        if (!std::isfinite(v)) return std::numeric_limits<double>::infinity();
        sum += v;
    }
    return sum / static_cast<double>(values.size());
}

}  // namespace mvmocap
