#pragma once

#include <stdexcept>
#include <string>

namespace mvmocap {

/// A 3D point at or behind a camera center cannot be projected.
struct DegenerateDepth : std::runtime_error {
    explicit DegenerateDepth(const std::string& what) : std::runtime_error(what) {}
};

/// Triangulation system has (near-)parallel rays; no unique solution.
struct RankDeficient : std::runtime_error {
    explicit RankDeficient(const std::string& what) : std::runtime_error(what) {}
};

/// Pelvis and neck coincide; the person frame is undefined.
struct DegenerateAnchors : std::runtime_error {
    explicit DegenerateAnchors(const std::string& what) : std::runtime_error(what) {}
};

/// Tensor channel count or resolution does not match the consumer.
struct ShapeMismatch : std::runtime_error {
    explicit ShapeMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Training loss became non-finite.
struct DivergedLoss : std::runtime_error {
    explicit DivergedLoss(const std::string& what) : std::runtime_error(what) {}
};

/// Pose filtering removed every frame.
struct EmptyPool : std::runtime_error {
    explicit EmptyPool(const std::string& what) : std::runtime_error(what) {}
};

/// A metric that requires matched pairs was asked for with none.
struct NoMatches : std::runtime_error {
    explicit NoMatches(const std::string& what) : std::runtime_error(what) {}
};

/// Estimate and ground-truth sequences cover different frame sets.
struct FrameMismatch : std::runtime_error {
    explicit FrameMismatch(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed rig, config, manifest or data file.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mvmocap
