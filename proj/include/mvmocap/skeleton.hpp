#pragma once

#include <array>
#include <string>
#include <vector>

#include "mvmocap/geometry.hpp"

namespace mvmocap {

/// 15-keypoint body model (CMU Panoptic order).
namespace joints {
inline constexpr int kCount = 15;
inline constexpr int kNeck = 0;
inline constexpr int kNose = 1;
inline constexpr int kPelvis = 2;
inline constexpr int kShoulderL = 3;
inline constexpr int kElbowL = 4;
inline constexpr int kWristL = 5;
inline constexpr int kHipL = 6;
inline constexpr int kKneeL = 7;
inline constexpr int kAnkleL = 8;
inline constexpr int kShoulderR = 9;
inline constexpr int kElbowR = 10;
inline constexpr int kWristR = 11;
inline constexpr int kHipR = 12;
inline constexpr int kKneeR = 13;
inline constexpr int kAnkleR = 14;

inline const char* name(int j) {
    static constexpr std::array<const char*, kCount> names = {
        "neck",       "nose",    "pelvis",  "shoulder_l", "elbow_l",
        "wrist_l",    "hip_l",   "knee_l",  "ankle_l",    "shoulder_r",
        "elbow_r",    "wrist_r", "hip_r",   "knee_r",     "ankle_r"};
    return names[static_cast<std::size_t>(j)];
}

/// Left+right aggregation groups used in per-joint reports.
struct Group {
    const char* name;
    std::array<int, 2> members;
};
inline constexpr std::array<Group, 6> kGroups = {{
    {"Shoulder", {kShoulderL, kShoulderR}},
    {"Elbow", {kElbowL, kElbowR}},
    {"Wrist", {kWristL, kWristR}},
    {"Hip", {kHipL, kHipR}},
    {"Knee", {kKneeL, kKneeR}},
    {"Ankle", {kAnkleL, kAnkleR}},
}};

/// Parent of each joint in the kinematic tree (pelvis is the root).
inline constexpr std::array<int, kCount> kParent = {
    kPelvis,    kNeck,   -1,      kNeck,  kShoulderL, kElbowL, kPelvis, kHipL,
    kKneeL,     kNeck,   kShoulderR, kElbowR, kPelvis, kHipR,  kKneeR};
}  // namespace joints

/// One person's 3D pose at one frame: world-frame joint positions in meters
/// plus a per-joint confidence.
struct Skeleton3D {
    int person_id = 0;
    std::string status = "ok";  // "ok" or a failure tag recorded in-band
    std::array<Vec3, joints::kCount> position{};
    std::array<double, joints::kCount> confidence{};

    bool ok() const { return status == "ok"; }

    /// Mean joint confidence; the proposal score used for ranking.
    double score() const {
        double s = 0.0;
        for (double c : confidence) s += c;
        return s / joints::kCount;
    }
};

}  // namespace mvmocap
