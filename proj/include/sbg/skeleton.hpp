#pragma once

#include <array>
#include <cmath>

#include "sbg/errors.hpp"

namespace sbg {

struct Vec3 {
  double x = 0.0, y = 0.0, z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  Vec3& operator+=(const Vec3& o) { x += o.x; y += o.y; z += o.z; return *this; }

  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
};

// Canonical 9-joint upper-body skeleton, camera frame (right-handed, y up,
// z from the camera into the scene).
enum Joint : int {
  kTorso = 0,
  kSpineShoulder = 1,
  kHead = 2,
  kLeftShoulder = 3,
  kLeftElbow = 4,
  kLeftWrist = 5,
  kRightShoulder = 6,
  kRightElbow = 7,
  kRightWrist = 8,
};

inline constexpr int kJointCount = 9;

struct HumanPose {
  std::array<Vec3, kJointCount> joints{};
};

// 8 unit limb directions (3 components each) followed by the normalized
// camera distance of the torso.
inline constexpr int kUserVecSize = 25;

struct UserPoseVec {
  std::array<double, kUserVecSize> values{};
};

struct NormalizationConfig {
  double d_max = 5.0;  // meters
};

// Upper-body joint angles, radians.
enum AngleIndex : int {
  kHipPitch = 0,
  kHeadPitch = 1,
  kLShoulderPitch = 2,
  kLShoulderRoll = 3,
  kLElbowYaw = 4,
  kLElbowRoll = 5,
  kRShoulderPitch = 6,
  kRShoulderRoll = 7,
  kRElbowYaw = 8,
  kRElbowRoll = 9,
};

inline constexpr int kAngleCount = 10;

struct RobotJointAngles {
  std::array<double, kAngleCount> angles{};
};

struct AngleInterval {
  double lo = 0.0;
  double hi = 0.0;
};

struct JointLimits {
  std::array<AngleInterval, kAngleCount> intervals{};
  static JointLimits defaults();
};

struct LinkLengths {
  double torso_spine = 0.30;
  double spine_head = 0.15;
  double left_upper_arm = 0.15;
  double left_forearm = 0.15;
  double right_upper_arm = 0.15;
  double right_forearm = 0.15;
  double left_shoulder_offset = 0.08;
  double right_shoulder_offset = 0.08;
};

// Joint positions relative to the torso (joint 1 pinned at the origin).
struct FKPose {
  std::array<Vec3, kJointCount> positions{};
};

// Segments shorter than this cannot define a direction.
inline constexpr double kMinSegmentLength = 1e-6;

// Below this bend angle the elbow yaw is reported as 0. Yaw noise scales
// like (position noise)/(forearm length * sin(bend)); under ~0.15 rad of
// bend, millimeter-level sensor noise swamps the yaw, and a nearly straight
// forearm moves so little with yaw that the angle carries no usable signal.
inline constexpr double kStraightArmBend = 0.15;

// 25-value normalized user pose: unit directions torso->spine,
// spine->head, spine->shoulders, upper arms, forearms, plus |torso| / d_max.
// Throws DegenerateSegmentError when a referenced segment is shorter than
// kMinSegmentLength.
UserPoseVec normalize_user_pose(const HumanPose& pose,
                                const NormalizationConfig& cfg = {});

// Raw 3D-position representation: 9 joints x 3 coordinates in joint order.
std::array<double, 27> pose_to_flat27(const HumanPose& pose);
HumanPose flat27_to_pose(const std::array<double, 27>& flat);

// Analytic upper-body inverse kinematics. Angle conventions: the zero pose
// is an upright spine (+y) with both arms hanging along -y; hip and head
// pitch forward (+z) about the lateral axis; shoulder pitch swings the arm
// forward, shoulder roll away from the body; elbow yaw twists the forearm
// frame about the upper-arm axis; elbow roll is the bend angle (0 = straight
// arm). The result is clamped into `limits`.
RobotJointAngles skeleton_to_joint_angles(const HumanPose& pose,
                                          const JointLimits& limits = JointLimits::defaults());

// Chain: torso->spine (hip pitch), spine->head (head pitch), lateral
// shoulder offsets, shoulder pitch/roll, elbow yaw/roll. Every emitted
// segment has exactly the configured link length.
FKPose forward_kinematics(const RobotJointAngles& angles,
                          const LinkLengths& links = {});

RobotJointAngles clamp_joint_limits(const RobotJointAngles& angles,
                                    const JointLimits& limits);

// Same normalization applied to the responder's skeleton (the direction
// vector ablation for robot poses).
UserPoseVec robot_pose_to_vec25(const HumanPose& pose,
                                const NormalizationConfig& cfg = {});

// Rebuilds joint positions (torso at origin) from the 8 unit directions of
// a 25-vector. Direction blocks with norm below kMinSegmentLength fall back
// to the rest-pose direction; others are renormalized. The distance
// component is ignored.
HumanPose vec25_to_pose(const UserPoseVec& vec, const LinkLengths& links = {});

}  // namespace sbg
