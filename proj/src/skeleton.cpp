#include "sbg/skeleton.hpp"

#include <algorithm>
#include <cmath>

namespace sbg {

namespace {

// Eq.-style segment list of the normalized pose, 0-based joint indices.
constexpr std::array<std::array<int, 2>, 8> kVectorSegments = {{
    {kTorso, kSpineShoulder},
    {kSpineShoulder, kHead},
    {kSpineShoulder, kLeftShoulder},
    {kLeftShoulder, kLeftElbow},
    {kLeftElbow, kLeftWrist},
    {kSpineShoulder, kRightShoulder},
    {kRightShoulder, kRightElbow},
    {kRightElbow, kRightWrist},
}};

Vec3 segment_direction(const HumanPose& pose, int from, int to) {
  Vec3 d = pose.joints[to] - pose.joints[from];
  double len = d.norm();
  if (!(len > kMinSegmentLength)) {
    throw DegenerateSegmentError(from + 1, to + 1);
  }
  return d * (1.0 / len);
}

// rotation about +x: (0,1,0) -> (0,cos,sin)
Vec3 rot_x(double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return {v.x, c * v.y - s * v.z, s * v.y + c * v.z};
}

// pitch: swings a hanging (0,-1,0) arm forward, (0,-1,0) -> (0,-cos,sin)
Vec3 pitch_rot(double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return {v.x, c * v.y + s * v.z, -s * v.y + c * v.z};
}

Vec3 rot_z(double angle, const Vec3& v) {
  double c = std::cos(angle), s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

// direction of the upper arm; side = +1 left, -1 right
Vec3 upper_arm_direction(double pitch, double roll, double side) {
  double sr = std::sin(roll), cr = std::cos(roll);
  double sp = std::sin(pitch), cp = std::cos(pitch);
  return {side * sr, -cr * cp, cr * sp};
}

// forearm direction in the local frame of a straight arm pointing (0,-1,0):
// bend rotates toward local +z, yaw spins the bend plane about the arm axis
Vec3 forearm_local(double yaw, double bend) {
  double sb = std::sin(bend), cb = std::cos(bend);
  return {sb * std::sin(yaw), -cb, sb * std::cos(yaw)};
}

// shoulder frame: pitch applied first, then roll
Vec3 arm_frame_apply(double pitch, double roll, double side, const Vec3& v) {
  return pitch_rot(pitch, rot_z(side * roll, v));
}

Vec3 arm_frame_unapply(double pitch, double roll, double side, const Vec3& v) {
  return rot_z(-side * roll, pitch_rot(-pitch, v));
}

struct ArmAngles {
  double shoulder_pitch, shoulder_roll, elbow_yaw, elbow_roll;
};

ArmAngles solve_arm(const Vec3& upper, const Vec3& fore, double side) {
  ArmAngles a{};
  // upper = (side*sin(roll), -cos(roll)cos(pitch), cos(roll)sin(pitch));
  // roll limits stay well inside +-pi/2, so the asin branch is the right one
  double sr = std::clamp(side * upper.x, -1.0, 1.0);
  a.shoulder_roll = std::asin(sr);
  a.shoulder_pitch = std::atan2(upper.z, -upper.y);

  a.elbow_roll = std::atan2(upper.cross(fore).norm(), upper.dot(fore));
  if (a.elbow_roll < kStraightArmBend) {
    a.elbow_yaw = 0.0;  // unobservable for a straight arm
  } else {
    Vec3 local = arm_frame_unapply(a.shoulder_pitch, a.shoulder_roll, side, fore);
    a.elbow_yaw = std::atan2(local.x, local.z);
  }
  return a;
}

}  // namespace

JointLimits JointLimits::defaults() {
  JointLimits l;
  l.intervals[kHipPitch] = {-0.64, 0.64};
  l.intervals[kHeadPitch] = {-0.64, 0.64};
  for (int side : {kLShoulderPitch, kRShoulderPitch}) {
    l.intervals[side + 0] = {-2.09, 2.09};  // shoulder pitch
    l.intervals[side + 1] = {-1.56, 1.56};  // shoulder roll
    l.intervals[side + 2] = {-2.09, 2.09};  // elbow yaw
    l.intervals[side + 3] = {0.0, 1.56};    // elbow roll
  }
  return l;
}

UserPoseVec normalize_user_pose(const HumanPose& pose, const NormalizationConfig& cfg) {
  UserPoseVec out;
  for (std::size_t k = 0; k < kVectorSegments.size(); ++k) {
    Vec3 v = segment_direction(pose, kVectorSegments[k][0], kVectorSegments[k][1]);
    out.values[3 * k + 0] = v.x;
    out.values[3 * k + 1] = v.y;
    out.values[3 * k + 2] = v.z;
  }
  out.values[24] = pose.joints[kTorso].norm() / cfg.d_max;
  return out;
}

std::array<double, 27> pose_to_flat27(const HumanPose& pose) {
  std::array<double, 27> flat{};
  for (int j = 0; j < kJointCount; ++j) {
    flat[3 * j + 0] = pose.joints[j].x;
    flat[3 * j + 1] = pose.joints[j].y;
    flat[3 * j + 2] = pose.joints[j].z;
  }
  return flat;
}

HumanPose flat27_to_pose(const std::array<double, 27>& flat) {
  HumanPose pose;
  for (int j = 0; j < kJointCount; ++j) {
    pose.joints[j] = {flat[3 * j + 0], flat[3 * j + 1], flat[3 * j + 2]};
  }
  return pose;
}

RobotJointAngles skeleton_to_joint_angles(const HumanPose& pose, const JointLimits& limits) {
  RobotJointAngles r;

  Vec3 spine = segment_direction(pose, kTorso, kSpineShoulder);
  double hip = std::atan2(spine.z, spine.y);
  r.angles[kHipPitch] = hip;

  // remaining angles are measured in the pitched torso frame
  Vec3 head = rot_x(-hip, segment_direction(pose, kSpineShoulder, kHead));
  r.angles[kHeadPitch] = std::atan2(head.z, head.y);

  Vec3 l_upper = rot_x(-hip, segment_direction(pose, kLeftShoulder, kLeftElbow));
  Vec3 l_fore = rot_x(-hip, segment_direction(pose, kLeftElbow, kLeftWrist));
  ArmAngles left = solve_arm(l_upper, l_fore, +1.0);
  r.angles[kLShoulderPitch] = left.shoulder_pitch;
  r.angles[kLShoulderRoll] = left.shoulder_roll;
  r.angles[kLElbowYaw] = left.elbow_yaw;
  r.angles[kLElbowRoll] = left.elbow_roll;

  Vec3 r_upper = rot_x(-hip, segment_direction(pose, kRightShoulder, kRightElbow));
  Vec3 r_fore = rot_x(-hip, segment_direction(pose, kRightElbow, kRightWrist));
  ArmAngles right = solve_arm(r_upper, r_fore, -1.0);
  r.angles[kRShoulderPitch] = right.shoulder_pitch;
  r.angles[kRShoulderRoll] = right.shoulder_roll;
  r.angles[kRElbowYaw] = right.elbow_yaw;
  r.angles[kRElbowRoll] = right.elbow_roll;

  return clamp_joint_limits(r, limits);
}

FKPose forward_kinematics(const RobotJointAngles& angles, const LinkLengths& links) {
  FKPose fk;
  const auto& a = angles.angles;

  fk.positions[kTorso] = {0.0, 0.0, 0.0};
  fk.positions[kSpineShoulder] = rot_x(a[kHipPitch], {0.0, links.torso_spine, 0.0});
  fk.positions[kHead] =
      fk.positions[kSpineShoulder] +
      rot_x(a[kHipPitch], rot_x(a[kHeadPitch], {0.0, links.spine_head, 0.0}));

  auto emit_arm = [&](int shoulder, double side, double offset, double upper_len,
                      double fore_len, double sp, double sr, double ey, double er) {
    fk.positions[shoulder] =
        fk.positions[kSpineShoulder] + rot_x(a[kHipPitch], {side * offset, 0.0, 0.0});
    Vec3 upper = rot_x(a[kHipPitch], upper_arm_direction(sp, sr, side));
    fk.positions[shoulder + 1] = fk.positions[shoulder] + upper * upper_len;
    Vec3 fore = rot_x(a[kHipPitch], arm_frame_apply(sp, sr, side, forearm_local(ey, er)));
    fk.positions[shoulder + 2] = fk.positions[shoulder + 1] + fore * fore_len;
  };

  emit_arm(kLeftShoulder, +1.0, links.left_shoulder_offset, links.left_upper_arm,
           links.left_forearm, a[kLShoulderPitch], a[kLShoulderRoll], a[kLElbowYaw],
           a[kLElbowRoll]);
  emit_arm(kRightShoulder, -1.0, links.right_shoulder_offset, links.right_upper_arm,
           links.right_forearm, a[kRShoulderPitch], a[kRShoulderRoll], a[kRElbowYaw],
           a[kRElbowRoll]);
  return fk;
}

RobotJointAngles clamp_joint_limits(const RobotJointAngles& angles, const JointLimits& limits) {
  RobotJointAngles out = angles;
  for (int i = 0; i < kAngleCount; ++i) {
    const auto& iv = limits.intervals[i];
    out.angles[i] = std::clamp(out.angles[i], iv.lo, iv.hi);
  }
  return out;
}

UserPoseVec robot_pose_to_vec25(const HumanPose& pose, const NormalizationConfig& cfg) {
  return normalize_user_pose(pose, cfg);
}

HumanPose vec25_to_pose(const UserPoseVec& vec, const LinkLengths& links) {
  // rest-pose directions, same order as kVectorSegments
  static constexpr std::array<Vec3, 8> kRestDirections = {{
      {0, 1, 0}, {0, 1, 0}, {1, 0, 0}, {0, -1, 0}, {0, -1, 0}, {-1, 0, 0}, {0, -1, 0}, {0, -1, 0},
  }};
  const std::array<double, 8> segment_lengths = {
      links.torso_spine,     links.spine_head,    links.left_shoulder_offset,
      links.left_upper_arm,  links.left_forearm,  links.right_shoulder_offset,
      links.right_upper_arm, links.right_forearm,
  };

  HumanPose pose;
  pose.joints[kTorso] = {0.0, 0.0, 0.0};
  for (std::size_t k = 0; k < kVectorSegments.size(); ++k) {
    Vec3 dir{vec.values[3 * k + 0], vec.values[3 * k + 1], vec.values[3 * k + 2]};
    double len = dir.norm();
    dir = (len > kMinSegmentLength) ? dir * (1.0 / len) : kRestDirections[k];
    pose.joints[kVectorSegments[k][1]] =
        pose.joints[kVectorSegments[k][0]] + dir * segment_lengths[k];
  }
  return pose;
}

}  // namespace sbg
