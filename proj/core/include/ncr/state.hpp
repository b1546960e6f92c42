#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "ncr/params.hpp"

namespace ncr {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// One value per cable, indexed like cable_side().
using CableArray = std::array<double, kCableCount>;

/// Tip deformation of a flexure in its own base frame: lateral r [mm] along
/// local x, axial z [mm] along local z, rotation theta [rad] about local y.
struct BeamTip {
  double r = 0.0;
  double z = 0.0;
  double theta = 0.0;

  static BeamTip rest(double length) { return {0.0, length, 0.0}; }
  bool operator==(const BeamTip&) const = default;
};

/// A flexure split at an interior contact point into two sub-beams.
struct FlexureSplit {
  std::size_t joint = 0;    // 0-based joint index
  double offset = 0.0;      // arc from the flexure base to the contact, (0, L_b)
  BeamTip proximal;         // sub-beam [0, offset] in the flexure base frame
  BeamTip distal;           // sub-beam [offset, L_b] in the split frame

  bool operator==(const FlexureSplit&) const = default;
};

/// Deformation of the whole chain. `tips[i]` is the composite deformation of
/// joint i; joints carrying an interior contact also appear in `splits`.
struct JointState {
  std::vector<BeamTip> tips;
  std::vector<FlexureSplit> splits;

  static JointState rest(const RobotParams& params);
  const FlexureSplit* split_for(std::size_t joint) const;
  bool operator==(const JointState&) const = default;
};

/// Quasi-static friction coefficient per joint and cable, each in [-u, u].
struct FrictionSigns {
  std::vector<CableArray> values;

  static FrictionSigns zero(std::size_t joints);
  double& at(std::size_t joint, std::size_t cable) { return values[joint][cable]; }
  double at(std::size_t joint, std::size_t cable) const { return values[joint][cable]; }
  bool operator==(const FrictionSigns&) const = default;
};

/// Rigid transform: global = R * local + P.
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 P = Vec3::Zero();

  Pose operator*(const Pose& rhs) const { return {R * rhs.R, R * rhs.P + P}; }
  Vec3 apply(const Vec3& local) const { return R * local + P; }
  static Pose identity() { return {}; }
};

/// Per-cable geometry of one joint.
struct CableGeometry {
  Vec2 attach_point = Vec2::Zero();  // B in the joint's base frame (r, z)
  double segment_length = 0.0;       // |B - A|
  double wrap_a = 0.0;               // phi_A
  double wrap_b = 0.0;               // phi_B
};

/// Tip loads of a flexure in its base frame plus the modulus to use.
struct BeamLoads {
  double f_r = 0.0;    // N, along local x
  double f_z = 0.0;    // N, along local z (tension positive)
  double m_y = 0.0;    // N*mm about local y
  double e_eff = 0.0;  // GPa
};

}  // namespace ncr
