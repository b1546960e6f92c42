#pragma once

#include <cstddef>
#include <vector>

#include "ncr/params.hpp"
#include "ncr/state.hpp"

namespace ncr {

Mat3 rot_y(double angle);
Mat3 rot_z(double angle);
Pose trans_z(double dz);
/// Tr(r, 0, z) * Ry(theta): the local transform of a deformed flexure.
Pose beam_transform(const BeamTip& tip);

/// Composite deformation of two stacked sub-beams.
BeamTip compose(const BeamTip& proximal, const BeamTip& distal);

/// Frames along the chain. `base[i]` is the frame at the root of flexure i,
/// `tip[i]` the frame at its tip.
struct ChainFrames {
  std::vector<Pose> base;
  std::vector<Pose> tip;
};

ChainFrames chain_frames(const JointState& state, const RobotParams& params);

/// Tip pose of every flexure, T_i = prod_k Trz(L_c) Tr(r_k, 0, z_k) Ry(theta_k).
std::vector<Pose> chain_forward_kinematics(const JointState& state, const RobotParams& params);

/// Where an arc length along the backbone falls.
struct ArcLocation {
  enum class Kind { rigid, flexure };
  Kind kind = Kind::rigid;
  /// rigid: number of flexure tips proximal to the point (0 = robot base);
  /// the point sits `offset` along z of that frame.
  /// flexure: 0-based joint whose flexure contains the point, `offset` from
  /// its base, strictly inside (0, L_b).
  std::size_t index = 0;
  double offset = 0.0;

  /// Number of flexures (counted from the base) that carry a load applied here.
  std::size_t loaded_joints() const { return kind == Kind::rigid ? index : index + 1; }
};

/// Throws OutOfRange unless 0 <= s <= backbone length (a tolerance of 1e-9
/// mm is snapped to the ends).
ArcLocation locate_arc(double s, const RobotParams& params);

/// Frame of the backbone at arc length `s` (no radial offset). Interior
/// flexure points use the split stored in `state` when present, else a
/// cubic Hermite interpolation of the flexure centreline.
Pose backbone_frame(double s, const JointState& state, const RobotParams& params);

/// Contact frame: backbone frame * Rz(theta_c) * Ry(pi/2) * Trz(d_c/2).
Pose contact_pose(double s, double theta_c, const JointState& state, const RobotParams& params);

}  // namespace ncr
