#include "ncr/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ncr/errors.hpp"

namespace ncr {

Mat3 rot_y(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c;
  return r;
}

Mat3 rot_z(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  Mat3 r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Pose trans_z(double dz) { return {Mat3::Identity(), Vec3(0.0, 0.0, dz)}; }

Pose beam_transform(const BeamTip& tip) { return {rot_y(tip.theta), Vec3(tip.r, 0.0, tip.z)}; }

BeamTip compose(const BeamTip& proximal, const BeamTip& distal) {
  const double c = std::cos(proximal.theta), s = std::sin(proximal.theta);
  return {proximal.r + c * distal.r + s * distal.z, proximal.z - s * distal.r + c * distal.z,
          proximal.theta + distal.theta};
}

ChainFrames chain_frames(const JointState& state, const RobotParams& params) {
  ChainFrames f;
  f.base.reserve(state.tips.size());
  f.tip.reserve(state.tips.size());
  Pose t;
  const Pose channel = trans_z(params.channel_length);
  for (const BeamTip& tip : state.tips) {
    f.base.push_back(t * channel);
    t = f.base.back() * beam_transform(tip);
    f.tip.push_back(t);
  }
  return f;
}

std::vector<Pose> chain_forward_kinematics(const JointState& state, const RobotParams& params) {
  return chain_frames(state, params).tip;
}

namespace {
constexpr double kArcSnap = 1e-9;
}

ArcLocation locate_arc(double s, const RobotParams& params) {
  const double total = params.backbone_length();
  if (!std::isfinite(s) || s < -kArcSnap || s > total + kArcSnap)
    throw OutOfRange("arc length " + std::to_string(s) + " mm outside the backbone [0, " +
                     std::to_string(total) + "]");
  s = std::clamp(s, 0.0, total);
  const double pitch = params.joint_pitch();
  const auto n = params.joint_count;
  const auto i = std::min(static_cast<std::size_t>(std::floor(s / pitch)), n);
  if (i == n) return {ArcLocation::Kind::rigid, n, 0.0};
  const double rem = s - static_cast<double>(i) * pitch;
  if (rem <= params.channel_length) return {ArcLocation::Kind::rigid, i, rem};
  const double offset = rem - params.channel_length;
  if (offset >= params.beam_length) return {ArcLocation::Kind::rigid, i + 1, 0.0};
  return {ArcLocation::Kind::flexure, i, offset};
}

namespace {

// Cubic Hermite centreline through (0,0) -> (r,z) with end tangents along
// the base axis and the tip axis.
Pose hermite_point(const BeamTip& tip, double u, double length) {
  const Vec2 p1(tip.r, tip.z);
  const Vec2 t0(0.0, length);
  const Vec2 t1(length * std::sin(tip.theta), length * std::cos(tip.theta));
  const double u2 = u * u, u3 = u2 * u;
  const Vec2 p = (-2.0 * u3 + 3.0 * u2) * p1 + (u3 - 2.0 * u2 + u) * t0 + (u3 - u2) * t1;
  const Vec2 d = (-6.0 * u2 + 6.0 * u) * p1 + (3.0 * u2 - 4.0 * u + 1.0) * t0 + (3.0 * u2 - 2.0 * u) * t1;
  return {rot_y(std::atan2(d.x(), d.y())), Vec3(p.x(), 0.0, p.y())};
}

}  // namespace

Pose backbone_frame(double s, const JointState& state, const RobotParams& params) {
  const ArcLocation loc = locate_arc(s, params);
  const ChainFrames frames = chain_frames(state, params);
  if (loc.kind == ArcLocation::Kind::rigid) {
    const Pose root = loc.index == 0 ? Pose::identity() : frames.tip[loc.index - 1];
    return root * trans_z(loc.offset);
  }
  const Pose& base = frames.base[loc.index];
  if (const FlexureSplit* split = state.split_for(loc.index);
      split && std::abs(split->offset - loc.offset) <= kArcSnap)
    return base * beam_transform(split->proximal);
  return base * hermite_point(state.tips[loc.index], loc.offset / params.beam_length,
                              params.beam_length);
}

Pose contact_pose(double s, double theta_c, const JointState& state, const RobotParams& params) {
  return backbone_frame(s, state, params) * Pose{rot_z(theta_c), Vec3::Zero()} *
         Pose{rot_y(std::numbers::pi / 2.0), Vec3::Zero()} *
         trans_z(0.5 * params.cable_pitch_diameter);
}

}  // namespace ncr
