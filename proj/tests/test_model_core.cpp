#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ncr/bcm.hpp"
#include "ncr/cable.hpp"
#include "ncr/errors.hpp"
#include "ncr/kinematics.hpp"
#include "ncr/params.hpp"
#include "ncr/units.hpp"

namespace ncr {
namespace {

const RobotParams P = prototype_params();

double bending(const RobotParams& p) { return p.austenite_modulus * 1e3 * p.second_moment; }

TEST(Params, DefaultsDescribeThePrototype) {
  EXPECT_DOUBLE_EQ(P.outer_diameter, 3.5);
  EXPECT_DOUBLE_EQ(P.inner_diameter, 3.2);
  EXPECT_DOUBLE_EQ(P.cable_pitch_diameter, 2.6);
  EXPECT_DOUBLE_EQ(P.beam_length, 2.1);
  EXPECT_DOUBLE_EQ(P.channel_length, 0.9);
  EXPECT_EQ(P.joint_count, 7u);
  EXPECT_DOUBLE_EQ(P.austenite_modulus, 47.05);
  EXPECT_DOUBLE_EQ(P.martensite_modulus, 0.08);
  EXPECT_DOUBLE_EQ(P.friction_coeff, 0.33);
  EXPECT_DOUBLE_EQ(P.backbone_length(), 21.0);
  EXPECT_NO_THROW(validate(P));
}

TEST(Params, ValidationNamesTheField) {
  RobotParams p = P;
  p.cable_pitch_diameter = -1.0;
  try {
    validate(p);
    FAIL() << "negative pitch diameter accepted";
  } catch (const InvalidConfiguration& e) {
    EXPECT_EQ(e.field(), "cable_pitch_diameter");
  }
  p = P;
  p.martensite_modulus = 60.0;
  EXPECT_THROW(validate(p), InvalidConfiguration);
  p = P;
  p.inner_diameter = 3.6;
  EXPECT_THROW(validate(p), InvalidConfiguration);
}

TEST(Params, RectangularInertiaHelper) {
  // Two spines of wall thickness t bending across their width w.
  const double t = 0.5 * (3.5 - 3.2);
  EXPECT_NEAR(rectangular_segment_inertia(0.4, 3.5, 3.2), 2.0 * t * 0.4 * 0.4 * 0.4 / 12.0, 1e-15);
  EXPECT_NEAR(P.second_moment, 0.0016, 1e-15);
}

TEST(Units, GramForce) {
  EXPECT_DOUBLE_EQ(units::grams_to_newtons(1.0), 9.80665e-3);
  EXPECT_NEAR(units::newtons_to_grams(units::grams_to_newtons(20.0)), 20.0, 1e-12);
}

TEST(CableAttach, StraightJoint) {
  const Vec2 plus = cable_attach_point({0.0, 2.1, 0.0}, +1, P);
  const Vec2 minus = cable_attach_point({0.0, 2.1, 0.0}, -1, P);
  EXPECT_DOUBLE_EQ(plus.x(), 1.3);
  EXPECT_DOUBLE_EQ(plus.y(), 2.1);
  EXPECT_DOUBLE_EQ(minus.x(), -1.3);
  EXPECT_DOUBLE_EQ(minus.y(), 2.1);
}

TEST(CableAttach, BentJointMatchesMatrixProduct) {
  const Vec2 b = cable_attach_point({0.21, 2.08, 0.2}, +1, P);
  EXPECT_NEAR(b.x(), 1.48408655119361412, 1e-14);
  EXPECT_NEAR(b.y(), 1.82172986996642042, 1e-14);
}

TEST(CableWrap, StraightJointHasNoWrap) {
  const auto [a, b] = cable_wrap_angles({1.3, 2.1}, 0.0, +1, P);
  EXPECT_EQ(a, 0.0);
  EXPECT_EQ(b, 0.0);
}

TEST(CableWrap, BentJoint) {
  const Vec2 attach = cable_attach_point({0.21, 2.08, 0.2}, +1, P);
  const auto [a, b] = cable_wrap_angles(attach, 0.2, +1, P);
  EXPECT_NEAR(a, 0.100708554368717318, 1e-14);
  EXPECT_NEAR(b, 0.0992914456312826825, 1e-14);
  EXPECT_NEAR(cable_segment_length(attach, +1, P), 1.83100725762030506, 1e-14);
}

TEST(CableWrap, MirroredCableNegates) {
  const BeamTip tip{0.21, 2.08, 0.2};
  const BeamTip mirrored{-0.21, 2.08, -0.2};
  const auto [a, b] = cable_wrap_angles(cable_attach_point(tip, +1, P), tip.theta, +1, P);
  const auto [ma, mb] =
      cable_wrap_angles(cable_attach_point(mirrored, -1, P), mirrored.theta, -1, P);
  EXPECT_NEAR(ma, -a, 1e-15);
  EXPECT_NEAR(mb, -b, 1e-15);
}

TEST(CableWrap, DegenerateAttachRejected) {
  EXPECT_THROW(cable_wrap_angles({1.3, 0.0}, 0.0, +1, P), InvalidConfiguration);
  EXPECT_THROW(cable_wrap_angles({1.3, -0.5}, 0.0, +1, P), InvalidConfiguration);
}

TEST(CableWrap, AnglesSumToJointRotation) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> th(-0.6, 0.6);
  for (int k = 0; k < 2000; ++k) {
    const double theta = th(rng);
    const BeamTip tip{2.1 * (1.0 - std::cos(theta)) / (std::abs(theta) > 1e-9 ? theta : 1.0),
                      2.1 * (std::abs(theta) > 1e-9 ? std::sin(theta) / theta : 1.0), theta};
    for (int side : {+1, -1}) {
      const auto [a, b] = cable_wrap_angles(cable_attach_point(tip, side, P), theta, side, P);
      EXPECT_EQ(a + b, theta);
    }
  }
}

TEST(FrictionSign, Branches) {
  const double u = P.friction_coeff;
  EXPECT_EQ(friction_sign_update(0.0, 1.9, 2.0, 1.0, P), u);
  EXPECT_EQ(friction_sign_update(0.0, 2.1, 2.0, 1.0, P), -u);
  EXPECT_EQ(friction_sign_update(u, 1.9, 2.0, 0.0, P), 0.0);
  EXPECT_EQ(friction_sign_update(u, 2.0, 2.0, 1.0, P), u);
  EXPECT_EQ(friction_sign_update(-u, 2.0 + 1e-7, 2.0, 1.0, P), -u);
}

TEST(Capstan, Examples) {
  const Wrap none[] = {{0.4, 0.0}, {0.3, 0.0}};
  EXPECT_EQ(capstan_propagate(2.0, none), 2.0);
  const Wrap one[] = {{0.1, 0.33}};
  EXPECT_NEAR(capstan_propagate(1.0, one), 1.03355053924130547, 1e-15);
  const Wrap two[] = {{0.1, 0.33}, {0.2, 0.33}};
  const Wrap joined[] = {{0.3, 0.33}};
  EXPECT_NEAR(capstan_propagate(1.0, two), capstan_propagate(1.0, joined), 1e-15);
}

TEST(Capstan, TelescopingAndMonotone) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.0, 0.6), sign(-0.33, 0.33), tension(0.01, 10.0);
  for (int k = 0; k < 10000; ++k) {
    const double t = tension(rng), a = angle(rng), b = angle(rng), s = sign(rng);
    const Wrap split[] = {{a, s}, {b, s}};
    const Wrap joined[] = {{a + b, s}};
    const double out = capstan_propagate(t, split);
    ASSERT_NEAR(out, capstan_propagate(t, joined), 1e-12 * out);
    const double extra = angle(rng) + 1e-3;
    const Wrap more[] = {{a, s}, {b, s}, {extra, 0.1}};
    ASSERT_GT(capstan_propagate(t, more), out);
  }
}

TEST(CableLength, StraightRobot) {
  const JointState rest = JointState::rest(P);
  EXPECT_NEAR(total_cable_length(rest, 0, 0.0, P), 21.0, 1e-12);
  EXPECT_NEAR(total_cable_length(rest, 1, 0.0, P), 21.0, 1e-12);
  // The commanded length is the unstretched one: tension shortens the
  // length the model reports by the elastic elongation.
  const double f = 3.0;
  EXPECT_NEAR(total_cable_length(rest, 0, f, P),
              21.0 - f * P.unloaded_cable_length / P.cable_axial_stiffness, 1e-12);
}

Mat3 ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}

Eigen::Matrix4d homogeneous(const Mat3& r, const Vec3& p) {
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = r;
  t.topRightCorner<3, 1>() = p;
  return t;
}

BeamTip arc_tip(double theta, double length) {
  if (theta == 0.0) return {0.0, length, 0.0};
  return {length * (1.0 - std::cos(theta)) / theta, length * std::sin(theta) / theta, theta};
}

JointState arc_state(const std::vector<double>& thetas) {
  JointState s = JointState::rest(P);
  for (std::size_t i = 0; i < thetas.size(); ++i) s.tips[i] = arc_tip(thetas[i], P.beam_length);
  return s;
}

// Channel then flexure, as homogeneous matrices multiplied out by hand.
std::vector<Eigen::Matrix4d> matrix_chain(const JointState& s) {
  std::vector<Eigen::Matrix4d> out;
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  for (const BeamTip& tip : s.tips) {
    t = t * homogeneous(Mat3::Identity(), {0, 0, P.channel_length}) *
        homogeneous(Mat3::Identity(), {tip.r, 0, tip.z}) * homogeneous(ry(tip.theta), Vec3::Zero());
    out.push_back(t);
  }
  return out;
}

TEST(CableLength, BentRobotMatchesPolyline) {
  const JointState s = arc_state({0.1, 0.15, 0.2, 0.05, 0.12, 0.3, 0.08});
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const double x = cable_side(c) * 0.5 * P.cable_pitch_diameter;
    const Eigen::Vector4d hole(x, 0, 0, 1);
    std::vector<Eigen::Vector4d> points{hole};
    Eigen::Matrix4d base = Eigen::Matrix4d::Identity();
    for (const Eigen::Matrix4d& tip : matrix_chain(s)) {
      points.push_back(base * homogeneous(Mat3::Identity(), {0, 0, P.channel_length}) * hole);
      points.push_back(tip * hole);
      base = tip;
    }
    double polyline = 0.0;
    for (std::size_t k = 1; k < points.size(); ++k) polyline += (points[k] - points[k - 1]).norm();
    EXPECT_NEAR(total_cable_length(s, c, 0.0, P), polyline, 1e-12);
  }
}

TEST(Bcm, ZeroLoad) {
  const BeamTip t = bcm_deflection({0, 0, 0, P.austenite_modulus}, P.beam_length, P);
  EXPECT_EQ(t.r, 0.0);
  EXPECT_EQ(t.z, P.beam_length);
  EXPECT_EQ(t.theta, 0.0);
}

TEST(Bcm, PureMomentMatchesLinearBeam) {
  const double ei = bending(P), l = P.beam_length, m = 2.0;
  const BeamTip t = bcm_deflection({0, 0, m, P.austenite_modulus}, l, P);
  EXPECT_NEAR(t.theta, m * l / ei, 1e-14);
  EXPECT_NEAR(t.r, m * l * l / (2 * ei), 1e-14);
}

TEST(Bcm, SmallTransverseForceMatchesCantilever) {
  const double ei = bending(P), l = P.beam_length, f = 0.05;
  const BeamTip t = bcm_deflection({f, 0, 0, P.austenite_modulus}, l, P);
  EXPECT_NEAR(t.r, f * l * l * l / (3 * ei), 0.01 * f * l * l * l / (3 * ei));
  EXPECT_NEAR(t.theta, f * l * l / (2 * ei), 0.01 * f * l * l / (2 * ei));
}

TEST(Bcm, CompressionNearBucklingRejected) {
  const double ei = bending(P), l = P.beam_length;
  EXPECT_THROW(bcm_deflection({0.01, -2.6 * ei / (l * l), 0, P.austenite_modulus}, l, P),
               NonPhysicalLoad);
  EXPECT_NO_THROW(bcm_deflection({0.01, -1.0 * ei / (l * l), 0, P.austenite_modulus}, l, P));
}

TEST(Bcm, EffectiveModulusMixing) {
  EXPECT_DOUBLE_EQ(effective_modulus(0.3, P), 47.05);
  RobotParams p = P;
  p.xi_curve = XiCurve({{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_DOUBLE_EQ(effective_modulus(0.3, p), 0.08);
  p.xi_curve = XiCurve({{0.0, 0.5}, {1.0, 0.5}});
  EXPECT_DOUBLE_EQ(effective_modulus(0.3, p), 0.5 * (47.05 + 0.08));
  p.xi_curve = XiCurve({{0.0, 1.0}, {0.4, 0.0}});
  EXPECT_DOUBLE_EQ(effective_modulus(-0.2, p), 0.5 * (47.05 + 0.08));
}

TEST(Kinematics, StraightChain) {
  const auto poses = chain_forward_kinematics(JointState::rest(P), P);
  ASSERT_EQ(poses.size(), 7u);
  EXPECT_NEAR((poses.back().P - Vec3(0, 0, 21)).norm(), 0.0, 1e-12);
  EXPECT_TRUE(poses.back().R.isApprox(Mat3::Identity()));
}

TEST(Kinematics, SingleQuarterTurn) {
  RobotParams p = P;
  p.joint_count = 1;
  JointState s = JointState::rest(p);
  s.tips[0] = arc_tip(std::numbers::pi / 2, p.beam_length);
  const auto poses = chain_forward_kinematics(s, p);
  EXPECT_TRUE(poses.back().R.isApprox(ry(std::numbers::pi / 2), 1e-15));
}

TEST(Kinematics, EqualJointsMatchMatrixChain) {
  const JointState s = arc_state(std::vector<double>(7, 0.1));
  const auto poses = chain_forward_kinematics(s, P);
  const auto oracle = matrix_chain(s);
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_NEAR((poses[i].P - oracle[i].topRightCorner<3, 1>()).norm(), 0.0, 1e-12);
    EXPECT_NEAR((poses[i].R - oracle[i].topLeftCorner<3, 3>()).norm(), 0.0, 1e-12);
  }
}

TEST(Kinematics, DeepChainStaysOrthonormal) {
  RobotParams p = P;
  p.joint_count = 500;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> th(-0.5, 0.5);
  JointState s = JointState::rest(p);
  for (BeamTip& t : s.tips) t = arc_tip(th(rng), p.beam_length);
  for (const Pose& pose : chain_forward_kinematics(s, p)) {
    ASSERT_LT((pose.R * pose.R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_NEAR(pose.R.determinant(), 1.0, 1e-9);
  }
}

TEST(ContactPose, BaseAndTip) {
  const JointState rest = JointState::rest(P);
  const Pose base = contact_pose(0.0, 0.0, rest, P);
  EXPECT_NEAR((base.P - Vec3(1.3, 0, 0)).norm(), 0.0, 1e-12);
  const Pose tip = contact_pose(21.0, 0.0, rest, P);
  EXPECT_NEAR((tip.P - Vec3(1.3, 0, 21)).norm(), 0.0, 1e-12);
  const Pose side = contact_pose(21.0, std::numbers::pi / 2, rest, P);
  EXPECT_NEAR((side.P - Vec3(0, 1.3, 21)).norm(), 0.0, 1e-12);
}

TEST(ContactPose, InsideJointFourMatchesArcWalk) {
  const JointState s = arc_state({0.1, 0.15, 0.2, 0.05, 0.12, 0.3, 0.08});
  const auto oracle = matrix_chain(s);
  const double s_c = 3 * 3.0 + 0.45, theta_c = 0.7;
  const Eigen::Matrix4d frame = oracle[2] * homogeneous(Mat3::Identity(), {0, 0, 0.45});
  const Eigen::Vector4d local(1.3 * std::cos(theta_c), 1.3 * std::sin(theta_c), 0, 1);
  const Eigen::Vector4d expected = frame * local;
  const Pose got = contact_pose(s_c, theta_c, s, P);
  EXPECT_NEAR((got.P - expected.head<3>()).norm(), 0.0, 1e-12);
}

TEST(ContactPose, OutsideBackboneRejected) {
  const JointState rest = JointState::rest(P);
  EXPECT_THROW(contact_pose(-0.1, 0.0, rest, P), OutOfRange);
  EXPECT_THROW(contact_pose(21.1, 0.0, rest, P), OutOfRange);
}

}  // namespace
}  // namespace ncr
