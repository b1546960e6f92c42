#include <gtest/gtest.h>

#include <optional>

#include <random>

#include <cmath>
#include <vector>

#include "ncr/bcm.hpp"
#include "ncr/equilibrium.hpp"
#include "ncr/errors.hpp"
#include "ncr/ode_beam.hpp"
#include "ncr/units.hpp"

namespace ncr {
namespace {

const RobotParams P = prototype_params();
const FrictionSigns kNoFriction = FrictionSigns::zero(P.joint_count);

EquilibriumOptions tight() {
  EquilibriumOptions o;
  o.theta_tolerance = 1e-12;
  o.length_tolerance = 1e-10;
  o.max_iterations = 400;
  return o;
}

TEST(BeamTipLoads, SymmetricTensionsCancelLaterally) {
  const JointState rest = JointState::rest(P);
  const ChainFrames frames = chain_frames(rest, P);
  for (std::size_t j = 0; j < P.joint_count; ++j) {
    const BeamLoads l = beam_tip_loads(j, {2.0, 2.0}, {}, rest, frames, P);
    EXPECT_NEAR(l.f_r, 0.0, 1e-15);
    EXPECT_NEAR(l.f_z, -4.0, 1e-15);  // both cables compress the flexure
    EXPECT_NEAR(l.m_y, 0.0, 1e-14);
  }
}

TEST(BeamTipLoads, TipPushOnStraightRobot) {
  const JointState rest = JointState::rest(P);
  const ChainFrames frames = chain_frames(rest, P);
  const double f = units::grams_to_newtons(30.0);
  const ContactSpec push[] = {ContactSpec::at(21.0, {-f, 0, 0})};
  for (std::size_t j = 0; j < P.joint_count; ++j) {
    const BeamLoads l = beam_tip_loads(j, {0.0, 0.0}, push, rest, frames, P);
    const double lever = 21.0 - 3.0 * static_cast<double>(j + 1);
    EXPECT_NEAR(l.f_r, -f, 1e-15);
    EXPECT_NEAR(l.f_z, 0.0, 1e-15);
    // (P_c - P_i) x F with P_c offset radially along the force line.
    EXPECT_NEAR(l.m_y, -f * lever, 1e-13);
  }
}

TEST(BeamTipLoads, SingleCableOnBentJointTermByTerm) {
  JointState s = JointState::rest(P);
  s.tips[0] = {0.21, 2.08, 0.2};
  const ChainFrames frames = chain_frames(s, P);
  const double t = 1.7, half = 0.5 * P.cable_pitch_diameter;
  const BeamLoads l = beam_tip_loads(0, {t, 0.0}, {}, s, frames, P);
  const double phi_a = 0.100708554368717318, phi_b = 0.2 - phi_a;
  EXPECT_NEAR(l.f_r, -t * std::sin(phi_a), 1e-14);
  EXPECT_NEAR(l.f_z, -t * std::cos(phi_a), 1e-14);
  EXPECT_NEAR(l.m_y, t * half * std::cos(phi_b), 1e-14);
}

TEST(ForceControl, ZeroTensionsStayAtRest) {
  const EquilibriumResult r = solve_force_control({0.0, 0.0}, ContactSpec::none(), kNoFriction, P);
  EXPECT_EQ(r.state, JointState::rest(P));
  EXPECT_EQ(r.iterations, 1u);
  EXPECT_EQ(r.residual_norm, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(ForceControl, EqualTensionsStayStraight) {
  const EquilibriumResult r =
      solve_force_control({3.0, 3.0}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  for (const BeamTip& t : r.state.tips) {
    EXPECT_NEAR(t.r, 0.0, 1e-12);
    EXPECT_NEAR(t.theta, 0.0, 1e-12);
    EXPECT_EQ(t.z, P.beam_length);  // inextensible centroidal axis by default
  }
}

TEST(ForceControl, NegativeTensionRejected) {
  EXPECT_THROW(solve_force_control({-1.0, 0.0}, ContactSpec::none(), kNoFriction, P),
               InvalidConfiguration);
}

// The same chain fixed point with every flexure solved by shooting.
JointState ode_chain(const CableArray& tensions) {
  JointState x = JointState::rest(P);
  for (int it = 0; it < 400; ++it) {
    std::vector<std::array<CableGeometry, kCableCount>> geo;
    for (const BeamTip& t : x.tips) geo.push_back(cable_geometry(t, P));
    const auto at_b = tensions_at_attach(tensions, geo, kNoFriction);
    const ChainFrames frames = chain_frames(x, P);
    JointState g = x;
    double res = 0.0;
    for (std::size_t j = 0; j < P.joint_count; ++j) {
      const BeamLoads loads = beam_tip_loads(j, at_b[j], {}, x, frames, P);
      g.tips[j] = ode_shooting_deflection(loads, P.beam_length, P);
      res = std::max(res, std::abs(g.tips[j].theta - x.tips[j].theta));
    }
    if (res < 1e-11) return g;
    for (std::size_t j = 0; j < P.joint_count; ++j) {
      x.tips[j].r = 0.5 * (x.tips[j].r + g.tips[j].r);
      x.tips[j].z = 0.5 * (x.tips[j].z + g.tips[j].z);
      x.tips[j].theta = 0.5 * (x.tips[j].theta + g.tips[j].theta);
    }
  }
  throw OracleFailure("ode chain did not settle");
}

TEST(ForceControl, SingleCableRampMatchesShootingChain) {
  double last_theta = 0.0;
  for (double t = 0.5; t <= 5.0 + 1e-12; t += 0.5) {
    const EquilibriumResult r =
        solve_force_control({t, 0.0}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
    const Pose tip = chain_forward_kinematics(r.state, P).back();
    const double theta_tip = std::atan2(tip.R(0, 2), tip.R(2, 2));
    EXPECT_GT(theta_tip, last_theta);
    last_theta = theta_tip;
    // Residual is non-increasing along the accepted iterates.
    for (std::size_t k = 1; k < r.residual_history.size(); ++k)
      EXPECT_LE(r.residual_history[k], r.residual_history[k - 1]);

    const Pose oracle = chain_forward_kinematics(ode_chain({t, 0.0}), P).back();
    const double travel = (oracle.P - Vec3(0, 0, 21)).norm();
    EXPECT_LT((tip.P - oracle.P).norm(), 0.015 * travel) << "T = " << t;
  }
}

TEST(ForceControl, ZeroMagnitudeContactChangesNothing) {
  const EquilibriumResult a =
      solve_force_control({2.0, 0.5}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  const EquilibriumResult b = solve_force_control(
      {2.0, 0.5}, ContactSpec::at(12.0, Vec3::Zero()), kNoFriction, P, nullptr, tight());
  EXPECT_EQ(a.state, b.state);
  EXPECT_EQ(a.input_tensions, b.input_tensions);
}

TEST(ForceControl, FrictionBracketsFrictionlessTension) {
  const EquilibriumResult r =
      solve_force_control({2.5, 0.4}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  std::vector<std::array<CableGeometry, kCableCount>> geo;
  for (const BeamTip& t : r.state.tips) geo.push_back(cable_geometry(t, P));
  FrictionSigns plus = kNoFriction, minus = kNoFriction;
  for (auto& v : plus.values) v = {P.friction_coeff, P.friction_coeff};
  for (auto& v : minus.values) v = {-P.friction_coeff, -P.friction_coeff};
  const auto t0 = tensions_at_attach(r.input_tensions, geo, kNoFriction);
  const auto tp = tensions_at_attach(r.input_tensions, geo, plus);
  const auto tm = tensions_at_attach(r.input_tensions, geo, minus);
  for (std::size_t j = 0; j < P.joint_count; ++j)
    for (std::size_t c = 0; c < kCableCount; ++c) {
      EXPECT_LE(tm[j][c], t0[j][c]);
      EXPECT_LE(t0[j][c], tp[j][c]);
    }
}

TEST(ForceControl, FrictionDelaysDistalJoints) {
  FrictionSigns opposing = kNoFriction;
  for (auto& v : opposing.values) v = {-P.friction_coeff, -P.friction_coeff};
  const EquilibriumResult free =
      solve_force_control({3.0, 0.0}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  const EquilibriumResult held =
      solve_force_control({3.0, 0.0}, ContactSpec::none(), opposing, P, nullptr, tight());
  EXPECT_LT(held.state.tips.back().theta, free.state.tips.back().theta);
  EXPECT_LT(held.tensions_at_b.back()[0], 3.0);
}

TEST(DisplacementControl, RestLengthsGiveRest) {
  const double rest = rest_cable_length(P);
  EXPECT_DOUBLE_EQ(rest, 21.0);
  const EquilibriumResult r =
      solve_displacement_control({rest, rest}, ContactSpec::none(), kNoFriction, P);
  EXPECT_EQ(r.input_tensions[0], 0.0);
  EXPECT_EQ(r.input_tensions[1], 0.0);
  EXPECT_EQ(r.state, JointState::rest(P));
}

TEST(DisplacementControl, RampTracksSetLengths) {
  const double rest = rest_cable_length(P);
  std::optional<EquilibriumResult> warm;
  double last_x = 0.0;
  for (int k = 0; k <= 25; ++k) {
    const double pull = 0.1 * k;
    const CableArray set{rest - pull, rest + pull};
    EquilibriumResult r = solve_displacement_control(set, ContactSpec::none(), kNoFriction, P,
                                                     warm ? &*warm : nullptr);
    const CableArray res = cable_length_residual(r, set);
    EXPECT_LE(std::abs(res[0]), 1e-3);
    EXPECT_LE(std::abs(res[1]), 1e-3);
    EXPECT_GE(r.input_tensions[0], 0.0);
    EXPECT_GE(r.input_tensions[1], 0.0);
    if (k > 0) EXPECT_EQ(r.input_tensions[1], 0.0);  // released antagonist goes slack
    const double x = chain_forward_kinematics(r.state, P).back().P.x();
    EXPECT_GE(x, last_x);
    last_x = x;
    warm = std::move(r);
  }
  EXPECT_GT(last_x, 5.0);
}

TEST(DisplacementControl, RoundTripsForceControl) {
  const ContactSpec tip = ContactSpec::at(21.0, {-units::grams_to_newtons(25.0), 0, 0});
  for (int k = 0; k < 20; ++k) {
    const CableArray tensions{0.3 + 0.25 * k, 0.2 + 0.05 * (k % 4)};
    const EquilibriumResult f = solve_force_control(tensions, tip, kNoFriction, P, nullptr, tight());
    const EquilibriumResult d =
        solve_displacement_control(f.cable_lengths, tip, kNoFriction, P, nullptr, tight());
    EXPECT_NEAR(d.input_tensions[0], tensions[0], 1e-6) << k;
    EXPECT_NEAR(d.input_tensions[1], tensions[1], 1e-6) << k;
  }
}

TEST(DisplacementControl, OverPulledPairIsInfeasible) {
  const double rest = rest_cable_length(P);
  EXPECT_THROW(solve_displacement_control({rest - 2.0, rest - 2.0}, ContactSpec::none(),
                                          kNoFriction, P),
               InfeasibleDisplacement);
}

TEST(CableLengthResidual, SelfConsistentSceneIsClean) {
  const ContactSpec push = ContactSpec::at(14.0, {-units::grams_to_newtons(20.0), 0, 0});
  const EquilibriumResult f = solve_force_control({1.6, 1.2}, push, kNoFriction, P, nullptr, tight());
  const CableArray at_true = cable_length_residual(
      solve_force_control(f.input_tensions, push, kNoFriction, P, nullptr, tight()), f.cable_lengths);
  EXPECT_LE(std::hypot(at_true[0], at_true[1]), 1e-6);

  // Wrong location under the same measured tensions and force.
  const ContactSpec wrong = ContactSpec::at(17.0, push.force);
  const CableArray at_wrong = cable_length_residual(
      solve_force_control(f.input_tensions, wrong, kNoFriction, P, nullptr, tight()), f.cable_lengths);
  EXPECT_GT(std::hypot(at_wrong[0], at_wrong[1]), std::hypot(at_true[0], at_true[1]));
  EXPECT_GT(std::hypot(at_wrong[0], at_wrong[1]), 1e-4);
}

TEST(CableLengthResidual, SlackCableContributesNothing) {
  const EquilibriumResult f =
      solve_force_control({1.5, 0.0}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  const CableArray res = cable_length_residual(f, {f.cable_lengths[0] - 0.2, 30.0});
  EXPECT_NEAR(res[0], -0.2, 1e-12);
  EXPECT_EQ(res[1], 0.0);
}

TEST(FrictionTracker, SignsFollowSegmentMotion) {
  FrictionTracker tracker(P);
  const EquilibriumResult a =
      solve_force_control({1.0, 0.5}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  tracker.commit(a);
  EXPECT_EQ(tracker.signs(), kNoFriction);
  const EquilibriumResult b =
      solve_force_control({2.0, 0.5}, ContactSpec::none(), kNoFriction, P, nullptr, tight());
  const FrictionSigns s = tracker.propose(b);
  for (std::size_t j = 0; j < P.joint_count; ++j) {
    EXPECT_EQ(s.at(j, 0), P.friction_coeff);   // pulled side shortens
    EXPECT_EQ(s.at(j, 1), -P.friction_coeff);  // far side lengthens
  }
}

TEST(SignSettler, FlipBackHoldsStartingSign) {
  const double u = P.friction_coeff;
  FrictionSigns start = FrictionSigns::zero(2);
  start.at(0, 0) = u;
  start.at(1, 0) = u;
  SignSettler settler(start);
  FrictionSigns flipped = start;
  flipped.at(0, 0) = -u;
  EXPECT_TRUE(settler.advance(flipped));
  EXPECT_EQ(settler.signs(), flipped);
  // Back and forth again: stuck, held at the start.
  EXPECT_TRUE(settler.advance(start));
  EXPECT_EQ(settler.signs(), start);
  EXPECT_FALSE(settler.advance(flipped));
  EXPECT_EQ(settler.signs(), start);
  FrictionSigns other = start;
  other.at(1, 0) = -u;
  EXPECT_TRUE(settler.advance(other));
  EXPECT_EQ(settler.signs().at(1, 0), -u);
  EXPECT_EQ(settler.signs().at(0, 0), u);
}

TEST(SignSettler, AlwaysTerminates) {
  // Any proposal sequence stops changing within two flips per segment.
  std::mt19937_64 rng(5);
  const double u = P.friction_coeff;
  SignSettler settler(FrictionSigns::zero(P.joint_count));
  std::size_t changes = 0;
  for (int k = 0; k < 200; ++k) {
    FrictionSigns proposal = FrictionSigns::zero(P.joint_count);
    for (auto& v : proposal.values)
      for (double& s : v) s = (rng() & 1) ? u : -u;
    changes += settler.advance(proposal) ? 1 : 0;
  }
  EXPECT_LE(changes, 2 * kCableCount * P.joint_count);
}

TEST(SolveWithFriction, StuckSegmentsEndConsistent) {
  // A contact held while the cables creep makes the proximal segments
  // alternate between sliding directions.
  const std::vector<ContactSpec> contact{ContactSpec::at(12.0, {-units::grams_to_newtons(20.0), 0.0, 0.0})};
  const double rest = rest_cable_length(P);
  FrictionTracker tracker(P);
  std::optional<EquilibriumResult> last;
  for (int k = 0; k < 10; ++k) {
    const CableArray set{rest - 0.1 - 0.0025 * k, rest - 0.1 + 0.002 * k};
    auto solve = [&](const FrictionSigns& signs) {
      return solve_displacement_control(set, contact, signs, P, last ? &*last : nullptr, tight());
    };
    last = solve_with_friction(tracker, solve);
    const CableArray d = cable_length_residual(*last, set, 0.0);
    EXPECT_LT(std::hypot(d[0], d[1]), 1e-6) << "step " << k;
  }
}

}  // namespace
}  // namespace ncr
