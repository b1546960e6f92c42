#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ncr/cable.hpp"
#include "ncr/kinematics.hpp"
#include "ncr/params.hpp"
#include "ncr/state.hpp"

namespace ncr {

/// A point load on the backbone. theta_c is derived from the local force
/// components when left empty.
struct ContactSpec {
  bool present = false;
  Vec3 force = Vec3::Zero();  // N, global frame
  double arc_length = 0.0;    // s_c, mm
  std::optional<double> theta_c;

  static ContactSpec none() { return {}; }
  static ContactSpec at(double s, const Vec3& force) { return {true, force, s, std::nullopt}; }
  /// Present with a strictly non-zero force.
  bool active() const { return present && force.squaredNorm() > 0.0; }
};

struct EquilibriumOptions {
  double relaxation = 0.5;          // lambda of the damped update
  double min_relaxation = 1.0 / 1024.0;
  double theta_tolerance = 1e-6;    // rad, on the fixed-point residual
  std::size_t max_iterations = 200;
  // Displacement control.
  double length_tolerance = 1e-4;   // mm
  double inner_theta_tolerance = 1e-12;  // rad, force-control solves inside
  double tension_upper = 50.0;      // N, bracket [0, tension_upper]
  std::size_t max_tension_iterations = 60;
};

struct EquilibriumResult {
  JointState state;
  FrictionSigns friction;
  CableArray input_tensions{};
  std::vector<CableArray> tensions_at_b;  // per joint, per cable
  CableArray cable_lengths{};             // model L^c per cable
  std::size_t iterations = 0;
  bool converged = false;
  double residual_norm = 0.0;             // rad, max fixed-point residual
  std::vector<double> residual_history;   // accepted iterates
};

/// Loads on one (sub-)beam: a point force in the global frame.
struct PointForce {
  Vec3 force = Vec3::Zero();
  Vec3 point = Vec3::Zero();
};

/// Angle theta_c of a contact in `state`: the explicit value, else the
/// direction of the force in the plane normal to the backbone.
double contact_angle(const ContactSpec& contact, const JointState& state, const RobotParams& params);

/// Global point where `contact` acts in `state`.
Vec3 contact_point(const ContactSpec& contact, const JointState& state, const RobotParams& params);

/// Tip loads of flexure `joint` in its base frame. Cable forces act at the
/// attach points B toward holes A; the contact contributes when it lies
/// distal to the flexure tip. Ignores any split of this flexure.
BeamLoads beam_tip_loads(std::size_t joint, const CableArray& tensions_at_b,
                         std::span<const ContactSpec> contacts, const JointState& state,
                         const ChainFrames& frames, const RobotParams& params);

/// Quasi-static chain shape for given proximal cable tensions.
/// Throws ConvergenceFailure or NonPhysicalLoad.
EquilibriumResult solve_force_control(const CableArray& input_tensions,
                                      std::span<const ContactSpec> contacts,
                                      const FrictionSigns& friction, const RobotParams& params,
                                      const JointState* init = nullptr,
                                      const EquilibriumOptions& options = {});

EquilibriumResult solve_force_control(const CableArray& input_tensions, const ContactSpec& contact,
                                      const FrictionSigns& friction, const RobotParams& params,
                                      const JointState* init = nullptr,
                                      const EquilibriumOptions& options = {});

/// Finds non-negative input tensions whose model cable lengths match the
/// set lengths. A cable whose set length exceeds its zero-tension path is
/// reported slack with zero tension. Throws InfeasibleDisplacement.
EquilibriumResult solve_displacement_control(const CableArray& set_lengths,
                                             std::span<const ContactSpec> contacts,
                                             const FrictionSigns& friction,
                                             const RobotParams& params,
                                             const EquilibriumResult* init = nullptr,
                                             const EquilibriumOptions& options = {});

EquilibriumResult solve_displacement_control(const CableArray& set_lengths,
                                             const ContactSpec& contact,
                                             const FrictionSigns& friction,
                                             const RobotParams& params,
                                             const EquilibriumResult* init = nullptr,
                                             const EquilibriumOptions& options = {});

/// Delta L = L^s - L^c per cable; cables with input tension <= slack_tension
/// contribute zero.
CableArray cable_length_residual(const EquilibriumResult& result, const CableArray& set_lengths,
                                 double slack_tension = 0.0);

/// Zero-tension path length of every cable for a straight robot.
double rest_cable_length(const RobotParams& params);

/// Segment lengths l_i per joint and cable of a state.
std::vector<CableArray> segment_lengths(const JointState& state, const RobotParams& params);

/// Time-ordered friction state of one robot. Signs follow the length change
/// of every segment since the last change larger than the deadband, so slow
/// drifts accumulate instead of being discarded sample by sample.
class FrictionTracker {
 public:
  explicit FrictionTracker(const RobotParams& params, double deadband = kFrictionLengthTolerance);

  const FrictionSigns& signs() const { return signs_; }
  double deadband() const { return deadband_; }
  /// Overrides the current signs, keeping the length references.
  void set_signs(FrictionSigns signs);

  /// Signs implied by `result` relative to the committed references.
  FrictionSigns propose(const EquilibriumResult& result) const;
  /// Adopts the signs of `result` and moves the references of every segment
  /// that changed by more than the deadband.
  void commit(const EquilibriumResult& result);

 private:
  RobotParams params_;
  double deadband_;
  FrictionSigns signs_;
  std::vector<CableArray> reference_;
};

/// Fixed-point iteration over friction signs with stiction: a segment
/// proposed to flip back after it already flipped cannot slide either way
/// and is held at its starting sign.
class SignSettler {
 public:
  explicit SignSettler(FrictionSigns start);

  const FrictionSigns& signs() const { return current_; }
  /// Adopts `proposed` under the stiction rule; false when nothing changed.
  bool advance(const FrictionSigns& proposed);

 private:
  FrictionSigns start_;
  FrictionSigns current_;
  std::vector<std::array<unsigned char, kCableCount>> flips_;
};

/// Solves `solve(signs)` until the signs it implies agree with the signs it
/// was solved with, then commits the result.
template <class Solve>
EquilibriumResult solve_with_friction(FrictionTracker& tracker, Solve&& solve) {
  SignSettler settler(tracker.signs());
  EquilibriumResult result = solve(settler.signs());
  while (settler.advance(tracker.propose(result))) result = solve(settler.signs());
  tracker.commit(result);
  return result;
}

}  // namespace ncr
