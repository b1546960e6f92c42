#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ncr/equilibrium.hpp"
#include "ncr/params.hpp"
#include "ncr/perception.hpp"
#include "ncr/state.hpp"

namespace ncr {

struct BaseWrench {
  Vec3 force = Vec3::Zero();   // N
  Vec3 torque = Vec3::Zero();  // N*mm
};

/// Base wrench of a quasi-static state: the cable reactions along +Z at the
/// proximal holes plus every contact force and its moment about the base.
BaseWrench synthesize_base_wrench(const EquilibriumResult& result,
                                  std::span<const ContactSpec> contacts,
                                  const RobotParams& params);

/// A piecewise-linear breakpoint of a commanded cable pull (mm, positive
/// shortens the cable).
struct PullKnot {
  double t = 0.0;
  double pull = 0.0;
  bool operator==(const PullKnot&) const = default;
};

/// A load active on [start, end). Either an explicit force or a suspended
/// mass hanging along -Z; at_tip pins the location to the backbone end.
struct ContactEvent {
  double start = 0.0;
  double end = 0.0;
  bool at_tip = false;
  double arc_length = 0.0;           // mm
  std::optional<Vec3> force;         // N, global
  std::optional<double> mass_grams;  // gf

  Vec3 resolved_force() const;
  double resolved_arc_length(const RobotParams& params) const;
  bool active_at(double t) const { return t >= start && t < end; }
  bool operator==(const ContactEvent&) const = default;
};

struct NoiseModel {
  double force = 0.0;    // N
  double torque = 0.0;   // N*mm
  double tension = 0.0;  // N

  /// Resolution of the prototype sensors: 1/320 N, 1/64 N*mm, 1/100 lbf.
  static NoiseModel sensor_resolution();
  SensorNoise as_sensor_noise() const { return {force, torque, tension}; }
  bool operator==(const NoiseModel&) const = default;
};

struct Scenario {
  double duration = 1.0;     // s
  double sample_rate = 10.0; // Hz
  /// Pull pattern per cable; constant outside the knot range, zero if empty.
  std::array<std::vector<PullKnot>, kCableCount> pulls;
  std::vector<ContactEvent> contacts;
  NoiseModel noise;
  std::uint64_t seed = 0;

  std::size_t sample_count() const;
  double time_at(std::size_t k) const;
  double pull_at(std::size_t cable, double t) const;
  CableArray set_lengths_at(double t, const RobotParams& params) const;
  std::vector<ContactSpec> contacts_at(double t, const RobotParams& params) const;
  /// Throws InvalidConfiguration.
  void validate() const;
  bool operator==(const Scenario&) const = default;
};

/// Ground truth attached to a simulated frame.
struct GroundTruth {
  Vec3 force = Vec3::Zero();            // resultant contact force, N
  double s_c = 0.0;                     // mm, NaN without contact
  std::size_t contact_count = 0;
  Vec3 tip = Vec3::Zero();              // backbone tip position, mm
  std::vector<ContactSpec> contacts;    // not serialized
  EquilibriumResult equilibrium;        // not serialized; empty when read from file
};

struct SensorTrace {
  std::vector<ProximalFrame> frames;
  std::vector<GroundTruth> truth;  // empty or one per frame

  bool has_truth() const { return !truth.empty(); }
};

/// Quasi-static robot under displacement control with friction history.
/// Solves with tight tolerances so its states serve as ground truth.
class Plant {
 public:
  explicit Plant(RobotParams params, EquilibriumOptions options = tight_options());

  /// Moves to `set_lengths` under `contacts`. Throws InfeasibleDisplacement.
  const EquilibriumResult& step(const CableArray& set_lengths, std::span<const ContactSpec> contacts);
  /// Noiseless frame of the current state.
  ProximalFrame measure(double t) const;

  const EquilibriumResult& state() const { return *current_; }
  const std::vector<ContactSpec>& contacts() const { return contacts_; }
  FrictionTracker& friction() { return tracker_; }
  const FrictionTracker& friction() const { return tracker_; }
  const RobotParams& params() const { return params_; }

  static EquilibriumOptions tight_options();

 private:
  RobotParams params_;
  EquilibriumOptions options_;
  FrictionTracker tracker_;
  std::optional<EquilibriumResult> current_;
  std::vector<ContactSpec> contacts_;
  CableArray set_lengths_{};
};

/// Runs the scenario sample by sample. Errors carry the sample index.
SensorTrace run_scenario(const Scenario& scenario, const RobotParams& params);

/// Adds seeded zero-mean Gaussian noise to every sensor channel; measured
/// tensions are not clipped.
void add_sensor_noise(std::vector<ProximalFrame>& frames, const NoiseModel& noise, std::uint64_t seed);

}  // namespace ncr
