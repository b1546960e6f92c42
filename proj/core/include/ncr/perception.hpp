#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ncr/equilibrium.hpp"
#include "ncr/params.hpp"
#include "ncr/state.hpp"
#include "ncr/units.hpp"

namespace ncr {

/// One sample of the proximal sensors.
struct ProximalFrame {
  double t = 0.0;                   // s
  Vec3 force = Vec3::Zero();        // N, base frame
  Vec3 torque = Vec3::Zero();       // N*mm, base frame
  CableArray tensions{};            // N
  CableArray set_lengths{};         // mm

  bool operator==(const ProximalFrame&) const = default;
};

enum class ContactMode { none, active, passive, tip };

std::string_view to_string(ContactMode mode);

struct ContactEstimate {
  ContactMode mode = ContactMode::none;
  Vec3 force = Vec3::Zero();         // N, global
  Vec3 force_grams = Vec3::Zero();   // gf
  double s_c = 0.0;                  // mm, NaN without contact
  Vec3 contact_point = Vec3::Zero(); // mm, global
  double theta_c = 0.0;
  double residual = 0.0;             // mm, sqrt of the cable-length cost
  double torque_residual = 0.0;      // N*mm, |measured - predicted| base torque
  bool low_confidence = false;
  bool multi_contact_warning = false;
  std::vector<Pose> shape;           // flexure tip poses
  EquilibriumResult equilibrium;
};

/// Sensor noise the estimator should expect; all zero for clean data.
struct SensorNoise {
  double force = 0.0;    // N
  double torque = 0.0;   // N*mm
  double tension = 0.0;  // N

  /// sigma of one decoupled force component along the cable axis.
  double decoupled_force() const;
};

struct PerceptionOptions {
  SensorNoise noise;
  /// Decoupled force below which no contact is reported. Negative selects
  /// 3 sigma of the decoupled force, with 1 gf per channel when `noise` is zero.
  double detection_threshold = -1.0;
  /// Input tension at or below which a cable counts as slack. Negative
  /// selects 3 sigma of the tension noise (1e-9 N on clean data).
  double slack_tension = -1.0;
  /// Coarse grid step over s_c; non-positive selects L_b / 4.
  double grid_step = 0.0;
  double refine_tolerance = 1e-3;  // mm
  /// Search interval; empty selects [L_c, backbone length].
  std::optional<double> search_min;
  std::optional<double> search_max;
  /// Residual (mm) of a well-explained single contact; a residual above
  /// `multi_contact_ratio` times this raises multi_contact_warning. A grid
  /// whose residuals spread less than that is flagged low_confidence: two
  /// sub-beams do not compose exactly into one, so even a vanishing load
  /// leaves a ripple of about 2e-5 mm across the flexures.
  /// Negative selects 1e-5 mm on clean data and the tension noise mapped
  /// through the cable compliance otherwise.
  double single_contact_floor = -1.0;
  double multi_contact_ratio = 10.0;
  /// Hysteresis deadband of the friction tracker; negative selects 1e-6 mm
  /// on clean data and 0.01 mm with tension noise.
  double friction_deadband = -1.0;
  std::size_t threads = 1;
  EquilibriumOptions equilibrium = tight_equilibrium();
  /// Resolved defaults.
  double resolved_detection_threshold() const;
  double resolved_slack_tension() const;
  double resolved_friction_deadband() const;
  double resolved_single_contact_floor(const RobotParams& params) const;

  static EquilibriumOptions tight_equilibrium();
};

/// F^C = F^M - sum_a F^in_a dir_a. Cables run along the base +Z axis unless
/// other directions are given.
Vec3 decouple_contact_force(const ProximalFrame& frame);
Vec3 decouple_contact_force(const ProximalFrame& frame, std::span<const Vec3> cable_directions);

/// Locates a single contact along the backbone from one frame. Returns
/// mode none with a displacement-control shape when the decoupled force is
/// below the detection threshold. Throws EstimationFailed when no candidate
/// equilibrium exists.
ContactEstimate estimate_contact(const ProximalFrame& frame, const FrictionSigns& friction,
                                 const RobotParams& params,
                                 const std::optional<ContactEstimate>& prior = std::nullopt,
                                 const PerceptionOptions& options = {});

/// Contact force at the robot tip; skips the location search.
ContactEstimate estimate_tip_force(const ProximalFrame& frame, const FrictionSigns& friction,
                                   const RobotParams& params, const PerceptionOptions& options = {});
ContactEstimate estimate_tip_force(const ProximalFrame& frame, const RobotParams& params);

/// active when the force onset coincides with a change of set lengths,
/// passive when it appears while the set lengths hold, none when
/// `detection` is false or no frame exceeds `threshold`.
ContactMode classify_contact_mode(std::span<const ProximalFrame> history, bool detection,
                                  double threshold);
ContactMode classify_contact_mode(std::span<const ProximalFrame> history, bool detection);

/// Time-series estimator: tracks friction, warm starts and contact onset.
class ContactEstimator {
 public:
  enum class Mode { automatic, tip, body };

  ContactEstimator(RobotParams params, PerceptionOptions options = {}, Mode mode = Mode::automatic);

  /// Processes the next frame in time order.
  ContactEstimate update(const ProximalFrame& frame);

  const FrictionTracker& friction() const { return tracker_; }
  FrictionTracker& friction() { return tracker_; }
  const RobotParams& params() const { return params_; }
  const PerceptionOptions& options() const { return options_; }
  const std::optional<ContactEstimate>& last() const { return last_; }
  Mode mode() const { return mode_; }
  void set_mode(Mode mode) { mode_ = mode; }

 private:
  ContactEstimate estimate_body(const ProximalFrame& frame);
  ContactEstimate estimate_free(const ProximalFrame& frame);

  RobotParams params_;
  PerceptionOptions options_;
  Mode mode_;
  FrictionTracker tracker_;
  std::optional<ContactEstimate> last_;
  std::optional<EquilibriumResult> last_free_;
  std::vector<JointState> grid_cache_;
  std::optional<ProximalFrame> previous_;
  std::optional<ContactMode> onset_mode_;
};

/// Commands set lengths and returns the frame measured once the robot has
/// settled there.
using ActuationCallback = std::function<ProximalFrame(const CableArray& set_lengths)>;

struct ReciprocationOptions {
  double amplitude = 0.3;      // mm
  std::size_t cycles = 1;
  std::size_t substeps = 4;    // per quarter cycle
  /// Allowed drift of the decoupled force during the maneuver; negative
  /// selects max(3 * detection threshold, 25 % of the initial force).
  double drift_tolerance = -1.0;
  /// Antagonistic displacement pattern per cable.
  CableArray direction{1.0, -1.0};
};

/// Moves the cables back and forth around the current set lengths through
/// `controller` while tracking friction, returns to the start and
/// re-estimates. Throws RecalibrationAborted when the load drifts.
ContactEstimate reciprocation_recalibrate(const ActuationCallback& controller,
                                          ContactEstimator& estimator,
                                          const ProximalFrame& current,
                                          const ReciprocationOptions& options = {});

}  // namespace ncr
