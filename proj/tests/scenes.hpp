#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include "ncr/perception.hpp"
#include "ncr/simulator.hpp"
#include "ncr/units.hpp"

namespace ncr::testing {

// Pretension both cables, bend toward cable 1 while keeping cable 2 taut,
// then hold still and load the body.
inline Scenario contact_scene(double s_c, const Vec3& force, NoiseModel noise = {},
                              std::uint64_t seed = 1, double pull = 0.2) {
  Scenario sc;
  sc.duration = 1.0;
  sc.sample_rate = 10.0;
  sc.pulls[0] = {{0.0, 0.1}, {0.5, 0.1 + pull}};
  sc.pulls[1] = {{0.0, 0.1}, {0.5, 0.1 - pull}};
  ContactEvent e;
  e.start = 0.7;
  e.end = 2.0;
  if (s_c >= 21.0)
    e.at_tip = true;
  else
    e.arc_length = s_c;
  e.force = force;
  sc.contacts = {e};
  sc.noise = noise;
  sc.seed = seed;
  return sc;
}

inline Vec3 lateral_grams(double grams, double angle = std::numbers::pi) {
  const double f = units::grams_to_newtons(grams);
  return {f * std::cos(angle), f * std::sin(angle), 0.0};
}

// Runs the estimator over the whole trace and returns the last estimate.
inline ContactEstimate estimate_last(const SensorTrace& trace, const RobotParams& params,
                                     PerceptionOptions options = {},
                                     ContactEstimator::Mode mode = ContactEstimator::Mode::automatic) {
  ContactEstimator est(params, options, mode);
  std::optional<ContactEstimate> last;
  for (const ProximalFrame& f : trace.frames) last = est.update(f);
  return *last;
}

}  // namespace ncr::testing
