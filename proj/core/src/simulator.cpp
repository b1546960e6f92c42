#include "ncr/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ncr/errors.hpp"
#include "ncr/kinematics.hpp"
#include "ncr/units.hpp"

namespace ncr {

BaseWrench synthesize_base_wrench(const EquilibriumResult& result,
                                  std::span<const ContactSpec> contacts,
                                  const RobotParams& params) {
  BaseWrench w;
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const Vec3 f(0.0, 0.0, result.input_tensions[c]);
    const Vec3 hole(0.5 * params.cable_pitch_diameter * cable_side(c), 0.0, 0.0);
    w.force += f;
    w.torque += hole.cross(f);
  }
  for (const ContactSpec& contact : contacts) {
    if (!contact.active()) continue;
    w.force += contact.force;
    w.torque += contact_point(contact, result.state, params).cross(contact.force);
  }
  return w;
}

Vec3 ContactEvent::resolved_force() const {
  if (force) return *force;
  if (mass_grams) return Vec3(0.0, 0.0, -units::grams_to_newtons(*mass_grams));
  return Vec3::Zero();
}

double ContactEvent::resolved_arc_length(const RobotParams& params) const {
  return at_tip ? params.backbone_length() : arc_length;
}

NoiseModel NoiseModel::sensor_resolution() {
  return {1.0 / 320.0, 1.0 / 64.0, units::kNewtonPerPoundForce / 100.0};
}

std::size_t Scenario::sample_count() const {
  return static_cast<std::size_t>(std::llround(duration * sample_rate));
}

double Scenario::time_at(std::size_t k) const { return static_cast<double>(k) / sample_rate; }

double Scenario::pull_at(std::size_t cable, double t) const {
  const auto& knots = pulls[cable];
  if (knots.empty()) return 0.0;
  if (t <= knots.front().t) return knots.front().pull;
  if (t >= knots.back().t) return knots.back().pull;
  const auto hi = std::upper_bound(knots.begin(), knots.end(), t,
                                   [](double v, const PullKnot& k) { return v < k.t; });
  const auto lo = hi - 1;
  const double w = (t - lo->t) / (hi->t - lo->t);
  return lo->pull + w * (hi->pull - lo->pull);
}

CableArray Scenario::set_lengths_at(double t, const RobotParams& params) const {
  const double rest = rest_cable_length(params);
  CableArray out{};
  for (std::size_t c = 0; c < kCableCount; ++c) out[c] = rest - pull_at(c, t);
  return out;
}

std::vector<ContactSpec> Scenario::contacts_at(double t, const RobotParams& params) const {
  std::vector<ContactSpec> out;
  for (const ContactEvent& e : contacts)
    if (e.active_at(t)) out.push_back(ContactSpec::at(e.resolved_arc_length(params), e.resolved_force()));
  return out;
}

void Scenario::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration))
    throw InvalidConfiguration("duration", "must be positive");
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate))
    throw InvalidConfiguration("sample_rate", "must be positive");
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const std::string field = "actuation.cable_" + std::to_string(c + 1);
    for (std::size_t k = 0; k < pulls[c].size(); ++k) {
      const PullKnot& knot = pulls[c][k];
      if (!std::isfinite(knot.t) || !std::isfinite(knot.pull))
        throw InvalidConfiguration(field, "knots must be finite");
      if (k > 0 && !(knot.t > pulls[c][k - 1].t))
        throw InvalidConfiguration(field, "knot times must increase strictly");
    }
  }
  for (std::size_t k = 0; k < contacts.size(); ++k) {
    const ContactEvent& e = contacts[k];
    const std::string field = "contacts[" + std::to_string(k) + "]";
    if (!(e.start >= 0.0) || !(e.end > e.start) || e.start > duration)
      throw InvalidConfiguration(field, "needs 0 <= start < end with start inside the duration");
    if (e.force.has_value() == e.mass_grams.has_value())
      throw InvalidConfiguration(field, "needs exactly one of force and mass");
    if (e.mass_grams && !(*e.mass_grams >= 0.0))
      throw InvalidConfiguration(field, "mass must be non-negative");
    if (e.force && !e.force->allFinite()) throw InvalidConfiguration(field, "force must be finite");
    if (!e.at_tip && !(e.arc_length >= 0.0)) throw InvalidConfiguration(field, "arc_length must be >= 0");
  }
  if (!(noise.force >= 0.0) || !(noise.torque >= 0.0) || !(noise.tension >= 0.0))
    throw InvalidConfiguration("noise", "standard deviations must be non-negative");
}

Plant::Plant(RobotParams params, EquilibriumOptions options)
    : params_(std::move(params)), options_(options), tracker_(params_) {
  validate(params_);
}

EquilibriumOptions Plant::tight_options() {
  EquilibriumOptions o;
  o.theta_tolerance = 1e-12;
  o.inner_theta_tolerance = 1e-12;
  o.length_tolerance = 1e-10;
  o.max_iterations = 400;
  return o;
}

const EquilibriumResult& Plant::step(const CableArray& set_lengths,
                                     std::span<const ContactSpec> contacts) {
  contacts_.assign(contacts.begin(), contacts.end());
  set_lengths_ = set_lengths;
  const EquilibriumResult* warm = current_ ? &*current_ : nullptr;
  auto solve = [&](const FrictionSigns& signs) {
    return solve_displacement_control(set_lengths_, contacts_, signs, params_, warm, options_);
  };
  current_ = solve_with_friction(tracker_, solve);
  return *current_;
}

ProximalFrame Plant::measure(double t) const {
  if (!current_) throw InvalidConfiguration("plant", "measure before the first step");
  const BaseWrench w = synthesize_base_wrench(*current_, contacts_, params_);
  return {t, w.force, w.torque, current_->input_tensions, set_lengths_};
}

SensorTrace run_scenario(const Scenario& scenario, const RobotParams& params) {
  scenario.validate();
  for (std::size_t k = 0; k < scenario.contacts.size(); ++k) {
    const ContactEvent& e = scenario.contacts[k];
    if (!e.at_tip && e.arc_length > params.backbone_length())
      throw InvalidConfiguration("contacts[" + std::to_string(k) + "]",
                                 "arc_length beyond the backbone length");
  }
  Plant plant(params);
  SensorTrace trace;
  const std::size_t n = scenario.sample_count();
  trace.frames.reserve(n);
  trace.truth.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = scenario.time_at(k);
    const std::vector<ContactSpec> contacts = scenario.contacts_at(t, params);
    try {
      plant.step(scenario.set_lengths_at(t, params), contacts);
    } catch (const Error& e) {
      throw InfeasibleDisplacement("sample " + std::to_string(k) + " (t = " + std::to_string(t) +
                                   " s): " + e.what());
    }
    trace.frames.push_back(plant.measure(t));
    GroundTruth gt;
    gt.contact_count = contacts.size();
    for (const ContactSpec& c : contacts) gt.force += c.force;
    gt.s_c = contacts.size() == 1 ? contacts.front().arc_length
                                  : std::numeric_limits<double>::quiet_NaN();
    gt.tip = chain_forward_kinematics(plant.state().state, params).back().P;
    gt.contacts = contacts;
    gt.equilibrium = plant.state();
    trace.truth.push_back(std::move(gt));
  }
  add_sensor_noise(trace.frames, scenario.noise, scenario.seed);
  return trace;
}

void add_sensor_noise(std::vector<ProximalFrame>& frames, const NoiseModel& noise, std::uint64_t seed) {
  if (noise.force == 0.0 && noise.torque == 0.0 && noise.tension == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto jitter = [&](double& v, double sigma) {
    const double z = normal(rng);
    if (sigma > 0.0) v += sigma * z;
  };
  for (ProximalFrame& f : frames) {
    for (int i = 0; i < 3; ++i) jitter(f.force[i], noise.force);
    for (int i = 0; i < 3; ++i) jitter(f.torque[i], noise.torque);
    for (double& t : f.tensions) jitter(t, noise.tension);
  }
}

}  // namespace ncr
