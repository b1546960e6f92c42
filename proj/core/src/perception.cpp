#include "ncr/perception.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/math/tools/minima.hpp>

#include "ncr/errors.hpp"
#include "ncr/kinematics.hpp"

namespace ncr {

std::string_view to_string(ContactMode mode) {
  switch (mode) {
    case ContactMode::none: return "none";
    case ContactMode::active: return "active";
    case ContactMode::passive: return "passive";
    case ContactMode::tip: return "tip";
  }
  return "none";
}

double SensorNoise::decoupled_force() const {
  return std::sqrt(force * force + static_cast<double>(kCableCount) * tension * tension);
}

double PerceptionOptions::resolved_detection_threshold() const {
  if (detection_threshold >= 0.0) return detection_threshold;
  const double sigma = noise.decoupled_force();
  return 3.0 * (sigma > 0.0 ? sigma : units::kNewtonPerGramForce);
}

double PerceptionOptions::resolved_slack_tension() const {
  if (slack_tension >= 0.0) return slack_tension;
  return noise.tension > 0.0 ? 3.0 * noise.tension : 1e-9;
}

double PerceptionOptions::resolved_friction_deadband() const {
  if (friction_deadband >= 0.0) return friction_deadband;
  return noise.tension > 0.0 ? 0.01 : kFrictionLengthTolerance;
}

double PerceptionOptions::resolved_single_contact_floor(const RobotParams& params) const {
  if (single_contact_floor >= 0.0) return single_contact_floor;
  return noise.tension > 0.0 ? noise.tension * params.cable_compliance() : 1e-5;
}

EquilibriumOptions PerceptionOptions::tight_equilibrium() {
  EquilibriumOptions o;
  o.theta_tolerance = 1e-11;
  o.inner_theta_tolerance = 1e-12;
  o.length_tolerance = 1e-9;
  o.max_iterations = 400;
  return o;
}

Vec3 decouple_contact_force(const ProximalFrame& frame) {
  Vec3 f = frame.force;
  for (double t : frame.tensions) f.z() -= t;
  return f;
}

Vec3 decouple_contact_force(const ProximalFrame& frame, std::span<const Vec3> cable_directions) {
  if (cable_directions.size() != kCableCount)
    throw InvalidConfiguration("cable_directions", "needs one direction per cable");
  Vec3 f = frame.force;
  for (std::size_t c = 0; c < kCableCount; ++c) f -= frame.tensions[c] * cable_directions[c];
  return f;
}

namespace {

struct Search {
  const ProximalFrame& frame;
  const FrictionSigns& friction;
  const RobotParams& params;
  const PerceptionOptions& options;
  Vec3 force;
  CableArray tensions{};
  double slack = 0.0;
  // When set, each candidate takes the friction signs of moving to the set
  // lengths under its own load instead of `friction`.
  const FrictionTracker* tracker = nullptr;

  ContactSpec contact(double s) const { return ContactSpec::at(s, force); }

  FrictionSigns signs_for(double s) const {
    SignSettler settler(friction);
    EquilibriumResult moved = solve_displacement_control(frame.set_lengths, contact(s), friction,
                                                         params, nullptr, options.equilibrium);
    while (settler.advance(tracker->propose(moved)))
      moved = solve_displacement_control(frame.set_lengths, contact(s), settler.signs(), params,
                                         &moved, options.equilibrium);
    return settler.signs();
  }

  // Cable-length cost of a candidate, +inf when no equilibrium exists.
  double cost(double s, const JointState* warm, EquilibriumResult* out) const {
    try {
      const FrictionSigns signs = tracker ? signs_for(s) : friction;
      EquilibriumResult r = solve_force_control(tensions, contact(s), signs, params, warm,
                                                options.equilibrium);
      const CableArray d = cable_length_residual(r, frame.set_lengths, slack);
      double c = 0.0;
      for (double v : d) c += v * v;
      if (out) *out = std::move(r);
      return c;
    } catch (const Error&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

Search make_search(const ProximalFrame& frame, const FrictionSigns& friction,
                   const RobotParams& params, const PerceptionOptions& options,
                   const FrictionTracker* tracker = nullptr) {
  Search s{frame, friction, params, options, decouple_contact_force(frame)};
  s.tracker = tracker;
  s.slack = options.resolved_slack_tension();
  for (std::size_t c = 0; c < kCableCount; ++c) s.tensions[c] = std::max(frame.tensions[c], 0.0);
  return s;
}

std::vector<double> grid_points(const RobotParams& params, const PerceptionOptions& options) {
  const double lo = options.search_min.value_or(params.channel_length);
  const double hi = options.search_max.value_or(params.backbone_length());
  if (!(hi > lo)) throw InvalidConfiguration("search", "empty s_c interval");
  const double step = options.grid_step > 0.0 ? options.grid_step : 0.25 * params.beam_length;
  const auto n = static_cast<std::size_t>(std::ceil((hi - lo) / step - 1e-9)) + 1;
  std::vector<double> s(n);
  for (std::size_t k = 0; k < n; ++k)
    s[k] = k + 1 == n ? hi : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return s;
}

Vec3 predicted_torque(const EquilibriumResult& r, const ContactSpec& contact, const RobotParams& params) {
  Vec3 tq = Vec3::Zero();
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const Vec3 hole(0.5 * params.cable_pitch_diameter * cable_side(c), 0.0, 0.0);
    tq += hole.cross(Vec3(0.0, 0.0, r.input_tensions[c]));
  }
  if (contact.active()) tq += contact_point(contact, r.state, params).cross(contact.force);
  return tq;
}

void fill_contact(ContactEstimate& e, const ProximalFrame& frame, const ContactSpec& contact,
                  const RobotParams& params) {
  e.force = contact.force;
  e.force_grams = contact.force / units::kNewtonPerGramForce;
  e.s_c = contact.arc_length;
  e.theta_c = contact_angle(contact, e.equilibrium.state, params);
  e.contact_point = contact_pose(contact.arc_length, e.theta_c, e.equilibrium.state, params).P;
  e.shape = chain_forward_kinematics(e.equilibrium.state, params);
  e.torque_residual = (frame.torque - predicted_torque(e.equilibrium, contact, params)).norm();
}

// Grid scan plus Brent refinement. `cache` holds one warm state per grid
// point and is updated in place.
ContactEstimate locate(const ProximalFrame& frame, const FrictionSigns& friction,
                       const RobotParams& params, const PerceptionOptions& options,
                       std::vector<JointState>& cache, const JointState* fallback,
                       const FrictionTracker* tracker = nullptr) {
  const Search search = make_search(frame, friction, params, options, tracker);
  const std::vector<double> grid = grid_points(params, options);
  const std::size_t n = grid.size();
  if (cache.size() != n) cache.assign(n, JointState{});

  std::vector<double> costs(n);
  std::vector<EquilibriumResult> results(n);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const JointState* warm = !cache[k].tips.empty() ? &cache[k] : fallback;
      costs[k] = search.cost(grid[k], warm, &results[k]);
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(options.threads, 1, n);
  if (threads == 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (n + threads - 1) / threads;
    for (std::size_t b = 0; b < n; b += chunk) pool.emplace_back(work, b, std::min(n, b + chunk));
  }

  std::size_t best = n;
  double lo_cost = std::numeric_limits<double>::infinity(), hi_cost = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    if (!std::isfinite(costs[k])) continue;
    cache[k] = results[k].state;
    if (costs[k] < lo_cost) {
      lo_cost = costs[k];
      best = k;
    }
    hi_cost = std::max(hi_cost, costs[k]);
  }
  if (best == n) throw EstimationFailed("no contact location candidate reached equilibrium");

  // Brackets to refine: the best grid point, or with per-candidate friction
  // the lowest few local minima since the landscape then jumps between sign
  // patterns.
  std::vector<std::size_t> seeds{best};
  if (tracker) {
    seeds.clear();
    for (std::size_t k = 0; k < n; ++k) {
      if (!std::isfinite(costs[k])) continue;
      const bool left = k == 0 || !(costs[k - 1] < costs[k]);
      const bool right = k + 1 == n || !(costs[k + 1] < costs[k]);
      if (left && right) seeds.push_back(k);
    }
    std::sort(seeds.begin(), seeds.end(), [&](std::size_t i, std::size_t j) { return costs[i] < costs[j]; });
    if (seeds.size() > 3) seeds.resize(3);
  }

  ContactEstimate e;
  double s_best = grid[best];
  e.equilibrium = results[best];
  double cost = lo_cost;
  for (std::size_t seed : seeds) {
    const double a = grid[seed == 0 ? 0 : seed - 1];
    const double b = grid[seed + 1 == n ? n - 1 : seed + 1];
    const JointState& warm = results[seed].state;
    auto f = [&](double s) { return search.cost(s, &warm, nullptr); };
    const double scale = std::max({std::abs(a), std::abs(b), 1.0});
    const int bits = std::clamp(
        static_cast<int>(std::ceil(1.0 - std::log2(options.refine_tolerance / (2.0 * scale)))), 4, 52);
    std::uintmax_t max_iter = 100;
    const auto [s_star, c_star] = boost::math::tools::brent_find_minima(f, a, b, bits, max_iter);
    if (!(c_star < cost)) continue;
    EquilibriumResult r;
    const double c = search.cost(s_star, &warm, &r);
    if (c < cost) {
      cost = c;
      s_best = s_star;
      e.equilibrium = std::move(r);
    }
  }
  e.residual = std::sqrt(cost);
  const double floor = options.resolved_single_contact_floor(params);
  e.low_confidence = std::sqrt(hi_cost) - std::sqrt(lo_cost) < options.multi_contact_ratio * floor;
  e.multi_contact_warning = e.residual > options.multi_contact_ratio * floor;
  e.mode = ContactMode::passive;
  fill_contact(e, frame, search.contact(s_best), params);
  return e;
}

// Greedy single-segment friction flips around an estimate the tracked signs
// cannot explain. A segment that barely moves may slide either way depending
// on history below the deadband.
ContactEstimate repair_signs(const ProximalFrame& frame, ContactEstimate e, const RobotParams& params,
                             const PerceptionOptions& options) {
  const double floor = options.resolved_single_contact_floor(params);
  const double lo = options.search_min.value_or(params.channel_length);
  const double hi = options.search_max.value_or(params.backbone_length());
  const double step = options.grid_step > 0.0 ? options.grid_step : 0.25 * params.beam_length;
  for (std::size_t round = 0; round < 4 && e.residual > floor; ++round) {
    const FrictionSigns base = e.equilibrium.friction;
    FrictionSigns best = base;
    double best_cost = e.residual * e.residual;
    for (std::size_t j = 0; j < base.values.size(); ++j)
      for (std::size_t c = 0; c < kCableCount; ++c) {
        if (base.at(j, c) == 0.0) continue;
        FrictionSigns trial = base;
        trial.at(j, c) = -trial.at(j, c);
        const double cost = make_search(frame, trial, params, options).cost(e.s_c, &e.equilibrium.state, nullptr);
        if (cost < best_cost) {
          best_cost = cost;
          best = std::move(trial);
        }
      }
    if (best == base) break;

    const Search search = make_search(frame, best, params, options);
    const JointState warm = e.equilibrium.state;
    auto f = [&](double s) { return search.cost(s, &warm, nullptr); };
    std::uintmax_t max_iter = 100;
    const auto [s_star, c_star] = boost::math::tools::brent_find_minima(
        f, std::max(lo, e.s_c - step), std::min(hi, e.s_c + step), 40, max_iter);
    const double s_new = c_star < best_cost ? s_star : e.s_c;
    EquilibriumResult r;
    const double cost = search.cost(s_new, &warm, &r);
    if (!(cost < e.residual * e.residual)) break;
    e.equilibrium = std::move(r);
    e.residual = std::sqrt(cost);
    e.multi_contact_warning = e.residual > options.multi_contact_ratio * floor;
    fill_contact(e, frame, search.contact(s_new), params);
  }
  return e;
}

ContactEstimate tip_estimate(const ProximalFrame& frame, const FrictionSigns& friction,
                             const RobotParams& params, const PerceptionOptions& options,
                             const EquilibriumResult* warm) {
  const ContactSpec contact = ContactSpec::at(params.backbone_length(), decouple_contact_force(frame));
  ContactEstimate e;
  try {
    e.equilibrium = solve_displacement_control(frame.set_lengths, contact, friction, params, warm,
                                               options.equilibrium);
  } catch (const Error& err) {
    throw EstimationFailed(std::string("tip contact: ") + err.what());
  }
  const CableArray d = cable_length_residual(e.equilibrium, frame.set_lengths, 0.0);
  e.residual = std::hypot(d[0], d[1]);
  e.mode = ContactMode::tip;
  fill_contact(e, frame, contact, params);
  return e;
}

ContactEstimate free_estimate(const ProximalFrame& frame, EquilibriumResult equilibrium,
                              const RobotParams& params) {
  ContactEstimate e;
  e.mode = ContactMode::none;
  e.s_c = std::numeric_limits<double>::quiet_NaN();
  e.contact_point = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
  e.equilibrium = std::move(equilibrium);
  const CableArray d = cable_length_residual(e.equilibrium, frame.set_lengths, 0.0);
  e.residual = std::hypot(d[0], d[1]);
  e.shape = chain_forward_kinematics(e.equilibrium.state, params);
  e.torque_residual =
      (frame.torque - predicted_torque(e.equilibrium, ContactSpec::none(), params)).norm();
  return e;
}

bool set_lengths_changed(const ProximalFrame& a, const ProximalFrame& b) {
  for (std::size_t c = 0; c < kCableCount; ++c)
    if (std::abs(a.set_lengths[c] - b.set_lengths[c]) > 1e-9) return true;
  return false;
}

}  // namespace

ContactEstimate estimate_contact(const ProximalFrame& frame, const FrictionSigns& friction,
                                 const RobotParams& params,
                                 const std::optional<ContactEstimate>& prior,
                                 const PerceptionOptions& options) {
  const JointState* warm = prior ? &prior->equilibrium.state : nullptr;
  if (decouple_contact_force(frame).norm() < options.resolved_detection_threshold()) {
    const EquilibriumResult* init = prior ? &prior->equilibrium : nullptr;
    try {
      return free_estimate(frame,
                           solve_displacement_control(frame.set_lengths, ContactSpec::none(),
                                                      friction, params, init, options.equilibrium),
                           params);
    } catch (const Error& err) {
      throw EstimationFailed(std::string("shape without contact: ") + err.what());
    }
  }
  std::vector<JointState> cache;
  return locate(frame, friction, params, options, cache, warm);
}

ContactEstimate estimate_tip_force(const ProximalFrame& frame, const FrictionSigns& friction,
                                   const RobotParams& params, const PerceptionOptions& options) {
  return tip_estimate(frame, friction, params, options, nullptr);
}

ContactEstimate estimate_tip_force(const ProximalFrame& frame, const RobotParams& params) {
  return estimate_tip_force(frame, FrictionSigns::zero(params.joint_count), params);
}

ContactMode classify_contact_mode(std::span<const ProximalFrame> history, bool detection,
                                  double threshold) {
  if (!detection) return ContactMode::none;
  for (std::size_t k = 0; k < history.size(); ++k) {
    if (decouple_contact_force(history[k]).norm() < threshold) continue;
    if (k > 0 && set_lengths_changed(history[k - 1], history[k])) return ContactMode::active;
    return ContactMode::passive;
  }
  return ContactMode::none;
}

ContactMode classify_contact_mode(std::span<const ProximalFrame> history, bool detection) {
  return classify_contact_mode(history, detection, 3.0 * units::kNewtonPerGramForce);
}

ContactEstimator::ContactEstimator(RobotParams params, PerceptionOptions options, Mode mode)
    : params_(std::move(params)),
      options_(std::move(options)),
      mode_(mode),
      tracker_(params_, options_.resolved_friction_deadband()) {
  validate(params_);
}

ContactEstimate ContactEstimator::estimate_free(const ProximalFrame& frame) {
  auto solve = [&](const FrictionSigns& signs) {
    return solve_displacement_control(frame.set_lengths, ContactSpec::none(), signs, params_,
                                      last_free_ ? &*last_free_ : nullptr, options_.equilibrium);
  };
  EquilibriumResult r;
  try {
    r = solve_with_friction(tracker_, solve);
  } catch (const Error& err) {
    throw EstimationFailed(std::string("shape without contact: ") + err.what());
  }
  last_free_ = r;
  return free_estimate(frame, std::move(r), params_);
}

ContactEstimate ContactEstimator::estimate_body(const ProximalFrame& frame) {
  const JointState* fallback = last_ ? &last_->equilibrium.state : nullptr;
  // Every pass is a hypothesis of location and signs; the best fit wins even
  // when the sign iteration walks on.
  SignSettler settler(tracker_.signs());
  ContactEstimate e = locate(frame, settler.signs(), params_, options_, grid_cache_, fallback);
  ContactEstimate pass = e;
  while (settler.advance(tracker_.propose(pass.equilibrium))) {
    pass = locate(frame, settler.signs(), params_, options_, grid_cache_, fallback);
    if (pass.residual < e.residual) e = pass;
  }
  // A contact can reverse the sliding direction in some joints, and the
  // signs carried over from before the load may then settle on a wrong but
  // self-consistent location.
  const double floor = options_.resolved_single_contact_floor(params_);
  if (e.residual > floor) {
    std::vector<JointState> cache;
    ContactEstimate alt = locate(frame, tracker_.signs(), params_, options_, cache, fallback, &tracker_);
    if (alt.residual > floor) {
      alt = repair_signs(frame, std::move(alt), params_, options_);
      e = repair_signs(frame, std::move(e), params_, options_);
    }
    if (alt.residual < e.residual) e = std::move(alt);
  }
  tracker_.commit(e.equilibrium);
  return e;
}

ContactEstimate ContactEstimator::update(const ProximalFrame& frame) {
  const double threshold = options_.resolved_detection_threshold();
  const bool detected = decouple_contact_force(frame).norm() >= threshold;
  ContactEstimate e;
  switch (mode_) {
    case Mode::tip: {
      const EquilibriumResult* warm = last_ ? &last_->equilibrium : nullptr;
      auto solve = [&](const FrictionSigns& signs) {
        return tip_estimate(frame, signs, params_, options_, warm).equilibrium;
      };
      solve_with_friction(tracker_, solve);
      e = tip_estimate(frame, tracker_.signs(), params_, options_, warm);
      break;
    }
    case Mode::body:
      e = estimate_body(frame);
      break;
    case Mode::automatic:
      e = detected ? estimate_body(frame) : estimate_free(frame);
      break;
  }

  if (mode_ != Mode::tip) {
    if (!detected && mode_ == Mode::automatic) {
      onset_mode_.reset();
    } else {
      if (!onset_mode_) {
        const bool moved = previous_ && set_lengths_changed(*previous_, frame);
        onset_mode_ = moved ? ContactMode::active : ContactMode::passive;
      }
      e.mode = *onset_mode_;
      const double end = options_.search_max.value_or(params_.backbone_length());
      if (e.s_c >= end - options_.refine_tolerance) e.mode = ContactMode::tip;
    }
    if (!detected && mode_ == Mode::body) e.low_confidence = true;
  }
  if (e.mode != ContactMode::none) last_free_.reset();
  previous_ = frame;
  last_ = e;
  return e;
}

ContactEstimate reciprocation_recalibrate(const ActuationCallback& controller,
                                          ContactEstimator& estimator,
                                          const ProximalFrame& current,
                                          const ReciprocationOptions& options) {
  if (options.amplitude == 0.0 || options.cycles == 0) return estimator.update(current);
  const Vec3 f0 = decouple_contact_force(current);
  const double tolerance =
      options.drift_tolerance >= 0.0
          ? options.drift_tolerance
          : std::max(3.0 * estimator.options().resolved_detection_threshold(), 0.25 * f0.norm());
  const std::size_t steps = std::max<std::size_t>(options.substeps, 1);
  const CableArray base = current.set_lengths;

  // Quarter cycles: 0 -> +A -> 0 -> -A -> 0.
  static constexpr double kLegs[4][2] = {{0.0, 1.0}, {1.0, 0.0}, {0.0, -1.0}, {-1.0, 0.0}};
  std::optional<ContactEstimate> last;
  for (std::size_t cycle = 0; cycle < options.cycles; ++cycle)
    for (const auto& leg : kLegs)
      for (std::size_t k = 1; k <= steps; ++k) {
        const double w = static_cast<double>(k) / static_cast<double>(steps);
        const double a = options.amplitude * (leg[0] + w * (leg[1] - leg[0]));
        CableArray target{};
        for (std::size_t c = 0; c < kCableCount; ++c) target[c] = base[c] - a * options.direction[c];
        const ProximalFrame frame = controller(target);
        const double drift = (decouple_contact_force(frame) - f0).norm();
        if (drift > tolerance)
          throw RecalibrationAborted("contact force drifted by " +
                                     std::to_string(units::newtons_to_grams(drift)) +
                                     " gf during reciprocation");
        last = estimator.update(frame);
      }
  return *last;
}

}  // namespace ncr
