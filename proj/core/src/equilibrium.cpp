#include "ncr/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/QR>

#include "ncr/bcm.hpp"
#include "ncr/errors.hpp"

namespace ncr {

namespace {

std::string format_residual(double r) {
  std::ostringstream out;
  out << r;
  return out.str();
}


struct PreparedContact {
  const ContactSpec* spec;
  ArcLocation loc;
};

std::vector<PreparedContact> prepare_contacts(std::span<const ContactSpec> contacts,
                                              const RobotParams& params) {
  std::vector<PreparedContact> out;
  for (const ContactSpec& c : contacts) {
    if (!c.active()) continue;
    if (!c.force.allFinite()) throw InvalidConfiguration("contact.force", "must be finite");
    const ArcLocation loc = locate_arc(c.arc_length, params);
    if (loc.kind == ArcLocation::Kind::flexure)
      for (const PreparedContact& other : out)
        if (other.loc.kind == ArcLocation::Kind::flexure && other.loc.index == loc.index)
          throw InvalidConfiguration("contacts", "two contacts on flexure " +
                                                     std::to_string(loc.index + 1));
    out.push_back({&c, loc});
  }
  return out;
}

Pose frame_at(const ArcLocation& loc, const JointState& state, const ChainFrames& frames,
              const RobotParams& params) {
  if (loc.kind == ArcLocation::Kind::rigid) {
    const Pose root = loc.index == 0 ? Pose::identity() : frames.tip[loc.index - 1];
    return root * trans_z(loc.offset);
  }
  if (const FlexureSplit* split = state.split_for(loc.index))
    return frames.base[loc.index] * beam_transform(split->proximal);
  // Only reachable from beam_tip_loads on a state without the split.
  return backbone_frame(loc.index * params.joint_pitch() + params.channel_length + loc.offset,
                        state, params);
}

PointForce contact_force(const PreparedContact& c, const JointState& state,
                         const ChainFrames& frames, const RobotParams& params) {
  const Pose f = frame_at(c.loc, state, frames, params);
  double theta_c = 0.0;
  if (c.spec->theta_c) {
    theta_c = *c.spec->theta_c;
  } else {
    const Vec3 local = f.R.transpose() * c.spec->force;
    theta_c = std::atan2(local.y(), local.x());
  }
  const Vec3 radial = rot_z(theta_c) * Vec3(0.5 * params.cable_pitch_diameter, 0.0, 0.0);
  return {c.spec->force, f.apply(radial)};
}

void add_cable_forces(std::vector<PointForce>& out, const Pose& base, const BeamTip& tip,
                      const CableArray& tensions, const RobotParams& params) {
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const int side = cable_side(c);
    const Vec2 b = cable_attach_point(tip, side, params);
    const Vec3 b_local(b.x(), 0.0, b.y());
    const Vec3 a_local(0.5 * params.cable_pitch_diameter * side, 0.0, 0.0);
    const Vec3 dir = base.R * (a_local - b_local).normalized();
    out.push_back({tensions[c] * dir, base.apply(b_local)});
  }
}

BeamLoads loads_about(const Pose& base, const Vec3& tip_point, std::span<const PointForce> forces,
                      double e_eff) {
  Vec3 f = Vec3::Zero(), m = Vec3::Zero();
  for (const PointForce& pf : forces) {
    f += pf.force;
    m += (pf.point - tip_point).cross(pf.force);
  }
  const Vec3 fl = base.R.transpose() * f;
  const Vec3 ml = base.R.transpose() * m;
  return {fl.x(), fl.z(), ml.y(), e_eff};
}

bool distal_to(const ArcLocation& loc, std::size_t joint) { return loc.loaded_joints() > joint; }
bool inside(const ArcLocation& loc, std::size_t joint) {
  return loc.kind == ArcLocation::Kind::flexure && loc.index == joint;
}

std::vector<std::array<CableGeometry, kCableCount>> chain_geometry(const JointState& state,
                                                                   const RobotParams& params) {
  std::vector<std::array<CableGeometry, kCableCount>> g;
  g.reserve(state.tips.size());
  for (const BeamTip& tip : state.tips) g.push_back(cable_geometry(tip, params));
  return g;
}

// One application of the load -> deflection map to every flexure.
class ChainMap {
 public:
  ChainMap(const CableArray& input, const std::vector<PreparedContact>& contacts,
           const FrictionSigns& friction, const RobotParams& params)
      : input_(input), contacts_(contacts), friction_(friction), params_(params) {}

  JointState operator()(const JointState& x) const {
    const ChainFrames frames = chain_frames(x, params_);
    const auto tensions = tensions_at_attach(input_, chain_geometry(x, params_), friction_);
    std::vector<PointForce> contact_forces;
    contact_forces.reserve(contacts_.size());
    for (const PreparedContact& c : contacts_)
      contact_forces.push_back(contact_force(c, x, frames, params_));

    JointState g = x;
    std::vector<PointForce> forces;
    for (std::size_t j = 0; j < x.tips.size(); ++j) {
      const double e = effective_modulus(x.tips[j].theta, params_);
      forces.clear();
      add_cable_forces(forces, frames.base[j], x.tips[j], tensions[j], params_);
      std::size_t own = contacts_.size();
      for (std::size_t k = 0; k < contacts_.size(); ++k) {
        if (inside(contacts_[k].loc, j))
          own = k;
        else if (distal_to(contacts_[k].loc, j))
          forces.push_back(contact_forces[k]);
      }
      const Vec3 tip_point = frames.tip[j].P;
      if (own == contacts_.size()) {
        g.tips[j] = bcm_deflection(loads_about(frames.base[j], tip_point, forces, e),
                                   params_.beam_length, params_);
        continue;
      }
      FlexureSplit& split = *split_ref(g, j);
      const Pose split_frame = frames.base[j] * beam_transform(split.proximal);
      split.distal = bcm_deflection(loads_about(split_frame, tip_point, forces, e),
                                    params_.beam_length - split.offset, params_);
      forces.push_back(contact_forces[own]);
      split.proximal = bcm_deflection(loads_about(frames.base[j], split_frame.P, forces, e),
                                      split.offset, params_);
      g.tips[j] = compose(split.proximal, split.distal);
    }
    return g;
  }

  static FlexureSplit* split_ref(JointState& s, std::size_t joint) {
    for (FlexureSplit& sp : s.splits)
      if (sp.joint == joint) return &sp;
    return nullptr;
  }

 private:
  const CableArray& input_;
  const std::vector<PreparedContact>& contacts_;
  const FrictionSigns& friction_;
  const RobotParams& params_;
};

double residual(const JointState& x, const JointState& g) {
  double r = 0.0;
  for (std::size_t j = 0; j < x.tips.size(); ++j)
    r = std::max(r, std::abs(g.tips[j].theta - x.tips[j].theta));
  for (std::size_t k = 0; k < x.splits.size(); ++k) {
    r = std::max(r, std::abs(g.splits[k].proximal.theta - x.splits[k].proximal.theta));
    r = std::max(r, std::abs(g.splits[k].distal.theta - x.splits[k].distal.theta));
  }
  return r;
}

BeamTip blend(const BeamTip& a, const BeamTip& b, double lambda) {
  return {a.r + lambda * (b.r - a.r), a.z + lambda * (b.z - a.z),
          a.theta + lambda * (b.theta - a.theta)};
}

JointState blend(const JointState& x, const JointState& g, double lambda) {
  JointState out = x;
  for (std::size_t j = 0; j < x.tips.size(); ++j) out.tips[j] = blend(x.tips[j], g.tips[j], lambda);
  for (std::size_t k = 0; k < x.splits.size(); ++k) {
    FlexureSplit& s = out.splits[k];
    s.proximal = blend(x.splits[k].proximal, g.splits[k].proximal, lambda);
    s.distal = blend(x.splits[k].distal, g.splits[k].distal, lambda);
    out.tips[s.joint] = compose(s.proximal, s.distal);
  }
  return out;
}

BeamTip scaled(const BeamTip& tip, double u, double length) {
  return {tip.r * u * u, length * u, tip.theta * u};
}

JointState initial_state(const JointState* init, const std::vector<PreparedContact>& contacts,
                         const RobotParams& params) {
  JointState x = init && init->tips.size() == params.joint_count ? *init : JointState::rest(params);
  std::vector<FlexureSplit> splits;
  for (const PreparedContact& c : contacts) {
    if (c.loc.kind != ArcLocation::Kind::flexure) continue;
    const std::size_t j = c.loc.index;
    const FlexureSplit* old = x.split_for(j);
    if (old && old->offset == c.loc.offset) {
      splits.push_back(*old);
      continue;
    }
    const double u = c.loc.offset / params.beam_length;
    FlexureSplit s{j, c.loc.offset, scaled(x.tips[j], u, params.beam_length), {}};
    s.distal = {x.tips[j].r * (1.0 - u) * (1.0 - u), params.beam_length - c.loc.offset,
                x.tips[j].theta * (1.0 - u)};
    splits.push_back(s);
  }
  std::sort(splits.begin(), splits.end(),
            [](const FlexureSplit& a, const FlexureSplit& b) { return a.joint < b.joint; });
  x.splits = std::move(splits);
  for (const FlexureSplit& s : x.splits) x.tips[s.joint] = compose(s.proximal, s.distal);
  return x;
}

void finish(EquilibriumResult& r, const RobotParams& params) {
  r.tensions_at_b = tensions_at_attach(r.input_tensions, chain_geometry(r.state, params), r.friction);
  for (std::size_t c = 0; c < kCableCount; ++c)
    r.cable_lengths[c] = total_cable_length(r.state, c, r.input_tensions[c], params);
}

}  // namespace

double contact_angle(const ContactSpec& contact, const JointState& state, const RobotParams& params) {
  if (contact.theta_c) return *contact.theta_c;
  const Vec3 local = backbone_frame(contact.arc_length, state, params).R.transpose() * contact.force;
  return std::atan2(local.y(), local.x());
}

Vec3 contact_point(const ContactSpec& contact, const JointState& state, const RobotParams& params) {
  return contact_pose(contact.arc_length, contact_angle(contact, state, params), state, params).P;
}

BeamLoads beam_tip_loads(std::size_t joint, const CableArray& tensions_at_b,
                         std::span<const ContactSpec> contacts, const JointState& state,
                         const ChainFrames& frames, const RobotParams& params) {
  const auto prepared = prepare_contacts(contacts, params);
  std::vector<PointForce> forces;
  add_cable_forces(forces, frames.base[joint], state.tips[joint], tensions_at_b, params);
  for (const PreparedContact& c : prepared)
    if (distal_to(c.loc, joint)) forces.push_back(contact_force(c, state, frames, params));
  return loads_about(frames.base[joint], frames.tip[joint].P, forces,
                     effective_modulus(state.tips[joint].theta, params));
}

EquilibriumResult solve_force_control(const CableArray& input_tensions,
                                      std::span<const ContactSpec> contacts,
                                      const FrictionSigns& friction, const RobotParams& params,
                                      const JointState* init, const EquilibriumOptions& options) {
  for (double t : input_tensions)
    if (!(t >= 0.0) || !std::isfinite(t))
      throw InvalidConfiguration("input_tensions", "must be finite and non-negative");
  if (friction.values.size() != params.joint_count)
    throw InvalidConfiguration("friction", "needs one entry per joint");

  const auto prepared = prepare_contacts(contacts, params);
  const ChainMap map(input_tensions, prepared, friction, params);

  EquilibriumResult result;
  result.friction = friction;
  result.input_tensions = input_tensions;

  JointState x = initial_state(init, prepared, params);
  JointState g = map(x);
  double res = residual(x, g);
  double lambda = options.relaxation;
  result.iterations = 1;
  result.residual_history.push_back(res);

  while (!(res < options.theta_tolerance)) {
    if (result.iterations >= options.max_iterations || !std::isfinite(res))
      throw ConvergenceFailure("chain equilibrium did not converge (residual " +
                                   format_residual(res) + " rad)",
                               res, result.iterations);
    for (;;) {
      JointState x_try = blend(x, g, lambda);
      ++result.iterations;
      try {
        JointState g_try = map(x_try);
        const double res_try = residual(x_try, g_try);
        if (res_try <= res || lambda <= options.min_relaxation) {
          x = std::move(x_try);
          g = std::move(g_try);
          res = res_try;
          break;
        }
      } catch (const NonPhysicalLoad&) {
        if (lambda <= options.min_relaxation) throw;
      } catch (const InvalidConfiguration&) {
        if (lambda <= options.min_relaxation) throw;
      }
      lambda = std::max(0.5 * lambda, options.min_relaxation);
      if (result.iterations >= options.max_iterations)
        throw ConvergenceFailure("chain equilibrium did not converge (residual " +
                                     format_residual(res) + " rad)",
                                 res, result.iterations);
    }
    result.residual_history.push_back(res);
  }

  result.state = std::move(g);
  result.converged = true;
  result.residual_norm = res;
  finish(result, params);
  return result;
}

EquilibriumResult solve_force_control(const CableArray& input_tensions, const ContactSpec& contact,
                                      const FrictionSigns& friction, const RobotParams& params,
                                      const JointState* init, const EquilibriumOptions& options) {
  return solve_force_control(input_tensions, std::span<const ContactSpec>(&contact, 1), friction,
                             params, init, options);
}

namespace {

// Complementarity residual: taut cables must match their set length, a
// cable at zero tension may only be longer than its path.
CableArray length_mismatch(const EquilibriumResult& r, const CableArray& set_lengths) {
  CableArray g{};
  for (std::size_t c = 0; c < kCableCount; ++c) {
    const double d = r.cable_lengths[c] - set_lengths[c];
    g[c] = r.input_tensions[c] > 0.0 ? d : std::max(d, 0.0);
  }
  return g;
}

double max_abs(const CableArray& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double sum_sq(const CableArray& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return s;
}

}  // namespace

EquilibriumResult solve_displacement_control(const CableArray& set_lengths,
                                             std::span<const ContactSpec> contacts,
                                             const FrictionSigns& friction,
                                             const RobotParams& params,
                                             const EquilibriumResult* init,
                                             const EquilibriumOptions& options) {
  EquilibriumOptions inner = options;
  inner.theta_tolerance = std::min(options.theta_tolerance, options.inner_theta_tolerance);

  const JointState* warm = init ? &init->state : nullptr;
  auto solve = [&](const CableArray& t, const JointState* start) {
    return solve_force_control(t, contacts, friction, params, start, inner);
  };

  CableArray tension{};
  if (init) {
    tension = init->input_tensions;
  } else {
    const double compliance = params.cable_compliance();
    const double rest = rest_cable_length(params);
    for (std::size_t c = 0; c < kCableCount; ++c)
      tension[c] = std::clamp((rest - set_lengths[c]) / compliance, 0.0, options.tension_upper);
  }

  EquilibriumResult current;
  for (int attempt = 0;; ++attempt) {
    try {
      current = solve(tension, warm);
      break;
    } catch (const Error&) {
      if (attempt >= 40) throw InfeasibleDisplacement("no equilibrium for the initial tension guess");
      for (double& t : tension) t *= 0.5;
      warm = nullptr;
    }
  }

  CableArray g = length_mismatch(current, set_lengths);
  double merit = sum_sq(g);
  for (std::size_t it = 0; max_abs(g) > options.length_tolerance; ++it) {
    if (it >= options.max_tension_iterations)
      throw InfeasibleDisplacement("cable lengths not reached, mismatch " +
                                   std::to_string(max_abs(g)) + " mm");
    std::array<std::size_t, kCableCount> active{};
    std::size_t n = 0;
    for (std::size_t c = 0; c < kCableCount; ++c)
      if (tension[c] > 0.0 || g[c] > 0.0) active[n++] = c;

    const CableArray raw = [&] {
      CableArray d{};
      for (std::size_t c = 0; c < kCableCount; ++c)
        d[c] = current.cable_lengths[c] - set_lengths[c];
      return d;
    }();
    Eigen::MatrixXd jac(n, n);
    Eigen::VectorXd rhs(n);
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t c = active[a];
      const double h = 1e-6 * std::max(1.0, tension[c]);
      CableArray tp = tension;
      tp[c] += h;
      EquilibriumResult rp;
      try {
        rp = solve(tp, &current.state);
      } catch (const Error& e) {
        throw InfeasibleDisplacement(std::string("no equilibrium next to the current tensions: ") +
                                     e.what());
      }
      for (std::size_t b = 0; b < n; ++b)
        jac(b, a) = (rp.cable_lengths[active[b]] - current.cable_lengths[active[b]]) / h;
      rhs(a) = -raw[c];
    }
    const Eigen::VectorXd step = jac.colPivHouseholderQr().solve(rhs);

    double alpha = 1.0;
    bool accepted = false;
    for (int k = 0; k < 40 && !accepted; ++k, alpha *= 0.5) {
      CableArray trial = tension;
      for (std::size_t a = 0; a < n; ++a)
        trial[active[a]] =
            std::clamp(tension[active[a]] + alpha * step(a), 0.0, options.tension_upper);
      try {
        EquilibriumResult r = solve(trial, &current.state);
        const CableArray gt = length_mismatch(r, set_lengths);
        const double mt = sum_sq(gt);
        if (mt < merit || max_abs(gt) <= options.length_tolerance) {
          tension = trial;
          current = std::move(r);
          g = gt;
          merit = mt;
          accepted = true;
        }
      } catch (const NonPhysicalLoad&) {
      } catch (const ConvergenceFailure&) {
      } catch (const InvalidConfiguration&) {
      }
    }
    if (!accepted)
      throw InfeasibleDisplacement("no non-negative tensions reproduce the set lengths (mismatch " +
                                   std::to_string(max_abs(g)) + " mm)");
  }
  return current;
}

EquilibriumResult solve_displacement_control(const CableArray& set_lengths,
                                             const ContactSpec& contact,
                                             const FrictionSigns& friction,
                                             const RobotParams& params,
                                             const EquilibriumResult* init,
                                             const EquilibriumOptions& options) {
  return solve_displacement_control(set_lengths, std::span<const ContactSpec>(&contact, 1), friction,
                                    params, init, options);
}

CableArray cable_length_residual(const EquilibriumResult& result, const CableArray& set_lengths,
                                 double slack_tension) {
  CableArray d{};
  for (std::size_t c = 0; c < kCableCount; ++c)
    d[c] = result.input_tensions[c] > slack_tension ? set_lengths[c] - result.cable_lengths[c] : 0.0;
  return d;
}

double rest_cable_length(const RobotParams& params) {
  const JointState rest = JointState::rest(params);
  return total_cable_length(rest, 0, 0.0, params);
}

std::vector<CableArray> segment_lengths(const JointState& state, const RobotParams& params) {
  std::vector<CableArray> out(state.tips.size());
  for (std::size_t j = 0; j < state.tips.size(); ++j)
    for (std::size_t c = 0; c < kCableCount; ++c) {
      const int side = cable_side(c);
      out[j][c] = cable_segment_length(cable_attach_point(state.tips[j], side, params), side, params);
    }
  return out;
}

FrictionTracker::FrictionTracker(const RobotParams& params, double deadband)
    : params_(params),
      deadband_(deadband),
      signs_(FrictionSigns::zero(params.joint_count)),
      reference_(segment_lengths(JointState::rest(params), params)) {}

void FrictionTracker::set_signs(FrictionSigns signs) {
  if (signs.values.size() != params_.joint_count)
    throw InvalidConfiguration("friction", "needs one entry per joint");
  signs_ = std::move(signs);
}

FrictionSigns FrictionTracker::propose(const EquilibriumResult& result) const {
  const auto lengths = segment_lengths(result.state, params_);
  FrictionSigns next = signs_;
  for (std::size_t j = 0; j < lengths.size(); ++j)
    for (std::size_t c = 0; c < kCableCount; ++c)
      next.at(j, c) = friction_sign_update(signs_.at(j, c), lengths[j][c], reference_[j][c],
                                           result.tensions_at_b[j][c], params_, deadband_);
  return next;
}

void FrictionTracker::commit(const EquilibriumResult& result) {
  const auto lengths = segment_lengths(result.state, params_);
  signs_ = result.friction;
  for (std::size_t j = 0; j < lengths.size(); ++j)
    for (std::size_t c = 0; c < kCableCount; ++c)
      if (std::abs(lengths[j][c] - reference_[j][c]) > deadband_) reference_[j][c] = lengths[j][c];
}

SignSettler::SignSettler(FrictionSigns start)
    : start_(std::move(start)), current_(start_), flips_(start_.values.size()) {
  for (auto& f : flips_) f.fill(0);
}

bool SignSettler::advance(const FrictionSigns& proposed) {
  if (proposed.values.size() != current_.values.size())
    throw InvalidConfiguration("friction", "sign table size changed while settling");
  bool changed = false;
  for (std::size_t j = 0; j < current_.values.size(); ++j)
    for (std::size_t c = 0; c < kCableCount; ++c) {
      unsigned char& flips = flips_[j][c];
      if (flips > 1 || proposed.at(j, c) == current_.at(j, c)) continue;
      changed = true;
      if (++flips > 1) {
        current_.at(j, c) = start_.at(j, c);
        continue;
      }
      current_.at(j, c) = proposed.at(j, c);
    }
  return changed;
}

}  // namespace ncr
