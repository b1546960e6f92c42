#include "ncr_tools/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "ncr/bcm.hpp"
#include "ncr/cable.hpp"
#include "ncr/errors.hpp"
#include "ncr/kinematics.hpp"
#include "ncr/ode_beam.hpp"
#include "ncr/scenario_io.hpp"
#include "ncr/simulator.hpp"
#include "ncr/trace_csv.hpp"
#include "ncr/units.hpp"

namespace ncr::tools {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string num(double v) { return format_number(v); }

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// Maps library errors onto exit codes and prints the message.
template <class F>
int guarded(std::ostream& log, F&& body) {
  try {
    return body();
  } catch (const ParseError& e) {
    log << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const InvalidConfiguration& e) {
    log << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const InfeasibleDisplacement& e) {
    log << "error: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << "\n";
    return kFailure;
  }
}

struct Stat {
  double sum = 0.0;
  double max = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    max = std::max(max, v);
    ++n;
  }
  std::string line(const std::string& name) const {
    if (n == 0) return name + " n=0";
    return name + " n=" + std::to_string(n) + " mean=" + num(sum / static_cast<double>(n)) +
           " max=" + num(max);
  }
};

std::vector<ContactSpec> truth_contacts(const GroundTruth& g) {
  if (g.contact_count == 0) return {};
  if (g.contact_count != 1 || !std::isfinite(g.s_c))
    throw Error("recalibration needs single-contact ground truth");
  return {ContactSpec::at(g.s_c, g.force)};
}

std::string sanitize(std::string s) {
  std::replace(s.begin(), s.end(), ',', ';');
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

double bending_angle(const Pose& p) { return std::atan2(p.R(0, 2), p.R(2, 2)); }

}  // namespace

RobotConfig load_config_or_default(const std::filesystem::path& path) {
  if (path.empty()) return {prototype_params(), std::nullopt};
  return load_robot_config(path);
}

std::string estimate_header(bool timing) {
  std::string h =
      "t_s,mode,fx_gf,fy_gf,fz_gf,sc_mm,px_mm,py_mm,pz_mm,theta_c_rad,residual_mm,"
      "torque_residual_Nmm,low_confidence,multi_contact,error";
  if (timing) h += ",solve_ms";
  return h;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RobotConfig config = load_config_or_default(args.config);
    Scenario sc = load_scenario(args.scenario);
    if (args.seed) sc.seed = *args.seed;
    const SensorTrace trace = run_scenario(sc, config.params);
    write_trace(args.out, trace);
    log << "wrote " << trace.frames.size() << " frames to " << args.out.string() << "\n";
    return int{kOk};
  });
}

int cmd_estimate(const EstimateArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RobotConfig config = load_config_or_default(args.config);
    const SensorTrace trace = read_trace(args.trace);
    if (args.recalibrate && !trace.has_truth())
      throw ParseError("--recalibrate needs a trace with ground-truth columns");

    PerceptionOptions options;
    options.threads = std::max<std::size_t>(args.threads, 1);
    if (config.noise) options.noise = config.noise->as_sensor_noise();
    ContactEstimator estimator(config.params, options, args.mode);

    std::optional<Plant> plant;
    if (args.recalibrate) plant.emplace(config.params);
    const NoiseModel noise = config.noise.value_or(NoiseModel{});
    std::uint64_t draw = args.seed;

    std::ofstream out = open_out(args.out);
    out << estimate_header(args.timing) << '\n';
    Stat force_err, sc_err, tip_err;
    std::size_t failed = 0;
    bool recalibrated = false;
    for (std::size_t i = 0; i < trace.frames.size(); ++i) {
      const ProximalFrame& frame = trace.frames[i];
      const auto start = Clock::now();
      try {
        std::vector<ContactSpec> truth;
        if (plant) {
          truth = truth_contacts(trace.truth[i]);
          plant->step(frame.set_lengths, truth);
        }
        ContactEstimate e = estimator.update(frame);
        if (plant && e.mode != ContactMode::none && !recalibrated) {
          auto controller = [&](const CableArray& set) {
            plant->step(set, truth);
            std::vector<ProximalFrame> f{plant->measure(frame.t)};
            add_sensor_noise(f, noise, ++draw);
            return f.front();
          };
          e = reciprocation_recalibrate(controller, estimator, frame);
          plant->step(frame.set_lengths, truth);
          recalibrated = true;
          log << "recalibrated at t=" << num(frame.t) << " s\n";
        }
        if (e.mode == ContactMode::none) recalibrated = false;
        const double ms = elapsed_ms(start);
        out << num(frame.t) << ',' << to_string(e.mode) << ',' << num(e.force_grams.x()) << ','
            << num(e.force_grams.y()) << ',' << num(e.force_grams.z()) << ',' << num(e.s_c) << ','
            << num(e.contact_point.x()) << ',' << num(e.contact_point.y()) << ','
            << num(e.contact_point.z()) << ',' << num(e.theta_c) << ',' << num(e.residual) << ','
            << num(e.torque_residual) << ',' << int{e.low_confidence} << ','
            << int{e.multi_contact_warning} << ',';
        if (args.timing) out << ',' << num(ms);
        out << '\n';
        if (trace.has_truth()) {
          const GroundTruth& g = trace.truth[i];
          if (g.contact_count > 0)
            force_err.add(units::newtons_to_grams((e.force - g.force).norm()));
          if (g.contact_count == 1 && std::isfinite(g.s_c) && std::isfinite(e.s_c))
            sc_err.add(std::abs(e.s_c - g.s_c));
          tip_err.add((e.shape.back().P - g.tip).norm());
        }
      } catch (const Error& err) {
        ++failed;
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out << num(frame.t) << ",failed";
        for (int k = 0; k < 10; ++k) out << ',' << num(nan);
        out << ",0,0," << sanitize(err.what());
        if (args.timing) out << ',' << num(elapsed_ms(start));
        out << '\n';
      }
    }
    std::ostringstream summary;
    summary << "# frames=" << trace.frames.size() << " failed=" << failed << '\n';
    if (trace.has_truth()) {
      summary << "# " << force_err.line("force_error_gf") << '\n';
      summary << "# " << sc_err.line("sc_error_mm") << '\n';
      summary << "# " << tip_err.line("tip_error_mm") << '\n';
    }
    out << summary.str();
    log << summary.str();
    if (!trace.frames.empty() && failed == trace.frames.size()) return int{kAllFramesFailed};
    return int{kOk};
  });
}

int cmd_shape(const ShapeArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RobotConfig config = load_config_or_default(args.config);
    const SensorTrace trace = read_trace(args.trace);
    PerceptionOptions options;
    options.threads = std::max<std::size_t>(args.threads, 1);
    if (config.noise) options.noise = config.noise->as_sensor_noise();
    ContactEstimator estimator(config.params, options);

    std::ofstream out = open_out(args.out);
    out << "t_s,joint,x_mm,y_mm,z_mm,theta_rad\n";
    Stat tip_err;
    std::size_t failed = 0;
    for (std::size_t i = 0; i < trace.frames.size(); ++i) {
      const ProximalFrame& frame = trace.frames[i];
      try {
        const ContactEstimate e = estimator.update(frame);
        out << num(frame.t) << ",0,0,0,0,0\n";
        for (std::size_t j = 0; j < e.shape.size(); ++j) {
          const Pose& p = e.shape[j];
          out << num(frame.t) << ',' << j + 1 << ',' << num(p.P.x()) << ',' << num(p.P.y()) << ','
              << num(p.P.z()) << ',' << num(bending_angle(p)) << '\n';
        }
        if (trace.has_truth()) tip_err.add((e.shape.back().P - trace.truth[i].tip).norm());
      } catch (const Error& err) {
        ++failed;
        log << "t=" << num(frame.t) << " s: " << err.what() << "\n";
      }
    }
    std::ostringstream summary;
    summary << "# frames=" << trace.frames.size() << " failed=" << failed << '\n';
    if (trace.has_truth()) summary << "# " << tip_err.line("tip_error_mm") << '\n';
    out << summary.str();
    log << summary.str();
    if (!trace.frames.empty() && failed == trace.frames.size()) return int{kAllFramesFailed};
    return int{kOk};
  });
}

ValidationReport run_validation(const RobotParams& params) {
  ValidationReport report;
  std::ostringstream text;
  auto record = [&](bool ok, const std::string& group, const std::string& detail) {
    report.passed = report.passed && ok;
    text << (ok ? "PASS " : "FAIL ") << group << ": " << detail << "\n";
  };
  const FrictionSigns no_friction = FrictionSigns::zero(params.joint_count);
  EquilibriumOptions tight = Plant::tight_options();

  // Beam model against the shooting oracle on the loads the robot itself
  // produces across its working envelope.
  {
    const Vec3 push(-units::grams_to_newtons(20.0), 0.0, 0.0);
    struct Case {
      CableArray tensions;
      std::vector<ContactSpec> contacts;
    };
    const double rigid_mid = 3.0 * params.joint_pitch() + 0.5 * params.channel_length;
    const std::vector<Case> cases = {
        {{1.0, 0.0}, {}},
        {{2.5, 0.0}, {}},
        {{5.0, 0.0}, {}},
        {{1.0, 1.0}, {ContactSpec::at(rigid_mid, push)}},
        {{1.0, 1.0}, {ContactSpec::at(params.backbone_length(), push)}},
    };
    double worst_pos = 0.0, worst_angle = 0.0, worst_theta = 0.0;
    std::size_t beams = 0;
    std::string failure;
    for (const Case& c : cases) {
      try {
        const EquilibriumResult r = solve_force_control(c.tensions, c.contacts, no_friction, params,
                                                        nullptr, tight);
        const ChainFrames frames = chain_frames(r.state, params);
        for (std::size_t j = 0; j < params.joint_count; ++j) {
          const BeamLoads loads =
              beam_tip_loads(j, r.tensions_at_b[j], c.contacts, r.state, frames, params);
          const BeamTip a = bcm_deflection(loads, params.beam_length, params);
          const BeamTip b = ode_shooting_deflection(loads, params.beam_length, params);
          worst_theta = std::max(worst_theta, std::abs(b.theta));
          worst_pos = std::max(worst_pos, std::hypot(a.r - b.r, a.z - b.z) / params.beam_length);
          worst_angle = std::max(worst_angle, std::abs(a.theta - b.theta) /
                                                  std::max(std::abs(b.theta), 1e-3));
          ++beams;
        }
      } catch (const Error& e) {
        failure = e.what();
        break;
      }
    }
    const bool ok = failure.empty() && worst_theta <= 0.35 && worst_pos <= 0.01 && worst_angle <= 0.01;
    record(ok, "bcm-ode",
           failure.empty()
               ? "beams=" + std::to_string(beams) + " max_theta_rad=" + num(worst_theta) +
                     " max_position_error_of_Lb=" + num(worst_pos) +
                     " max_angle_error_rel=" + num(worst_angle) + " limits 0.35 rad, 0.01, 0.01"
               : "no equilibrium in the working envelope: " + failure);
  }

  // Capstan telescoping and monotonicity.
  {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> angle(0.0, 0.5), sign(-params.friction_coeff,
                                                                 params.friction_coeff);
    double worst = 0.0;
    bool monotone = true;
    for (int k = 0; k < 1000; ++k) {
      const double a = angle(rng), b = angle(rng), s = sign(rng);
      const Wrap split[] = {{a, s}, {b, s}};
      const Wrap joined[] = {{a + b, s}};
      const double t1 = capstan_propagate(1.0, split), t2 = capstan_propagate(1.0, joined);
      worst = std::max(worst, std::abs(t1 - t2) / t2);
      const Wrap more[] = {{a, s}, {b, s}, {0.1, std::abs(s) + 1e-3}};
      monotone = monotone && capstan_propagate(1.0, more) > t1;
    }
    record(worst <= 1e-12 && monotone, "capstan",
           "max_telescoping_rel_error=" + num(worst) + " monotone=" + (monotone ? "yes" : "no"));
  }

  // Friction bracket on a bent state.
  {
    bool ok = true;
    std::string detail;
    try {
      const EquilibriumResult r =
          solve_force_control({2.5, 0.5}, ContactSpec::none(), no_friction, params, nullptr, tight);
      std::vector<std::array<CableGeometry, kCableCount>> geo;
      for (const BeamTip& tip : r.state.tips) geo.push_back(cable_geometry(tip, params));
      FrictionSigns plus = no_friction, minus = no_friction;
      for (auto& v : plus.values) v = {params.friction_coeff, params.friction_coeff};
      for (auto& v : minus.values) v = {-params.friction_coeff, -params.friction_coeff};
      const auto t0 = tensions_at_attach(r.input_tensions, geo, no_friction);
      const auto tp = tensions_at_attach(r.input_tensions, geo, plus);
      const auto tm = tensions_at_attach(r.input_tensions, geo, minus);
      for (std::size_t j = 0; j < t0.size(); ++j)
        for (std::size_t c = 0; c < kCableCount; ++c)
          ok = ok && tm[j][c] <= t0[j][c] && t0[j][c] <= tp[j][c];
      detail = "T(-u) <= T(0) <= T(+u) on every joint: " + std::string(ok ? "yes" : "no");
    } catch (const Error& e) {
      ok = false;
      detail = e.what();
    }
    record(ok, "friction", detail);
  }

  // Zero load, mirror symmetry, kinematics.
  {
    bool ok = false;
    try {
      const EquilibriumResult r =
          solve_force_control({0.0, 0.0}, ContactSpec::none(), no_friction, params, nullptr, tight);
      ok = r.state == JointState::rest(params) && r.residual_norm == 0.0;
    } catch (const Error&) {
    }
    record(ok, "zero-load", ok ? "straight chain, zero residual" : "rest state not reproduced");
  }
  {
    double worst = std::numeric_limits<double>::infinity();
    try {
      const EquilibriumResult a =
          solve_force_control({2.5, 0.5}, ContactSpec::none(), no_friction, params, nullptr, tight);
      const EquilibriumResult b =
          solve_force_control({0.5, 2.5}, ContactSpec::none(), no_friction, params, nullptr, tight);
      worst = 0.0;
      for (std::size_t j = 0; j < params.joint_count; ++j) {
        worst = std::max(worst, std::abs(a.state.tips[j].r + b.state.tips[j].r));
        worst = std::max(worst, std::abs(a.state.tips[j].z - b.state.tips[j].z));
        worst = std::max(worst, std::abs(a.state.tips[j].theta + b.state.tips[j].theta));
      }
    } catch (const Error&) {
    }
    record(worst <= 1e-9, "mirror", "max_asymmetry=" + num(worst));
  }
  {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> th(-0.4, 0.4);
    JointState s = JointState::rest(params);
    for (BeamTip& t : s.tips) t = {0.3 * t.z * th(rng), params.beam_length, th(rng)};
    double worst = 0.0;
    for (const Pose& p : chain_forward_kinematics(s, params)) {
      worst = std::max(worst, (p.R * p.R.transpose() - Mat3::Identity()).cwiseAbs().maxCoeff());
      worst = std::max(worst, std::abs(p.R.determinant() - 1.0));
    }
    record(worst <= 1e-9, "kinematics", "max_orthonormality_error=" + num(worst));
  }
  report.text = text.str();
  return report;
}

int cmd_validate(const std::filesystem::path& config, std::ostream& log) {
  return guarded(log, [&] {
    const ValidationReport r = run_validation(load_config_or_default(config).params);
    log << r.text;
    return int{r.passed ? kOk : kValidationFailed};
  });
}

BenchReport run_bench(const RobotParams& params, std::size_t frames, std::size_t threads) {
  frames = std::max<std::size_t>(frames, 3);
  Scenario sc;
  sc.sample_rate = 10.0;
  sc.duration = static_cast<double>(frames) / sc.sample_rate;
  sc.pulls[0] = {{0.0, 0.1}, {sc.duration, 0.6}};
  sc.pulls[1] = {{0.0, 0.1}, {sc.duration, -0.3}};
  Scenario free = sc;
  ContactEvent contact;
  contact.start = 0.0;
  contact.end = sc.duration + 1.0;
  contact.arc_length = 0.57 * params.backbone_length();
  contact.force = Vec3(-units::grams_to_newtons(20.0), 0.0, 0.0);
  sc.contacts = {contact};

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
  };
  PerceptionOptions options;
  options.threads = std::max<std::size_t>(threads, 1);

  BenchReport report;
  {
    // Times the warm-started single-frame solve; the estimator keeps the
    // friction signs current between frames.
    const SensorTrace trace = run_scenario(sc, params);
    ContactEstimator est(params, options, ContactEstimator::Mode::body);
    std::vector<double> ms;
    for (std::size_t k = 0; k < trace.frames.size(); ++k) {
      const auto start = Clock::now();
      estimate_contact(trace.frames[k], est.friction().signs(), params, est.last(), options);
      if (k > 0) ms.push_back(elapsed_ms(start));
      est.update(trace.frames[k]);
    }
    report.estimate_median_ms = median(ms);
  }
  {
    const SensorTrace trace = run_scenario(free, params);
    ContactEstimator est(params, options, ContactEstimator::Mode::automatic);
    std::vector<double> ms;
    for (std::size_t k = 0; k < trace.frames.size(); ++k) {
      const auto start = Clock::now();
      est.update(trace.frames[k]);
      if (k > 0) ms.push_back(elapsed_ms(start));
    }
    report.shape_median_ms = median(ms);
  }
  return report;
}

int cmd_bench(const BenchArgs& args, std::ostream& log) {
  return guarded(log, [&] {
    const RobotConfig config = load_config_or_default(args.config.value_or(""));
    const BenchReport r = run_bench(config.params, args.frames, args.threads);
    log << "estimate_contact median_ms=" << r.estimate_median_ms << " rate_hz=" << r.estimate_rate()
        << "\n";
    log << "shape median_ms=" << r.shape_median_ms << " rate_hz=" << r.shape_rate() << "\n";
    return int{kOk};
  });
}

}  // namespace ncr::tools
