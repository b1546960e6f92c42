#include <benchmark/benchmark.h>

#include <optional>
#include <vector>

#include "ncr/bcm.hpp"
#include "ncr/equilibrium.hpp"
#include "ncr/perception.hpp"
#include "ncr/simulator.hpp"

namespace {

using namespace ncr;

const RobotParams& params() {
  static const RobotParams p = prototype_params();
  return p;
}

void BM_BcmDeflection(benchmark::State& state) {
  const BeamLoads loads{0.05, -0.5, 0.1, params().austenite_modulus};
  for (auto _ : state) benchmark::DoNotOptimize(bcm_deflection(loads, params().beam_length, params()));
}
BENCHMARK(BM_BcmDeflection);

void BM_ForceControl(benchmark::State& state) {
  const auto& p = params();
  const ContactSpec contact = ContactSpec::at(12.0, {-units::grams_to_newtons(20.0), 0.0, 0.0});
  const FrictionSigns signs = FrictionSigns::zero(p.joint_count);
  for (auto _ : state)
    benchmark::DoNotOptimize(solve_force_control({2.0, 1.0}, contact, signs, p));
}
BENCHMARK(BM_ForceControl)->Unit(benchmark::kMicrosecond);

void BM_DisplacementControl(benchmark::State& state) {
  const auto& p = params();
  const double rest = rest_cable_length(p);
  const CableArray set{rest - 0.4, rest + 0.1};
  const FrictionSigns signs = FrictionSigns::zero(p.joint_count);
  const EquilibriumResult warm = solve_displacement_control(set, ContactSpec::none(), signs, p);
  const bool warm_start = state.range(0) != 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        solve_displacement_control(set, ContactSpec::none(), signs, p, warm_start ? &warm : nullptr));
}
BENCHMARK(BM_DisplacementControl)->Arg(0)->Arg(1)->Unit(benchmark::kMicrosecond);

void BM_EstimateContact(benchmark::State& state) {
  const auto& p = params();
  Scenario sc;
  sc.duration = 1.0;
  sc.sample_rate = 10.0;
  sc.pulls[0] = {{0.0, 0.1}, {0.5, 0.3}};
  sc.pulls[1] = {{0.0, 0.1}, {0.5, -0.1}};
  ContactEvent e;
  e.start = 0.0;
  e.end = 2.0;
  e.arc_length = 13.0;
  e.force = Vec3(-units::grams_to_newtons(20.0), 0.0, 0.0);
  sc.contacts = {e};
  const SensorTrace trace = run_scenario(sc, p);
  const ProximalFrame& frame = trace.frames.back();
  const FrictionSigns& signs = trace.truth.back().equilibrium.friction;
  const std::optional<ContactEstimate> prior =
      state.range(0) != 0 ? std::optional(estimate_contact(frame, signs, p)) : std::nullopt;
  PerceptionOptions options;
  options.threads = static_cast<std::size_t>(state.range(1));
  for (auto _ : state) benchmark::DoNotOptimize(estimate_contact(frame, signs, p, prior, options));
}
BENCHMARK(BM_EstimateContact)
    ->ArgsProduct({{0, 1}, {1, 4}})
    ->ArgNames({"warm", "threads"})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
