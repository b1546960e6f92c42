#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "ncr_tools/commands.hpp"

int main(int argc, char** argv) {
  using namespace ncr::tools;
  CLI::App app{"Proprioception for notched continuum robots from proximal sensing"};
  app.require_subcommand(1);
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a scenario and write a sensor trace");
  simulate->add_option("--scenario", sim.scenario, "Scenario YAML")->required()->check(CLI::ExistingFile);
  simulate->add_option("--config", sim.config, "Robot config YAML (default: built-in prototype)");
  simulate->add_option("--out", sim.out, "Output trace CSV")->required();
  simulate->add_option("--seed", sim.seed, "Override the scenario noise seed");
  std::size_t sim_threads = hw;
  simulate->add_option("--threads", sim_threads, "Worker threads (unused: runs are sequential)");

  EstimateArgs est;
  est.threads = hw;
  std::string mode = "auto";
  auto* estimate = app.add_subcommand("estimate", "Estimate contact force and location per frame");
  estimate->add_option("--trace", est.trace, "Input trace CSV")->required()->check(CLI::ExistingFile);
  estimate->add_option("--config", est.config, "Robot config YAML");
  estimate->add_option("--out", est.out, "Output estimates CSV")->required();
  estimate->add_option("--mode", mode, "Contact model")->check(CLI::IsMember({"auto", "tip", "body"}));
  estimate->add_flag("--recalibrate", est.recalibrate,
                     "Run a reciprocation maneuver at contact onset (needs ground-truth columns)");
  estimate->add_option("--seed", est.seed, "Seed of the recalibration sensor noise");
  estimate->add_option("--threads", est.threads, "Worker threads for the location scan");
  estimate->add_flag("--timing", est.timing, "Append per-frame solve time (non-deterministic)");

  ShapeArgs shp;
  shp.threads = hw;
  auto* shape = app.add_subcommand("shape", "Write backbone poses per frame");
  shape->add_option("--trace", shp.trace, "Input trace CSV")->required()->check(CLI::ExistingFile);
  shape->add_option("--config", shp.config, "Robot config YAML");
  shape->add_option("--out", shp.out, "Output shape CSV")->required();
  shape->add_option("--threads", shp.threads, "Worker threads");

  std::filesystem::path validate_config;
  auto* validate = app.add_subcommand("validate", "Check the model against its oracles");
  validate->add_option("--config", validate_config, "Robot config YAML");

  BenchArgs bench_args;
  std::filesystem::path bench_config;
  bench_args.threads = 1;
  auto* bench = app.add_subcommand("bench", "Measure solve throughput");
  bench->add_option("--config", bench_config, "Robot config YAML");
  bench->add_option("--frames", bench_args.frames, "Frames per timing run");
  bench->add_option("--threads", bench_args.threads, "Worker threads for the location scan");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kParseError;
  }

  if (*simulate) return cmd_simulate(sim, std::cout);
  if (*estimate) {
    est.mode = mode == "tip"    ? ncr::ContactEstimator::Mode::tip
               : mode == "body" ? ncr::ContactEstimator::Mode::body
                                : ncr::ContactEstimator::Mode::automatic;
    return cmd_estimate(est, std::cout);
  }
  if (*shape) return cmd_shape(shp, std::cout);
  if (*validate) return cmd_validate(validate_config, std::cout);
  if (!bench_config.empty()) bench_args.config = bench_config;
  return cmd_bench(bench_args, std::cout);
}
