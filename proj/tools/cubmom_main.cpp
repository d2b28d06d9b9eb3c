#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cubmom/experiment.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stochastic cubic Newton with momentum: experiments, property "
               "suites, and schedule arithmetic"};
  app.require_subcommand(1);

  // run
  std::string config_path;
  std::string seeds_arg;
  std::string out_dir;
  bool svg = false;
  auto* run = app.add_subcommand("run", "run an experiment from a config file");
  run->add_option("--config", config_path, "key=value config file")->required();
  run->add_option("--seeds", seeds_arg, "comma-separated seed list override");
  run->add_option("--out", out_dir, "output directory override");
  run->add_flag("--svg", svg, "emit SVG charts");

  // check
  std::string suite = "all";
  int trials = 200;
  std::uint64_t check_seed = 0;
  auto* check = app.add_subcommand("check", "run a property suite");
  check->add_option("--suite", suite, "cubic | step | estimators | all");
  check->add_option("--trials", trials, "instances per property");
  check->add_option("--seed", check_seed, "suite seed");

  // schedule
  cubmom::cli::ScheduleArgs sched;
  auto* schedule =
      app.add_subcommand("schedule", "derive momentum parameters from constants");
  schedule->add_option("--L", sched.L, "Hessian Lipschitz constant")->required();
  schedule->add_option("--Lg", sched.L_g, "gradient Lipschitz constant");
  schedule->add_option("--sigma-g", sched.sigma_g, "gradient noise level");
  schedule->add_option("--sigma-h", sched.sigma_h, "Hessian noise level");
  schedule->add_option("--a-g", sched.a_g, "initial/running gradient noise ratio");
  schedule->add_option("--a-h", sched.a_h, "initial/running Hessian noise ratio");
  schedule->add_option("--T", sched.T, "horizon")->required();
  schedule->add_option("--M", sched.M, "cubic regularization parameter")->required();
  schedule->add_option("--source", sched.source,
                       "main_it | appendix_hb | appendix_mvr | appendix_som");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto spec = cubmom::cli::parse_config_file(config_path);
      if (!seeds_arg.empty()) {
        spec.seeds.clear();
        std::istringstream is(seeds_arg);
        std::string item;
        while (std::getline(is, item, ','))
          if (!item.empty()) spec.seeds.push_back(std::stoull(item));
      }
      if (!out_dir.empty()) spec.out_dir = out_dir;
      if (svg) spec.svg = true;
      return cubmom::cli::cmd_run(spec, std::cout, std::cerr);
    }
    if (check->parsed())
      return cubmom::cli::cmd_check(suite, trials, check_seed, ".", std::cout);
    if (schedule->parsed())
      return cubmom::cli::cmd_schedule(sched, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
