#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cubmom/checks.hpp"
#include "cubmom/engine.hpp"
#include "cubmom/problems.hpp"

namespace cubmom::cli {

inline constexpr const char* kCsvHeader =
    "t,oracle_draws,f,grad_norm,lambda_min,mu_M,r_t,eps_norm,sigma_norm,gamma";

/// CSV text for one run, one row per visited state.
std::string trace_to_csv(const engine::RunTrace& trace);

/// Column-wise medians across runs of identical length; same schema.
std::string median_csv(const std::vector<engine::RunTrace>& traces);

double median(std::vector<double> values);

struct MethodEntry {
  std::string name;  // scnm | scn_plain | sgd
  engine::Method method = engine::Method::kSCNM;
  engine::RunConfig config;
};

struct ExperimentSpec {
  // problem
  std::string problem = "synth";  // synth | libsvm
  std::string objective = "ncvx"; // ncvx | convex
  std::string data_path;
  int data_subsample = 0;
  int data_dim = 0;
  std::uint64_t data_seed = 1;
  int synth_n = 2000;
  int synth_d = 50;
  std::uint64_t synth_seed = 42;
  double synth_noise = 0.1;
  double lambda = 0.1;
  double ridge = 0.0;

  // runs
  std::vector<MethodEntry> methods;
  std::vector<std::uint64_t> seeds;
  std::string out_dir = "runs";
  bool svg = false;
  int constant_probes = 32;

  void validate() const;
};

/// Flat key=value file; '#' comments; later keys win. Method-scoped keys use
/// a "<method>." prefix.
ExperimentSpec parse_config_file(const std::string& path);
ExperimentSpec parse_config_text(const std::string& text);

problems::Problem build_problem(const ExperimentSpec& spec);

struct RunOutcome {
  std::string method;
  std::uint64_t seed = 0;
  std::string csv_path;
  bool aborted = false;
  std::string abort_reason;
};

struct ExperimentResult {
  std::vector<RunOutcome> runs;
  std::vector<std::string> artifact_paths;
  bool ok = true;
};

/// Runs every (method, seed) pair, writes per-run CSVs, per-method median
/// CSVs, metadata, and optional charts. Parallelism is capped by the
/// CUBIC_MOMENTUM_THREADS environment variable (0 or unset: serial).
ExperimentResult run_experiment(const ExperimentSpec& spec);

int cmd_run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err);

/// Runs the named property suite(s); prints one line per property; returns 0
/// iff everything passed. A failing property serializes its first failing
/// instance next to the output for replay.
int cmd_check(const std::string& suite, int trials, std::uint64_t seed,
              const std::string& replay_dir, std::ostream& out);

/// Prints the per-property pass counts of one suite and writes replay files
/// for failures; returns whether the whole suite passed.
bool report_suite(const checks::SuiteResult& suite, const std::string& replay_dir,
                  std::ostream& out);

struct ScheduleArgs {
  double L = 0.0;
  double L_g = 0.0;
  double sigma_g = 0.0;
  double sigma_h = 0.0;
  double a_g = 1.0;
  double a_h = 1.0;
  long T = 1;
  double M = 1.0;
  std::string source = "main_it";
};

int cmd_schedule(const ScheduleArgs& args, std::ostream& out, std::ostream& err);

}  // namespace cubmom::cli
