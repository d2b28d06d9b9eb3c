// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <vector>

#include "cubmom/checks.hpp"
#include "cubmom/dataio.hpp"
#include "cubmom/engine.hpp"
#include "cubmom/estimators.hpp"
#include "cubmom/experiment.hpp"

using namespace cubmom;
using numkit::Vec;

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kSeed = 20250810;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double median_of(std::vector<double> v) { return cli::median(std::move(v)); }

// Small-signal synthetic logistic data: Gaussian features scaled so that no
// single sample carries enough curvature to dominate a batch-of-one step.
problems::Problem trend_problem() {
  auto ds = dataio::synth_logistic(2000, 50, 42, 0.1);
  for (auto& row : ds.rows)
    for (auto& [j, v] : row) v *= 0.1;
  return problems::Problem::logistic(ds, problems::Kind::kLogisticNcvx, 0.1);
}

engine::RunConfig scnm_config(double M, double alpha, double beta,
                              std::uint64_t seed) {
  engine::RunConfig config;
  config.T = 2000;
  config.M = M;
  config.alpha = alpha;
  config.beta = beta;
  config.batch_g = 1;
  config.batch_h = 1;
  config.initial_batch = 1;
  config.seed = seed;
  config.record_full_metrics_every = 100;
  return config;
}

double final_f(const engine::RunTrace& trace) {
  return trace.aborted ? std::numeric_limits<double>::infinity()
                       : trace.records.back().f;
}

double final_grad(const engine::RunTrace& trace) {
  return trace.aborted ? std::numeric_limits<double>::infinity()
                       : trace.records.back().grad_norm;
}

// shared medians for the Figures-style comparison on one problem instance
struct TrendResult {
  double scnm_grad = 0.0, scn_grad = 0.0;
  double scnm_f = 0.0, sgd_best_f = 0.0;
  double sgd_best_step = 0.0;
};

TrendResult trend_comparison(const problems::Problem& problem,
                             const problems::ProblemConstants& constants,
                             const Vec& x0) {
  const double M = std::max(1.0, constants.L);
  std::vector<double> scnm_grads, scn_grads, scnm_fs;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto config = scnm_config(M, 0.1, 0.01, seed);
    const auto momentum = engine::run_scnm(problem, config, constants, &x0);
    scnm_grads.push_back(final_grad(momentum));
    scnm_fs.push_back(final_f(momentum));

    config.method = engine::Method::kSCNPlain;
    const auto plain = engine::run_scnm(problem, config, constants, &x0);
    scn_grads.push_back(final_grad(plain));
  }

  TrendResult result;
  result.scnm_grad = median_of(scnm_grads);
  result.scn_grad = median_of(scn_grads);
  result.scnm_f = median_of(scnm_fs);

  result.sgd_best_f = std::numeric_limits<double>::infinity();
  for (const double step : {0.01, 0.1, 1.0}) {
    std::vector<double> fs;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      auto config = scnm_config(M, 1.0, 1.0, seed);
      config.method = engine::Method::kSGD;
      config.sgd_step = step;
      fs.push_back(final_f(engine::run_sgd(problem, config, &x0)));
    }
    const double med = median_of(fs);
    if (med < result.sgd_best_f) {
      result.sgd_best_f = med;
      result.sgd_best_step = step;
    }
  }
  return result;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

Outcome from_property(const checks::PropertyResult& prop) {
  Outcome outcome;
  outcome.pass = prop.ok();
  outcome.detail = prop.name + " " + std::to_string(prop.passed) + "/" +
                   std::to_string(prop.total);
  if (!prop.ok() && !prop.failure_replay.empty())
    outcome.detail += " first failure: " + prop.failure_replay;
  return outcome;
}

Outcome criterion1() {
  return from_property(checks::check_certificates(1000, kSeed));
}

Outcome criterion2() {
  return from_property(checks::check_grid_equivalence(100, kSeed));
}

Outcome criterion3() {
  return from_property(checks::check_one_step_inequality(200, kSeed));
}

Outcome criterion4() {
  // 20 generator seeds x 3 momentum values
  return from_property(checks::check_affine_equivalence(60, kSeed));
}

Outcome criterion5() {
  return from_property(checks::check_stationary_variance(100000, kSeed));
}

Outcome criterion6() {
  Outcome outcome;
  problems::ProblemConstants c;
  c.L = c.L_g = 1.0;
  c.sigma_g = c.sigma_g0 = 1.0;
  c.sigma_h = c.sigma_h0 = 1.0;
  const auto schedule = estimators::make_schedule(
      c, 10000, 1e4, estimators::ScheduleSource::kMainIT);
  const double beta_expected = std::pow(10.0, -1.6);
  const bool arithmetic_ok = std::abs(schedule.alpha - 0.1) <= 1e-6 &&
                             std::abs(schedule.beta - beta_expected) <= 1e-6;
  const auto condition = checks::check_schedule_condition(100, kSeed);
  outcome.pass = arithmetic_ok && condition.ok();
  outcome.detail = "alpha=" + num(schedule.alpha) + " beta=" +
                   num(schedule.beta) + ", condition " +
                   std::to_string(condition.passed) + "/" +
                   std::to_string(condition.total);
  return outcome;
}

Outcome criterion7() {
  Outcome outcome;
  const auto problem = trend_problem();
  const auto constants =
      problems::estimate_constants(problem, Vec::Zero(problem.dim()), 32, 977);
  // Start on the regularizer's saturation plateau, where second-order steps
  // pay off and a fixed-step baseline needs the right step size to traverse.
  const Vec x0 = Vec::Ones(problem.dim()) * 3.0;
  const auto synth = trend_comparison(problem, constants, x0);
  bool pass = synth.scnm_grad < synth.scn_grad && synth.scnm_f <= synth.sgd_best_f;
  outcome.detail = "synth: grad " + num(synth.scnm_grad) + " < " +
                   num(synth.scn_grad) + ", f " + num(synth.scnm_f) +
                   " <= sgd(" + num(synth.sgd_best_step) + ") " +
                   num(synth.sgd_best_f);

  if (const char* path = std::getenv("CUBIC_MOMENTUM_DATA")) {
    auto ds = dataio::parse_libsvm_file(path);
    if (ds.n > 2000) ds = dataio::subsample(ds, 2000, 7);
    const auto file_problem =
        problems::Problem::logistic(ds, problems::Kind::kLogisticNcvx, 0.1);
    const auto file_constants = problems::estimate_constants(
        file_problem, Vec::Zero(file_problem.dim()), 32, 977);
    const auto file = trend_comparison(file_problem, file_constants,
                                       Vec::Ones(file_problem.dim()) * 3.0);
    pass = pass && file.scnm_grad < file.scn_grad && file.scnm_f <= file.sgd_best_f;
    outcome.detail += "; libsvm: grad " + num(file.scnm_grad) + " < " +
                      num(file.scn_grad) + ", f " + num(file.scnm_f) +
                      " <= " + num(file.sgd_best_f);
  } else {
    outcome.detail += "; libsvm part skipped (CUBIC_MOMENTUM_DATA unset)";
  }
  outcome.pass = pass;
  return outcome;
}

// Plateau level of a stalled run: median functional gap over the trailing
// quarter of the trace (robust to transient dips).
double plateau_gap(const engine::RunTrace& trace, double f_star) {
  std::vector<double> tail;
  for (std::size_t i = trace.records.size() * 3 / 4; i < trace.records.size();
       ++i)
    tail.push_back(trace.records[i].f - f_star);
  return median_of(std::move(tail));
}

Outcome criterion8() {
  Outcome outcome;
  const auto problem = problems::Problem::logistic(
      dataio::synth_logistic(2000, 5, 43, 0.1), problems::Kind::kLogisticConvex,
      0.0, 1e-3);
  const auto constants =
      problems::estimate_constants(problem, Vec::Zero(problem.dim()), 32, 978);
  const double M = 30.0;
  const double f_star =
      engine::estimate_f_star(problem, std::max(1.5 * constants.L, 1.0));
  const double start_gap = problem.full_value(Vec::Zero(problem.dim())) - f_star;

  std::vector<double> scnm_gaps, scn_plateaus;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto config = scnm_config(M, 0.1, 0.01, seed);
    const auto momentum = engine::run_scnm(problem, config, constants);
    scnm_gaps.push_back(
        engine::convex_gap_series(momentum, f_star).running_min.back());
    config.method = engine::Method::kSCNPlain;
    const auto plain = engine::run_scnm(problem, config, constants);
    scn_plateaus.push_back(plateau_gap(plain, f_star));
  }
  const double scnm_med = median_of(scnm_gaps);
  const double scn_med = median_of(scn_plateaus);
  outcome.pass = scnm_med < 0.5 * scn_med;
  outcome.detail = "running-min gap " + num(scnm_med) + " (start " +
                   num(start_gap) + ") vs plain plateau " + num(scn_med);
  return outcome;
}

Outcome criterion9() {
  Outcome outcome;
  const std::string dir_a = "acceptance_det_a";
  const std::string dir_b = "acceptance_det_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  auto spec = cli::parse_config_text(
      "problem = synth\nsynth.n = 100\nsynth.d = 5\nsynth.seed = 9\n"
      "methods = scnm,scn_plain,sgd\nT = 30\nM = 2\nalpha = 0.1\nbeta = 0.1\n"
      "sgd_step = 0.2\nseeds = 1,2\nout = " + dir_a + "\n");
  cli::run_experiment(spec);
  spec.out_dir = dir_b;
  cli::run_experiment(spec);

  bool identical = true;
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(dir_a)) {
    const auto name = entry.path().filename().string();
    if (name.find(".csv") == std::string::npos) continue;
    std::ifstream a(entry.path(), std::ios::binary);
    std::ifstream b(fs::path(dir_b) / name, std::ios::binary);
    std::ostringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    identical = identical && b.good() && sa.str() == sb.str();
    ++compared;
  }
  outcome.pass = identical && compared == 9;
  outcome.detail = std::to_string(compared) + " CSV files byte-compared";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  return outcome;
}

Outcome criterion10() {
  Outcome outcome;
  const auto data = dataio::synth_logistic(300, 10, 44, 0.1);
  const auto problem = problems::Problem::logistic(
      data, problems::Kind::kLogisticConvex, 0.0, 1e-3);
  const auto constants =
      problems::estimate_constants(problem, Vec::Zero(10), 24, 979);
  double mean_a3 = 0.0;
  for (int i = 0; i < data.n; ++i) {
    double norm2 = 0.0;
    for (const auto& [j, v] : data.rows[i]) norm2 += v * v;
    mean_a3 += std::pow(norm2, 1.5);
  }
  mean_a3 /= data.n;
  const double analytic_L = mean_a3 / (6.0 * std::sqrt(3.0));

  engine::RunConfig config;
  config.T = 100;
  config.M = std::max(1.5 * constants.L, analytic_L);
  config.alpha = 1.0;
  config.beta = 1.0;
  config.exact_oracle = true;
  config.record_full_metrics_every = 100;
  const auto trace = engine::run_scnm(problem, config, constants);

  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t t = 0; t + 1 < trace.records.size(); ++t)
    worst = std::max(worst, trace.records[t + 1].f - trace.records[t].f);
  outcome.pass = !trace.aborted && worst <= 1e-12;
  outcome.detail = "max single-step increase " + num(worst);
  return outcome;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "cubic-solver certificate", 10.0, criterion1},
      {2, "brute-force oracle equivalence", 30.0, criterion2},
      {3, "one-step progress inequality", 30.0, criterion3},
      {4, "affine momentum equivalence", 5.0, criterion4},
      {5, "steady-state estimator variance", 10.0, criterion5},
      {6, "schedule arithmetic", 10.0, criterion6},
      {7, "trend reproduction at desk scale", 300.0, criterion7},
      {8, "batch-one convergence sanity", 180.0, criterion8},
      {9, "seeded determinism", 60.0, criterion9},
      {10, "full-batch descent", 60.0, criterion10},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criterion.run();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    const bool in_budget = elapsed < criterion.budget_seconds;
    const bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    std::ostringstream line;
    line.precision(1);
    line << std::fixed;
    line << (pass ? "PASS" : "FAIL") << " criterion " << criterion.id << " ("
         << criterion.name << ") [" << elapsed << "s";
    if (!in_budget) line << " > budget " << criterion.budget_seconds << "s";
    line << "]: " << outcome.detail;
    std::cout << line.str() << std::endl;
  }
  if (failures > 0) {
    std::cout << failures << " criterion(s) failed" << std::endl;
    return 1;
  }
  std::cout << "all criteria passed" << std::endl;
  return 0;
}
