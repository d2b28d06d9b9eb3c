#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cubmom/cubic.hpp"
#include "cubmom/estimators.hpp"
#include "cubmom/numkit.hpp"
#include "cubmom/problems.hpp"
#include "cubmom/rng.hpp"

namespace cubmom::engine {

using numkit::SymMat;
using numkit::Vec;

enum class Method { kSCNM, kSCNPlain, kSGD };

struct RunConfig {
  long T = 100;
  double M = 1.0;
  estimators::ScheduleSource schedule_source = estimators::ScheduleSource::kManual;
  double alpha = 1.0;  // used when schedule_source == kManual
  double beta = 1.0;
  estimators::GradVariant grad_variant = estimators::GradVariant::kIT;
  int batch_g = 1;
  int batch_h = 1;
  int initial_batch = 1;
  bool split_sampling = false;  // independent samples for gradient and Hessian
  bool exact_oracle = false;    // full gradients/Hessians, deterministic
  std::uint64_t seed = 0;
  Method method = Method::kSCNM;
  double sgd_step = 0.1;          // SGD baseline only
  long record_full_metrics_every = 1;  // cadence of the spectral metrics
  bool output_from_t1 = false;    // draw x_out from t >= 1 instead of t >= 0
  double divergence_threshold = 1e12;
};

/// One row per visited state x_t. Values that are not recorded at a given
/// cadence, or do not exist (estimator errors at t = T), are NaN.
struct IterRecord {
  long t = 0;
  long long oracle_draws = 0;  // cumulative
  double f = 0.0;
  double grad_norm = 0.0;
  double lambda_min = 0.0;
  double mu = 0.0;
  double r = 0.0;          // ||x_{t+1} - x_t||
  double eps_norm = 0.0;   // ||g_t - grad f(x_t)||
  double sigma_norm = 0.0; // spectral ||H_t - hess f(x_t)||
  double gamma = 0.0;
};

struct RunTrace {
  std::vector<IterRecord> records;    // T + 1 rows
  std::vector<Vec> iterates;          // x_0 .. x_T
  long out_index = 0;
  Vec x_out;
  long long total_draws = 0;
  bool aborted = false;
  long abort_t = -1;
  std::string abort_reason;
};

/// Executable form of the one-step progress bound: for x+ the cubic step
/// from (g, H, M),
///   f(x) - f(x+) >= mu_M(x+)/(1008 sqrt(M)) + M r^3/72
///                   - 4 ||eps||^{3/2}/sqrt(M) - 73 ||Sigma||^3/M^2,
/// evaluated with exact full-problem derivatives.
struct StepCheckReport {
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool pass = false;
  double mu_plus = 0.0;
  double r = 0.0;
  double eps_norm = 0.0;
  double sigma_norm = 0.0;
};

/// Stochastic cubic Newton with momentum-averaged gradient and Hessian
/// estimates. Deterministic per (seed, config, problem). x0 defaults to 0.
RunTrace run_scnm(const problems::Problem& problem, const RunConfig& config,
                  const problems::ProblemConstants& constants,
                  const Vec* x0 = nullptr);

/// Stochastic gradient descent baseline sharing the trace schema.
RunTrace run_sgd(const problems::Problem& problem, const RunConfig& config,
                 const Vec* x0 = nullptr);

StepCheckReport check_one_step(const problems::Problem& problem, const Vec& x,
                               const Vec& g, const SymMat& H, double M);

/// Uniform index in [0, T] (or [1, T] when from_t1), deterministic per rng.
long select_output_index(long T, Rng& rng, bool from_t1 = false);

struct GapSeries {
  std::vector<double> gaps;         // f(x_t) - f_star
  std::vector<double> running_min;  // min over 0..t
};

/// Functional gaps against a supplied lower bound; rejects f_star values
/// that any recorded f undercuts by more than 1e-6.
GapSeries convex_gap_series(const RunTrace& trace, double f_star);

/// Reference minimum value: long deterministic full-oracle run, final value
/// minus a small slack.
double estimate_f_star(const problems::Problem& problem, double M,
                       long iters = 500);

}  // namespace cubmom::engine
