#include "cubmom/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace cubmom::engine {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct MetricSink {
  const problems::Problem* problem;
  double M;
  long every;

  // Cheap full-oracle metrics (value, gradient) go on every row; the
  // spectral metrics follow the configured cadence.
  void fill(IterRecord& rec, const Vec& x, const Vec* g_est,
            const SymMat* H_est, bool force_spectral) const {
    rec.f = problem->full_value(x);
    const Vec grad = problem->full_gradient(x);
    rec.grad_norm = grad.norm();
    rec.eps_norm = g_est ? (*g_est - grad).norm() : kNaN;
    const bool spectral = force_spectral || (every <= 1) || (rec.t % every == 0);
    if (spectral) {
      const SymMat hess = problem->full_hessian(x);
      rec.lambda_min = numkit::min_eigenvalue(hess).first;
      const double neg = std::max(0.0, -rec.lambda_min);
      rec.mu = std::max(std::pow(rec.grad_norm, 1.5),
                        neg * neg * neg / std::pow(M, 1.5));
      rec.sigma_norm = H_est ? numkit::spectral_norm(*H_est - hess) : kNaN;
    } else {
      rec.lambda_min = kNaN;
      rec.mu = kNaN;
      rec.sigma_norm = kNaN;
    }
  }
};

bool diverged(const problems::Problem& problem, const Vec& x, double f0,
              double threshold, std::string* reason) {
  if (!numkit::is_finite(x)) {
    *reason = "non-finite iterate";
    return true;
  }
  const double f = problem.full_value(x);
  if (!std::isfinite(f) || f > f0 + threshold) {
    *reason = "objective diverged";
    return true;
  }
  return false;
}

void resolve_momentum(const RunConfig& config,
                      const problems::ProblemConstants& constants,
                      double* alpha, double* beta) {
  if (config.method == Method::kSCNPlain) {
    *alpha = 1.0;
    *beta = 1.0;
    return;
  }
  if (config.schedule_source == estimators::ScheduleSource::kManual) {
    *alpha = config.alpha;
    *beta = config.beta;
  } else {
    const auto schedule = estimators::make_schedule(
        constants, config.T, config.M, config.schedule_source);
    *alpha = schedule.alpha;
    *beta = schedule.beta;
  }
}

}  // namespace

RunTrace run_scnm(const problems::Problem& problem, const RunConfig& config,
                  const problems::ProblemConstants& constants, const Vec* x0) {
  if (config.T < 1) throw std::invalid_argument("run: T >= 1");
  if (config.M <= 0.0) throw std::invalid_argument("run: M > 0");
  if (config.batch_g < 1 || config.batch_h < 1 || config.initial_batch < 1)
    throw std::invalid_argument("run: batch sizes >= 1");

  double alpha = 1.0, beta = 1.0;
  resolve_momentum(config, constants, &alpha, &beta);

  const int n = problem.n_samples();
  const int d = problem.dim();
  // Distinct sampling vs. output-selection streams from one user seed.
  Rng batch_rng(config.seed, 1);
  Rng out_rng(config.seed, 2);

  const bool split = config.split_sampling || config.batch_g != config.batch_h;

  RunTrace trace;
  trace.records.reserve(config.T + 1);
  trace.iterates.reserve(config.T + 1);

  Vec x = x0 ? *x0 : Vec::Zero(d);
  const double f0 = problem.full_value(x);

  estimators::GradEstimatorState grad_state(config.grad_variant, alpha);
  estimators::HessEstimatorState hess_state(beta);

  const MetricSink metrics{&problem, config.M, config.record_full_metrics_every};
  long long draws = 0;

  for (long t = 0; t < config.T; ++t) {
    // --- sampling (the only oracle access the algorithm itself sees) ---
    Vec g;
    SymMat H;
    if (config.exact_oracle) {
      draws += n;  // one full pass, shared between gradient and Hessian
      const auto grad_at = [&](const Vec& p) { return problem.full_gradient(p); };
      const auto hess_at = [&](const Vec& p) { return problem.full_hessian(p); };
      const auto pair_at = [&](const Vec& a, const Vec& b) {
        return std::make_pair(problem.full_gradient(a), problem.full_gradient(b));
      };
      H = estimators::hb_hess_update(hess_state, x, hess_at);
      switch (config.grad_variant) {
        case estimators::GradVariant::kIT:
          g = estimators::it_update(grad_state, x, grad_at);
          break;
        case estimators::GradVariant::kHB:
          g = estimators::hb_grad_update(grad_state, x, grad_at);
          break;
        case estimators::GradVariant::kMVR:
          g = estimators::mvr_update(grad_state, x, pair_at);
          break;
        case estimators::GradVariant::kSOM:
          g = estimators::som_update(grad_state, x, H, grad_at);
          break;
      }
    } else {
      // The initial batch is always shared between g_0 and H_0; split
      // sampling applies from t >= 1.
      const int bg = (t == 0) ? config.initial_batch : config.batch_g;
      const problems::Batch batch_grad = problems::draw_batch(batch_rng, n, bg);
      draws += bg;
      problems::Batch batch_hess = batch_grad;
      if (split && t > 0) {
        batch_hess = problems::draw_batch(batch_rng, n, config.batch_h);
        draws += config.batch_h;
      }
      const auto grad_at = [&](const Vec& p) {
        return problem.sample_gradient(p, batch_grad);
      };
      const auto hess_at = [&](const Vec& p) {
        return problem.sample_hessian(p, batch_hess);
      };
      const auto pair_at = [&](const Vec& a, const Vec& b) {
        return std::make_pair(problem.sample_gradient(a, batch_grad),
                              problem.sample_gradient(b, batch_grad));
      };
      H = estimators::hb_hess_update(hess_state, x, hess_at);
      switch (config.grad_variant) {
        case estimators::GradVariant::kIT:
          g = estimators::it_update(grad_state, x, grad_at);
          break;
        case estimators::GradVariant::kHB:
          g = estimators::hb_grad_update(grad_state, x, grad_at);
          break;
        case estimators::GradVariant::kMVR:
          g = estimators::mvr_update(grad_state, x, pair_at);
          break;
        case estimators::GradVariant::kSOM:
          g = estimators::som_update(grad_state, x, H, grad_at);
          break;
      }
    }

    // --- metrics at x_t (full oracle, outside the sample budget) ---
    IterRecord rec;
    rec.t = t;
    rec.oracle_draws = draws;
    metrics.fill(rec, x, &g, &H, /*force_spectral=*/t == 0);

    // --- cubic step ---
    const auto step = cubic::solve_cubic({g, H, config.M});
    rec.r = step.s.norm();
    rec.gamma = step.gamma;

    trace.iterates.push_back(x);
    trace.records.push_back(rec);

    x = x + step.s;
    std::string reason;
    if (diverged(problem, x, f0, config.divergence_threshold, &reason)) {
      trace.aborted = true;
      trace.abort_t = t + 1;
      trace.abort_reason = reason + " at t = " + std::to_string(t + 1);
      break;
    }
  }

  // final state
  IterRecord last;
  last.t = static_cast<long>(trace.records.size());
  last.oracle_draws = draws;
  if (numkit::is_finite(x)) {
    metrics.fill(last, x, nullptr, nullptr, /*force_spectral=*/true);
  } else {
    last.f = last.grad_norm = last.lambda_min = last.mu = kNaN;
    last.eps_norm = last.sigma_norm = kNaN;
  }
  last.r = kNaN;
  last.gamma = kNaN;
  trace.iterates.push_back(x);
  trace.records.push_back(last);

  trace.total_draws = draws;
  const long top = static_cast<long>(trace.iterates.size()) - 1;
  trace.out_index = select_output_index(top, out_rng, config.output_from_t1);
  trace.x_out = trace.iterates[trace.out_index];
  return trace;
}

RunTrace run_sgd(const problems::Problem& problem, const RunConfig& config,
                 const Vec* x0) {
  if (config.T < 1) throw std::invalid_argument("run: T >= 1");
  if (!(config.sgd_step >= 0.0))
    throw std::invalid_argument("run_sgd: step size must be >= 0");
  const int n = problem.n_samples();
  const int d = problem.dim();
  Rng batch_rng(config.seed, 1);
  Rng out_rng(config.seed, 2);

  RunTrace trace;
  trace.records.reserve(config.T + 1);
  trace.iterates.reserve(config.T + 1);

  Vec x = x0 ? *x0 : Vec::Zero(d);
  const double f0 = problem.full_value(x);
  const MetricSink metrics{&problem, config.M, config.record_full_metrics_every};
  long long draws = 0;

  for (long t = 0; t < config.T; ++t) {
    Vec g;
    if (config.exact_oracle) {
      draws += n;
      g = problem.full_gradient(x);
    } else {
      const int bg = (t == 0) ? config.initial_batch : config.batch_g;
      const problems::Batch batch = problems::draw_batch(batch_rng, n, bg);
      draws += bg;
      g = problem.sample_gradient(x, batch);
    }

    IterRecord rec;
    rec.t = t;
    rec.oracle_draws = draws;
    metrics.fill(rec, x, &g, nullptr, /*force_spectral=*/t == 0);

    const Vec step = -config.sgd_step * g;
    rec.r = step.norm();
    rec.gamma = kNaN;

    trace.iterates.push_back(x);
    trace.records.push_back(rec);

    x = x + step;
    std::string reason;
    if (diverged(problem, x, f0, config.divergence_threshold, &reason)) {
      trace.aborted = true;
      trace.abort_t = t + 1;
      trace.abort_reason = reason + " at t = " + std::to_string(t + 1);
      break;
    }
  }

  IterRecord last;
  last.t = static_cast<long>(trace.records.size());
  last.oracle_draws = draws;
  if (numkit::is_finite(x)) {
    metrics.fill(last, x, nullptr, nullptr, /*force_spectral=*/true);
  } else {
    last.f = last.grad_norm = last.lambda_min = last.mu = kNaN;
    last.eps_norm = last.sigma_norm = kNaN;
  }
  last.r = kNaN;
  last.gamma = kNaN;
  trace.iterates.push_back(x);
  trace.records.push_back(last);

  trace.total_draws = draws;
  const long top = static_cast<long>(trace.iterates.size()) - 1;
  trace.out_index = select_output_index(top, out_rng, config.output_from_t1);
  trace.x_out = trace.iterates[trace.out_index];
  return trace;
}

StepCheckReport check_one_step(const problems::Problem& problem, const Vec& x,
                               const Vec& g, const SymMat& H, double M) {
  const auto step = cubic::solve_cubic({g, H, M});
  const Vec x_plus = x + step.s;

  StepCheckReport report;
  report.r = step.s.norm();
  report.lhs = problem.full_value(x) - problem.full_value(x_plus);
  report.mu_plus =
      cubic::mu_measure(problem.full_gradient(x_plus), problem.full_hessian(x_plus), M);
  report.eps_norm = (g - problem.full_gradient(x)).norm();
  report.sigma_norm = numkit::spectral_norm(H - problem.full_hessian(x));

  const double sqrt_M = std::sqrt(M);
  report.rhs = report.mu_plus / (1008.0 * sqrt_M) +
               M * report.r * report.r * report.r / 72.0 -
               4.0 * std::pow(report.eps_norm, 1.5) / sqrt_M -
               73.0 * std::pow(report.sigma_norm, 3.0) / (M * M);
  report.slack = report.lhs - report.rhs;
  report.pass = report.slack >= -1e-9 * (1.0 + std::abs(report.lhs));
  return report;
}

long select_output_index(long T, Rng& rng, bool from_t1) {
  if (T < 0) throw std::invalid_argument("select_output_index: empty trace");
  if (from_t1 && T >= 1) return 1 + rng.below(T);
  return rng.below(T + 1);
}

GapSeries convex_gap_series(const RunTrace& trace, double f_star) {
  GapSeries series;
  series.gaps.reserve(trace.records.size());
  series.running_min.reserve(trace.records.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& rec : trace.records) {
    const double gap = rec.f - f_star;
    if (gap < -1e-6)
      throw std::invalid_argument(
          "convex_gap_series: f_star is not a lower bound (gap " +
          std::to_string(gap) + ")");
    best = std::min(best, gap);
    series.gaps.push_back(gap);
    series.running_min.push_back(best);
  }
  return series;
}

double estimate_f_star(const problems::Problem& problem, double M, long iters) {
  RunConfig config;
  config.T = iters;
  config.M = M;
  config.alpha = 1.0;
  config.beta = 1.0;
  config.exact_oracle = true;
  config.record_full_metrics_every = iters;  // metric cadence irrelevant here
  problems::ProblemConstants constants;
  const RunTrace trace = run_scnm(problem, config, constants);
  return trace.records.back().f - 1e-12;
}

}  // namespace cubmom::engine
