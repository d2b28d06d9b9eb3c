#include "cubmom/checks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cubmom/dataio.hpp"
#include "cubmom/estimators.hpp"

namespace cubmom::checks {

namespace {

using cubic::CubicModel;
using cubic::CubicStepResult;
using numkit::SymMat;
using numkit::Vec;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SymMat random_symmetric(Rng& rng, int d, double scale) {
  SymMat H(d, d);
  for (int i = 0; i < d; ++i) {
    H(i, i) = scale * rng.normal();
    for (int j = i + 1; j < d; ++j) {
      const double v = scale * rng.normal();
      H(i, j) = v;
      H(j, i) = v;
    }
  }
  return H;
}

Vec random_vec(Rng& rng, int d, double scale) {
  Vec v(d);
  for (int i = 0; i < d; ++i) v(i) = scale * rng.normal();
  return v;
}

}  // namespace

std::string model_to_json(const CubicModel& model) {
  std::ostringstream os;
  os << "{\"M\":" << fmt(model.M) << ",\"g\":[";
  for (Eigen::Index i = 0; i < model.g.size(); ++i)
    os << (i ? "," : "") << fmt(model.g(i));
  os << "],\"H\":[";
  for (Eigen::Index i = 0; i < model.H.rows(); ++i) {
    os << (i ? ",[" : "[");
    for (Eigen::Index j = 0; j < model.H.cols(); ++j)
      os << (j ? "," : "") << fmt(model.H(i, j));
    os << "]";
  }
  os << "]}";
  return os.str();
}

CubicModel random_model(Rng& rng, int d, double M) {
  return CubicModel{random_vec(rng, d, 1.0), random_symmetric(rng, d, 1.0), M};
}

CubicModel hard_case_model(Rng& rng, int d, double M) {
  // Orthonormal basis from a QR factorization of a random matrix.
  numkit::Mat raw(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) raw(i, j) = rng.normal();
  const numkit::Mat Q = Eigen::HouseholderQR<numkit::Mat>(raw).householderQ();

  const int multiplicity = (d >= 3 && rng.uniform01() < 0.3) ? 2 : 1;
  const double lam_min = -(0.5 + rng.uniform01());
  Vec lam(d);
  for (int i = 0; i < d; ++i)
    lam(i) = (i < multiplicity) ? lam_min : lam_min + 0.2 + 2.5 * rng.uniform01();
  SymMat H = Q * lam.asDiagonal() * Q.transpose();
  numkit::symmetrize(H);

  // g lives strictly outside the minimal eigenspace, scaled so the
  // pseudo-inverse step stays short of 2 gamma / M.
  Vec coeff = Vec::Zero(d);
  for (int i = multiplicity; i < d; ++i) coeff(i) = rng.normal();
  double p_norm = 0.0;
  for (int i = multiplicity; i < d; ++i) {
    const double c = coeff(i) / (lam(i) - lam_min);
    p_norm += c * c;
  }
  p_norm = std::sqrt(p_norm);
  const double target = 2.0 * (-lam_min) / M;
  double scale = 0.0;
  if (p_norm > 0.0 && rng.uniform01() > 0.15)  // keep some g = 0 instances
    scale = (0.1 + 0.8 * rng.uniform01()) * target / p_norm;
  return CubicModel{Q * (scale * coeff), H, M};
}

double grid_min_model_value(const CubicModel& model, double half_width,
                            int points_per_axis) {
  const int d = static_cast<int>(model.g.size());
  if (d < 1 || d > 2)
    throw std::invalid_argument("grid oracle supports d in {1, 2}");
  const auto value = [&](double a, double b) {
    Vec s(d);
    s(0) = a;
    if (d == 2) s(1) = b;
    return cubic::model_value(model, s);
  };

  const auto scan = [&](double cx, double cy, double hw, int pts, double* bx,
                        double* by) {
    const double step = 2.0 * hw / (pts - 1);
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < pts; ++i) {
      const double a = cx - hw + i * step;
      if (d == 1) {
        const double v = value(a, 0.0);
        if (v < best) {
          best = v;
          *bx = a;
          *by = 0.0;
        }
        continue;
      }
      for (int j = 0; j < pts; ++j) {
        const double b = cy - hw + j * step;
        const double v = value(a, b);
        if (v < best) {
          best = v;
          *bx = a;
          *by = b;
        }
      }
    }
    return best;
  };

  double bx = 0.0, by = 0.0;
  scan(0.0, 0.0, half_width, points_per_axis, &bx, &by);
  // one refinement pass around the best cell
  const double cell = 2.0 * half_width / (points_per_axis - 1);
  double rx = bx, ry = by;
  return scan(bx, by, cell, 41, &rx, &ry);
}

PropertyResult check_certificates(int trials, std::uint64_t seed) {
  PropertyResult result;
  result.name = "optimality-certificate";
  Rng rng(seed, 11);
  const double m_choices[] = {0.1, 1.0, 10.0};
  // constructed hard-case instances form part of the trial count
  const int hard_cases = std::min(trials / 2, std::max(50, trials / 10));
  const int randoms = trials - hard_cases;
  result.total = trials;
  for (int k = 0; k < result.total; ++k) {
    const int d = 1 + static_cast<int>(rng.below(20));
    const double M = m_choices[rng.below(3)];
    const CubicModel model = (k < randoms)
                                 ? random_model(rng, d, M)
                                 : hard_case_model(rng, std::max(d, 2), M);
    const CubicStepResult step = cubic::solve_cubic(model);
    const double g_norm = model.g.norm();
    const double lam_min = numkit::min_eigenvalue(model.H).first;
    const bool gamma_ok =
        std::abs(step.gamma - 0.5 * model.M * step.s.norm()) <=
        1e-10 * std::max(1.0, step.gamma);
    const bool shift_ok = lam_min + step.gamma >= -1e-8;
    const bool residual_ok = step.residual <= 1e-8 * (1.0 + g_norm);
    const bool value_ok = step.model_value <= 1e-12;
    if (gamma_ok && shift_ok && residual_ok && value_ok) {
      ++result.passed;
    } else if (result.failure_replay.empty()) {
      result.failure_replay = model_to_json(model);
    }
  }
  return result;
}

PropertyResult check_grid_equivalence(int trials, std::uint64_t seed) {
  PropertyResult result;
  result.name = "grid-oracle-equivalence";
  result.total = trials;
  Rng rng(seed, 12);
  for (int k = 0; k < trials; ++k) {
    const int d = (k % 3 == 0) ? 1 : 2;
    const double M = (k % 5 == 0) ? 10.0 : (k % 2 == 0 ? 3.0 : 1.0);
    CubicModel model = random_model(rng, d, M);
    // grow M until the analytic step bound fits inside the grid box
    const double h_norm = numkit::spectral_norm(model.H);
    const double g_norm = model.g.norm();
    while ((h_norm + std::sqrt(h_norm * h_norm + 2.0 * model.M * g_norm)) /
               model.M >
           4.5)
      model.M *= 1.5;
    const CubicStepResult step = cubic::solve_cubic(model);
    const double oracle = grid_min_model_value(model, 5.0, 2001);
    if (std::abs(step.model_value - oracle) <= 1e-3) {
      ++result.passed;
    } else if (result.failure_replay.empty()) {
      result.failure_replay = model_to_json(model);
    }
  }
  return result;
}

PropertyResult check_decrease_scaling(int trials, std::uint64_t seed) {
  PropertyResult result;
  result.name = "decrease-and-scaling";
  result.total = trials;
  Rng rng(seed, 13);
  for (int k = 0; k < trials; ++k) {
    const int d = 1 + static_cast<int>(rng.below(8));
    CubicModel model = random_model(rng, d, 0.5 + 2.0 * rng.uniform01());
    const CubicStepResult step = cubic::solve_cubic(model);
    bool ok = step.model_value <= 1e-12;
    const double lam_min = numkit::min_eigenvalue(model.H).first;
    if (model.g.norm() > 1e-9 || lam_min < -1e-9)
      ok = ok && step.model_value < 0.0;
    // argmin invariance under (c g, c H, c M)
    const double c = 0.25 + 4.0 * rng.uniform01();
    CubicModel scaled{c * model.g, c * model.H, c * model.M};
    const CubicStepResult step_scaled = cubic::solve_cubic(scaled);
    ok = ok && (step.s - step_scaled.s).norm() <= 1e-7 * (1.0 + step.s.norm());
    if (ok) {
      ++result.passed;
    } else if (result.failure_replay.empty()) {
      result.failure_replay = model_to_json(model);
    }
  }
  return result;
}

PropertyResult check_one_step_inequality(int trials, std::uint64_t seed) {
  PropertyResult result;
  result.name = "one-step-progress";
  result.total = trials;
  Rng rng(seed, 21);

  const int d = 5;
  std::vector<problems::QuadComponent> comps;
  for (int i = 0; i < 8; ++i)
    comps.push_back({random_symmetric(rng, d, 1.0), random_vec(rng, d, 1.0)});
  const auto quad = problems::Problem::quadratic(comps);

  const auto data = dataio::synth_logistic(60, d, seed + 7, 0.1);
  const auto logistic =
      problems::Problem::logistic(data, problems::Kind::kLogisticNcvx, 0.1);
  const auto constants =
      problems::estimate_constants(logistic, Vec::Zero(d), 24, seed + 9);
  // analytic Hessian-Lipschitz bound for this family: per-sample
  // max |sigmoid''| = 1/(6 sqrt(3)) times ||a||^3, plus a grid bound on the
  // regularizer's third derivative
  double reg_d3 = 0.0;
  for (int i = 0; i <= 4000; ++i) {
    const double x = -10.0 + i * 0.005;
    const double q = 1.0 + x * x;
    reg_d3 =
        std::max(reg_d3, std::abs(24.0 * x * (x * x - 1.0)) / (q * q * q * q));
  }
  double mean_a3 = 0.0;
  for (int i = 0; i < data.n; ++i) {
    double norm2 = 0.0;
    for (const auto& [j, v] : data.rows[i]) norm2 += v * v;
    mean_a3 += std::pow(norm2, 1.5);
  }
  mean_a3 /= data.n;
  const double L_logistic = mean_a3 / (6.0 * std::sqrt(3.0)) + 0.1 * reg_d3;
  const double M_logistic = std::max(1.5 * constants.L, L_logistic);

  const double m_choices[] = {0.1, 1.0, 10.0};
  for (int k = 0; k < trials; ++k) {
    const bool use_quad = (k % 2 == 0);
    const problems::Problem& p = use_quad ? quad : logistic;
    const double M = use_quad ? m_choices[rng.below(3)] : M_logistic;
    const Vec x = random_vec(rng, d, use_quad ? 2.0 : 1.0);
    Vec g = p.full_gradient(x);
    SymMat H = p.full_hessian(x);
    if (k >= trials / 2) {
      // corrupted oracle at log-spaced noise scales
      const double scale = std::pow(10.0, -4.0 + (k % 10) * 0.75);
      g += random_vec(rng, d, scale);
      H += random_symmetric(rng, d, scale);
    }
    const auto report = engine::check_one_step(p, x, g, H, M);
    if (report.pass) {
      ++result.passed;
    } else if (result.failure_replay.empty()) {
      std::ostringstream os;
      os << "{\"problem\":\"" << (use_quad ? "quadratic" : "logistic")
         << "\",\"M\":" << fmt(M) << ",\"lhs\":" << fmt(report.lhs)
         << ",\"rhs\":" << fmt(report.rhs) << ",\"x\":[";
      for (int j = 0; j < d; ++j) os << (j ? "," : "") << fmt(x(j));
      os << "]}";
      result.failure_replay = os.str();
    }
  }
  return result;
}

PropertyResult check_affine_equivalence(int instances, std::uint64_t seed) {
  PropertyResult result;
  result.name = "affine-equivalence";
  result.total = instances;
  Rng rng(seed, 31);
  const double alphas[] = {0.1, 0.5, 0.9};
  for (int k = 0; k < instances; ++k) {
    const int d = 4;
    const int n = 12;
    const SymMat A = random_symmetric(rng, d, 1.0);
    std::vector<problems::QuadComponent> comps;
    for (int i = 0; i < n; ++i) comps.push_back({A, random_vec(rng, d, 1.0)});
    const auto p = problems::Problem::quadratic(comps);
    const double alpha = alphas[k % 3];

    estimators::GradEstimatorState it_state(estimators::GradVariant::kIT, alpha);
    estimators::GradEstimatorState mvr_state(estimators::GradVariant::kMVR, alpha);
    estimators::GradEstimatorState som_state(estimators::GradVariant::kSOM, alpha);
    Vec x = random_vec(rng, d, 1.0);
    double max_dev = 0.0;
    for (int t = 0; t < 50; ++t) {
      const int idx = static_cast<int>(rng.below(n));
      const auto draw = [&](const Vec& pt) { return p.gradient_one(idx, pt); };
      const auto draw_pair = [&](const Vec& a, const Vec& b) {
        return std::make_pair(p.gradient_one(idx, a), p.gradient_one(idx, b));
      };
      const Vec g_it = estimators::it_update(it_state, x, draw);
      const Vec g_mvr = estimators::mvr_update(mvr_state, x, draw_pair);
      const Vec g_som = estimators::som_update(som_state, x, A, draw);
      max_dev = std::max(max_dev, (g_it - g_mvr).norm());
      max_dev = std::max(max_dev, (g_it - g_som).norm());
      x += random_vec(rng, d, 0.2);
    }
    if (max_dev <= 1e-12)
      ++result.passed;
    else if (result.failure_replay.empty())
      result.failure_replay = "{\"max_dev\":" + fmt(max_dev) + "}";
  }
  return result;
}

PropertyResult check_unit_collapse(int instances, std::uint64_t seed) {
  PropertyResult result;
  result.name = "unit-momentum-collapse";
  result.total = instances;
  Rng rng(seed, 32);
  for (int k = 0; k < instances; ++k) {
    const int d = 3;
    estimators::GradEstimatorState gs(estimators::GradVariant::kIT, 1.0);
    estimators::HessEstimatorState hs(1.0);
    Vec x = random_vec(rng, d, 1.0);
    bool ok = true;
    Vec last_sample;
    SymMat last_hess;
    for (int t = 0; t < 10; ++t) {
      const auto draw = [&](const Vec& pt) {
        last_sample = pt + random_vec(rng, d, 1.0);
        return last_sample;
      };
      const auto hdraw = [&](const Vec&) {
        last_hess = random_symmetric(rng, d, 1.0);
        return last_hess;
      };
      const Vec g = estimators::it_update(gs, x, draw);
      const SymMat H = estimators::hb_hess_update(hs, x, hdraw);
      ok = ok && (g - last_sample).norm() == 0.0 && (H - last_hess).norm() == 0.0;
      x += random_vec(rng, d, 0.5);
    }
    if (ok) ++result.passed;
  }
  return result;
}

PropertyResult check_stationary_variance(long steps, std::uint64_t seed) {
  PropertyResult result;
  result.name = "stationary-variance";
  result.total = 2;  // HB and IT
  const double alpha = 0.1;
  for (int variant = 0; variant < 2; ++variant) {
    Rng noise(seed + variant, 41);
    estimators::GradEstimatorState state(
        variant == 0 ? estimators::GradVariant::kHB : estimators::GradVariant::kIT,
        alpha);
    const Vec x = Vec::Zero(1);
    const double mean = 3.0;
    const auto draw = [&](const Vec&) {
      Vec v(1);
      v(0) = mean + noise.normal();
      return v;
    };
    double acc = 0.0;
    long counted = 0;
    const long burn_in = 1000;
    for (long t = 0; t < steps + burn_in; ++t) {
      const Vec g = variant == 0 ? estimators::hb_grad_update(state, x, draw)
                                 : estimators::it_update(state, x, draw);
      if (t >= burn_in) {
        const double dev = g(0) - mean;
        acc += dev * dev;
        ++counted;
      }
    }
    const double expected = alpha / (2.0 - alpha);
    const double observed = acc / counted;
    if (std::abs(observed - expected) <= 0.10 * expected)
      ++result.passed;
    else if (result.failure_replay.empty())
      result.failure_replay = "{\"observed\":" + fmt(observed) +
                              ",\"expected\":" + fmt(expected) + "}";
  }
  return result;
}

PropertyResult check_draw_accounting() {
  PropertyResult result;
  result.name = "oracle-draw-accounting";
  result.total = 1;
  const int d = 2;
  int draws = 0, evals = 0;
  const auto draw = [&](const Vec& pt) {
    ++draws;
    ++evals;
    return Vec(pt);
  };
  const auto draw_pair = [&](const Vec& a, const Vec& b) {
    ++draws;
    evals += 2;
    return std::make_pair(Vec(a), Vec(b));
  };
  const auto hdraw = [&](const Vec&) {
    ++draws;
    ++evals;
    return SymMat(SymMat::Identity(d, d));
  };
  estimators::GradEstimatorState it_state(estimators::GradVariant::kIT, 0.5);
  estimators::GradEstimatorState hb_state(estimators::GradVariant::kHB, 0.5);
  estimators::GradEstimatorState mvr_state(estimators::GradVariant::kMVR, 0.5);
  estimators::GradEstimatorState som_state(estimators::GradVariant::kSOM, 0.5);
  estimators::HessEstimatorState hess_state(0.5);
  bool ok = true;
  Vec x = Vec::Zero(d);
  for (int t = 0; t < 5; ++t) {
    draws = evals = 0;
    estimators::it_update(it_state, x, draw);
    ok = ok && draws == 1 && evals == 1;
    draws = evals = 0;
    estimators::hb_grad_update(hb_state, x, draw);
    ok = ok && draws == 1 && evals == 1;
    draws = evals = 0;
    estimators::som_update(som_state, x, SymMat::Identity(d, d), draw);
    ok = ok && draws == 1 && evals == 1;
    draws = evals = 0;
    estimators::mvr_update(mvr_state, x, draw_pair);
    ok = ok && draws == 1 && evals == 2;
    draws = evals = 0;
    estimators::hb_hess_update(hess_state, x, hdraw);
    ok = ok && draws == 1 && evals == 1;
    x.array() += 0.5;
  }
  if (ok) ++result.passed;
  return result;
}

PropertyResult check_schedule_condition(int trials, std::uint64_t seed) {
  PropertyResult result;
  result.name = "schedule-condition";
  result.total = trials;
  Rng rng(seed, 33);
  for (int k = 0; k < trials; ++k) {
    problems::ProblemConstants c;
    c.L = std::pow(10.0, -2.0 + 4.0 * rng.uniform01());
    c.L_g = c.L;
    c.sigma_g = c.sigma_g0 = 1.0;
    c.sigma_h = c.sigma_h0 = 1.0;
    const double M = (100.0 + 900.0 * rng.uniform01()) * c.L;
    const long T = 1 + static_cast<long>(rng.below(100000));
    const auto s =
        estimators::make_schedule(c, T, M, estimators::ScheduleSource::kMainIT);
    const bool in_range =
        s.alpha > 0.0 && s.alpha <= 1.0 && s.beta > 0.0 && s.beta <= 1.0;
    const bool cond = estimators::condition10_lhs(c.L, M, s.alpha, s.beta) <= 0.0;
    if (in_range && cond)
      ++result.passed;
    else if (result.failure_replay.empty())
      result.failure_replay = "{\"L\":" + fmt(c.L) + ",\"M\":" + fmt(M) +
                              ",\"T\":" + std::to_string(T) + "}";
  }
  return result;
}

SuiteResult run_cubic_suite(int trials, std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "cubic";
  suite.properties.push_back(check_certificates(trials, seed));
  suite.properties.push_back(check_grid_equivalence(std::min(trials, 100), seed));
  suite.properties.push_back(check_decrease_scaling(std::min(trials, 200), seed));
  return suite;
}

SuiteResult run_step_suite(int trials, std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "step";
  suite.properties.push_back(check_one_step_inequality(trials, seed));
  return suite;
}

SuiteResult run_estimator_suite(int trials, std::uint64_t seed) {
  SuiteResult suite;
  suite.suite = "estimators";
  suite.properties.push_back(
      check_affine_equivalence(std::max(1, trials / 10), seed));
  suite.properties.push_back(check_unit_collapse(std::max(1, trials / 10), seed));
  suite.properties.push_back(check_stationary_variance(100000, seed));
  suite.properties.push_back(check_draw_accounting());
  suite.properties.push_back(
      check_schedule_condition(std::max(1, trials / 2), seed));
  return suite;
}

}  // namespace cubmom::checks
