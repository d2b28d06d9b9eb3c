#include "cubmom/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace cubmom::estimators {

namespace {

double effective_alpha(const GradEstimatorState& state) {
  if (state.time_varying) return 1.0 / static_cast<double>(state.t + 1);
  return state.alpha;
}

void advance(GradEstimatorState& state, const Vec& x_t, Vec g_t) {
  state.g_prev = std::move(g_t);
  state.x_prev = x_t;
  ++state.t;
}

}  // namespace

Vec it_update(GradEstimatorState& state, const Vec& x_t, const GradOracle& oracle) {
  if (!oracle) throw std::invalid_argument("it_update: missing gradient oracle");
  if (state.t == 0) {
    Vec g = oracle(x_t);
    advance(state, x_t, g);
    return state.g_prev;
  }
  const double alpha = effective_alpha(state);
  if (alpha <= 0.0)
    throw std::invalid_argument("it_update: alpha must be positive");
  const Vec transported = x_t + ((1.0 - alpha) / alpha) * (x_t - state.x_prev);
  Vec g = (1.0 - alpha) * state.g_prev + alpha * oracle(transported);
  advance(state, x_t, g);
  return state.g_prev;
}

Vec hb_grad_update(GradEstimatorState& state, const Vec& x_t,
                   const GradOracle& oracle) {
  if (!oracle) throw std::invalid_argument("hb_grad_update: missing gradient oracle");
  if (state.t == 0) {
    Vec g = oracle(x_t);
    advance(state, x_t, g);
    return state.g_prev;
  }
  const double alpha = effective_alpha(state);
  Vec g = (1.0 - alpha) * state.g_prev + alpha * oracle(x_t);
  advance(state, x_t, g);
  return state.g_prev;
}

Vec mvr_update(GradEstimatorState& state, const Vec& x_t,
               const PairedGradOracle& oracle) {
  if (!oracle)
    throw std::runtime_error(
        "mvr_update: oracle cannot replay one sample at two points");
  if (state.t == 0) {
    auto [g_here, g_prev_pt] = oracle(x_t, x_t);
    (void)g_prev_pt;
    advance(state, x_t, g_here);
    return state.g_prev;
  }
  const double alpha = effective_alpha(state);
  auto [g_here, g_before] = oracle(x_t, state.x_prev);
  Vec g = (1.0 - alpha) * (state.g_prev + g_here - g_before) + alpha * g_here;
  advance(state, x_t, g);
  return state.g_prev;
}

Vec som_update(GradEstimatorState& state, const Vec& x_t, const SymMat& H_t,
               const GradOracle& oracle) {
  if (!oracle) throw std::invalid_argument("som_update: missing gradient oracle");
  if (state.t == 0) {
    Vec g = oracle(x_t);
    advance(state, x_t, g);
    return state.g_prev;
  }
  const double alpha = effective_alpha(state);
  Vec g = (1.0 - alpha) * (state.g_prev + H_t * (x_t - state.x_prev)) +
          alpha * oracle(x_t);
  advance(state, x_t, g);
  return state.g_prev;
}

SymMat hb_hess_update(HessEstimatorState& state, const Vec& x_t,
                      const HessOracle& oracle) {
  if (!oracle) throw std::invalid_argument("hb_hess_update: missing Hessian oracle");
  if (state.t == 0) {
    state.H_prev = oracle(x_t);
    ++state.t;
    return state.H_prev;
  }
  state.H_prev = (1.0 - state.beta) * state.H_prev + state.beta * oracle(x_t);
  ++state.t;
  return state.H_prev;
}

double condition10_lhs(double L, double M, double alpha, double beta) {
  const double a3 = alpha * alpha * alpha;
  const double b3 = beta * beta * beta;
  return 4.0 * std::sqrt(3.0) * std::pow(L, 1.5) / a3 +
         657.0 * L * L * L / (std::pow(M, 1.5) * b3) - std::pow(M, 1.5) / 72.0;
}

Schedule make_schedule(const problems::ProblemConstants& constants, long T,
                       double M, ScheduleSource source, MvrAlphaRule mvr_rule) {
  if (T < 1) throw std::invalid_argument("make_schedule: T >= 1");
  if (M <= 0.0) throw std::invalid_argument("make_schedule: M > 0");
  const double L = constants.L;
  const double L_g = constants.L_g;
  const double sigma_g = constants.sigma_g;
  const double sigma_h = constants.sigma_h;

  Schedule s;
  s.M = M;
  s.T = T;
  s.a_g = constants.a_g();
  s.a_h = constants.a_h();
  s.source = source;

  const auto clamp_unit = [](double v, const char* name) {
    if (!(v > 0.0))
      throw std::domain_error(std::string("degenerate schedule: ") + name +
                              " evaluates to a nonpositive value");
    return std::min(v, 1.0);
  };

  switch (source) {
    case ScheduleSource::kMainIT: {
      if (M < 100.0 * L)
        throw ScheduleError(
            "main schedule requires M >= 100 L; got M = " + std::to_string(M) +
                ", 100 L = " + std::to_string(100.0 * L),
            100.0 * L);
      const double alpha_noise = std::pow(s.a_g, 6.0 / 7.0) /
                                 std::pow(static_cast<double>(T), 4.0 / 7.0);
      const double alpha_floor = 10.0 * std::sqrt(L / M);
      const double beta_noise = std::pow(s.a_h, 6.0 / 5.0) /
                                std::pow(static_cast<double>(T), 2.0 / 5.0);
      const double beta_floor = 46.0 * L / M;
      s.alpha = clamp_unit(std::max(alpha_noise, alpha_floor), "alpha");
      s.beta = clamp_unit(std::max(beta_noise, beta_floor), "beta");
      break;
    }
    case ScheduleSource::kAppendixHB: {
      s.beta = 1.0;
      if (sigma_g <= 0.0) {
        s.alpha = 1.0;
      } else {
        s.alpha = std::min(
            1.0, 18.0 * std::pow(L_g, 0.8) / (std::pow(M, 0.4) * std::pow(sigma_g, 0.4)));
        s.alpha = clamp_unit(s.alpha, "alpha");
      }
      break;
    }
    case ScheduleSource::kAppendixMVR: {
      s.beta = 1.0;
      if (sigma_g <= 0.0) {
        s.alpha = 1.0;
      } else if (mvr_rule == MvrAlphaRule::kFourFifths) {
        s.alpha = std::min(
            1.0, 18.0 * std::pow(L_g, 0.8) / (std::pow(M, 0.4) * std::pow(sigma_g, 0.4)));
      } else {
        s.alpha = std::min(
            1.0, 2304.0 * std::pow(L_g * L_g / (M * sigma_g), 6.0 / 11.0));
      }
      s.alpha = clamp_unit(s.alpha, "alpha");
      break;
    }
    case ScheduleSource::kAppendixSOM: {
      s.beta = 1.0;
      double gamma_aux = M / 3175.0;
      if (sigma_g > 0.0)
        gamma_aux = std::min(gamma_aux, std::pow(M, 0.6) * std::pow(sigma_h, 0.8) /
                                            std::pow(sigma_g, 0.4));
      s.alpha = clamp_unit(
          std::min(1.0, 3175.0 * std::max(L, gamma_aux) / M), "alpha");
      break;
    }
    case ScheduleSource::kManual:
      throw std::invalid_argument(
          "manual schedules carry explicit alpha/beta; nothing to derive");
  }
  return s;
}

}  // namespace cubmom::estimators
