#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>

#include "cubmom/numkit.hpp"
#include "cubmom/problems.hpp"

namespace cubmom::estimators {

using numkit::SymMat;
using numkit::Vec;

enum class GradVariant { kIT, kHB, kMVR, kSOM };
enum class ScheduleSource { kMainIT, kAppendixHB, kAppendixMVR, kAppendixSOM, kManual };

// Two rates are available for the variance-reduced momentum schedule: the
// default 2304 (L_g^2/(M sigma_g))^{6/11} form and the heavy-ball-style
// 18 L_g^{4/5}/(M^{2/5} sigma_g^{2/5}) form.
enum class MvrAlphaRule { kSixElevenths, kFourFifths };

/// Evaluates the gradient of one fresh sample at the given point.
using GradOracle = std::function<Vec(const Vec&)>;
/// Evaluates the gradient of ONE fresh sample at two points (one draw,
/// two evaluations), as the variance-reduced correction requires.
using PairedGradOracle = std::function<std::pair<Vec, Vec>(const Vec&, const Vec&)>;
/// Evaluates the Hessian of one fresh sample at the given point.
using HessOracle = std::function<SymMat(const Vec&)>;

struct GradEstimatorState {
  GradVariant variant = GradVariant::kIT;
  double alpha = 1.0;        // in (0, 1]
  bool time_varying = false; // alpha_t = 1/(t+1): plain running average
  Vec g_prev;
  Vec x_prev;
  long t = 0;  // completed updates; 0 means uninitialized

  GradEstimatorState() = default;
  GradEstimatorState(GradVariant v, double a) : variant(v), alpha(a) {
    if (!(a > 0.0 && a <= 1.0))
      throw std::invalid_argument("gradient momentum alpha must be in (0,1]");
  }
};

struct HessEstimatorState {
  double beta = 1.0;  // in (0, 1]
  SymMat H_prev;
  long t = 0;

  HessEstimatorState() = default;
  explicit HessEstimatorState(double b) : beta(b) {
    if (!(b > 0.0 && b <= 1.0))
      throw std::invalid_argument("Hessian momentum beta must be in (0,1]");
  }
};

/// Implicit-transport momentum: the fresh gradient is evaluated at
/// x_t + ((1-alpha)/alpha) (x_t - x_{t-1}). First call initializes with the
/// plain sample at x_t. Exactly one draw per call.
Vec it_update(GradEstimatorState& state, const Vec& x_t, const GradOracle& oracle);

/// Heavy-ball momentum: exponential average of samples taken at x_t.
Vec hb_grad_update(GradEstimatorState& state, const Vec& x_t, const GradOracle& oracle);

/// Variance-reduced momentum: heavy ball plus the same-sample correction
/// grad_xi(x_t) - grad_xi(x_{t-1}). One draw, two evaluations per call.
Vec mvr_update(GradEstimatorState& state, const Vec& x_t, const PairedGradOracle& oracle);

/// Second-order momentum: heavy ball plus the transport term H_t (x_t - x_{t-1}).
Vec som_update(GradEstimatorState& state, const Vec& x_t, const SymMat& H_t,
               const GradOracle& oracle);

/// Heavy-ball Hessian momentum H_t = (1-beta) H_{t-1} + beta * sample(x_t).
SymMat hb_hess_update(HessEstimatorState& state, const Vec& x_t,
                      const HessOracle& oracle);

struct Schedule {
  double alpha = 1.0;
  double beta = 1.0;
  double M = 1.0;
  long T = 1;
  double a_g = 1.0;
  double a_h = 1.0;
  ScheduleSource source = ScheduleSource::kManual;
};

struct ScheduleError : std::runtime_error {
  double suggested_M;
  ScheduleError(const std::string& what_, double suggested)
      : std::runtime_error(what_), suggested_M(suggested) {}
};

/// Momentum parameters from the problem constants:
///   alpha = max(a_g^{6/7} / T^{4/7}, 10 sqrt(L/M)),
///   beta  = max(a_h^{6/5} / T^{2/5}, 46 L/M)
/// for the main method (requires M >= 100 L); appendix variants use their
/// own stated choices with beta = 1.
Schedule make_schedule(const problems::ProblemConstants& constants, long T,
                       double M, ScheduleSource source,
                       MvrAlphaRule mvr_rule = MvrAlphaRule::kSixElevenths);

/// Left side of the step-size compatibility condition
///   4 sqrt(3) L^{3/2}/alpha^3 + 657 L^3 / (M^{3/2} beta^3) - M^{3/2}/72;
/// nonpositive values certify that momentum bias is absorbed by the step term.
double condition10_lhs(double L, double M, double alpha, double beta);

}  // namespace cubmom::estimators
