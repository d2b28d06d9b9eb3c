#pragma once

#include <stdexcept>
#include <string>

#include "cubmom/numkit.hpp"

namespace cubmom::cubic {

using numkit::SymMat;
using numkit::Vec;

/// Cubically regularized quadratic model
///   Omega(s) = <g, s> + 1/2 <H s, s> + (M/6) ||s||^3.
struct CubicModel {
  Vec g;
  SymMat H;
  double M = 1.0;
};

/// Certified global minimizer of the model.
///   gamma  = M ||s|| / 2, the shift making H + gamma I psd
///   residual = || g + H s + (M/2)||s|| s ||
struct CubicStepResult {
  Vec s;
  double gamma = 0.0;
  double model_value = 0.0;
  bool hard_case = false;
  double residual = 0.0;
};

struct SolveOptions {
  int max_iters = 200;          // secular root-finder budget
  double step_tol_rel = 1e-8;   // residual <= step_tol_rel * (1 + ||g||)
  double hard_case_tol = 1e-10; // orthogonality threshold for g vs min-eigenspace
};

struct SubproblemError : std::runtime_error {
  double bracket_lo, bracket_hi;
  SubproblemError(double lo, double hi)
      : std::runtime_error("cubic subproblem root-finder did not converge in bracket [" +
                           std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        bracket_lo(lo),
        bracket_hi(hi) {}
};

/// Globally minimizes the model by eigendecomposition plus a safeguarded
/// Newton iteration on the secular equation ||(H + gamma I)^{-1} g|| = 2 gamma / M,
/// falling back to the minimal-eigenvector correction in the hard case.
CubicStepResult solve_cubic(const CubicModel& model, const SolveOptions& opts = {});

double model_value(const CubicModel& model, const Vec& s);

/// Second-order stationarity measure
///   max( ||grad||^{3/2}, max(0, -lambda_min(hess))^3 / M^{3/2} ).
double mu_measure(const Vec& grad, const SymMat& hess, double M);

}  // namespace cubmom::cubic
