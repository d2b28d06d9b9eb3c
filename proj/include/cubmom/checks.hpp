#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cubmom/cubic.hpp"
#include "cubmom/engine.hpp"
#include "cubmom/rng.hpp"

namespace cubmom::checks {

struct PropertyResult {
  std::string name;
  int passed = 0;
  int total = 0;
  std::string failure_replay;  // JSON for the first failing instance, if any
  bool ok() const { return passed == total; }
};

struct SuiteResult {
  std::string suite;
  std::vector<PropertyResult> properties;
  bool ok() const {
    for (const auto& p : properties)
      if (!p.ok()) return false;
    return true;
  }
};

/// Subproblem-solver suite: optimality certificates on random and
/// constructed hard-case instances, brute-force grid equivalence for d <= 2,
/// model-decrease sign, scaling covariance.
SuiteResult run_cubic_suite(int trials, std::uint64_t seed);

/// One-step progress inequality across exact and corrupted oracle instances
/// on quadratic and logistic problems.
SuiteResult run_step_suite(int trials, std::uint64_t seed);

/// Momentum-estimator suite: affine equivalence of the three corrected
/// momenta, collapse at alpha = beta = 1, stationary variance, oracle draw
/// accounting, and schedule arithmetic.
SuiteResult run_estimator_suite(int trials, std::uint64_t seed);

// Individual properties, also composed into the suites above.
PropertyResult check_certificates(int trials, std::uint64_t seed);
PropertyResult check_grid_equivalence(int trials, std::uint64_t seed);
PropertyResult check_decrease_scaling(int trials, std::uint64_t seed);
PropertyResult check_one_step_inequality(int trials, std::uint64_t seed);
PropertyResult check_affine_equivalence(int instances, std::uint64_t seed);
PropertyResult check_unit_collapse(int instances, std::uint64_t seed);
PropertyResult check_stationary_variance(long steps, std::uint64_t seed);
PropertyResult check_draw_accounting();
PropertyResult check_schedule_condition(int trials, std::uint64_t seed);

// --- reference helpers (independent of the solver code paths) ---

/// Minimum of the cubic model over a centered grid with one local
/// refinement pass around the best cell.
double grid_min_model_value(const cubic::CubicModel& model, double half_width,
                            int points_per_axis);

cubic::CubicModel random_model(Rng& rng, int d, double M);

/// Instance with g orthogonal to the minimal eigenspace and a short
/// pseudo-inverse step, so the minimal-eigenvector correction is required.
cubic::CubicModel hard_case_model(Rng& rng, int d, double M);

std::string model_to_json(const cubic::CubicModel& model);

}  // namespace cubmom::checks
