#include "cubmom/cubic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cubmom::cubic {

namespace {

// ||s(gamma)|| for s(gamma) = -(H + gamma I)^{-1} g in the eigenbasis.
// Zeroed coefficients are skipped so a projected g stays well defined at
// the pole itself.
double step_norm(const Vec& eigenvalues, const Vec& g_hat, double gamma) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (g_hat(i) == 0.0) continue;
    const double denom = eigenvalues(i) + gamma;
    const double c = g_hat(i) / denom;
    sum += c * c;
  }
  return std::sqrt(sum);
}

// d/dgamma ||s(gamma)|| = -sum g_i^2/(lam_i+gamma)^3 / ||s||
double step_norm_derivative(const Vec& eigenvalues, const Vec& g_hat,
                            double gamma, double norm) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < eigenvalues.size(); ++i) {
    if (g_hat(i) == 0.0) continue;
    const double denom = eigenvalues(i) + gamma;
    sum += g_hat(i) * g_hat(i) / (denom * denom * denom);
  }
  return -sum / norm;
}

Vec assemble_step(const numkit::EigDecomp& decomp, const Vec& g_hat,
                  double gamma) {
  const Vec coeffs =
      -(g_hat.array() / (decomp.eigenvalues.array() + gamma)).matrix();
  return decomp.eigenvectors * coeffs;
}

CubicStepResult finish(const CubicModel& model, Vec s, bool hard_case) {
  if (!numkit::is_finite(s))
    throw SubproblemError(0.0, std::numeric_limits<double>::quiet_NaN());
  CubicStepResult result;
  const double norm = s.norm();
  result.gamma = 0.5 * model.M * norm;
  result.residual =
      (model.g + model.H * s + (0.5 * model.M * norm) * s).norm();
  result.model_value = model_value(model, s);
  result.hard_case = hard_case;
  result.s = std::move(s);
  return result;
}

}  // namespace

double model_value(const CubicModel& model, const Vec& s) {
  const double norm = s.norm();
  return model.g.dot(s) + 0.5 * s.dot(model.H * s) +
         model.M / 6.0 * norm * norm * norm;
}

double mu_measure(const Vec& grad, const SymMat& hess, double M) {
  if (M <= 0.0) throw std::invalid_argument("mu_measure: M > 0 required");
  const double gterm = std::pow(grad.norm(), 1.5);
  const double neg = std::max(0.0, -numkit::min_eigenvalue(hess).first);
  return std::max(gterm, neg * neg * neg / std::pow(M, 1.5));
}

CubicStepResult solve_cubic(const CubicModel& model, const SolveOptions& opts) {
  if (model.M <= 0.0) throw std::invalid_argument("solve_cubic: M > 0 required");
  if (!numkit::is_finite(model.g) || !numkit::is_finite(model.H))
    throw std::invalid_argument("solve_cubic: non-finite model");
  const auto d = model.g.size();
  const double g_norm = model.g.norm();

  const numkit::EigDecomp decomp = numkit::sym_eig(model.H);
  const Vec& lam = decomp.eigenvalues;
  const double lam_min = lam(0);
  const double lam_scale = std::max(std::abs(lam(0)), std::abs(lam(d - 1)));
  Vec g_hat = decomp.eigenvectors.transpose() * model.g;

  if (g_norm == 0.0 && lam_min >= 0.0) {
    CubicStepResult result;
    result.s = Vec::Zero(d);
    return result;
  }

  const double gamma_floor = std::max(0.0, -lam_min);

  // Membership in the minimal eigenspace and the size of g inside it.
  const double gap_tol = 1e-10 * std::max(1.0, lam_scale);
  double g_min_sq = 0.0;
  Eigen::Index n_min = 0;
  while (n_min < d && lam(n_min) - lam_min <= gap_tol) {
    g_min_sq += g_hat(n_min) * g_hat(n_min);
    ++n_min;
  }
  const double g_perp_tol = opts.hard_case_tol * std::max(1.0, g_norm);

  if (lam_min < 0.0 && std::sqrt(g_min_sq) <= g_perp_tol) {
    // g is (numerically) orthogonal to the minimal eigenspace: the secular
    // function stays finite at the floor, so the interior root may not exist.
    double p_sq = 0.0;
    for (Eigen::Index i = n_min; i < d; ++i) {
      const double denom = lam(i) + gamma_floor;
      const double c = g_hat(i) / denom;
      p_sq += c * c;
    }
    const double target = 2.0 * gamma_floor / model.M;
    if (std::sqrt(p_sq) <= target) {
      // Hard case: fix gamma at -lambda_min, add a minimal-eigenvector
      // component to reach ||s|| = 2 gamma / M.
      Vec coeffs = Vec::Zero(d);
      for (Eigen::Index i = n_min; i < d; ++i)
        coeffs(i) = -g_hat(i) / (lam(i) + gamma_floor);
      Vec s = decomp.eigenvectors * coeffs;
      const double tau = std::sqrt(std::max(0.0, target * target - p_sq));
      Vec v = decomp.eigenvectors.col(0);
      for (Eigen::Index i = 0; i < d; ++i) {
        if (v(i) != 0.0) {
          if (v(i) < 0.0) v = -v;
          break;
        }
      }
      s += tau * v;
      return finish(model, std::move(s), /*hard_case=*/true);
    }
    // Even the projected step is too long at the floor; an interior root
    // exists. Drop the spurious minimal-eigenspace mass of g for stability.
    for (Eigen::Index i = 0; i < n_min; ++i) g_hat(i) = 0.0;
  }

  // Interior root of phi(gamma) = ||s(gamma)|| - 2 gamma / M, bracketed by
  // [lo, hi] with phi(lo) > 0 > phi(hi), safeguarded Newton inside.
  double lo = gamma_floor + 1e-14 * (1.0 + gamma_floor);
  double hi = std::max(1.0, 2.0 * gamma_floor);
  const auto phi = [&](double gamma) {
    return step_norm(lam, g_hat, gamma) - 2.0 * gamma / model.M;
  };
  int expand = 0;
  while (phi(hi) >= 0.0) {
    hi *= 2.0;
    if (++expand > 400) throw SubproblemError(lo, hi);
  }

  constexpr double kEps = std::numeric_limits<double>::epsilon();
  double gamma = 0.5 * (std::max(lo, hi / 4.0) + hi);
  bool converged = false;
  for (int it = 0; it < opts.max_iters; ++it) {
    const double norm = step_norm(lam, g_hat, gamma);
    const double value = norm - 2.0 * gamma / model.M;
    // stationarity residual of the step assembled at this gamma; the second
    // term is the evaluation noise floor at this scale
    const double tol =
        std::max(0.5 * opts.step_tol_rel * (1.0 + g_norm),
                 32.0 * kEps * std::max(1.0, gamma) * (1.0 + norm));
    if (std::abs(0.5 * model.M * norm - gamma) * norm <= tol) {
      converged = true;
      break;
    }
    if (value > 0.0)
      lo = gamma;
    else
      hi = gamma;
    if (hi - lo <= 8.0 * kEps * std::max(1.0, hi)) {
      // The root is within machine precision of the pole: take the feasible
      // boundary and close the norm gap with a minimal-eigenvector
      // component, as in the genuine hard case.
      gamma = hi;
      Vec s = assemble_step(decomp, g_hat, gamma);
      const double target = 2.0 * gamma / model.M;
      const double s_norm = s.norm();
      if (lam_min < 0.0 && s_norm < target) {
        const double tau =
            std::sqrt(std::max(0.0, target * target - s_norm * s_norm));
        Vec v = decomp.eigenvectors.col(0);
        for (Eigen::Index i = 0; i < d; ++i) {
          if (v(i) != 0.0) {
            if (v(i) < 0.0) v = -v;
            break;
          }
        }
        s += tau * v;
      }
      return finish(model, std::move(s), /*hard_case=*/false);
    }
    const double deriv =
        step_norm_derivative(lam, g_hat, gamma, norm) - 2.0 / model.M;
    double next = gamma - value / deriv;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    gamma = next;
  }
  if (!converged) throw SubproblemError(lo, hi);
  return finish(model, assemble_step(decomp, g_hat, gamma),
                /*hard_case=*/false);
}

}  // namespace cubmom::cubic
