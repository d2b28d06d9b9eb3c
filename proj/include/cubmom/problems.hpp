#pragma once

#include <cstdint>
#include <vector>

#include "cubmom/dataio.hpp"
#include "cubmom/numkit.hpp"
#include "cubmom/rng.hpp"

namespace cubmom::problems {

using numkit::SymMat;
using numkit::Vec;

enum class Kind { kLogisticNcvx, kLogisticConvex, kQuadraticSum };

/// Sample indices drawn uniformly with replacement.
struct Batch {
  std::vector<int> indices;
  int size() const { return static_cast<int>(indices.size()); }
};

Batch draw_batch(Rng& rng, int n, int b);
Batch full_batch(int n);  // each index once; exact-oracle helper

struct QuadComponent {
  SymMat A;
  Vec b;
};

/// Smoothness and noise constants consumed by the parameter schedules.
struct ProblemConstants {
  double L = 0.0;        // Hessian Lipschitz
  double L_g = 0.0;      // gradient Lipschitz
  double sigma_g = 0.0;  // gradient sample noise (std)
  double sigma_h = 0.0;  // Hessian sample noise (spectral std)
  double delta_h = 0.0;  // a.s. Hessian deviation bound
  double sigma_g0 = 0.0; // initial-estimate noise levels
  double sigma_h0 = 0.0;

  double a_g() const { return sigma_g > 0.0 ? sigma_g0 / sigma_g : 0.0; }
  double a_h() const { return sigma_h > 0.0 ? sigma_h0 / sigma_h : 0.0; }
};

/// Records the effect of estimating the initial gradient/Hessian from a
/// batch b0 times larger than the per-step batches.
ProblemConstants with_initial_batch(ProblemConstants c, int b0);

/// Finite-sum objective f(x) = (1/n) sum_i f_i(x) with per-sample and full
/// first/second-order oracles. Logistic kinds place the regularizer inside
/// every f_i so that sampling stays unbiased.
class Problem {
 public:
  static Problem logistic(dataio::Dataset ds, Kind kind, double reg_weight,
                          double ridge = 0.0);
  static Problem quadratic(std::vector<QuadComponent> components);

  int dim() const { return dim_; }
  int n_samples() const { return n_; }
  Kind kind() const { return kind_; }
  double reg_weight() const { return reg_weight_; }

  double full_value(const Vec& x) const;
  Vec full_gradient(const Vec& x) const;
  SymMat full_hessian(const Vec& x) const;

  Vec gradient_one(int i, const Vec& x) const;
  SymMat hessian_one(int i, const Vec& x) const;

  Vec sample_gradient(const Vec& x, const Batch& batch) const;
  SymMat sample_hessian(const Vec& x, const Batch& batch) const;

 private:
  Problem() = default;

  Kind kind_ = Kind::kLogisticNcvx;
  int dim_ = 0;
  int n_ = 0;
  double reg_weight_ = 0.0;
  double ridge_ = 0.0;
  numkit::Mat features_;  // n x d, densified rows
  Vec labels_;
  std::vector<QuadComponent> components_;
};

/// Probes the oracles around x0 for (L, L_g) and evaluates the single-sample
/// noise moments exactly over the finite sum; every output carries a 1.5x
/// safety factor. Deterministic per seed.
ProblemConstants estimate_constants(const Problem& p, const Vec& x0, int probes,
                                    std::uint64_t seed);

// Non-convex regularizer sum_j x_j^2 / (1 + x_j^2) and its derivatives.
double reg_value(const Vec& x);
Vec reg_gradient(const Vec& x);
Vec reg_hessian_diag(const Vec& x);

}  // namespace cubmom::problems
