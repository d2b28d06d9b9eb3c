#include "cubmom/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cubmom::problems {

namespace {

// log(1 + exp(t)), overflow-safe
double log_one_exp(double t) {
  return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

}  // namespace

Batch draw_batch(Rng& rng, int n, int b) {
  if (n < 1 || b < 1) throw std::invalid_argument("draw_batch: n, b >= 1");
  Batch batch;
  batch.indices.resize(b);
  for (int i = 0; i < b; ++i)
    batch.indices[i] = static_cast<int>(rng.below(n));
  return batch;
}

Batch full_batch(int n) {
  Batch batch;
  batch.indices.resize(n);
  for (int i = 0; i < n; ++i) batch.indices[i] = i;
  return batch;
}

ProblemConstants with_initial_batch(ProblemConstants c, int b0) {
  if (b0 < 1) throw std::invalid_argument("initial batch must be >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(b0));
  c.sigma_g0 = c.sigma_g * scale;
  c.sigma_h0 = c.sigma_h * scale;
  return c;
}

double reg_value(const Vec& x) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    s += x(j) * x(j) / (1.0 + x(j) * x(j));
  return s;
}

Vec reg_gradient(const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double q = 1.0 + x(j) * x(j);
    g(j) = 2.0 * x(j) / (q * q);
  }
  return g;
}

Vec reg_hessian_diag(const Vec& x) {
  Vec h(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double x2 = x(j) * x(j);
    const double q = 1.0 + x2;
    h(j) = (2.0 - 6.0 * x2) / (q * q * q);
  }
  return h;
}

Problem Problem::logistic(dataio::Dataset ds, Kind kind, double reg_weight,
                          double ridge) {
  if (kind == Kind::kQuadraticSum)
    throw std::invalid_argument("logistic constructor given quadratic kind");
  if (reg_weight < 0.0 || ridge < 0.0)
    throw std::invalid_argument("regularizer weights must be >= 0");
  if (kind == Kind::kLogisticConvex && reg_weight != 0.0)
    throw std::invalid_argument("convex logistic has no non-convex regularizer");
  Problem p;
  p.kind_ = kind;
  p.dim_ = ds.d;
  p.n_ = ds.n;
  p.reg_weight_ = reg_weight;
  p.ridge_ = ridge;
  p.features_ = numkit::Mat::Zero(ds.n, ds.d);
  p.labels_ = Vec(ds.n);
  for (int i = 0; i < ds.n; ++i) {
    if (ds.labels[i] != 1.0 && ds.labels[i] != -1.0)
      throw std::invalid_argument("labels must be +/-1");
    p.labels_(i) = ds.labels[i];
    for (const auto& [j, v] : ds.rows[i]) {
      if (j < 0 || j >= ds.d)
        throw std::invalid_argument("feature index out of range");
      p.features_(i, j) = v;
    }
  }
  if (!numkit::is_finite(p.features_))
    throw std::invalid_argument("non-finite feature value");
  return p;
}

Problem Problem::quadratic(std::vector<QuadComponent> components) {
  if (components.empty())
    throw std::invalid_argument("quadratic problem needs >= 1 component");
  Problem p;
  p.kind_ = Kind::kQuadraticSum;
  p.n_ = static_cast<int>(components.size());
  p.dim_ = static_cast<int>(components[0].b.size());
  for (const auto& c : components) {
    if (c.A.rows() != p.dim_ || c.A.cols() != p.dim_ || c.b.size() != p.dim_)
      throw std::invalid_argument("inconsistent quadratic component dimensions");
    if (c.A != c.A.transpose())
      throw std::invalid_argument("quadratic component matrix must be symmetric");
    if (!numkit::is_finite(c.A) || !numkit::is_finite(c.b))
      throw std::invalid_argument("non-finite quadratic component");
  }
  p.components_ = std::move(components);
  return p;
}

double Problem::full_value(const Vec& x) const {
  if (kind_ == Kind::kQuadraticSum) {
    double s = 0.0;
    for (const auto& c : components_)
      s += 0.5 * x.dot(c.A * x) + c.b.dot(x);
    return s / n_;
  }
  const Vec margins = features_ * x;
  double loss = 0.0;
  for (int i = 0; i < n_; ++i)
    loss += log_one_exp(-labels_(i) * margins(i));
  loss /= n_;
  if (reg_weight_ > 0.0) loss += reg_weight_ * reg_value(x);
  if (ridge_ > 0.0) loss += 0.5 * ridge_ * x.squaredNorm();
  return loss;
}

Vec Problem::full_gradient(const Vec& x) const {
  if (kind_ == Kind::kQuadraticSum) {
    Vec g = Vec::Zero(dim_);
    for (const auto& c : components_) g += c.A * x + c.b;
    return g / n_;
  }
  const Vec margins = features_ * x;
  Vec weights(n_);
  for (int i = 0; i < n_; ++i)
    weights(i) = -labels_(i) * sigmoid(-labels_(i) * margins(i));
  Vec g = (features_.transpose() * weights) / n_;
  if (reg_weight_ > 0.0) g += reg_weight_ * reg_gradient(x);
  if (ridge_ > 0.0) g += ridge_ * x;
  return g;
}

SymMat Problem::full_hessian(const Vec& x) const {
  if (kind_ == Kind::kQuadraticSum) {
    SymMat H = SymMat::Zero(dim_, dim_);
    for (const auto& c : components_) H += c.A;
    return H / n_;
  }
  const Vec margins = features_ * x;
  Vec weights(n_);
  for (int i = 0; i < n_; ++i) {
    const double s = sigmoid(margins(i));
    weights(i) = s * (1.0 - s) / n_;
  }
  SymMat H = features_.transpose() * weights.asDiagonal() * features_;
  numkit::symmetrize(H);
  if (reg_weight_ > 0.0)
    H.diagonal() += reg_weight_ * reg_hessian_diag(x);
  if (ridge_ > 0.0)
    H.diagonal().array() += ridge_;
  return H;
}

Vec Problem::gradient_one(int i, const Vec& x) const {
  if (kind_ == Kind::kQuadraticSum)
    return components_[i].A * x + components_[i].b;
  const double margin = features_.row(i).dot(x);
  const double w = -labels_(i) * sigmoid(-labels_(i) * margin);
  Vec g = w * features_.row(i).transpose();
  if (reg_weight_ > 0.0) g += reg_weight_ * reg_gradient(x);
  if (ridge_ > 0.0) g += ridge_ * x;
  return g;
}

SymMat Problem::hessian_one(int i, const Vec& x) const {
  if (kind_ == Kind::kQuadraticSum) return components_[i].A;
  const double margin = features_.row(i).dot(x);
  const double s = sigmoid(margin);
  SymMat H = (s * (1.0 - s)) * (features_.row(i).transpose() * features_.row(i));
  if (reg_weight_ > 0.0)
    H.diagonal() += reg_weight_ * reg_hessian_diag(x);
  if (ridge_ > 0.0)
    H.diagonal().array() += ridge_;
  return H;
}

Vec Problem::sample_gradient(const Vec& x, const Batch& batch) const {
  if (batch.size() < 1) throw std::invalid_argument("empty batch");
  Vec g = Vec::Zero(dim_);
  for (int i : batch.indices) {
    if (i < 0 || i >= n_) throw std::invalid_argument("batch index out of range");
    g += gradient_one(i, x);
  }
  return g / batch.size();
}

SymMat Problem::sample_hessian(const Vec& x, const Batch& batch) const {
  if (batch.size() < 1) throw std::invalid_argument("empty batch");
  SymMat H = SymMat::Zero(dim_, dim_);
  for (int i : batch.indices) {
    if (i < 0 || i >= n_) throw std::invalid_argument("batch index out of range");
    H += hessian_one(i, x);
  }
  return H / batch.size();
}

ProblemConstants estimate_constants(const Problem& p, const Vec& x0, int probes,
                                    std::uint64_t seed) {
  if (probes < 2) throw std::invalid_argument("estimate_constants: probes >= 2");
  Rng rng(seed, /*stream=*/303);
  const int d = p.dim();
  const int n = p.n_samples();

  // Hessian-Lipschitz and gradient-Lipschitz probes in a ball around x0.
  std::vector<Vec> points;
  points.reserve(probes);
  points.push_back(x0);
  for (int k = 1; k < probes; ++k) {
    Vec x(d);
    for (int j = 0; j < d; ++j) x(j) = rng.normal();
    points.push_back(x0 + x);
  }
  double L = 0.0, L_g = 0.0;
  std::vector<SymMat> hessians;
  hessians.reserve(probes);
  for (const auto& x : points) hessians.push_back(p.full_hessian(x));
  for (int a = 0; a < probes; ++a) {
    L_g = std::max(L_g, numkit::spectral_norm(hessians[a]));
    for (int b = a + 1; b < probes; ++b) {
      const double dist = (points[a] - points[b]).norm();
      if (dist < 1e-12) continue;
      L = std::max(L, numkit::spectral_norm(hessians[a] - hessians[b]) / dist);
    }
  }

  // Single-sample noise moments at x0, exact over the finite sum.
  const Vec g_full = p.full_gradient(x0);
  const SymMat h_full = p.full_hessian(x0);
  double var_g = 0.0, var_h = 0.0, delta_h = 0.0;
  for (int i = 0; i < n; ++i) {
    var_g += (p.gradient_one(i, x0) - g_full).squaredNorm();
    const double dev = numkit::spectral_norm(p.hessian_one(i, x0) - h_full);
    var_h += dev * dev;
    delta_h = std::max(delta_h, dev);
  }
  var_g /= n;
  var_h /= n;

  constexpr double kSafety = 1.5;
  ProblemConstants c;
  c.L = kSafety * L;
  c.L_g = kSafety * L_g;
  c.sigma_g = kSafety * std::sqrt(var_g);
  c.sigma_h = kSafety * std::sqrt(var_h);
  c.delta_h = std::max(kSafety * delta_h, c.sigma_h);
  c.sigma_g0 = c.sigma_g;
  c.sigma_h0 = c.sigma_h;
  return c;
}

}  // namespace cubmom::problems
