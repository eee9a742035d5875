#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "gamplab/common.hpp"

namespace gamplab {

// ---------------------------------------------------------------------------
// Scalar convex potentials and their proximal operators
// ---------------------------------------------------------------------------

/// A closed proper convex function on the reals.
///
/// `prox(r, t)` returns argmin_x t*f(x) + (x - r)^2 / 2 and
/// `prox_derivative(r, t)` its derivative in r. Subclasses with closed forms
/// override both; everything else falls back to the generic 1-D solver, which
/// needs `derivative`. `second_derivative` returns NaN when unavailable.
class Potential {
 public:
  virtual ~Potential() = default;

  virtual double value(double x) const = 0;
  virtual double derivative(double /*x*/) const { return kNaN; }
  virtual double second_derivative(double /*x*/) const { return kNaN; }
  virtual std::string name() const { return "potential"; }

  virtual double prox(double r, double t) const;
  virtual double prox_derivative(double r, double t) const;
};

namespace detail {

// Root of phi(x) = t f'(x) + x - r, which is strictly increasing for convex f.
inline double prox_by_stationarity(const Potential& f, double r, double t) {
  auto phi = [&](double x) { return t * f.derivative(x) + x - r; };
  double f0 = phi(r);
  if (!std::isfinite(f0)) throw EstimatorError("prox: potential derivative is not finite at r");
  if (f0 == 0.0) return r;

  // Expand away from r until phi changes sign. A convex f keeps phi
  // increasing, so phi moving the wrong way exposes non-convexity.
  const double dir = f0 > 0.0 ? -1.0 : 1.0;
  double step = std::max(1.0, std::abs(r)) * 1e-3;
  double inner = r, f_inner = f0;
  double outer = r, f_outer = f0;
  bool bracketed = false;
  for (int k = 0; k < 2000; ++k) {
    outer = r + dir * step;
    f_outer = phi(outer);
    if (!std::isfinite(f_outer)) throw EstimatorError("prox: potential derivative is not finite");
    if (dir * (f_outer - f_inner) < 0.0)
      throw ConvexityViolationError("prox: stationarity map is not monotone (non-convex potential)");
    if ((f_outer > 0.0) != (f0 > 0.0) || f_outer == 0.0) {
      bracketed = true;
      break;
    }
    inner = outer;
    f_inner = f_outer;
    step *= 2.0;
    if (!std::isfinite(step)) break;
  }
  if (!bracketed) throw ConvexityViolationError("prox: bracketing failed (potential is not convex or unbounded below)");
  if (f_outer == 0.0) return outer;

  double lo = std::min(inner, outer), hi = std::max(inner, outer);
  double x = 0.5 * (lo + hi);
  for (int k = 0; k < 400; ++k) {
    const double fx = phi(x);
    if (fx == 0.0) return x;
    if (fx > 0.0) hi = x; else lo = x;
    double next = 0.5 * (lo + hi);
    const double curv = f.second_derivative(x);
    if (std::isfinite(curv) && t * curv + 1.0 > 0.0) {
      const double newton = x - fx / (t * curv + 1.0);
      if (newton > lo && newton < hi) next = newton;
    }
    if (std::abs(next - x) <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)) ||
        hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x)))
      return next;
    x = next;
  }
  return x;
}

// Golden-section minimization of t f(x) + (x-r)^2/2 for value-only handles.
// Resolution is limited to about sqrt(eps) relative.
inline double prox_by_golden_section(const Potential& f, double r, double t) {
  auto h = [&](double x) { return t * f.value(x) + 0.5 * (x - r) * (x - r); };
  double step = std::max(1.0, std::abs(r));
  double a = r - step, b = r + step;
  double ha = h(a), hb = h(b), hr = h(r);
  int k = 0;
  while (!(hr <= ha && hr <= hb)) {
    if (++k > 200) throw ConvexityViolationError("prox: bracketing failed for value-only potential");
    step *= 2.0;
    if (ha < hr) { b = r; r = a; hr = ha; a = r - step; ha = h(a); }
    else { a = r; r = b; hr = hb; b = r + step; hb = h(b); }
  }
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double hc = h(c), hd = h(d);
  for (int i = 0; i < 300 && (b - a) > 1e-12 * std::max(1.0, std::abs(c)); ++i) {
    if (hc < hd) { b = d; d = c; hd = hc; c = b - g * (b - a); hc = h(c); }
    else { a = c; c = d; hc = hd; d = a + g * (b - a); hd = h(d); }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

inline double Potential::prox(double r, double t) const {
  if (!(t > 0.0)) throw InvalidParameterError("prox scale must be positive");
  if (std::isfinite(derivative(r))) return detail::prox_by_stationarity(*this, r, t);
  return detail::prox_by_golden_section(*this, r, t);
}

inline double Potential::prox_derivative(double r, double t) const {
  const double x = prox(r, t);
  const double curv = second_derivative(x);
  if (std::isnan(curv)) throw EstimatorError("prox_derivative: second derivative unavailable");
  if (curv < 0.0) throw ConvexityViolationError("prox_derivative: negative curvature at the prox point");
  return 1.0 / (1.0 + t * curv);
}

class ZeroPotential final : public Potential {
 public:
  double value(double) const override { return 0.0; }
  double derivative(double) const override { return 0.0; }
  double second_derivative(double) const override { return 0.0; }
  double prox(double r, double) const override { return r; }
  double prox_derivative(double, double) const override { return 1.0; }
  std::string name() const override { return "zero"; }
};

/// f(x) = weight * (x - center)^2 / 2.
class QuadraticPotential final : public Potential {
 public:
  QuadraticPotential(double center, double weight) : center_(center), weight_(weight) {
    if (!(weight >= 0.0)) throw InvalidParameterError("quadratic weight must be nonnegative");
  }
  double value(double x) const override { return 0.5 * weight_ * (x - center_) * (x - center_); }
  double derivative(double x) const override { return weight_ * (x - center_); }
  double second_derivative(double) const override { return weight_; }
  double prox(double r, double t) const override { return (r + t * weight_ * center_) / (1.0 + t * weight_); }
  double prox_derivative(double, double t) const override { return 1.0 / (1.0 + t * weight_); }
  std::string name() const override { return "quadratic"; }
  double center() const { return center_; }
  double weight() const { return weight_; }

 private:
  double center_, weight_;
};

/// f(x) = lambda * |x - center|. The prox is a soft threshold; at the kink
/// |r - center| = t*lambda the derivative takes the dead-zone value 0.
class AbsPotential final : public Potential {
 public:
  explicit AbsPotential(double lambda, double center = 0.0) : lambda_(lambda), center_(center) {
    if (!(lambda >= 0.0)) throw InvalidParameterError("abs weight must be nonnegative");
  }
  double value(double x) const override { return lambda_ * std::abs(x - center_); }
  double derivative(double x) const override {
    return x > center_ ? lambda_ : (x < center_ ? -lambda_ : 0.0);
  }
  double second_derivative(double) const override { return 0.0; }
  double prox(double r, double t) const override {
    const double u = r - center_, thr = t * lambda_;
    if (u > thr) return center_ + u - thr;
    if (u < -thr) return center_ + u + thr;
    return center_;
  }
  double prox_derivative(double r, double t) const override {
    return std::abs(r - center_) > t * lambda_ ? 1.0 : 0.0;
  }
  std::string name() const override { return "abs"; }
  double lambda() const { return lambda_; }
  double center() const { return center_; }

 private:
  double lambda_, center_;
};

/// Smoothed absolute value lambda * (sqrt((x-c)^2 + eps^2) - eps) plus an
/// optional ridge term ridge*(x-c)^2/2. Strictly convex and C^2.
class SmoothAbsPotential final : public Potential {
 public:
  SmoothAbsPotential(double lambda, double eps, double center = 0.0, double ridge = 0.0)
      : lambda_(lambda), eps_(eps), center_(center), ridge_(ridge) {
    if (!(lambda >= 0.0) || !(eps > 0.0) || !(ridge >= 0.0))
      throw InvalidParameterError("smooth_abs requires lambda >= 0, eps > 0, ridge >= 0");
  }
  double value(double x) const override {
    const double u = x - center_;
    return lambda_ * (std::hypot(u, eps_) - eps_) + 0.5 * ridge_ * u * u;
  }
  double derivative(double x) const override {
    const double u = x - center_;
    return lambda_ * u / std::hypot(u, eps_) + ridge_ * u;
  }
  double second_derivative(double x) const override {
    const double u = x - center_;
    const double s = std::hypot(u, eps_);
    return lambda_ * eps_ * eps_ / (s * s * s) + ridge_;
  }
  std::string name() const override { return "smooth_abs"; }

 private:
  double lambda_, eps_, center_, ridge_;
};

/// Potential from user-supplied callables. `d1`/`d2` may be empty.
class FunctionPotential final : public Potential {
 public:
  using Fn = std::function<double(double)>;
  FunctionPotential(Fn value, Fn d1 = {}, Fn d2 = {}, std::string name = "function")
      : value_(std::move(value)), d1_(std::move(d1)), d2_(std::move(d2)), name_(std::move(name)) {}
  double value(double x) const override { return value_(x); }
  double derivative(double x) const override { return d1_ ? d1_(x) : kNaN; }
  double second_derivative(double x) const override { return d2_ ? d2_(x) : kNaN; }
  std::string name() const override { return name_; }

 private:
  Fn value_, d1_, d2_;
  std::string name_;
};

/// prox_{t f}(r).
inline double prox(const Potential& f, double r, double t = 1.0) { return f.prox(r, t); }

/// d/dr prox_{t f}(r) = 1 / (1 + t f''(prox_{t f}(r))).
inline double prox_derivative(const Potential& f, double r, double t = 1.0) { return f.prox_derivative(r, t); }

/// prox_{t f*}(v) through the Moreau identity, never forming f*.
inline double dual_prox(const Potential& f, double v, double t) { return v - t * f.prox(v / t, 1.0 / t); }

// ---------------------------------------------------------------------------
// Scalar estimation functions
// ---------------------------------------------------------------------------

struct ScalarEval {
  double value;
  double derivative;
};

struct GaussianPrior {
  double x0 = 0.0;
  double tau0 = 1.0;  // variance
};

struct GaussianLikelihood {
  double y = 0.0;
  double tauw_bar = 1.0;  // precision
};

/// Max-sum input function: prox_{tau_r G}(r) and its derivative.
inline ScalarEval max_sum_input(const Potential& g, double r, double tau_r) {
  if (!(tau_r > 0.0)) throw InvalidParameterError("tau_r must be positive");
  return {g.prox(r, tau_r), g.prox_derivative(r, tau_r)};
}

/// Max-sum output function p - tau_p prox_{F/tau_p}(p/tau_p); equals
/// prox_{tau_p F*}(p) by the Moreau identity.
inline ScalarEval max_sum_output(const Potential& f, double p_bar, double tau_p_bar) {
  if (!(tau_p_bar > 0.0)) throw InvalidParameterError("tau_p_bar must be positive");
  const double u = p_bar / tau_p_bar, t = 1.0 / tau_p_bar;
  return {p_bar - tau_p_bar * f.prox(u, t), 1.0 - f.prox_derivative(u, t)};
}

inline ScalarEval gaussian_input(const GaussianPrior& p, double r, double tau_r) {
  const double gain = p.tau0 / (p.tau0 + tau_r);
  return {p.x0 + gain * (r - p.x0), gain};
}

inline ScalarEval gaussian_output(const GaussianLikelihood& l, double p_bar, double tau_p_bar) {
  const double gain = l.tauw_bar / (l.tauw_bar + tau_p_bar);
  return {gain * (p_bar - tau_p_bar * l.y), gain};
}

// ---------------------------------------------------------------------------
// Densities and Gauss-Hermite posterior moments
// ---------------------------------------------------------------------------

/// Gauss-Hermite rule for weight exp(-t^2) (Golub-Welsch).
struct GaussHermiteRule {
  Vector nodes;
  Vector weights;  // sum to sqrt(pi)

  explicit GaussHermiteRule(int order) {
    if (order < 1) throw InvalidParameterError("quadrature order must be positive");
    Matrix jacobi = Matrix::Zero(order, order);
    for (int k = 1; k < order; ++k) {
      const double b = std::sqrt(0.5 * k);
      jacobi(k, k - 1) = b;
      jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(jacobi);
    if (es.info() != Eigen::Success) throw NumericalError("Gauss-Hermite eigen-solver failed");
    nodes = es.eigenvalues();
    weights = std::sqrt(std::numbers::pi) * es.eigenvectors().row(0).transpose().array().square().matrix();
  }
};

/// A scalar density used as a prior P(x) or a likelihood P(y|z) in z.
///
/// The density is an optional discrete part (`atoms`) plus a continuous part
/// given by `log_density`. `shape_hint` names a Gaussian approximating the
/// continuous part; quadrature nodes are placed on its product with the
/// pseudo-noise Gaussian, which makes Gaussian components exact.
class ScalarDensity {
 public:
  struct Atom {
    double location;
    double weight;
  };
  struct Hint {
    double mean;
    double variance;
  };

  virtual ~ScalarDensity() = default;
  virtual double log_density(double x) const = 0;
  virtual std::vector<Atom> atoms() const { return {}; }
  virtual std::optional<Hint> shape_hint() const { return std::nullopt; }
  virtual std::string name() const { return "density"; }
};

inline double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * d * d / var - 0.5 * std::log(2.0 * std::numbers::pi * var);
}

class GaussianDensity final : public ScalarDensity {
 public:
  GaussianDensity(double mean, double variance) : mean_(mean), var_(variance) {
    if (!(variance > 0.0)) throw InvalidParameterError("Gaussian density variance must be positive");
  }
  double log_density(double x) const override { return log_normal_pdf(x, mean_, var_); }
  std::optional<Hint> shape_hint() const override { return Hint{mean_, var_}; }
  std::string name() const override { return "gaussian"; }

 private:
  double mean_, var_;
};

/// (1 - rho) delta(x) + rho N(x; mean, variance).
class BernoulliGaussianDensity final : public ScalarDensity {
 public:
  BernoulliGaussianDensity(double rho, double mean, double variance) : rho_(rho), mean_(mean), var_(variance) {
    if (!(rho > 0.0 && rho <= 1.0) || !(variance > 0.0))
      throw InvalidParameterError("Bernoulli-Gaussian requires rho in (0,1] and positive variance");
  }
  double log_density(double x) const override { return std::log(rho_) + log_normal_pdf(x, mean_, var_); }
  std::vector<Atom> atoms() const override {
    if (rho_ == 1.0) return {};
    return {Atom{0.0, 1.0 - rho_}};
  }
  std::optional<Hint> shape_hint() const override { return Hint{mean_, var_}; }
  std::string name() const override { return "bernoulli_gaussian"; }
  double rho() const { return rho_; }
  double mean() const { return mean_; }
  double variance() const { return var_; }

 private:
  double rho_, mean_, var_;
};

/// Density proportional to exp(-potential(x)); normalization is irrelevant
/// for posterior moments.
class GibbsDensity final : public ScalarDensity {
 public:
  explicit GibbsDensity(std::shared_ptr<const Potential> potential, std::optional<Hint> hint = std::nullopt)
      : potential_(std::move(potential)), hint_(hint) {}
  double log_density(double x) const override { return -potential_->value(x); }
  std::optional<Hint> shape_hint() const override { return hint_; }
  std::string name() const override { return "gibbs(" + potential_->name() + ")"; }

 private:
  std::shared_ptr<const Potential> potential_;
  std::optional<Hint> hint_;
};

struct PosteriorMoments {
  double mean;
  double variance;
};

/// Mean and variance of density(x) * N(x; center, noise_var), normalized.
inline PosteriorMoments posterior_moments(const ScalarDensity& density, double center, double noise_var,
                                          const GaussHermiteRule& rule) {
  if (!(noise_var > 0.0)) throw InvalidParameterError("noise variance must be positive");
  double frame_mean = center, frame_var = noise_var;
  if (auto h = density.shape_hint()) {
    frame_var = h->variance * noise_var / (h->variance + noise_var);
    frame_mean = (h->mean * noise_var + center * h->variance) / (h->variance + noise_var);
  }
  const double spread = std::sqrt(2.0 * frame_var);
  const double log_sqrt_pi = 0.5 * std::log(std::numbers::pi);

  const auto atoms = density.atoms();
  const Index nq = rule.nodes.size();
  const Index total = nq + static_cast<Index>(atoms.size());
  Vector loc(total), logw(total);
  for (Index i = 0; i < nq; ++i) {
    const double x = frame_mean + spread * rule.nodes(i);
    loc(i) = x;
    const double t = rule.nodes(i);
    // log q(x) = -t^2 - log(sqrt(2 pi frame_var)); dividing by q and using
    // weight w/sqrt(pi) gives the correction terms below.
    logw(i) = std::log(rule.weights(i)) - log_sqrt_pi + density.log_density(x) +
              log_normal_pdf(x, center, noise_var) + t * t + 0.5 * std::log(2.0 * std::numbers::pi * frame_var);
  }
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const Index i = nq + static_cast<Index>(k);
    loc(i) = atoms[k].location;
    logw(i) = std::log(atoms[k].weight) + log_normal_pdf(atoms[k].location, center, noise_var);
  }
  double peak = -kInf;
  for (Index i = 0; i < total; ++i)
    if (std::isfinite(logw(i))) peak = std::max(peak, logw(i));
  if (!std::isfinite(peak)) throw EstimatorError("posterior is not normalizable (zero denominator)");

  double z = 0.0, m1 = 0.0;
  Vector w(total);
  for (Index i = 0; i < total; ++i) {
    w(i) = std::isfinite(logw(i)) ? std::exp(logw(i) - peak) : 0.0;
    z += w(i);
    m1 += w(i) * loc(i);
  }
  if (!(z > 0.0) || !std::isfinite(z)) throw EstimatorError("posterior is not normalizable (zero denominator)");
  const double mean = m1 / z;
  double var = 0.0;
  for (Index i = 0; i < total; ++i) var += w(i) * (loc(i) - mean) * (loc(i) - mean);
  return {mean, var / z};
}

/// MMSE denoiser E[x | r] for x ~ prior and r = x + N(0, tau_r), with
/// derivative Var[x | r] / tau_r.
inline ScalarEval sum_product_input(const ScalarDensity& prior, double r, double tau_r, const GaussHermiteRule& rule) {
  if (!(tau_r > 0.0)) throw InvalidParameterError("tau_r must be positive");
  const auto pm = posterior_moments(prior, r, tau_r, rule);
  return {pm.mean, pm.variance / tau_r};
}

inline ScalarEval sum_product_input(const ScalarDensity& prior, double r, double tau_r, int quadrature_order) {
  if (quadrature_order < 8) throw InvalidParameterError("quadrature order must be at least 8");
  return sum_product_input(prior, r, tau_r, GaussHermiteRule(quadrature_order));
}

/// p - tau_p E[z | p] with z ~ likelihood(z) N(z; p/tau_p, 1/tau_p); the
/// derivative is 1 - tau_p Var[z | p].
inline ScalarEval sum_product_output(const ScalarDensity& likelihood, double p_bar, double tau_p_bar,
                                     const GaussHermiteRule& rule) {
  if (!(tau_p_bar > 0.0)) throw InvalidParameterError("tau_p_bar must be positive");
  const auto pm = posterior_moments(likelihood, p_bar / tau_p_bar, 1.0 / tau_p_bar, rule);
  return {p_bar - tau_p_bar * pm.mean, 1.0 - tau_p_bar * pm.variance};
}

inline ScalarEval sum_product_output(const ScalarDensity& likelihood, double p_bar, double tau_p_bar,
                                     int quadrature_order) {
  if (quadrature_order < 8) throw InvalidParameterError("quadrature order must be at least 8");
  return sum_product_output(likelihood, p_bar, tau_p_bar, GaussHermiteRule(quadrature_order));
}

// ---------------------------------------------------------------------------
// Separable estimators consumed by the GAMP iteration
// ---------------------------------------------------------------------------

class InputEstimator {
 public:
  virtual ~InputEstimator() = default;
  /// g_x and g_x' for component j.
  virtual ScalarEval evaluate(Index j, double r, double tau_r) const = 0;
  virtual std::string name() const = 0;
};

class OutputEstimator {
 public:
  virtual ~OutputEstimator() = default;
  /// g_s_bar and g_s_bar' for component i.
  virtual ScalarEval evaluate(Index i, double p_bar, double tau_p_bar) const = 0;
  virtual std::string name() const = 0;
};

namespace detail {
template <typename T>
const T& pick(const std::vector<T>& items, Index i) {
  return items.size() == 1 ? items.front() : items[static_cast<std::size_t>(i)];
}
}  // namespace detail

class GaussianInputEstimator final : public InputEstimator {
 public:
  GaussianInputEstimator(Vector x0, Vector tau0) : x0_(std::move(x0)), tau0_(std::move(tau0)) {
    if ((tau0_.array() <= 0.0).any()) throw InvalidParameterError("tau0 must be positive");
  }
  ScalarEval evaluate(Index j, double r, double tau_r) const override {
    return gaussian_input({x0_(j), tau0_(j)}, r, tau_r);
  }
  std::string name() const override { return "gaussian"; }

 private:
  Vector x0_, tau0_;
};

class GaussianOutputEstimator final : public OutputEstimator {
 public:
  GaussianOutputEstimator(Vector y, Vector tauw_bar) : y_(std::move(y)), tauw_bar_(std::move(tauw_bar)) {
    if ((tauw_bar_.array() <= 0.0).any()) throw InvalidParameterError("tauw_bar must be positive");
  }
  ScalarEval evaluate(Index i, double p_bar, double tau_p_bar) const override {
    return gaussian_output({y_(i), tauw_bar_(i)}, p_bar, tau_p_bar);
  }
  std::string name() const override { return "gaussian"; }

 private:
  Vector y_, tauw_bar_;
};

using PotentialPtr = std::shared_ptr<const Potential>;
using DensityPtr = std::shared_ptr<const ScalarDensity>;

/// One potential per component, or a single potential shared by all.
class MaxSumInputEstimator final : public InputEstimator {
 public:
  explicit MaxSumInputEstimator(std::vector<PotentialPtr> g) : g_(std::move(g)) {}
  ScalarEval evaluate(Index j, double r, double tau_r) const override {
    return max_sum_input(*detail::pick(g_, j), r, tau_r);
  }
  std::string name() const override { return "max_sum"; }
  const std::vector<PotentialPtr>& potentials() const { return g_; }

 private:
  std::vector<PotentialPtr> g_;
};

class MaxSumOutputEstimator final : public OutputEstimator {
 public:
  explicit MaxSumOutputEstimator(std::vector<PotentialPtr> f) : f_(std::move(f)) {}
  ScalarEval evaluate(Index i, double p_bar, double tau_p_bar) const override {
    return max_sum_output(*detail::pick(f_, i), p_bar, tau_p_bar);
  }
  std::string name() const override { return "max_sum"; }
  const std::vector<PotentialPtr>& potentials() const { return f_; }

 private:
  std::vector<PotentialPtr> f_;
};

class SumProductInputEstimator final : public InputEstimator {
 public:
  SumProductInputEstimator(std::vector<DensityPtr> priors, int order = 64) : priors_(std::move(priors)), rule_(order) {
    if (order < 8) throw InvalidParameterError("quadrature order must be at least 8");
  }
  ScalarEval evaluate(Index j, double r, double tau_r) const override {
    return sum_product_input(*detail::pick(priors_, j), r, tau_r, rule_);
  }
  std::string name() const override { return "sum_product"; }

 private:
  std::vector<DensityPtr> priors_;
  GaussHermiteRule rule_;
};

class SumProductOutputEstimator final : public OutputEstimator {
 public:
  SumProductOutputEstimator(std::vector<DensityPtr> likelihoods, int order = 64)
      : likelihoods_(std::move(likelihoods)), rule_(order) {
    if (order < 8) throw InvalidParameterError("quadrature order must be at least 8");
  }
  ScalarEval evaluate(Index i, double p_bar, double tau_p_bar) const override {
    return sum_product_output(*detail::pick(likelihoods_, i), p_bar, tau_p_bar, rule_);
  }
  std::string name() const override { return "sum_product"; }

 private:
  std::vector<DensityPtr> likelihoods_;
  GaussHermiteRule rule_;
};

}  // namespace gamplab
