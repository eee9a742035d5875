#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "gamplab/common.hpp"
#include "gamplab/estimators.hpp"

namespace gamplab {

enum class GampMode { MaxSum, SumProduct, Gaussian };
enum class StepsizeMode { Vector, Scalar, Frozen };

inline std::string to_string(GampMode m) {
  switch (m) {
    case GampMode::MaxSum: return "max_sum";
    case GampMode::SumProduct: return "sum_product";
    case GampMode::Gaussian: return "gaussian";
  }
  return "unknown";
}

inline std::string to_string(StepsizeMode m) {
  switch (m) {
    case StepsizeMode::Vector: return "vector";
    case StepsizeMode::Scalar: return "scalar";
    case StepsizeMode::Frozen: return "frozen";
  }
  return "unknown";
}

struct GampConfig {
  GampMode mode = GampMode::Gaussian;
  StepsizeMode stepsize_mode = StepsizeMode::Scalar;
  // Held stepsizes for Frozen mode; length m (resp. n) or 1 to broadcast.
  Vector frozen_tau_p_bar;
  Vector frozen_tau_r;
  double theta_s = 1.0;
  double theta_x = 1.0;
  long max_iters = 1000;
  double conv_tol = 1e-10;
  double divergence_threshold = 1e12;

  void validate() const {
    if (!(theta_s > 0.0 && theta_s <= 1.0) || !(theta_x > 0.0 && theta_x <= 1.0))
      throw InvalidParameterError("damping constants must lie in (0, 1]");
    if (!(conv_tol > 0.0)) throw InvalidParameterError("conv_tol must be positive");
    if (!(divergence_threshold > 0.0)) throw InvalidParameterError("divergence_threshold must be positive");
    if (max_iters < 0) throw InvalidParameterError("max_iters must be nonnegative");
    if (stepsize_mode == StepsizeMode::Frozen) {
      if (frozen_tau_p_bar.size() == 0 || frozen_tau_r.size() == 0)
        throw InvalidParameterError("frozen mode needs tau_p_bar and tau_r");
      if ((frozen_tau_p_bar.array() <= 0.0).any() || (frozen_tau_r.array() <= 0.0).any())
        throw InvalidParameterError("frozen stepsizes must be positive");
    }
  }
};

/// Gaussian-model problem data: z = A x, x_j ~ N(x0_j, tau0_j),
/// y_i | z_i ~ N(z_i, 1 / tauw_bar_i).
struct ProblemInstance {
  Matrix a;
  Vector x0;
  Vector tau0;      // prior variances
  Vector y;
  Vector tauw_bar;  // noise precisions

  Index m() const { return a.rows(); }
  Index n() const { return a.cols(); }

  void validate() const {
    if (a.rows() < 1 || a.cols() < 1) throw InvalidParameterError("matrix must be non-empty");
    if (x0.size() != n() || tau0.size() != n()) throw InvalidParameterError("prior parameters must have length n");
    if (y.size() != m() || tauw_bar.size() != m())
      throw InvalidParameterError("likelihood parameters must have length m");
    if ((tau0.array() <= 0.0).any()) throw InvalidParameterError("tau0 must be positive");
    if ((tauw_bar.array() <= 0.0).any()) throw InvalidParameterError("tauw_bar must be positive");
  }
};

/// Draws x ~ N(x0, tau0) and y = A x + N(0, 1/tauw_bar) with identical
/// variances across components.
inline ProblemInstance synthesize_gaussian_instance(Matrix a, double tau0, double tauw_bar, std::uint64_t seed,
                                                   double x0 = 0.0) {
  if (!(tau0 > 0.0) || !(tauw_bar > 0.0)) throw InvalidParameterError("tau0 and tauw_bar must be positive");
  ProblemInstance inst;
  const Index m = a.rows(), n = a.cols();
  inst.a = std::move(a);
  inst.x0 = Vector::Constant(n, x0);
  inst.tau0 = Vector::Constant(n, tau0);
  inst.tauw_bar = Vector::Constant(m, tauw_bar);
  Rng rng(seed);
  Vector x = inst.x0 + rng.gaussian_vector(n, std::sqrt(tau0));
  inst.y = inst.a * x + rng.gaussian_vector(m, 1.0 / std::sqrt(tauw_bar));
  return inst;
}

struct EstimatorPair {
  std::shared_ptr<const InputEstimator> input;
  std::shared_ptr<const OutputEstimator> output;
};

/// Estimation functions for a Gaussian instance in the requested mode. All
/// three modes describe the same quadratic problem through different code
/// paths (closed form, prox, quadrature).
inline EstimatorPair make_estimators(const ProblemInstance& inst, GampMode mode, int quadrature_order = 64) {
  switch (mode) {
    case GampMode::Gaussian:
      return {std::make_shared<GaussianInputEstimator>(inst.x0, inst.tau0),
              std::make_shared<GaussianOutputEstimator>(inst.y, inst.tauw_bar)};
    case GampMode::MaxSum: {
      std::vector<PotentialPtr> g, f;
      for (Index j = 0; j < inst.n(); ++j) g.push_back(std::make_shared<QuadraticPotential>(inst.x0(j), 1.0 / inst.tau0(j)));
      for (Index i = 0; i < inst.m(); ++i) f.push_back(std::make_shared<QuadraticPotential>(inst.y(i), inst.tauw_bar(i)));
      return {std::make_shared<MaxSumInputEstimator>(std::move(g)), std::make_shared<MaxSumOutputEstimator>(std::move(f))};
    }
    case GampMode::SumProduct: {
      std::vector<DensityPtr> p, l;
      for (Index j = 0; j < inst.n(); ++j) p.push_back(std::make_shared<GaussianDensity>(inst.x0(j), inst.tau0(j)));
      for (Index i = 0; i < inst.m(); ++i) l.push_back(std::make_shared<GaussianDensity>(inst.y(i), 1.0 / inst.tauw_bar(i)));
      return {std::make_shared<SumProductInputEstimator>(std::move(p), quadrature_order),
              std::make_shared<SumProductOutputEstimator>(std::move(l), quadrature_order)};
    }
  }
  throw InvalidParameterError("unknown GAMP mode");
}

/// Iterates at the start of iteration t: x = x^t, tau_x = tau_x^t and
/// s_bar = s_bar^{t-1}. The remaining fields hold the quantities computed in
/// the previous iteration (empty before the first one).
struct GampState {
  Vector x;
  Vector s_bar;
  Vector p_bar;
  Vector r;
  Vector tau_x;
  Vector tau_s;
  Vector tau_r;
  Vector tau_p_bar;
  long iter = 0;
};

struct StepsizeFixedPoint {
  Vector tau_x;
  Vector tau_s;
  Vector tau_r;
  Vector tau_p_bar;
  long iterations_used = 0;
  double residual = 0.0;
};

struct IterationRecord {
  long iter = 0;
  double x_change = 0.0;
  double dist_to_oracle = kNaN;
  double tau_x = 0.0;  // mean
  double tau_s = 0.0;  // mean
  double max_abs_x = 0.0;
  double max_abs_s = 0.0;
};

using TraceSink = std::function<void(const IterationRecord&, const GampState&)>;

enum class Outcome { Converged, Diverged, MaxIters };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::Converged: return "converged";
    case Outcome::Diverged: return "diverged";
    case Outcome::MaxIters: return "max_iters";
  }
  return "unknown";
}

struct RunResult {
  Outcome outcome = Outcome::MaxIters;
  GampState state;  // last finite state
  long iterations = 0;
  long diverged_at = -1;
  std::string message;
};

struct RunOptions {
  std::optional<Vector> oracle;  // fills dist_to_oracle in the trace
};

inline double relative_distance(const Vector& x, const Vector& ref) {
  const double nref = ref.norm();
  const double d = (x - ref).norm();
  return nref > 0.0 ? d / nref : d;
}

/// Damped GAMP over a fixed matrix and estimator pair.
class Gamp {
 public:
  Gamp(Matrix a, EstimatorPair estimators, GampConfig cfg)
      : a_(std::move(a)), s_(a_.cwiseAbs2()), frob_sq_(a_.squaredNorm()), est_(std::move(estimators)),
        cfg_(std::move(cfg)) {
    cfg_.validate();
    if (!est_.input || !est_.output) throw InvalidParameterError("estimators must be set");
    if (cfg_.stepsize_mode == StepsizeMode::Frozen) {
      check_broadcast(cfg_.frozen_tau_p_bar, m(), "frozen tau_p_bar");
      check_broadcast(cfg_.frozen_tau_r, n(), "frozen tau_r");
    }
  }

  Index m() const { return a_.rows(); }
  Index n() const { return a_.cols(); }
  const Matrix& matrix() const { return a_; }
  const GampConfig& config() const { return cfg_; }

  /// x^0 and tau_x^0 from the caller; s_bar^{-1} = 0.
  GampState initial_state(const Vector& x_init, const Vector& tau_x_init) const {
    if (x_init.size() != n()) throw InvalidParameterError("initial x must have length n");
    GampState st;
    st.x = x_init;
    st.tau_x = broadcast(tau_x_init, n());
    if ((st.tau_x.array() <= 0.0).any()) throw InvalidParameterError("initial tau_x must be positive");
    if (cfg_.stepsize_mode == StepsizeMode::Scalar) st.tau_x.setConstant(st.tau_x.mean());
    st.s_bar = Vector::Zero(m());
    return st;
  }

  /// One damped iteration in the listed line order.
  GampState iterate(const GampState& in) const {
    const Index m_ = m(), n_ = n();
    const double md = static_cast<double>(m_), nd = static_cast<double>(n_);
    if (in.x.size() != n_ || in.s_bar.size() != m_ || in.tau_x.size() != n_)
      throw InvalidParameterError("state dimensions do not match the problem");
    GampState out;
    out.iter = in.iter + 1;

    // output (dual) half
    switch (cfg_.stepsize_mode) {
      case StepsizeMode::Vector: out.tau_p_bar = (s_ * in.tau_x).cwiseInverse(); break;
      case StepsizeMode::Scalar: out.tau_p_bar = Vector::Constant(m_, md / (frob_sq_ * in.tau_x.mean())); break;
      case StepsizeMode::Frozen: out.tau_p_bar = broadcast(cfg_.frozen_tau_p_bar, m_); break;
    }
    check_stepsizes(out.tau_p_bar, "tau_p_bar", in.iter);
    out.p_bar = in.s_bar + out.tau_p_bar.cwiseProduct(a_ * in.x);
    Vector gs(m_), dgs(m_);
    for (Index i = 0; i < m_; ++i) {
      const auto e = est_.output->evaluate(i, out.p_bar(i), out.tau_p_bar(i));
      gs(i) = e.value;
      dgs(i) = e.derivative;
    }
    if (cfg_.stepsize_mode == StepsizeMode::Scalar)
      out.tau_s = Vector::Constant(m_, out.tau_p_bar(0) / md * dgs.sum());
    else
      out.tau_s = out.tau_p_bar.cwiseProduct(dgs);
    out.s_bar = (1.0 - cfg_.theta_s) * in.s_bar + cfg_.theta_s * gs;

    // input (primal) half
    switch (cfg_.stepsize_mode) {
      case StepsizeMode::Vector: out.tau_r = (s_.transpose() * out.tau_s).cwiseInverse(); break;
      case StepsizeMode::Scalar: out.tau_r = Vector::Constant(n_, nd / (frob_sq_ * out.tau_s(0))); break;
      case StepsizeMode::Frozen: out.tau_r = broadcast(cfg_.frozen_tau_r, n_); break;
    }
    check_stepsizes(out.tau_r, "tau_r", in.iter);
    out.r = in.x - out.tau_r.cwiseProduct(a_.transpose() * out.s_bar);
    Vector gx(n_), dgx(n_);
    for (Index j = 0; j < n_; ++j) {
      const auto e = est_.input->evaluate(j, out.r(j), out.tau_r(j));
      gx(j) = e.value;
      dgx(j) = e.derivative;
    }
    if (cfg_.stepsize_mode == StepsizeMode::Scalar)
      out.tau_x = Vector::Constant(n_, out.tau_r(0) / nd * dgx.sum());
    else
      out.tau_x = out.tau_r.cwiseProduct(dgx);
    out.x = (1.0 - cfg_.theta_x) * in.x + cfg_.theta_x * gx;

    if (!out.x.allFinite() || !out.s_bar.allFinite() || !out.p_bar.allFinite() || !out.r.allFinite())
      throw DivergenceError("non-finite iterate at iteration " + std::to_string(in.iter), in.iter);
    // tau_x may vanish componentwise (l1 dead zone); tau_p_bar catches a full collapse
    if (cfg_.stepsize_mode != StepsizeMode::Frozen && (!out.tau_x.allFinite() || (out.tau_x.array() < 0.0).any() ||
                                                       !(out.tau_x.maxCoeff() > 0.0)))
      throw DivergenceError("tau_x left [0, inf) at iteration " + std::to_string(in.iter), in.iter);
    return out;
  }

  RunResult run(GampState init, const TraceSink& sink = {}, const RunOptions& opts = {}) const {
    RunResult res;
    res.state = std::move(init);
    for (long t = 0; t < cfg_.max_iters; ++t) {
      GampState next;
      try {
        next = iterate(res.state);
      } catch (const DivergenceError& e) {
        res.outcome = Outcome::Diverged;
        res.diverged_at = e.iteration;
        res.message = e.what();
        res.iterations = t;
        return res;
      }
      IterationRecord rec;
      rec.iter = next.iter;
      rec.x_change = (next.x - res.state.x).norm() / std::max(1.0, res.state.x.norm());
      const double s_change = (next.s_bar - res.state.s_bar).norm() / std::max(1.0, res.state.s_bar.norm());
      if (opts.oracle) rec.dist_to_oracle = relative_distance(next.x, *opts.oracle);
      rec.tau_x = next.tau_x.mean();
      rec.tau_s = next.tau_s.mean();
      rec.max_abs_x = next.x.cwiseAbs().maxCoeff();
      rec.max_abs_s = next.s_bar.size() ? next.s_bar.cwiseAbs().maxCoeff() : 0.0;
      if (sink) sink(rec, next);
      const bool blown = std::max(rec.max_abs_x, rec.max_abs_s) > cfg_.divergence_threshold;
      res.state = std::move(next);
      res.iterations = t + 1;
      if (blown) {
        res.outcome = Outcome::Diverged;
        res.diverged_at = res.state.iter;
        res.message = "iterate magnitude exceeded the divergence threshold";
        return res;
      }
      if (std::max(rec.x_change, s_change) < cfg_.conv_tol) {
        res.outcome = Outcome::Converged;
        return res;
      }
    }
    res.outcome = Outcome::MaxIters;
    return res;
  }

 private:
  static Vector broadcast(const Vector& v, Index len) {
    if (v.size() == len) return v;
    if (v.size() == 1) return Vector::Constant(len, v(0));
    throw InvalidParameterError("stepsize vector has the wrong length");
  }
  static void check_broadcast(const Vector& v, Index len, const char* what) {
    if (v.size() != len && v.size() != 1) throw InvalidParameterError(std::string(what) + " has the wrong length");
  }
  static void check_stepsizes(const Vector& v, const char* what, long iter) {
    if (!v.allFinite() || (v.array() <= 0.0).any())
      throw DivergenceError(std::string(what) + " left (0, inf) at iteration " + std::to_string(iter), iter);
  }

  Matrix a_;
  Matrix s_;
  double frob_sq_;
  EstimatorPair est_;
  GampConfig cfg_;
};

/// x^0 = x0 and tau_x^0 = tau0.
inline GampState initial_state(const ProblemInstance& inst, const GampConfig& cfg) {
  GampState st;
  st.x = inst.x0;
  st.tau_x = inst.tau0;
  if (cfg.stepsize_mode == StepsizeMode::Scalar) st.tau_x.setConstant(inst.tau0.mean());
  st.s_bar = Vector::Zero(inst.m());
  return st;
}

inline GampState gamp_iterate(const ProblemInstance& inst, const GampConfig& cfg, const GampState& state) {
  Gamp g(inst.a, make_estimators(inst, cfg.mode), cfg);
  return g.iterate(state);
}

inline RunResult run(const ProblemInstance& inst, const GampConfig& cfg, std::optional<GampState> init = std::nullopt,
                     const TraceSink& sink = {}, const RunOptions& opts = {}) {
  inst.validate();
  Gamp g(inst.a, make_estimators(inst, cfg.mode), cfg);
  return g.run(init ? std::move(*init) : initial_state(inst, cfg), sink, opts);
}

/// Fixed point of the Gaussian stepsize recursion, obtained by running the
/// recursion itself. Damping constants are never read.
inline StepsizeFixedPoint solve_stepsize_fixed_point(const ProblemInstance& inst, const GampConfig& cfg,
                                                     std::optional<Vector> tau_x_init = std::nullopt,
                                                     double tol = 1e-14, long max_iters = 10'000'000) {
  if (inst.tau0.size() != inst.n() || inst.tauw_bar.size() != inst.m())
    throw InvalidParameterError("stepsize fixed point: parameter lengths do not match A");
  if ((inst.tau0.array() <= 0.0).any() || (inst.tauw_bar.array() <= 0.0).any())
    throw InvalidParameterError("stepsize fixed point requires positive tau0 and tauw_bar");
  if (cfg.stepsize_mode == StepsizeMode::Frozen)
    throw InvalidParameterError("frozen stepsizes have no fixed-point recursion");
  const Index m = inst.m(), n = inst.n();
  const double md = static_cast<double>(m), nd = static_cast<double>(n);
  const bool scalar = cfg.stepsize_mode == StepsizeMode::Scalar;
  const Matrix s = inst.a.cwiseAbs2();
  const double frob_sq = inst.a.squaredNorm();
  if (!(frob_sq > 0.0)) throw DegenerateMatrixError("stepsize fixed point is undefined for the zero matrix");

  Vector tau_x = tau_x_init ? *tau_x_init : inst.tau0;
  if (tau_x.size() == 1) tau_x = Vector::Constant(n, tau_x(0));
  if (tau_x.size() != n || (tau_x.array() <= 0.0).any())
    throw InvalidParameterError("initial tau_x must be positive with length n");
  if (scalar) tau_x.setConstant(tau_x.mean());

  StepsizeFixedPoint fp;
  for (long k = 1; k <= max_iters; ++k) {
    Vector tau_p = scalar ? Vector::Constant(m, md / (frob_sq * tau_x(0))) : Vector((s * tau_x).cwiseInverse());
    Vector q_s = inst.tauw_bar.array() / (inst.tauw_bar.array() + tau_p.array());
    Vector tau_s = scalar ? Vector::Constant(m, tau_p(0) / md * q_s.sum()) : Vector(tau_p.cwiseProduct(q_s));
    Vector tau_r = scalar ? Vector::Constant(n, nd / (frob_sq * tau_s(0))) : Vector((s.transpose() * tau_s).cwiseInverse());
    Vector q_x = inst.tau0.array() / (inst.tau0.array() + tau_r.array());
    Vector next = scalar ? Vector::Constant(n, tau_r(0) / nd * q_x.sum()) : Vector(tau_r.cwiseProduct(q_x));
    if (!next.allFinite() || (next.array() <= 0.0).any())
      throw NumericalError("stepsize recursion left (0, inf); A may have a zero row or column");
    const double change = ((next - tau_x).cwiseAbs().array() / next.array()).maxCoeff();
    tau_x = std::move(next);
    fp.iterations_used = k;
    fp.residual = change;
    if (change < tol) break;
  }
  if (!(fp.residual < tol)) throw NumericalError("stepsize recursion did not converge");

  fp.tau_x = tau_x;
  fp.tau_p_bar = scalar ? Vector::Constant(m, md / (frob_sq * tau_x(0))) : Vector((s * tau_x).cwiseInverse());
  Vector q_s = inst.tauw_bar.array() / (inst.tauw_bar.array() + fp.tau_p_bar.array());
  fp.tau_s = scalar ? Vector::Constant(m, fp.tau_p_bar(0) / md * q_s.sum()) : Vector(fp.tau_p_bar.cwiseProduct(q_s));
  fp.tau_r = scalar ? Vector::Constant(n, nd / (frob_sq * fp.tau_s(0))) : Vector((s.transpose() * fp.tau_s).cwiseInverse());
  return fp;
}

}  // namespace gamplab
