#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gamplab/common.hpp"
#include "gamplab/ensembles.hpp"
#include "gamplab/estimators.hpp"
#include "gamplab/gamp.hpp"

namespace gamplab {

struct PdhgConfig {
  // Nonpositive stepsizes request the default tau_p_bar = tau_r = 0.99 / ||A||_2.
  double tau_p_bar = 0.0;
  double tau_r = 0.0;
  double theta = 1.0;
  long max_iters = 10000;
  double conv_tol = 1e-10;
  double divergence_threshold = 1e12;
};

struct PdhgResult {
  Outcome outcome = Outcome::MaxIters;
  Vector x_hat;
  Vector x;
  Vector s_bar;
  long iterations = 0;
  double tau_p_bar = 0.0;
  double tau_r = 0.0;
};

/// Per-iteration consumer: record plus (x_hat, x, s_bar) after the update.
using PdhgSink = std::function<void(const IterationRecord&, const Vector& x_hat, const Vector& x, const Vector& s_bar)>;

/// Primal-dual hybrid gradient for min_x F(Ax) + G(x) with separable F, G.
/// The dual prox uses the Moreau identity, so F* is never formed.
inline PdhgResult pdhg_run(const Matrix& a, const std::vector<PotentialPtr>& f, const std::vector<PotentialPtr>& g,
                           PdhgConfig cfg, const Vector& x_init, const PdhgSink& sink = {},
                           const RunOptions& opts = {}) {
  const Index m = a.rows(), n = a.cols();
  if (f.size() != 1 && static_cast<Index>(f.size()) != m) throw InvalidParameterError("F needs 1 or m potentials");
  if (g.size() != 1 && static_cast<Index>(g.size()) != n) throw InvalidParameterError("G needs 1 or n potentials");
  if (x_init.size() != n) throw InvalidParameterError("initial x must have length n");
  if (!(cfg.theta >= -1.0 && cfg.theta <= 1.0)) throw InvalidParameterError("PDHG relaxation must lie in [-1, 1]");
  if (cfg.tau_p_bar <= 0.0 || cfg.tau_r <= 0.0) {
    const double op = singular_values(a)(0);
    if (!(op > 0.0)) throw DegenerateMatrixError("PDHG default stepsizes need a nonzero matrix");
    cfg.tau_p_bar = cfg.tau_r = 0.99 / op;
  }

  PdhgResult res;
  res.tau_p_bar = cfg.tau_p_bar;
  res.tau_r = cfg.tau_r;
  res.x_hat = x_init;
  res.x = x_init;
  res.s_bar = Vector::Zero(m);

  Vector v(m), u(n), x_hat_new(n), s_prev(m);
  for (long t = 0; t < cfg.max_iters; ++t) {
    s_prev = res.s_bar;
    v = res.s_bar + cfg.tau_p_bar * (a * res.x);
    for (Index i = 0; i < m; ++i) res.s_bar(i) = dual_prox(*detail::pick(f, i), v(i), cfg.tau_p_bar);
    const double s_change = (res.s_bar - s_prev).norm() / std::max(1.0, s_prev.norm());
    u = res.x_hat - cfg.tau_r * (a.transpose() * res.s_bar);
    for (Index j = 0; j < n; ++j) x_hat_new(j) = detail::pick(g, j)->prox(u(j), cfg.tau_r);
    const double change = (x_hat_new - res.x_hat).norm() / std::max(1.0, res.x_hat.norm());
    res.x = x_hat_new + cfg.theta * (x_hat_new - res.x_hat);
    res.x_hat = x_hat_new;
    res.iterations = t + 1;

    if (!res.x.allFinite() || !res.s_bar.allFinite()) {
      res.outcome = Outcome::Diverged;
      return res;
    }
    IterationRecord rec;
    rec.iter = t + 1;
    rec.x_change = change;
    if (opts.oracle) rec.dist_to_oracle = relative_distance(res.x_hat, *opts.oracle);
    rec.tau_x = cfg.tau_r;
    rec.tau_s = cfg.tau_p_bar;
    rec.max_abs_x = res.x.cwiseAbs().maxCoeff();
    rec.max_abs_s = res.s_bar.cwiseAbs().maxCoeff();
    if (sink) sink(rec, res.x_hat, res.x, res.s_bar);
    if (std::max(rec.max_abs_x, rec.max_abs_s) > cfg.divergence_threshold) {
      res.outcome = Outcome::Diverged;
      return res;
    }
    if (std::max(change, s_change) < cfg.conv_tol) {
      res.outcome = Outcome::Converged;
      return res;
    }
  }
  res.outcome = Outcome::MaxIters;
  return res;
}

/// Quadratic potentials F_i = tauw_bar_i (z - y_i)^2 / 2 and
/// G_j = (x - x0_j)^2 / (2 tau0_j) of a Gaussian instance.
inline std::pair<std::vector<PotentialPtr>, std::vector<PotentialPtr>> gaussian_potentials(const ProblemInstance& inst) {
  std::vector<PotentialPtr> f, g;
  for (Index i = 0; i < inst.m(); ++i) f.push_back(std::make_shared<QuadraticPotential>(inst.y(i), inst.tauw_bar(i)));
  for (Index j = 0; j < inst.n(); ++j) g.push_back(std::make_shared<QuadraticPotential>(inst.x0(j), 1.0 / inst.tau0(j)));
  return {f, g};
}

/// MAP estimate of a Gaussian instance:
/// (A^T W A + T0^{-1}) x = A^T W y + T0^{-1} x0, solved by Cholesky with one
/// step of iterative refinement.
inline Vector gaussian_oracle(const ProblemInstance& inst) {
  inst.validate();
  const Vector prec0 = inst.tau0.cwiseInverse();
  Matrix normal = inst.a.transpose() * inst.tauw_bar.asDiagonal() * inst.a;
  normal.diagonal() += prec0;
  const Vector rhs = inst.a.transpose() * inst.tauw_bar.cwiseProduct(inst.y) + prec0.cwiseProduct(inst.x0);
  Eigen::LLT<Matrix> llt(normal);
  if (llt.info() != Eigen::Success) throw NumericalError("normal equations are not positive definite");
  Vector x = llt.solve(rhs);
  x += llt.solve(rhs - normal * x);
  return x;
}

/// ||(A^T W A + T0^{-1}) x - rhs|| / ||rhs||.
inline double normal_equation_residual(const ProblemInstance& inst, const Vector& x) {
  const Vector prec0 = inst.tau0.cwiseInverse();
  const Vector lhs = inst.a.transpose() * inst.tauw_bar.cwiseProduct(inst.a * x) + prec0.cwiseProduct(x);
  const Vector rhs = inst.a.transpose() * inst.tauw_bar.cwiseProduct(inst.y) + prec0.cwiseProduct(inst.x0);
  const double nr = rhs.norm();
  return nr > 0.0 ? (lhs - rhs).norm() / nr : (lhs - rhs).norm();
}

}  // namespace gamplab
