#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "gamplab/common.hpp"
#include "gamplab/ensembles.hpp"
#include "gamplab/estimators.hpp"
#include "gamplab/gamp.hpp"

namespace gamplab {

struct DampingPair {
  double theta_s = 1.0;
  double theta_x = 1.0;

  void validate() const {
    if (!(theta_s > 0.0 && theta_s <= 1.0) || !(theta_x > 0.0 && theta_x <= 1.0))
      throw InvalidParameterError("damping constants must lie in (0, 1]");
  }
  double product() const { return theta_s * theta_x; }
};

enum class Thm2Verdict { Converges, Diverges, Boundary };

inline std::string to_string(Thm2Verdict v) {
  switch (v) {
    case Thm2Verdict::Converges: return "converges";
    case Thm2Verdict::Diverges: return "diverges";
    case Thm2Verdict::Boundary: return "boundary";
  }
  return "unknown";
}

/// Relative band around Gamma = ||A||_2^2/||A||_F^2 reported as Boundary.
inline constexpr double kBoundaryBand = 1e-9;

/// kappa_max = min(m,n) Gamma, written as (2/(theta_s theta_x)) (2 - theta (1 - min/max))
/// with theta = theta_s when m >= n and theta_x otherwise. In this form the
/// bounds 2/(theta_s theta_x) <= kappa_max <= 4/(theta_s theta_x) survive rounding.
inline double kappa_max(Index m, Index n, const DampingPair& d) {
  if (m < 1 || n < 1) throw InvalidParameterError("dimensions must be positive");
  d.validate();
  const double lo = static_cast<double>(std::min(m, n)), hi = static_cast<double>(std::max(m, n));
  const double theta = m >= n ? d.theta_s : d.theta_x;
  return (2.0 / d.product()) * (2.0 - theta * (1.0 - lo / hi));
}

/// Damping-dependent threshold Gamma(theta_s, theta_x).
inline double gamma_thm2(Index m, Index n, const DampingPair& d) {
  return kappa_max(m, n, d) / static_cast<double>(std::min(m, n));
}

inline Thm2Verdict classify_thm2(double gamma_big, double op_norm_sq, double frob_norm_sq) {
  const double ratio = op_norm_sq / frob_norm_sq;
  if (std::abs(gamma_big - ratio) <= kBoundaryBand * std::max(gamma_big, ratio)) return Thm2Verdict::Boundary;
  return gamma_big > ratio ? Thm2Verdict::Converges : Thm2Verdict::Diverges;
}

inline Thm2Verdict predict_scalar_ggamp(const SpectralStats& st, Index m, Index n, const DampingPair& d) {
  return classify_thm2(gamma_thm2(m, n, d), st.op_norm_sq, st.frob_norm_sq);
}

/// Converges: stable for every tau0, tauw_bar > 0. Diverges: unstable for
/// large enough tau0 * tauw_bar.
inline Thm2Verdict predict_scalar_ggamp(const Matrix& a, const DampingPair& d) {
  return predict_scalar_ggamp(spectral_stats(a), a.rows(), a.cols(), d);
}

// ---------------------------------------------------------------------------
// Exact stability of scalar-stepsize Gaussian GAMP
// ---------------------------------------------------------------------------

struct ScalarStepsizes {
  double tau_x, tau_s, tau_r, tau_p_bar;
  double q_s, q_x;
};

inline ScalarStepsizes scalar_gaussian_stepsizes(const Matrix& a, double tau0, double tauw_bar) {
  if (!(tau0 > 0.0) || !(tauw_bar > 0.0)) throw InvalidParameterError("tau0 and tauw_bar must be positive");
  ProblemInstance inst;
  inst.a = a;
  inst.x0 = Vector::Zero(a.cols());
  inst.tau0 = Vector::Constant(a.cols(), tau0);
  inst.y = Vector::Zero(a.rows());
  inst.tauw_bar = Vector::Constant(a.rows(), tauw_bar);
  GampConfig cfg;
  cfg.stepsize_mode = StepsizeMode::Scalar;
  const auto fp = solve_stepsize_fixed_point(inst, cfg);
  ScalarStepsizes s{fp.tau_x(0), fp.tau_s(0), fp.tau_r(0), fp.tau_p_bar(0), 0.0, 0.0};
  s.q_s = tauw_bar / (tauw_bar + s.tau_p_bar);
  s.q_x = tau0 / (tau0 + s.tau_r);
  return s;
}

struct ExactStability {
  bool stable = false;        // gamma form
  double gamma_small = 0.0;
  bool jury_stable = false;   // per-singular-value Jury test
  double min_p_at_one = 0.0;  // min over sigma of p(1)
  double d_s = 0.0;
  double d_x = 0.0;
  ScalarStepsizes stepsizes{};
};

/// gamma = [2/tau_x - theta_x/tau0][2/tau_s - theta_s/tauw_bar] / (||A||_F^2 theta_s theta_x);
/// stable iff sigma_max^2 < ||A||_F^2 gamma. The Jury form
/// sigma^2 theta_s theta_x tau_x tau_s < (1+d_s)(1+d_x) is evaluated
/// independently for every singular value.
inline ExactStability exact_scalar_ggamp_stability(const Matrix& a, const Vector& sv, const DampingPair& d, double tau0,
                                                   double tauw_bar) {
  d.validate();
  ExactStability ex;
  ex.stepsizes = scalar_gaussian_stepsizes(a, tau0, tauw_bar);
  const auto& s = ex.stepsizes;
  const double frob_sq = a.squaredNorm();
  ex.gamma_small = (2.0 / s.tau_x - d.theta_x / tau0) * (2.0 / s.tau_s - d.theta_s / tauw_bar) /
                   (frob_sq * d.theta_s * d.theta_x);
  const double sigma_max_sq = sv(0) * sv(0);
  ex.stable = sigma_max_sq < frob_sq * ex.gamma_small;

  ex.d_s = (1.0 - d.theta_s) + d.theta_s * s.q_s;
  ex.d_x = (1.0 - d.theta_x) + d.theta_x * s.q_x;
  const double c = d.theta_s * d.theta_x * s.tau_x * s.tau_s;
  ex.jury_stable = true;
  ex.min_p_at_one = kInf;
  for (Index k = 0; k < sv.size(); ++k) {
    const double sig2 = sv(k) * sv(k);
    ex.min_p_at_one = std::min(ex.min_p_at_one, sig2 * c + (1.0 - ex.d_s) * (1.0 - ex.d_x));
    if (!(sig2 * c < (1.0 + ex.d_s) * (1.0 + ex.d_x))) ex.jury_stable = false;
  }
  return ex;
}

inline ExactStability exact_scalar_ggamp_stability(const Matrix& a, const DampingPair& d, double tau0, double tauw_bar) {
  return exact_scalar_ggamp_stability(a, singular_values(a), d, tau0, tauw_bar);
}

// ---------------------------------------------------------------------------
// Linearized iteration
// ---------------------------------------------------------------------------

struct LinearizedSystem {
  DampingPair damping;
  Matrix a;
  Vector q_s, q_x;
  Vector tau_s, tau_x;  // tau_p_bar q_s and tau_r q_x
  Vector d_s, d_x;
  Matrix f_scaled;      // sqrt(theta_s theta_x) diag(tau_s^1/2) A diag(tau_x^1/2)
  Matrix h;             // [[D_s, F], [-F^T D_s, D_x - F^T F]]
};

/// Linearization at the fixed point `at` (its p_bar and r are read) with held
/// stepsizes tau_p_bar and tau_r.
inline LinearizedSystem build_linearized_system(const Matrix& a, const EstimatorPair& est, const DampingPair& d,
                                                const Vector& tau_p_bar, const Vector& tau_r, const GampState& at) {
  d.validate();
  const Index m = a.rows(), n = a.cols();
  if (tau_p_bar.size() != m || tau_r.size() != n) throw InvalidParameterError("stepsize lengths do not match A");
  if (at.p_bar.size() != m || at.r.size() != n) throw InvalidParameterError("fixed point lacks p_bar or r");
  LinearizedSystem sys;
  sys.damping = d;
  sys.a = a;
  sys.q_s.resize(m);
  sys.q_x.resize(n);
  for (Index i = 0; i < m; ++i) sys.q_s(i) = est.output->evaluate(i, at.p_bar(i), tau_p_bar(i)).derivative;
  for (Index j = 0; j < n; ++j) sys.q_x(j) = est.input->evaluate(j, at.r(j), tau_r(j)).derivative;
  auto in_open_unit = [](const Vector& v) { return ((v.array() > 0.0) && (v.array() < 1.0)).all(); };
  if (!in_open_unit(sys.q_s) || !in_open_unit(sys.q_x))
    throw AssumptionViolationError("estimator derivatives must lie in (0, 1) at the fixed point");
  sys.tau_s = tau_p_bar.cwiseProduct(sys.q_s);
  sys.tau_x = tau_r.cwiseProduct(sys.q_x);
  sys.d_s = (1.0 - d.theta_s) + d.theta_s * sys.q_s.array();
  sys.d_x = (1.0 - d.theta_x) + d.theta_x * sys.q_x.array();
  sys.f_scaled = std::sqrt(d.theta_s * d.theta_x) * sys.tau_s.cwiseSqrt().asDiagonal() * a *
                 sys.tau_x.cwiseSqrt().asDiagonal();
  const Matrix& f = sys.f_scaled;
  sys.h.resize(m + n, m + n);
  sys.h.topLeftCorner(m, m) = sys.d_s.asDiagonal();
  sys.h.topRightCorner(m, n) = f;
  sys.h.bottomLeftCorner(n, m) = -(f.transpose() * sys.d_s.asDiagonal());
  sys.h.bottomRightCorner(n, n) = -(f.transpose() * f);
  sys.h.bottomRightCorner(n, n).diagonal() += sys.d_x;
  return sys;
}

/// Gaussian instance: q_s = tauw_bar/(tauw_bar + tau_p_bar) and
/// q_x = tau0/(tau0 + tau_r) regardless of the point.
inline LinearizedSystem build_linearized_system(const ProblemInstance& inst, const DampingPair& d,
                                                const Vector& tau_p_bar, const Vector& tau_r,
                                                const GampState& at) {
  return build_linearized_system(inst.a, make_estimators(inst, GampMode::Gaussian), d, tau_p_bar, tau_r, at);
}

inline LinearizedSystem build_linearized_system(const ProblemInstance& inst, const DampingPair& d,
                                                const Vector& tau_p_bar, const Vector& tau_r) {
  GampState at;
  at.p_bar = Vector::Zero(inst.m());
  at.r = Vector::Zero(inst.n());
  return build_linearized_system(inst, d, tau_p_bar, tau_r, at);
}

/// The affine iteration matrix G acting on (s_bar^{t-1}, x^t); H is similar to it.
inline Matrix iteration_matrix(const LinearizedSystem& sys) {
  const Index m = sys.a.rows(), n = sys.a.cols();
  const double ts = sys.damping.theta_s, tx = sys.damping.theta_x;
  Matrix upper = Matrix::Identity(m + n, m + n);
  upper.topLeftCorner(m, m) = sys.d_s.asDiagonal();
  upper.topRightCorner(m, n) = ts * sys.tau_s.asDiagonal() * sys.a;
  Matrix lower = Matrix::Identity(m + n, m + n);
  lower.bottomLeftCorner(n, m) = -tx * sys.tau_x.asDiagonal() * sys.a.transpose();
  lower.bottomRightCorner(n, n) = sys.d_x.asDiagonal();
  return lower * upper;
}

inline double spectral_radius(const Matrix& h) {
  if (h.rows() != h.cols()) throw InvalidParameterError("spectral radius needs a square matrix");
  if (h.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(h, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver did not converge");
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool exact_stability_from_h(const LinearizedSystem& sys) { return spectral_radius(sys.h) < 1.0; }

/// Spectral radius of H for scalar stepsizes from the singular values alone:
/// each sigma contributes the roots of
/// lambda^2 + (sigma^2 c - d_x - d_s) lambda + d_s d_x with
/// c = theta_s theta_x tau_x tau_s; unmatched dimensions contribute d_s or d_x.
inline double scalar_h_spectral_radius(const Vector& sv, Index m, Index n, double d_s, double d_x, double c) {
  double rho = 0.0;
  for (Index k = 0; k < sv.size(); ++k) {
    const double b = sv(k) * sv(k) * c - d_x - d_s;
    const std::complex<double> disc = std::sqrt(std::complex<double>(b * b - 4.0 * d_s * d_x, 0.0));
    rho = std::max({rho, std::abs((-b + disc) / 2.0), std::abs((-b - disc) / 2.0)});
  }
  const Index k = std::min(m, n);
  if (n > k) rho = std::max(rho, d_x);
  if (m > k) rho = std::max(rho, d_s);
  return rho;
}

struct LocalStability {
  bool sufficient = false;
  double a_tilde_norm_sq = 0.0;
  double kappa_tilde = kNaN;
  double kappa_bound = 0.0;  // 1 / (theta_x theta_s max(mean q_s, mean q_x))
  Matrix a_tilde;
};

/// theta_s theta_x ||A~||_2^2 < 1 with the row-column normalized
/// A~ = diag^1/2(tau_p_bar q_s) A diag^1/2(tau_r q_x).
inline LocalStability local_stability_thm3(const LinearizedSystem& sys) {
  LocalStability ls;
  ls.a_tilde = sys.tau_s.cwiseSqrt().asDiagonal() * sys.a * sys.tau_x.cwiseSqrt().asDiagonal();
  const Vector sv = singular_values(ls.a_tilde);
  ls.a_tilde_norm_sq = sv.size() ? sv(0) * sv(0) : 0.0;
  ls.sufficient = sys.damping.product() * ls.a_tilde_norm_sq < 1.0;
  const double frob_sq = ls.a_tilde.squaredNorm();
  if (frob_sq > 0.0) ls.kappa_tilde = kappa_from(ls.a_tilde_norm_sq, frob_sq, sys.a.rows(), sys.a.cols());
  ls.kappa_bound = 1.0 / (sys.damping.product() * std::max(sys.q_s.mean(), sys.q_x.mean()));
  return ls;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

/// Above this size H's spectral radius comes from the singular values.
inline constexpr Index kDenseEigenLimit = 2000;

struct StabilityReport {
  Index m = 0, n = 0;
  DampingPair damping;
  double tau0 = 1.0;
  double tauw_bar = 1.0;
  double gamma_big = 0.0;
  double kappa = 0.0;
  double kappa_max = 0.0;
  double gamma_small = 0.0;
  double a_tilde_norm_sq = 0.0;
  double h_spectral_radius = 0.0;
  std::string h_method;
  Thm2Verdict verdict_thm2 = Thm2Verdict::Boundary;
  bool verdict_thm3 = false;
  bool verdict_exact = false;
  bool jury_agrees = true;
};

inline StabilityReport analyze(const Matrix& a, const DampingPair& d, double tau0 = 1.0, double tauw_bar = 1.0) {
  d.validate();
  StabilityReport rep;
  rep.m = a.rows();
  rep.n = a.cols();
  rep.damping = d;
  rep.tau0 = tau0;
  rep.tauw_bar = tauw_bar;
  const auto st = spectral_stats(a);
  rep.gamma_big = gamma_thm2(rep.m, rep.n, d);
  rep.kappa = st.kappa;
  rep.kappa_max = kappa_max(rep.m, rep.n, d);
  rep.verdict_thm2 = classify_thm2(rep.gamma_big, st.op_norm_sq, st.frob_norm_sq);

  const auto ex = exact_scalar_ggamp_stability(a, st.singular_values, d, tau0, tauw_bar);
  rep.gamma_small = ex.gamma_small;
  rep.verdict_exact = ex.stable;
  rep.jury_agrees = ex.stable == ex.jury_stable;

  const auto& s = ex.stepsizes;
  const double c = d.product() * s.tau_x * s.tau_s;
  if (rep.m + rep.n <= kDenseEigenLimit) {
    ProblemInstance inst;
    inst.a = a;
    inst.x0 = Vector::Zero(rep.n);
    inst.tau0 = Vector::Constant(rep.n, tau0);
    inst.y = Vector::Zero(rep.m);
    inst.tauw_bar = Vector::Constant(rep.m, tauw_bar);
    const auto sys = build_linearized_system(inst, d, Vector::Constant(rep.m, s.tau_p_bar), Vector::Constant(rep.n, s.tau_r));
    rep.h_spectral_radius = spectral_radius(sys.h);
    rep.h_method = "dense_eigen";
    const auto ls = local_stability_thm3(sys);
    rep.verdict_thm3 = ls.sufficient;
    rep.a_tilde_norm_sq = ls.a_tilde_norm_sq;
  } else {
    rep.h_spectral_radius = scalar_h_spectral_radius(st.singular_values, rep.m, rep.n, ex.d_s, ex.d_x, c);
    rep.h_method = "singular_values";
    // scalar stepsizes: A~ = sqrt(tau_s tau_x) A
    rep.a_tilde_norm_sq = s.tau_s * s.tau_x * st.op_norm_sq;
    rep.verdict_thm3 = d.product() * rep.a_tilde_norm_sq < 1.0;
  }
  return rep;
}

}  // namespace gamplab
