#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include "gamplab/analysis.hpp"
#include "gamplab/baselines.hpp"
#include "gamplab/ensembles.hpp"
#include "gamplab/estimators.hpp"
#include "gamplab/gamp.hpp"
#include "gamplab/harness/config.hpp"
#include "gamplab/harness/manifest.hpp"
#include "gamplab/harness/svg.hpp"
#include "gamplab/io.hpp"

namespace gamplab::harness {

namespace fs = std::filesystem;

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitDiverged = 2;
inline constexpr int kExitMaxIters = 3;
inline constexpr int kExitMismatch = 4;

inline int exit_code(Outcome o) {
  switch (o) {
    case Outcome::Converged: return kExitOk;
    case Outcome::Diverged: return kExitDiverged;
    case Outcome::MaxIters: return kExitMaxIters;
  }
  return kExitConfig;
}

/// Worker count: GAMPLAB_THREADS if set and positive, else the hardware count.
inline unsigned thread_budget() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("GAMPLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return hw;
}

/// Runs body(k) for k in [0, count) on up to `threads` workers. Results must
/// be stored by index; the first exception is rethrown after all workers join.
template <typename Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
  threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, threads), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::atomic<bool> failed{false};
  auto work = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count || failed.load()) return;
      try {
        body(k);
      } catch (...) {
        if (!failed.exchange(true)) first = std::current_exception();
      }
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  if (first) std::rethrow_exception(first);
}

// ---------------------------------------------------------------------------
// Problem construction
// ---------------------------------------------------------------------------

struct BuiltProblem {
  ProblemInstance inst;
  EstimatorPair estimators;
  std::vector<PotentialPtr> f;  // output potentials (max-sum / Gaussian)
  std::vector<PotentialPtr> g;  // input potentials (max-sum / Gaussian)
  Vector x_true;
  std::optional<Vector> oracle;  // Gaussian priors only
};

inline Matrix build_matrix(const ExperimentConfig& ec) {
  EnsembleSpec spec = ec.ensemble;
  spec.seed = derive_seed(ec.seed, {0});
  return generate(spec);
}

/// Matrix from the ensemble, x drawn from the configured prior, and
/// y = A x + N(0, 1/tauw_bar).
inline BuiltProblem build_problem(const ExperimentConfig& ec) {
  BuiltProblem bp;
  Matrix a = build_matrix(ec);
  const Index m = a.rows(), n = a.cols();
  const auto& pp = ec.problem;
  const auto& es = ec.estimator;
  Rng rng(derive_seed(ec.seed, {1}));

  bp.x_true.resize(n);
  for (Index j = 0; j < n; ++j) {
    switch (es.prior) {
      case PriorKind::Gaussian: bp.x_true(j) = pp.x0 + std::sqrt(pp.tau0) * rng.normal(); break;
      case PriorKind::Laplace:
      case PriorKind::SmoothLaplace: {
        const double u = rng.uniform() - 0.5;
        bp.x_true(j) = pp.x0 - std::copysign(std::log1p(-2.0 * std::abs(u)), u) / es.lambda;
        break;
      }
      case PriorKind::BernoulliGaussian: {
        const bool on = rng.uniform() < es.rho;
        const double z = pp.x0 + std::sqrt(pp.tau0) * rng.normal();
        bp.x_true(j) = on ? z : 0.0;
        break;
      }
    }
  }

  auto& inst = bp.inst;
  inst.a = std::move(a);
  inst.x0 = Vector::Constant(n, pp.x0);
  inst.tau0 = Vector::Constant(n, pp.tau0);
  inst.tauw_bar = Vector::Constant(m, pp.tauw_bar);
  inst.y = inst.a * bp.x_true + rng.gaussian_vector(m, 1.0 / std::sqrt(pp.tauw_bar));
  inst.validate();

  const GampMode mode = ec.gamp.mode;
  for (Index i = 0; i < m; ++i) bp.f.push_back(std::make_shared<QuadraticPotential>(inst.y(i), pp.tauw_bar));
  switch (es.prior) {
    case PriorKind::Gaussian:
      bp.estimators = make_estimators(inst, mode, es.quadrature_order);
      bp.g.push_back(std::make_shared<QuadraticPotential>(pp.x0, 1.0 / pp.tau0));
      bp.oracle = gaussian_oracle(inst);
      break;
    case PriorKind::Laplace:
    case PriorKind::SmoothLaplace: {
      PotentialPtr pot;
      if (es.prior == PriorKind::Laplace)
        pot = std::make_shared<AbsPotential>(es.lambda, pp.x0);
      else
        pot = std::make_shared<SmoothAbsPotential>(es.lambda, es.eps, pp.x0);
      bp.g.push_back(pot);
      if (mode == GampMode::MaxSum) {
        bp.estimators = {std::make_shared<MaxSumInputEstimator>(bp.g), std::make_shared<MaxSumOutputEstimator>(bp.f)};
      } else {
        const ScalarDensity::Hint hint{pp.x0, 2.0 / (es.lambda * es.lambda)};
        std::vector<DensityPtr> prior{std::make_shared<GibbsDensity>(pot, hint)};
        std::vector<DensityPtr> lik;
        for (Index i = 0; i < m; ++i) lik.push_back(std::make_shared<GaussianDensity>(inst.y(i), 1.0 / pp.tauw_bar));
        bp.estimators = {std::make_shared<SumProductInputEstimator>(prior, es.quadrature_order),
                         std::make_shared<SumProductOutputEstimator>(lik, es.quadrature_order)};
      }
      break;
    }
    case PriorKind::BernoulliGaussian: {
      std::vector<DensityPtr> prior{std::make_shared<BernoulliGaussianDensity>(es.rho, pp.x0, pp.tau0)};
      std::vector<DensityPtr> lik;
      for (Index i = 0; i < m; ++i) lik.push_back(std::make_shared<GaussianDensity>(inst.y(i), 1.0 / pp.tauw_bar));
      bp.estimators = {std::make_shared<SumProductInputEstimator>(prior, es.quadrature_order),
                       std::make_shared<SumProductOutputEstimator>(lik, es.quadrature_order)};
      break;
    }
  }
  return bp;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

struct SolveReport {
  RunResult gamp;
  std::optional<PdhgResult> pdhg;
  double final_dist_to_oracle = kNaN;
  int exit = kExitOk;
};

inline const std::vector<std::string>& summary_columns() {
  static const std::vector<std::string> cols = {
      "solver", "outcome", "iterations", "final_x_change", "final_dist_to_oracle", "mode", "stepsize_mode",
      "theta_s", "theta_x", "kappa", "kappa_max", "predicted"};
  return cols;
}

/// Writes trace.csv and summary.csv (plus pdhg_trace.csv when PDHG is on).
inline SolveReport run_solve(const ExperimentConfig& ec, const fs::path& out, std::ostream* log = nullptr) {
  fs::create_directories(out);
  BuiltProblem bp = build_problem(ec);
  const auto& inst = bp.inst;
  SolveReport rep;

  RunOptions opts;
  opts.oracle = bp.oracle;
  Gamp solver(inst.a, bp.estimators, ec.gamp);
  double last_change = kNaN;
  {
    CsvWriter trace((out / "trace.csv").string(), trace_columns());
    auto sink = [&](const IterationRecord& r, const GampState&) {
      trace.row(trace_row(r));
      last_change = r.x_change;
    };
    rep.gamp = solver.run(initial_state(inst, ec.gamp), sink, opts);
  }
  if (bp.oracle && rep.gamp.state.x.allFinite()) rep.final_dist_to_oracle = relative_distance(rep.gamp.state.x, *bp.oracle);

  const auto st = spectral_stats(inst.a);
  const DampingPair d{ec.gamp.theta_s, ec.gamp.theta_x};
  const auto verdict = predict_scalar_ggamp(st, inst.m(), inst.n(), d);
  const std::vector<std::string> common = {to_string(ec.gamp.mode), to_string(ec.gamp.stepsize_mode),
                                           format_double(d.theta_s), format_double(d.theta_x),
                                           format_double(st.kappa), format_double(kappa_max(inst.m(), inst.n(), d)),
                                           to_string(verdict)};

  CsvWriter summary((out / "summary.csv").string(), summary_columns());
  std::vector<std::string> row = {"gamp", to_string(rep.gamp.outcome), std::to_string(rep.gamp.iterations),
                                  format_double(last_change), format_double(rep.final_dist_to_oracle)};
  row.insert(row.end(), common.begin(), common.end());
  summary.row(row);

  if (ec.pdhg.enabled) {
    if (bp.g.empty()) throw InvalidParameterError("PDHG comparison needs a max-sum prior (gaussian, laplace, smooth_laplace)");
    PdhgConfig pc;
    pc.theta = ec.pdhg.theta;
    pc.max_iters = ec.pdhg.max_iters;
    pc.conv_tol = ec.gamp.conv_tol;
    pc.divergence_threshold = ec.gamp.divergence_threshold;
    CsvWriter trace((out / "pdhg_trace.csv").string(), trace_columns());
    double pdhg_change = kNaN;
    auto sink = [&](const IterationRecord& r, const Vector&, const Vector&, const Vector&) {
      trace.row(trace_row(r));
      pdhg_change = r.x_change;
    };
    rep.pdhg = pdhg_run(inst.a, bp.f, bp.g, pc, inst.x0, sink, opts);
    const double dist = bp.oracle ? relative_distance(rep.pdhg->x_hat, *bp.oracle) : kNaN;
    std::vector<std::string> prow = {"pdhg", to_string(rep.pdhg->outcome), std::to_string(rep.pdhg->iterations),
                                     format_double(pdhg_change), format_double(dist)};
    prow.insert(prow.end(), common.begin(), common.end());
    summary.row(prow);
  }

  rep.exit = exit_code(rep.gamp.outcome);
  if (log) {
    *log << "gamp: " << to_string(rep.gamp.outcome) << " after " << rep.gamp.iterations << " iterations";
    if (bp.oracle) *log << ", relative distance to oracle " << format_double(rep.final_dist_to_oracle);
    *log << '\n';
    if (!rep.gamp.message.empty()) *log << "  " << rep.gamp.message << '\n';
    if (rep.pdhg) *log << "pdhg: " << to_string(rep.pdhg->outcome) << " after " << rep.pdhg->iterations << " iterations\n";
  }
  return rep;
}

// ---------------------------------------------------------------------------
// phase diagram
// ---------------------------------------------------------------------------

enum class EmpiricalVerdict { Converges, Diverges, Undecided };

inline std::string to_string(EmpiricalVerdict v) {
  switch (v) {
    case EmpiricalVerdict::Converges: return "converges";
    case EmpiricalVerdict::Diverges: return "diverges";
    case EmpiricalVerdict::Undecided: return "undecided";
  }
  return "unknown";
}

struct PhaseCell {
  double kappa_target = 0.0;
  DampingPair damping;
  double tau0_tauw = 0.0;
  double kappa_max = 0.0;
  double margin = 0.0;  // (kappa_max - kappa) / kappa
  Thm2Verdict predicted = Thm2Verdict::Boundary;
  EmpiricalVerdict empirical = EmpiricalVerdict::Undecided;
  int converged = 0;
  int diverged = 0;
  int trials = 0;
  long iterations = 0;  // summed over trials
  bool agree() const {
    return (predicted == Thm2Verdict::Converges && empirical == EmpiricalVerdict::Converges) ||
           (predicted == Thm2Verdict::Diverges && empirical == EmpiricalVerdict::Diverges);
  }
};

/// theta with theta_s = theta_x = theta and kappa_max(theta, theta) = kappa;
/// NaN when no damping is needed (kappa below the undamped limit).
inline double boundary_theta(Index m, Index n, double kappa) {
  if (kappa_max(m, n, {1.0, 1.0}) >= kappa) return kNaN;
  double lo = 1e-12, hi = 1.0;  // kappa_max decreases in theta
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (kappa_max(m, n, {mid, mid}) > kappa)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

struct PhaseDiagram {
  Index m = 0, n = 0;
  std::vector<PhaseCell> cells;
  std::vector<DampingPair> damping_axis;
  std::vector<double> kappa_axis;
  std::vector<double> tau_axis;
};

inline std::vector<DampingPair> damping_axis(const SweepAxes& sw) {
  std::vector<DampingPair> out;
  for (double p : sw.theta_product) out.push_back({std::sqrt(p), std::sqrt(p)});
  for (double ts : sw.theta_s)
    for (double tx : sw.theta_x) out.push_back({ts, tx});
  return out;
}

/// Grid over (tau0*tauw_bar, kappa target, damping). Each trial synthesizes a
/// prescribed-kappa matrix and runs scalar Gaussian GAMP with
/// tau0 = tauw_bar = sqrt(tau0*tauw_bar).
inline PhaseDiagram compute_phase_diagram(const ExperimentConfig& ec, unsigned threads) {
  PhaseDiagram pd;
  pd.m = ec.ensemble.m;
  pd.n = ec.ensemble.n;
  pd.kappa_axis = ec.sweep.kappa;
  pd.damping_axis = damping_axis(ec.sweep);
  pd.tau_axis = ec.sweep.tau0_tauw.empty() ? std::vector<double>{1e6} : ec.sweep.tau0_tauw;
  if (pd.kappa_axis.empty()) throw ConfigError("phase-diagram: sweep axis 'kappa' is empty");
  if (pd.damping_axis.empty())
    throw ConfigError("phase-diagram: no damping values (set 'theta_product' or both 'theta_s' and 'theta_x')");
  const double kmin = static_cast<double>(std::min(pd.m, pd.n));
  for (double k : pd.kappa_axis)
    if (k > kmin) throw ConfigError("phase-diagram: kappa target " + format_double(k) + " exceeds min(m, n)");

  for (double tau : pd.tau_axis)
    for (double k : pd.kappa_axis)
      for (const auto& d : pd.damping_axis) {
        PhaseCell c;
        c.kappa_target = k;
        c.damping = d;
        c.tau0_tauw = tau;
        c.kappa_max = kappa_max(pd.m, pd.n, d);
        c.margin = (c.kappa_max - k) / k;
        c.predicted = classify_thm2(gamma_thm2(pd.m, pd.n, d), k, kmin);
        c.trials = ec.trials;
        pd.cells.push_back(c);
      }

  const std::size_t trials = static_cast<std::size_t>(ec.trials);
  std::vector<Outcome> outcomes(pd.cells.size() * trials);
  std::vector<long> iters(outcomes.size());
  parallel_for(outcomes.size(), threads, [&](std::size_t job) {
    const std::size_t ci = job / trials, t = job % trials;
    const auto& c = pd.cells[ci];
    EnsembleSpec spec;
    spec.kind = EnsembleKind::PrescribedKappa;
    spec.m = pd.m;
    spec.n = pd.n;
    spec.kappa = c.kappa_target;
    spec.seed = derive_seed(ec.seed, {ci, t, 0});
    const double v = std::sqrt(c.tau0_tauw);
    auto inst = synthesize_gaussian_instance(generate(spec), v, v, derive_seed(ec.seed, {ci, t, 1}));
    GampConfig cfg = ec.gamp;
    cfg.mode = GampMode::Gaussian;
    cfg.stepsize_mode = StepsizeMode::Scalar;
    cfg.theta_s = c.damping.theta_s;
    cfg.theta_x = c.damping.theta_x;
    const auto res = run(inst, cfg);
    outcomes[job] = res.outcome;
    iters[job] = res.iterations;
  });

  for (std::size_t ci = 0; ci < pd.cells.size(); ++ci) {
    auto& c = pd.cells[ci];
    for (std::size_t t = 0; t < trials; ++t) {
      const auto o = outcomes[ci * trials + t];
      c.converged += o == Outcome::Converged;
      c.diverged += o == Outcome::Diverged;
      c.iterations += iters[ci * trials + t];
    }
    if (2 * c.converged > c.trials)
      c.empirical = EmpiricalVerdict::Converges;
    else if (2 * c.diverged > c.trials)
      c.empirical = EmpiricalVerdict::Diverges;
  }
  return pd;
}

inline void write_phase_diagram(const PhaseDiagram& pd, const fs::path& out) {
  fs::create_directories(out);
  {
    CsvWriter csv((out / "phase.csv").string(),
                  {"tau0_tauw", "kappa", "theta_s", "theta_x", "theta_product", "kappa_max", "margin", "predicted",
                   "empirical", "converged_trials", "diverged_trials", "trials", "agree"});
    for (const auto& c : pd.cells)
      csv.row({format_double(c.tau0_tauw), format_double(c.kappa_target), format_double(c.damping.theta_s),
               format_double(c.damping.theta_x), format_double(c.damping.product()), format_double(c.kappa_max),
               format_double(c.margin), to_string(c.predicted), to_string(c.empirical), std::to_string(c.converged),
               std::to_string(c.diverged), std::to_string(c.trials), c.agree() ? "true" : "false"});
  }
  {
    // Boundary theta_s theta_x = C / kappa along the diagonal theta_s = theta_x.
    CsvWriter csv((out / "boundary.csv").string(), {"kappa", "theta", "theta_product", "C"});
    for (double k : pd.kappa_axis) {
      const double th = boundary_theta(pd.m, pd.n, k);
      csv.row({format_double(k), format_double(th), format_double(th * th), format_double(k * th * th)});
    }
  }

  const std::size_t nd = pd.damping_axis.size(), nk = pd.kappa_axis.size();
  for (std::size_t ti = 0; ti < pd.tau_axis.size(); ++ti) {
    std::vector<std::string> xt, yt;
    for (const auto& d : pd.damping_axis)
      xt.push_back(d.theta_s == d.theta_x ? format_double(d.product())
                                          : format_double(d.theta_s) + "/" + format_double(d.theta_x));
    for (double k : pd.kappa_axis) yt.push_back(format_double(k));
    std::vector<std::vector<GridCell>> grid(nk, std::vector<GridCell>(nd));
    for (std::size_t ki = 0; ki < nk; ++ki)
      for (std::size_t di = 0; di < nd; ++di) {
        const auto& c = pd.cells[(ti * nk + ki) * nd + di];
        GridCell g;
        if (c.predicted == Thm2Verdict::Boundary || c.empirical == EmpiricalVerdict::Undecided)
          g.fill = "#d9d9d9";
        else
          g.fill = c.agree() ? (c.empirical == EmpiricalVerdict::Converges ? "#9fd89f" : "#8fb8e0") : "#e57373";
        g.label = std::string(c.predicted == Thm2Verdict::Converges ? "C" : c.predicted == Thm2Verdict::Diverges ? "D" : "B") +
                  "/" + (c.empirical == EmpiricalVerdict::Converges ? "C" : c.empirical == EmpiricalVerdict::Diverges ? "D" : "?");
        grid[ki][di] = g;
      }
    const std::string title = "scalar GAMP, " + std::to_string(pd.m) + "x" + std::to_string(pd.n) +
                              ", tau0*tauw = " + format_double(pd.tau_axis[ti]);
    const auto svg = grid_svg(title, "theta_s*theta_x (or theta_s/theta_x)", "kappa", xt, yt, grid,
                              {"label: predicted/empirical (C converges, D diverges, B boundary, ? undecided)",
                               "green/blue: agree (converge/diverge); red: disagree; gray: boundary or undecided"});
    const std::string name = pd.tau_axis.size() == 1 ? "phase.svg" : "phase_" + std::to_string(ti) + ".svg";
    write_text_file((out / name).string(), svg);
  }
}

// ---------------------------------------------------------------------------
// compare-pdhg
// ---------------------------------------------------------------------------

struct PdhgComparison {
  long iterations = 0;
  double max_rel_diff_x = 0.0;
  double max_rel_diff_s = 0.0;
  double tau_p_bar = 0.0;
  double tau_r = 0.0;
};

inline double rel_diff(const Vector& a, const Vector& b) { return (a - b).norm() / std::max(1.0, b.norm()); }

/// Undamped frozen-stepsize scalar GAMP against PDHG with theta = 0, both at
/// the scalar Gaussian stepsize fixed point, iterate by iterate.
inline PdhgComparison compare_pdhg(const ProblemInstance& inst, GampMode mode, long iterations,
                                   CsvWriter* csv = nullptr) {
  GampConfig base;
  base.stepsize_mode = StepsizeMode::Scalar;
  const auto fp = solve_stepsize_fixed_point(inst, base);
  PdhgComparison cmp;
  cmp.iterations = iterations;
  cmp.tau_p_bar = fp.tau_p_bar(0);
  cmp.tau_r = fp.tau_r(0);

  GampConfig cfg;
  cfg.mode = mode;
  cfg.stepsize_mode = StepsizeMode::Frozen;
  cfg.frozen_tau_p_bar = Vector::Constant(1, cmp.tau_p_bar);
  cfg.frozen_tau_r = Vector::Constant(1, cmp.tau_r);
  cfg.theta_s = cfg.theta_x = 1.0;
  cfg.divergence_threshold = kInf;
  Gamp gamp(inst.a, make_estimators(inst, mode), cfg);
  std::vector<Vector> gx, gs;
  GampState st = initial_state(inst, cfg);
  for (long t = 0; t < iterations; ++t) {
    st = gamp.iterate(st);
    gx.push_back(st.x);
    gs.push_back(st.s_bar);
  }

  auto [f, g] = gaussian_potentials(inst);
  PdhgConfig pc;
  pc.tau_p_bar = cmp.tau_p_bar;
  pc.tau_r = cmp.tau_r;
  pc.theta = 0.0;
  pc.max_iters = iterations;
  pc.conv_tol = 0.0;
  pc.divergence_threshold = kInf;
  long t = 0;
  pdhg_run(inst.a, f, g, pc, inst.x0, [&](const IterationRecord&, const Vector& x_hat, const Vector&, const Vector& s_bar) {
    const double dx = rel_diff(x_hat, gx[t]);
    const double ds = rel_diff(s_bar, gs[t]);
    cmp.max_rel_diff_x = std::max(cmp.max_rel_diff_x, dx);
    cmp.max_rel_diff_s = std::max(cmp.max_rel_diff_s, ds);
    ++t;
    if (csv) csv->row({std::to_string(t), format_double(dx), format_double(ds)});
  });
  return cmp;
}

}  // namespace gamplab::harness
