// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "gamplab/analysis.hpp"
#include "gamplab/baselines.hpp"
#include "gamplab/harness/experiments.hpp"

using namespace gamplab;

namespace {

using Clock = std::chrono::steady_clock;

double elapsed(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Matrix prescribed(Index m, Index n, double kappa, std::uint64_t seed) {
  EnsembleSpec s;
  s.kind = EnsembleKind::PrescribedKappa;
  s.m = m;
  s.n = n;
  s.kappa = kappa;
  s.seed = seed;
  return generate(s);
}

ProblemInstance gaussian_instance(const Matrix& a, double tau0, double tauw) {
  ProblemInstance inst;
  inst.a = a;
  inst.x0 = Vector::Zero(a.cols());
  inst.tau0 = Vector::Constant(a.cols(), tau0);
  inst.y = Vector::Zero(a.rows());
  inst.tauw_bar = Vector::Constant(a.rows(), tauw);
  return inst;
}

// t in (0, 1] with kappa_max(m, n, d(t)) = target; kappa_max decreases in t
double solve_damping(Index m, Index n, double target, const std::function<DampingPair(double)>& d) {
  double lo = 1e-9, hi = 1.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (kappa_max(m, n, d(mid)) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void criterion1() {
  const auto t0 = Clock::now();
  const std::pair<Index, Index> shapes[] = {{200, 100}, {100, 200}, {150, 150}};
  const int count = 40;
  std::vector<int> agree(count, 0);
  std::vector<std::string> note(count);
  harness::parallel_for(count, harness::thread_budget(), [&](std::size_t k) {
    Rng rng(derive_seed(1001, {k}));
    const auto [m, n] = shapes[k % 3];
    const bool converge_side = (k / 3) % 2 == 0;
    // damping direction: symmetric, output only, input only
    std::function<DampingPair(double)> dir;
    switch ((k / 6) % 3) {
      case 0: dir = [](double t) { return DampingPair{t, t}; }; break;
      case 1: dir = [](double t) { return DampingPair{t, 1.0}; }; break;
      default: dir = [](double t) { return DampingPair{1.0, t}; }; break;
    }
    const double kappa = rng.uniform(8.0, 40.0);
    const Matrix a = prescribed(m, n, kappa, rng.next_u64());
    const auto st = spectral_stats(a);
    const double ratio = st.op_norm_sq / st.frob_norm_sq;
    // Gamma 20% above or below ||A||_2^2 / ||A||_F^2
    const double gamma_target = converge_side ? 1.2 * ratio : 0.8 * ratio;
    const DampingPair d = dir(solve_damping(m, n, gamma_target * std::min(m, n), dir));
    const auto predicted = predict_scalar_ggamp(st, m, n, d);
    auto inst = synthesize_gaussian_instance(a, 1e3, 1e3, rng.next_u64());
    GampConfig cfg;
    cfg.stepsize_mode = StepsizeMode::Scalar;
    cfg.theta_s = d.theta_s;
    cfg.theta_x = d.theta_x;
    cfg.max_iters = 400000;
    cfg.conv_tol = 1e-10;
    const auto res = run(inst, cfg);
    const bool ok = (predicted == Thm2Verdict::Converges && res.outcome == Outcome::Converged) ||
                    (predicted == Thm2Verdict::Diverges && res.outcome == Outcome::Diverged);
    agree[k] = ok;
    if (!ok)
      note[k] = std::to_string(m) + "x" + std::to_string(n) + " predicted " + to_string(predicted) + " got " +
                to_string(res.outcome);
  });
  int hits = 0;
  std::string misses;
  for (int k = 0; k < count; ++k) {
    hits += agree[k];
    if (!agree[k]) misses += "; " + note[k];
  }
  const double secs = elapsed(t0);
  report(1, hits == count && secs <= 120.0, "phase boundary verdicts at 20% margin",
         std::to_string(hits) + "/40 agree, " + fmt("%.1f s", secs) + misses);
}

void criterion2() {
  const auto t0 = Clock::now();
  EnsembleSpec s;
  s.m = 2000;
  s.n = 1000;
  s.seed = 2;
  const double kappa = spectral_stats(generate(s)).kappa;
  const double expect = 0.5 * std::pow(1.0 + std::sqrt(2.0), 2);
  const double rel = std::abs(kappa - expect) / expect;
  const double secs = elapsed(t0);
  report(2, rel <= 0.05 && secs <= 30.0, "Marchenko-Pastur kappa of 2000x1000 i.i.d. Gaussian",
         "kappa " + fmt("%.4f", kappa) + " vs " + fmt("%.4f", expect) + ", rel " + fmt("%.2e", rel) + ", " +
             fmt("%.1f s", secs));
}

void criterion3() {
  Rng rng(3003);
  int converged = 0, matched = 0;
  double worst = 0.0;
  const EnsembleKind kinds[] = {EnsembleKind::IidGaussian, EnsembleKind::PrescribedKappa,
                                EnsembleKind::SubsampledUnitary, EnsembleKind::Circulant};
  for (int k = 0; k < 50; ++k) {
    EnsembleSpec s;
    s.kind = kinds[k % 4];
    s.m = 20 + static_cast<Index>(rng.uniform() * 60);
    s.n = 20 + static_cast<Index>(rng.uniform() * 60);
    s.seed = rng.next_u64();
    if (s.kind == EnsembleKind::PrescribedKappa) s.kappa = rng.uniform(1.0, 8.0);
    if (s.kind == EnsembleKind::Circulant) {
      s.n = s.m;
      s.taps = {1.0, rng.uniform(-0.5, 0.5), rng.uniform(-0.3, 0.3)};
      s.taps.resize(static_cast<std::size_t>(s.n), 0.0);
    }
    const Matrix a = generate(s);
    auto inst = synthesize_gaussian_instance(a, rng.uniform(0.5, 2.0), std::exp(rng.uniform(-1.0, 4.0)), rng.next_u64(),
                                             rng.uniform(-1.0, 1.0));
    GampConfig cfg;
    cfg.stepsize_mode = k % 2 ? StepsizeMode::Vector : StepsizeMode::Scalar;
    cfg.mode = k % 3 == 0 ? GampMode::MaxSum : GampMode::Gaussian;
    const double t = predict_scalar_ggamp(a, {1, 1}) == Thm2Verdict::Converges ? 1.0 : 0.3;
    cfg.theta_s = cfg.theta_x = t;
    cfg.max_iters = 100000;
    cfg.conv_tol = 1e-14;
    const auto res = run(inst, cfg);
    if (res.outcome != Outcome::Converged) continue;
    ++converged;
    const double err = relative_distance(res.state.x, gaussian_oracle(inst));
    worst = std::max(worst, err);
    matched += err <= 1e-8;
  }
  report(3, converged >= 40 && matched == converged, "converged Gaussian runs match the LMMSE oracle",
         std::to_string(matched) + "/" + std::to_string(converged) + " converged runs within 1e-8, worst " +
             fmt("%.2e", worst));
}

void criterion4() {
  Rng rng(4004);
  bool ok = true;
  double spread = 0.0;
  for (int inst_id = 0; inst_id < 3; ++inst_id) {
    EnsembleSpec s;
    s.m = 30 + 10 * inst_id;
    s.n = 25;
    s.seed = rng.next_u64();
    ProblemInstance inst = synthesize_gaussian_instance(generate(s), 1.0, 1.0, 1);
    inst.tau0 = (rng.gaussian_vector(s.n).cwiseAbs().array() + 0.2).matrix();
    inst.tauw_bar = (rng.gaussian_vector(s.m).cwiseAbs().array() + 0.2).matrix();
    for (auto mode : {StepsizeMode::Vector, StepsizeMode::Scalar}) {
      GampConfig cfg;
      cfg.stepsize_mode = mode;
      const auto ref = solve_stepsize_fixed_point(inst, cfg);
      for (int k = 0; k < 10; ++k) {
        const Vector init = (rng.gaussian_vector(s.n).cwiseAbs().array() * std::exp(rng.uniform(-5, 5)) + 1e-6).matrix();
        const auto fp = solve_stepsize_fixed_point(inst, cfg, init);
        spread = std::max({spread, relative_distance(fp.tau_x, ref.tau_x), relative_distance(fp.tau_s, ref.tau_s)});
      }
      for (double ts : {0.1, 0.5, 1.0})
        for (double tx : {0.1, 0.5, 1.0}) {
          GampConfig c2 = cfg;
          c2.theta_s = ts;
          c2.theta_x = tx;
          const auto fp = solve_stepsize_fixed_point(inst, c2);
          ok = ok && fp.tau_x == ref.tau_x && fp.tau_s == ref.tau_s && fp.tau_r == ref.tau_r &&
               fp.tau_p_bar == ref.tau_p_bar;
        }
    }
  }
  ProblemInstance one = gaussian_instance(Matrix::Ones(1, 1), 1.0, 1.0);
  const auto fp1 = solve_stepsize_fixed_point(one, GampConfig{});
  const double phi_err = std::abs(fp1.tau_x(0) - (std::sqrt(5.0) - 1.0) / 2.0);
  ok = ok && spread <= 1e-10 && phi_err <= 1e-12;
  report(4, ok, "stepsize fixed point unique and damping-free",
         "init spread " + fmt("%.2e", spread) + ", bitwise across damping grid, golden-ratio error " + fmt("%.1e", phi_err));
}

void criterion5() {
  bool ok = true;
  long checked = 0;
  const std::pair<Index, Index> shapes[] = {{1, 1},   {2, 7},     {7, 2},      {10, 10},  {50, 20},
                                            {20, 50}, {200, 100}, {100, 1000}, {999, 1000}, {5000, 3}};
  for (const auto& [m, n] : shapes)
    for (int i = 1; i <= 20; ++i)
      for (int j = 1; j <= 20; ++j) {
        const DampingPair d{i / 20.0, j / 20.0};
        const double k = kappa_max(m, n, d), p = d.product();
        ok = ok && 2.0 / p <= k && k <= 4.0 / p;
        ++checked;
      }
  double worst_eq = 0.0;
  for (Index n : {1, 2, 10, 150, 1000, 123456}) worst_eq = std::max(worst_eq, std::abs(kappa_max(n, n, {1, 1}) - 4.0));
  ok = ok && worst_eq == 0.0;
  report(5, ok, "kappa_max bounds on the damping grid",
         std::to_string(checked) + " grid points, m = n undamped deviation from 4: " + fmt("%.1e", worst_eq));
}

void criterion6() {
  Rng rng(6006);
  int agree = 0, stable = 0;
  for (int k = 0; k < 200; ++k) {
    const Index m = 5 + static_cast<Index>(rng.uniform() * 40), n = 5 + static_cast<Index>(rng.uniform() * 40);
    const double kap = 1.0 + rng.uniform() * (static_cast<double>(std::min(m, n)) - 1.0);
    const Matrix a = prescribed(m, n, kap, rng.next_u64());
    const DampingPair d{rng.uniform(0.05, 1.0), rng.uniform(0.05, 1.0)};
    const double tau0 = std::exp(rng.uniform(-4, 4)), tauw = std::exp(rng.uniform(-4, 6));
    const auto ex = exact_scalar_ggamp_stability(a, d, tau0, tauw);
    const auto s = ex.stepsizes;
    auto inst = gaussian_instance(a, tau0, tauw);
    const auto sys = build_linearized_system(inst, d, Vector::Constant(m, s.tau_p_bar), Vector::Constant(n, s.tau_r));
    const bool h = exact_stability_from_h(sys);
    agree += ex.stable == ex.jury_stable && ex.stable == h;
    stable += ex.stable;
  }
  const Matrix a = prescribed(200, 100, 3.0, 66);
  const DampingPair d{0.7, 0.4};
  const double gamma_big = gamma_thm2(200, 100, d);
  const double g = exact_scalar_ggamp_stability(a, d, 1.0, 1e8).gamma_small;
  const double rel = std::abs(g - gamma_big) / gamma_big;
  report(6, agree == 200 && rel <= 1e-4, "gamma, Jury and H-eigenvalue verdicts agree",
         std::to_string(agree) + "/200 agree (" + std::to_string(stable) + " stable), noise variance 1e-8 limit rel err " +
             fmt("%.2e", rel));
}

void criterion7() {
  Rng rng(7007);
  int certified = 0, sound = 0, tried = 0;
  double worst_norm = 0.0;
  while (certified < 120 && tried < 600) {
    ++tried;
    const Index m = 10 + static_cast<Index>(rng.uniform() * 30), n = 10 + static_cast<Index>(rng.uniform() * 30);
    const double kap = 1.0 + rng.uniform() * (static_cast<double>(std::min(m, n)) - 1.0) * 0.5;
    const Matrix a = prescribed(m, n, kap, rng.next_u64());
    const DampingPair d{rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
    LinearizedSystem sys;
    if (tried % 2) {
      // Gaussian potentials with heterogeneous variances at the exact vector fixed point
      ProblemInstance inst = synthesize_gaussian_instance(a, 1.0, 1.0, rng.next_u64());
      inst.tau0 = (rng.gaussian_vector(n).cwiseAbs().array() + 0.1).matrix();
      inst.tauw_bar = (rng.gaussian_vector(m).cwiseAbs().array() * std::exp(rng.uniform(-2, 3)) + 0.1).matrix();
      GampConfig cfg;
      cfg.stepsize_mode = StepsizeMode::Vector;
      const auto fp = solve_stepsize_fixed_point(inst, cfg);
      sys = build_linearized_system(inst, d, fp.tau_p_bar, fp.tau_r);
      const auto ls = local_stability_thm3(sys);
      const Vector row = ls.a_tilde.rowwise().squaredNorm(), col = ls.a_tilde.colwise().squaredNorm().transpose();
      worst_norm = std::max({worst_norm, (row - sys.q_s).cwiseAbs().maxCoeff(), (col - sys.q_x).cwiseAbs().maxCoeff()});
    } else {
      // smoothed-Laplace prior, quadratic likelihood: linearize at a converged GAMP state
      const Vector x = rng.gaussian_vector(n);
      const double tauw = std::exp(rng.uniform(-1, 3));
      const Vector y = a * x + rng.gaussian_vector(m) / std::sqrt(tauw);
      std::vector<PotentialPtr> g{std::make_shared<SmoothAbsPotential>(rng.uniform(0.2, 2.0), rng.uniform(0.05, 1.0),
                                                                       0.0, rng.uniform(0.0, 0.5))};
      std::vector<PotentialPtr> f;
      for (Index i = 0; i < m; ++i) f.push_back(std::make_shared<QuadraticPotential>(y(i), tauw));
      EstimatorPair est{std::make_shared<MaxSumInputEstimator>(g), std::make_shared<MaxSumOutputEstimator>(f)};
      GampConfig cfg;
      cfg.mode = GampMode::MaxSum;
      cfg.stepsize_mode = StepsizeMode::Vector;
      cfg.theta_s = cfg.theta_x = 0.5;
      cfg.max_iters = 20000;
      cfg.conv_tol = 1e-12;
      Gamp gamp(a, est, cfg);
      const auto res = gamp.run(gamp.initial_state(Vector::Zero(n), Vector::Ones(n)));
      if (res.outcome != Outcome::Converged) continue;
      sys = build_linearized_system(a, est, d, res.state.tau_p_bar, res.state.tau_r, res.state);
    }
    const auto ls = local_stability_thm3(sys);
    if (!ls.sufficient) continue;
    ++certified;
    sound += spectral_radius(sys.h) < 1.0;
  }
  report(7, certified >= 100 && sound == certified && worst_norm <= 1e-10,
         "normalized-norm condition implies local stability",
         std::to_string(sound) + "/" + std::to_string(certified) + " certified instances stable, row/column norm error " +
             fmt("%.2e", worst_norm));
}

void criterion8() {
  Rng rng(8008);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    EnsembleSpec s;
    s.m = 20 + static_cast<Index>(rng.uniform() * 60);
    s.n = 20 + static_cast<Index>(rng.uniform() * 60);
    s.seed = rng.next_u64();
    auto inst = synthesize_gaussian_instance(generate(s), rng.uniform(0.3, 3.0), std::exp(rng.uniform(-1, 3)),
                                             rng.next_u64(), rng.uniform(-1, 1));
    const auto cmp = harness::compare_pdhg(inst, k % 2 ? GampMode::MaxSum : GampMode::Gaussian, 100);
    worst = std::max({worst, cmp.max_rel_diff_x, cmp.max_rel_diff_s});
  }
  report(8, worst <= 1e-12, "PDHG with theta = 0 equals frozen undamped GAMP",
         "20 instances x 100 iterations, max relative difference " + fmt("%.2e", worst));
}

// prox of t F* by bisection on the stationarity condition, for the
// smoothed absolute value F(z) = lambda (sqrt(z^2 + eps^2) - eps)
double smooth_abs_conjugate_prox(double lambda, double eps, double v, double t) {
  double lo = -lambda, hi = lambda;
  for (int k = 0; k < 400 && hi - lo > 0; ++k) {
    const double u = 0.5 * (lo + hi);
    if (u == lo || u == hi) break;
    const double grad = t * eps * u / std::sqrt(lambda * lambda - u * u) + u - v;
    (grad > 0 ? hi : lo) = u;
  }
  return 0.5 * (lo + hi);
}

void criterion9() {
  Rng rng(9009);
  double moreau = 0.0, fd = 0.0, gauss = 0.0;
  GaussHermiteRule rule(64);
  for (int k = 0; k < 500; ++k) {
    const double v = rng.uniform(-5, 5), t = std::exp(rng.uniform(-2, 2));
    const double c = rng.uniform(-1, 1), w = rng.uniform(0.1, 5), lam = rng.uniform(0.1, 2), eps = rng.uniform(0.1, 1);
    QuadraticPotential q(c, w);
    AbsPotential l1(lam, c);
    SmoothAbsPotential sa(lam, eps);
    moreau = std::max(moreau, std::abs(dual_prox(q, v, t) - (v - t * c) / (1.0 + t / w)));
    moreau = std::max(moreau, std::abs(dual_prox(l1, v, t) - std::clamp(v - t * c, -lam, lam)));
    moreau = std::max(moreau, std::abs(dual_prox(sa, v, t) - smooth_abs_conjugate_prox(lam, eps, v, t)));

    FunctionPotential quartic([](double z) { return z * z * z * z / 4 + z * z / 2; },
                              [](double z) { return z * z * z + z; }, [](double z) { return 3 * z * z + 1; });
    const double r = rng.uniform(-4, 4), h = 1e-5;
    for (const Potential* p : {static_cast<const Potential*>(&q), static_cast<const Potential*>(&sa),
                               static_cast<const Potential*>(&quartic)}) {
      const double num = (prox(*p, r + h, t) - prox(*p, r - h, t)) / (2 * h);
      fd = std::max(fd, std::abs(num - prox_derivative(*p, r, t)));
    }
    if (std::abs(std::abs(r - c) - t * lam) > 1e-3) {
      const double num = (prox(l1, r + h, t) - prox(l1, r - h, t)) / (2 * h);
      fd = std::max(fd, std::abs(num - prox_derivative(l1, r, t)));
    }

    const double x0 = rng.uniform(-2, 2), tau0 = rng.uniform(0.05, 5), rr = rng.uniform(-5, 5), tr = rng.uniform(0.05, 5);
    const auto a = sum_product_input(GaussianDensity(x0, tau0), rr, tr, rule);
    const auto b = max_sum_input(QuadraticPotential(x0, 1.0 / tau0), rr, tr);
    const double y = rng.uniform(-2, 2), tw = rng.uniform(0.05, 5), p = rng.uniform(-5, 5), tp = rng.uniform(0.05, 5);
    const auto e = sum_product_output(GaussianDensity(y, 1.0 / tw), p, tp, rule);
    const auto f = max_sum_output(QuadraticPotential(y, tw), p, tp);
    gauss = std::max({gauss, std::abs(a.value - b.value), std::abs(a.derivative - b.derivative),
                      std::abs(e.value - f.value), std::abs(e.derivative - f.derivative)});
  }
  report(9, moreau <= 1e-10 && fd <= 1e-6 && gauss <= 1e-10, "estimator identities",
         "Moreau " + fmt("%.2e", moreau) + ", finite differences " + fmt("%.2e", fd) + ", Gaussian max-sum vs sum-product " +
             fmt("%.2e", gauss));
}

void criterion10() {
  Rng rng(10010);
  const std::pair<Index, Index> shapes[] = {{200, 10}, {300, 20}, {150, 5}, {400, 40}, {100, 100}};
  int found = 0, holds = 0, tried = 0;
  double worst = 0.0;
  while (found < 50 && tried < 1000) {
    const auto [m, n] = shapes[tried++ % 5];
    Matrix a = rng.gaussian_matrix(m, n);
    a = a * a.colwise().norm().cwiseInverse().asDiagonal();  // unit-norm columns
    const double tauw_inv = std::exp(rng.uniform(std::log(1e-6), std::log(1e-2)));
    if (!(walk_summability_margin(a, 1.0, tauw_inv) < 1.0)) continue;
    ++found;
    const double ratio = spectral_stats(a).kappa / kappa_max(m, n, {1, 1});
    worst = std::max(worst, ratio);
    holds += ratio < 1.0;
  }
  report(10, found == 50 && holds == 50, "walk-summable instances satisfy kappa < kappa_max undamped",
         std::to_string(holds) + "/" + std::to_string(found) + " hold, worst kappa/kappa_max " + fmt("%.3f", worst));
}

}  // namespace

int main() {
  const std::vector<void (*)()> checks = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  for (std::size_t k = 0; k < checks.size(); ++k) {
    try {
      checks[k]();
    } catch (const std::exception& e) {
      report(static_cast<int>(k + 1), false, "exception", e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failures, checks.size());
  return failures == 0 ? 0 : 1;
}
