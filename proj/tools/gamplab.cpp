// gamplab: command-line front end for damped GAMP experiments.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gamplab/gamplab.hpp"
#include "gamplab/harness/config.hpp"
#include "gamplab/harness/experiments.hpp"
#include "gamplab/harness/manifest.hpp"

namespace fs = std::filesystem;
using namespace gamplab;
using namespace gamplab::harness;

namespace {

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool quiet = false;
};

ExperimentConfig load(const Common& c) {
  ExperimentConfig ec = load_experiment_config(c.config);
  if (c.seed) ec.seed = *c.seed;
  return ec;
}

fs::path out_dir(const Common& c, const ExperimentConfig& ec) { return c.out.empty() ? fs::path(ec.output_dir) : fs::path(c.out); }

RunManifest manifest_for(const std::string& command, const ExperimentConfig& ec) {
  RunManifest mf;
  mf.command = command;
  mf.config_hash = hex64(fnv1a(ec.source_text));
  mf.seed = ec.seed;
  return mf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_solve(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ec = load(c);
  const auto out = out_dir(c, ec);
  auto rep = run_solve(ec, out, c.quiet ? nullptr : &std::cout);
  auto mf = manifest_for("solve", ec);
  mf.runs.push_back({"gamp", to_string(rep.gamp.outcome), rep.gamp.iterations});
  if (rep.pdhg) mf.runs.push_back({"pdhg", to_string(rep.pdhg->outcome), rep.pdhg->iterations});
  mf.wall_clock_seconds = seconds_since(t0);
  mf.write((out / "manifest.json").string());
  return rep.exit;
}

struct AnalyzeArgs {
  std::string matrix;
  double theta_s = 1.0;
  double theta_x = 1.0;
  double tau0 = 1.0;
  double tauw_bar = 1.0;
};

int cmd_analyze(const Common& c, const AnalyzeArgs& a) {
  Matrix mat;
  std::optional<ExperimentConfig> ec;
  if (!a.matrix.empty()) {
    mat = read_matrix(a.matrix);
  } else if (!c.config.empty()) {
    ec = load(c);
    mat = build_matrix(*ec);
  } else {
    throw ConfigError("analyze needs --matrix or --config");
  }
  const auto rep = analyze(mat, {a.theta_s, a.theta_x}, a.tau0, a.tauw_bar);
  if (!c.quiet) std::cout << report_text(rep);
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    CsvWriter csv((fs::path(c.out) / "report.csv").string(), report_columns());
    csv.row(report_row(rep));
  }
  return kExitOk;
}

int cmd_phase(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto ec = load(c);
  const auto out = out_dir(c, ec);
  const auto pd = compute_phase_diagram(ec, thread_budget());
  write_phase_diagram(pd, out);
  auto mf = manifest_for("phase-diagram", ec);
  int agree = 0, decided = 0;
  for (std::size_t k = 0; k < pd.cells.size(); ++k) {
    const auto& cell = pd.cells[k];
    mf.runs.push_back({"cell " + std::to_string(k), to_string(cell.empirical), cell.iterations});
    if (cell.predicted != Thm2Verdict::Boundary) {
      ++decided;
      agree += cell.agree();
    }
  }
  mf.wall_clock_seconds = seconds_since(t0);
  mf.write((out / "manifest.json").string());
  if (!c.quiet)
    std::cout << "phase diagram: " << pd.cells.size() << " cells, predicted and empirical verdicts agree in " << agree
              << " of " << decided << " off-boundary cells\n";
  return kExitOk;
}

int cmd_generate(const Common& c) {
  const auto ec = load(c);
  const auto out = out_dir(c, ec);
  fs::create_directories(out);
  const Matrix a = build_matrix(ec);
  write_matrix((out / "matrix.txt").string(), a);
  if (!c.quiet) {
    const auto st = spectral_stats(a);
    std::cout << "wrote " << (out / "matrix.txt").string() << " (" << a.rows() << " x " << a.cols()
              << "), kappa = " << format_double(st.kappa) << '\n';
  }
  return kExitOk;
}

int cmd_compare(const Common& c, double tol) {
  const auto t0 = std::chrono::steady_clock::now();
  auto ec = load(c);
  if (ec.estimator.prior != PriorKind::Gaussian) throw ConfigError("compare-pdhg needs a Gaussian prior");
  const auto out = out_dir(c, ec);
  fs::create_directories(out);
  const auto bp = build_problem(ec);
  CsvWriter csv((out / "compare.csv").string(), {"iter", "rel_diff_x", "rel_diff_s"});
  const auto cmp = compare_pdhg(bp.inst, ec.gamp.mode, ec.pdhg.max_iters, &csv);
  const bool ok = cmp.max_rel_diff_x <= tol && cmp.max_rel_diff_s <= tol;
  auto mf = manifest_for("compare-pdhg", ec);
  mf.runs.push_back({"gamp_vs_pdhg", ok ? "match" : "mismatch", cmp.iterations});
  mf.wall_clock_seconds = seconds_since(t0);
  mf.write((out / "manifest.json").string());
  if (!c.quiet)
    std::cout << "frozen undamped GAMP vs PDHG(theta=0), " << cmp.iterations << " iterations: max relative difference x "
              << format_double(cmp.max_rel_diff_x) << ", s " << format_double(cmp.max_rel_diff_s) << (ok ? " (match)\n" : " (MISMATCH)\n");
  return ok ? kExitOk : kExitMismatch;
}

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "experiment config file");
  if (config_required) opt->required();
  sub->add_option("--seed", c.seed, "override [experiment] seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_flag("--quiet", c.quiet, "suppress console output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"damped GAMP experiments"};
  app.require_subcommand(1);
  Common common;
  AnalyzeArgs aa;
  double cmp_tol = 1e-12;

  auto* solve = app.add_subcommand("solve", "run GAMP on the configured instance");
  add_common(solve, common, true);
  auto* an = app.add_subcommand("analyze", "convergence predictors and stability checks for a matrix");
  add_common(an, common, false);
  an->add_option("--matrix", aa.matrix, "matrix file ('m n' header, then rows)");
  an->add_option("--theta-s", aa.theta_s, "output damping");
  an->add_option("--theta-x", aa.theta_x, "input damping");
  an->add_option("--tau0", aa.tau0, "prior variance");
  an->add_option("--tauw", aa.tauw_bar, "noise precision");
  auto* phase = app.add_subcommand("phase-diagram", "predicted vs empirical convergence over a sweep");
  add_common(phase, common, true);
  auto* gen = app.add_subcommand("generate", "write the configured ensemble matrix");
  add_common(gen, common, true);
  auto* cmp = app.add_subcommand("compare-pdhg", "frozen undamped GAMP against PDHG with theta = 0");
  add_common(cmp, common, true);
  cmp->add_option("--tol", cmp_tol, "relative tolerance for a match");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*solve) return cmd_solve(common);
    if (*an) return cmd_analyze(common, aa);
    if (*phase) return cmd_phase(common);
    if (*gen) return cmd_generate(common);
    if (*cmp) return cmd_compare(common, cmp_tol);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
