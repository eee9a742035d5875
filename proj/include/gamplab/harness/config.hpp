#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gamplab/common.hpp"
#include "gamplab/ensembles.hpp"
#include "gamplab/gamp.hpp"
#include "gamplab/io.hpp"

namespace gamplab::harness {

struct ConfigError : Error {
  using Error::Error;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Flat `key = value` file with `[section]` headers. Keys outside any section
/// are rejected; `#` and `;` start comments.
class ConfigFile {
 public:
  struct Entry {
    std::string value;
    int line = 0;
  };

  static ConfigFile parse(std::istream& is, const std::string& source = "<config>") {
    ConfigFile cf;
    cf.source_ = source;
    std::string raw, section;
    int lineno = 0;
    while (std::getline(is, raw)) {
      ++lineno;
      cf.text_ += raw + '\n';
      std::string line = raw;
      if (auto c = line.find_first_of("#;"); c != std::string::npos) line.erase(c);
      line = detail::trim(line);
      if (line.empty()) continue;
      if (line.front() == '[') {
        if (line.back() != ']') throw cf.error(lineno, "unterminated section header");
        section = detail::trim(line.substr(1, line.size() - 2));
        if (!known_section(section)) throw cf.error(lineno, "unknown section [" + section + "]");
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos) throw cf.error(lineno, "expected 'key = value'");
      if (section.empty()) throw cf.error(lineno, "key outside of any [section]");
      const std::string key = detail::trim(line.substr(0, eq));
      const std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty()) throw cf.error(lineno, "empty key");
      if (value.empty()) throw cf.error(lineno, "empty value for '" + key + "'");
      const std::string full = section + "." + key;
      if (cf.entries_.count(full)) throw cf.error(lineno, "duplicate key '" + key + "' in [" + section + "]");
      cf.entries_[full] = {value, lineno};
    }
    return cf;
  }

  static ConfigFile load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open config file");
    return parse(is, path);
  }

  bool has(const std::string& key) const { return entries_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    used_.insert(key);
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second.value;
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  ConfigError error(int line, const std::string& msg) const {
    return ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  ConfigError error_at(const std::string& key, const std::string& msg) const { return error(line_of(key), msg); }

  double get_double(const std::string& key, double def) const {
    auto v = get(key);
    if (!v) return def;
    try {
      return parse_double(*v);
    } catch (const IoError&) {
      throw error_at(key, "'" + key + "' expects a number, got '" + *v + "'");
    }
  }

  long long get_int(const std::string& key, long long def) const {
    auto v = get(key);
    if (!v) return def;
    std::size_t pos = 0;
    long long out = 0;
    try {
      out = std::stoll(*v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v->size()) throw error_at(key, "'" + key + "' expects an integer, got '" + *v + "'");
    return out;
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t def) const {
    auto v = get(key);
    if (!v) return def;
    std::size_t pos = 0;
    std::uint64_t out = 0;
    try {
      if (!v->empty() && v->front() != '-') out = std::stoull(*v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != v->size())
      throw error_at(key, "'" + key + "' expects a nonnegative integer, got '" + *v + "'");
    return out;
  }

  bool get_bool(const std::string& key, bool def) const {
    auto v = get(key);
    if (!v) return def;
    if (*v == "true" || *v == "yes" || *v == "1") return true;
    if (*v == "false" || *v == "no" || *v == "0") return false;
    throw error_at(key, "'" + key + "' expects true or false, got '" + *v + "'");
  }

  std::string get_string(const std::string& key, const std::string& def) const { return get(key).value_or(def); }

  /// Comma-separated list of numbers.
  std::vector<double> get_list(const std::string& key) const {
    std::vector<double> out;
    auto v = get(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = detail::trim(tok);
      try {
        out.push_back(parse_double(tok));
      } catch (const IoError&) {
        throw error_at(key, "'" + key + "' expects a comma-separated list of numbers, got '" + tok + "'");
      }
    }
    return out;
  }

  /// Rejects keys that no reader asked for (typos would otherwise be silent).
  void check_all_used() const {
    for (const auto& [key, e] : entries_)
      if (!used_.count(key)) throw error(e.line, "unknown key '" + key + "'");
  }

  const std::string& text() const { return text_; }
  const std::string& source() const { return source_; }

 private:
  static bool known_section(const std::string& s) {
    static const std::set<std::string> names = {"experiment", "ensemble", "problem", "estimator", "gamp", "sweep"};
    return names.count(s) > 0;
  }

  std::string source_;
  std::string text_;
  std::map<std::string, Entry> entries_;
  mutable std::set<std::string> used_;
};

enum class PriorKind { Gaussian, Laplace, SmoothLaplace, BernoulliGaussian };

inline std::string to_string(PriorKind p) {
  switch (p) {
    case PriorKind::Gaussian: return "gaussian";
    case PriorKind::Laplace: return "laplace";
    case PriorKind::SmoothLaplace: return "smooth_laplace";
    case PriorKind::BernoulliGaussian: return "bernoulli_gaussian";
  }
  return "unknown";
}

struct EstimatorSelection {
  PriorKind prior = PriorKind::Gaussian;
  double lambda = 1.0;  // laplace, smooth_laplace
  double eps = 1e-3;    // smooth_laplace
  double rho = 0.1;     // bernoulli_gaussian
  int quadrature_order = 64;
};

struct ProblemParams {
  double tau0 = 1.0;
  double tauw_bar = 1.0;
  double x0 = 0.0;
};

struct PdhgOptions {
  bool enabled = false;
  double theta = 1.0;
  long max_iters = 100;
};

struct SweepAxes {
  std::vector<double> kappa;
  std::vector<double> theta_product;
  std::vector<double> theta_s;
  std::vector<double> theta_x;
  std::vector<double> tau0_tauw;
};

struct ExperimentConfig {
  EnsembleSpec ensemble;
  std::string matrix_path;  // explicit ensembles
  ProblemParams problem;
  EstimatorSelection estimator;
  GampConfig gamp;
  PdhgOptions pdhg;
  SweepAxes sweep;
  int trials = 5;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string source_text;  // raw file, for the manifest hash
};

inline GampMode gamp_mode_from_string(const std::string& s) {
  if (s == "gaussian") return GampMode::Gaussian;
  if (s == "max_sum") return GampMode::MaxSum;
  if (s == "sum_product") return GampMode::SumProduct;
  throw InvalidParameterError("unknown mode '" + s + "' (gaussian, max_sum, sum_product)");
}

inline StepsizeMode stepsize_mode_from_string(const std::string& s) {
  if (s == "vector") return StepsizeMode::Vector;
  if (s == "scalar") return StepsizeMode::Scalar;
  if (s == "frozen") return StepsizeMode::Frozen;
  throw InvalidParameterError("unknown stepsize_mode '" + s + "' (vector, scalar, frozen)");
}

inline PriorKind prior_from_string(const std::string& s) {
  if (s == "gaussian") return PriorKind::Gaussian;
  if (s == "laplace") return PriorKind::Laplace;
  if (s == "smooth_laplace") return PriorKind::SmoothLaplace;
  if (s == "bernoulli_gaussian") return PriorKind::BernoulliGaussian;
  throw InvalidParameterError("unknown prior '" + s + "' (gaussian, laplace, smooth_laplace, bernoulli_gaussian)");
}

/// Typed view of a config file. Every semantic error is reported with the
/// line of the offending key. Relative matrix paths resolve against the
/// config file's directory.
inline ExperimentConfig to_experiment_config(const ConfigFile& cf) {
  ExperimentConfig ec;
  ec.source_text = cf.text();

  auto wrap = [&](const std::string& key, auto&& fn) {
    try {
      return fn();
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw cf.error_at(key, e.what());
    }
  };

  ec.seed = cf.get_u64("experiment.seed", 0);
  ec.trials = static_cast<int>(cf.get_int("experiment.trials", 5));
  if (ec.trials < 1) throw cf.error_at("experiment.trials", "trials must be at least 1");
  ec.output_dir = cf.get_string("experiment.output_dir", "out");

  auto& es = ec.ensemble;
  const std::string kind = cf.get_string("ensemble.kind", "iid_gaussian");
  es.kind = wrap("ensemble.kind", [&] { return ensemble_kind_from_string(kind); });
  es.m = cf.get_int("ensemble.m", 1);
  es.n = cf.get_int("ensemble.n", 1);
  es.variance = cf.get_double("ensemble.variance", 1.0);
  es.taps = cf.get_list("ensemble.taps");
  es.rank = cf.get_int("ensemble.rank", 1);
  es.sigma = cf.get_double("ensemble.sigma", 1.0);
  es.kappa = cf.get_double("ensemble.kappa", 1.0);
  ec.matrix_path = cf.get_string("ensemble.path", "");
  if (es.kind == EnsembleKind::Explicit) {
    if (ec.matrix_path.empty()) throw cf.error_at("ensemble.kind", "explicit ensemble needs 'path'");
    std::string path = ec.matrix_path;
    if (!path.empty() && path.front() != '/') {
      const auto slash = cf.source().find_last_of('/');
      if (slash != std::string::npos) path = cf.source().substr(0, slash + 1) + path;
    }
    es.explicit_matrix = wrap("ensemble.path", [&] { return read_matrix(path); });
    es.m = es.explicit_matrix.rows();
    es.n = es.explicit_matrix.cols();
  } else if (es.kind == EnsembleKind::Circulant && cf.has("ensemble.taps") && !cf.has("ensemble.n")) {
    es.n = es.m = static_cast<Index>(es.taps.size());
  }
  if (es.kind == EnsembleKind::PrescribedKappa && es.kappa > static_cast<double>(std::min(es.m, es.n)))
    throw cf.error_at("ensemble.kappa", "kappa target exceeds min(m, n) and is unreachable");
  wrap("ensemble.kind", [&] { es.validate(); });

  ec.problem.tau0 = cf.get_double("problem.tau0", 1.0);
  ec.problem.tauw_bar = cf.get_double("problem.tauw_bar", 1.0);
  ec.problem.x0 = cf.get_double("problem.x0", 0.0);
  if (!(ec.problem.tau0 > 0.0)) throw cf.error_at("problem.tau0", "tau0 must be positive");
  if (!(ec.problem.tauw_bar > 0.0)) throw cf.error_at("problem.tauw_bar", "tauw_bar must be positive");

  auto& est = ec.estimator;
  est.prior = wrap("estimator.prior", [&] { return prior_from_string(cf.get_string("estimator.prior", "gaussian")); });
  est.lambda = cf.get_double("estimator.lambda", 1.0);
  est.eps = cf.get_double("estimator.eps", 1e-3);
  est.rho = cf.get_double("estimator.rho", 0.1);
  est.quadrature_order = static_cast<int>(cf.get_int("estimator.quadrature_order", 64));
  if (!(est.lambda > 0.0)) throw cf.error_at("estimator.lambda", "lambda must be positive");
  if (!(est.eps > 0.0)) throw cf.error_at("estimator.eps", "eps must be positive");
  if (!(est.rho > 0.0 && est.rho <= 1.0)) throw cf.error_at("estimator.rho", "rho must lie in (0, 1]");
  if (est.quadrature_order < 8) throw cf.error_at("estimator.quadrature_order", "quadrature_order must be at least 8");

  auto& g = ec.gamp;
  g.mode = wrap("estimator.mode", [&] { return gamp_mode_from_string(cf.get_string("estimator.mode", "gaussian")); });
  g.stepsize_mode = wrap("gamp.stepsize_mode",
                         [&] { return stepsize_mode_from_string(cf.get_string("gamp.stepsize_mode", "scalar")); });
  g.theta_s = cf.get_double("gamp.theta_s", 1.0);
  g.theta_x = cf.get_double("gamp.theta_x", 1.0);
  g.max_iters = cf.get_int("gamp.max_iters", 1000);
  g.conv_tol = cf.get_double("gamp.conv_tol", 1e-10);
  g.divergence_threshold = cf.get_double("gamp.divergence_threshold", 1e12);
  if (cf.has("gamp.frozen_tau_p_bar")) g.frozen_tau_p_bar = Vector::Constant(1, cf.get_double("gamp.frozen_tau_p_bar", 0));
  if (cf.has("gamp.frozen_tau_r")) g.frozen_tau_r = Vector::Constant(1, cf.get_double("gamp.frozen_tau_r", 0));
  wrap("gamp.stepsize_mode", [&] { g.validate(); });

  if (est.prior == PriorKind::BernoulliGaussian && g.mode != GampMode::SumProduct)
    throw cf.error_at("estimator.prior", "bernoulli_gaussian prior needs mode = sum_product");
  if (est.prior != PriorKind::Gaussian && g.mode == GampMode::Gaussian)
    throw cf.error_at("estimator.prior", "non-Gaussian priors need mode = max_sum or sum_product");

  ec.pdhg.enabled = cf.get_bool("gamp.compare_pdhg", false);
  ec.pdhg.theta = cf.get_double("gamp.pdhg_theta", 1.0);
  ec.pdhg.max_iters = cf.get_int("gamp.pdhg_iters", 100);
  if (!(ec.pdhg.theta >= -1.0 && ec.pdhg.theta <= 1.0)) throw cf.error_at("gamp.pdhg_theta", "pdhg_theta must lie in [-1, 1]");
  if (ec.pdhg.max_iters < 1) throw cf.error_at("gamp.pdhg_iters", "pdhg_iters must be at least 1");

  auto& sw = ec.sweep;
  sw.kappa = cf.get_list("sweep.kappa");
  sw.theta_product = cf.get_list("sweep.theta_product");
  sw.theta_s = cf.get_list("sweep.theta_s");
  sw.theta_x = cf.get_list("sweep.theta_x");
  sw.tau0_tauw = cf.get_list("sweep.tau0_tauw");
  for (double p : sw.theta_product)
    if (!(p > 0.0 && p <= 1.0)) throw cf.error_at("sweep.theta_product", "theta_product values must lie in (0, 1]");
  for (double t : sw.theta_s)
    if (!(t > 0.0 && t <= 1.0)) throw cf.error_at("sweep.theta_s", "theta_s values must lie in (0, 1]");
  for (double t : sw.theta_x)
    if (!(t > 0.0 && t <= 1.0)) throw cf.error_at("sweep.theta_x", "theta_x values must lie in (0, 1]");
  for (double t : sw.tau0_tauw)
    if (!(t > 0.0)) throw cf.error_at("sweep.tau0_tauw", "tau0_tauw values must be positive");
  for (double k : sw.kappa) {
    if (!(k >= 1.0)) throw cf.error_at("sweep.kappa", "kappa targets must be at least 1");
    if (k > static_cast<double>(std::min(es.m, es.n)))
      throw cf.error_at("sweep.kappa", "kappa target " + format_double(k) + " exceeds min(m, n) and is unreachable");
  }

  cf.check_all_used();
  return ec;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
  return to_experiment_config(ConfigFile::load(path));
}

inline ExperimentConfig parse_experiment_config(const std::string& text, const std::string& source = "<config>") {
  std::istringstream is(text);
  return to_experiment_config(ConfigFile::parse(is, source));
}

}  // namespace gamplab::harness
