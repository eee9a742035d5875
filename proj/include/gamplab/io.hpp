#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "gamplab/analysis.hpp"
#include "gamplab/common.hpp"
#include "gamplab/gamp.hpp"

namespace gamplab {

struct IoError : Error {
  using Error::Error;
};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw IoError("failed to format number");
  return std::string(buf, ptr);
}

inline double parse_double(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return kInf;
  if (s == "-inf") return -kInf;
  double v = 0.0;
  const char* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw IoError("not a number: '" + s + "'");
  return v;
}

// Matrix text format: a header line "m n" followed by m rows of n
// space-separated decimals.

inline void write_matrix(std::ostream& os, const Matrix& a) {
  os << a.rows() << ' ' << a.cols() << '\n';
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < a.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(a(i, j));
    }
    os << '\n';
  }
}

inline void write_matrix(const std::string& path, const Matrix& a) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(os, a);
}

inline Matrix read_matrix(std::istream& is) {
  long long m = 0, n = 0;
  if (!(is >> m >> n) || m < 1 || n < 1) throw IoError("matrix file: bad header (expected 'm n')");
  Matrix a(m, n);
  std::string tok;
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) {
      if (!(is >> tok)) throw IoError("matrix file: expected " + std::to_string(m * n) + " entries");
      a(i, j) = parse_double(tok);
    }
  if (is >> tok) throw IoError("matrix file: trailing data after " + std::to_string(m * n) + " entries");
  return a;
}

inline Matrix read_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open matrix file '" + path + "'");
  return read_matrix(is);
}

/// Comma-separated writer with a header row.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header) : os_(path) {
    if (!os_) throw IoError("cannot open '" + path + "' for writing");
    row(header);
  }
  void row(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) os_ << ',';
      os_ << cells[k];
    }
    os_ << '\n';
  }

 private:
  std::ofstream os_;
};

inline const std::vector<std::string>& trace_columns() {
  static const std::vector<std::string> cols = {"iter", "x_change", "dist_to_oracle", "tau_x", "tau_s", "max_abs_x", "max_abs_s"};
  return cols;
}

inline std::vector<std::string> trace_row(const IterationRecord& r) {
  return {std::to_string(r.iter), format_double(r.x_change), format_double(r.dist_to_oracle), format_double(r.tau_x),
          format_double(r.tau_s), format_double(r.max_abs_x), format_double(r.max_abs_s)};
}

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "m", "n", "theta_s", "theta_x", "tau0", "tauw_bar", "gamma_big", "kappa", "kappa_max", "gamma_small",
      "a_tilde_norm_sq", "h_spectral_radius", "verdict_thm2", "verdict_thm3", "verdict_exact"};
  return cols;
}

inline std::vector<std::string> report_row(const StabilityReport& r) {
  auto b = [](bool v) { return std::string(v ? "true" : "false"); };
  return {std::to_string(r.m), std::to_string(r.n), format_double(r.damping.theta_s), format_double(r.damping.theta_x),
          format_double(r.tau0), format_double(r.tauw_bar), format_double(r.gamma_big), format_double(r.kappa),
          format_double(r.kappa_max), format_double(r.gamma_small), format_double(r.a_tilde_norm_sq),
          format_double(r.h_spectral_radius), to_string(r.verdict_thm2), b(r.verdict_thm3), b(r.verdict_exact)};
}

inline std::string report_text(const StabilityReport& r) {
  std::ostringstream os;
  os << std::setprecision(10);
  os << "matrix             : " << r.m << " x " << r.n << '\n'
     << "damping            : theta_s = " << r.damping.theta_s << ", theta_x = " << r.damping.theta_x << '\n'
     << "tau0, tauw_bar     : " << r.tau0 << ", " << r.tauw_bar << '\n'
     << "Gamma              : " << r.gamma_big << '\n'
     << "kappa              : " << r.kappa << '\n'
     << "kappa_max          : " << r.kappa_max << '\n'
     << "gamma (exact)      : " << r.gamma_small << '\n'
     << "||A~||_2^2         : " << r.a_tilde_norm_sq << '\n'
     << "rho(H)             : " << r.h_spectral_radius << " (" << r.h_method << ")\n"
     << "verdict (Gamma)    : " << to_string(r.verdict_thm2) << '\n'
     << "verdict (A~ local) : " << (r.verdict_thm3 ? "stable" : "not certified") << '\n'
     << "verdict (exact)    : " << (r.verdict_exact ? "stable" : "unstable") << '\n';
  return os.str();
}

}  // namespace gamplab
