#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace gamplab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Error hierarchy. Every failure the library reports is one of these.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidSpecError : Error {
  using Error::Error;
};
struct InvalidParameterError : Error {
  using Error::Error;
};
struct DegenerateMatrixError : Error {
  using Error::Error;
};
struct EstimatorError : Error {
  using Error::Error;
};
struct ConvexityViolationError : EstimatorError {
  using EstimatorError::EstimatorError;
};
struct AssumptionViolationError : Error {
  using Error::Error;
};
struct NumericalError : Error {
  using Error::Error;
};
struct DivergenceError : Error {
  DivergenceError(const std::string& what, long iteration)
      : Error(what), iteration(iteration) {}
  long iteration;
};

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

inline bool all_finite(const Vector& v) { return v.allFinite(); }

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Derives a child seed from a parent seed and a path of stream indices.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
  std::uint64_t s = splitmix64(seed);
  for (auto p : path) s = splitmix64(s ^ splitmix64(p + 0x632BE59BD9B4E019ULL));
  return s;
}

/// Seedable generator with a platform-independent normal sampler.
///
/// std::normal_distribution is implementation-defined, so the Gaussian draws
/// are produced here (Marsaglia polar method on top of mt19937_64) to keep
/// matrices bit-identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  /// Uniform on the open interval (0, 1).
  double uniform() {
    for (;;) {
      double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    for (;;) {
      double u = 2.0 * uniform() - 1.0;
      double v = 2.0 * uniform() - 1.0;
      double s = u * u + v * v;
      if (s > 0.0 && s < 1.0) {
        double f = std::sqrt(-2.0 * std::log(s) / s);
        spare_ = v * f;
        has_spare_ = true;
        return u * f;
      }
    }
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Independent child generator for stream `index`.
  Rng split(std::uint64_t index) { return Rng(derive_seed(engine_(), {index})); }

  Matrix gaussian_matrix(Index rows, Index cols, double stddev = 1.0) {
    Matrix g(rows, cols);
    // column-major fill order is part of the determinism contract
    for (Index j = 0; j < cols; ++j)
      for (Index i = 0; i < rows; ++i) g(i, j) = stddev * normal();
    return g;
  }

  Vector gaussian_vector(Index n, double stddev = 1.0) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = stddev * normal();
    return v;
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace gamplab
