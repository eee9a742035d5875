#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <unsupported/Eigen/FFT>

#include "gamplab/common.hpp"

namespace gamplab {

enum class EnsembleKind { IidGaussian, SubsampledUnitary, Circulant, LowRank, PrescribedKappa, Explicit };

inline std::string to_string(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::IidGaussian: return "iid_gaussian";
    case EnsembleKind::SubsampledUnitary: return "subsampled_unitary";
    case EnsembleKind::Circulant: return "circulant";
    case EnsembleKind::LowRank: return "low_rank";
    case EnsembleKind::PrescribedKappa: return "prescribed_kappa";
    case EnsembleKind::Explicit: return "explicit";
  }
  return "unknown";
}

inline EnsembleKind ensemble_kind_from_string(const std::string& s) {
  for (auto k : {EnsembleKind::IidGaussian, EnsembleKind::SubsampledUnitary, EnsembleKind::Circulant,
                 EnsembleKind::LowRank, EnsembleKind::PrescribedKappa, EnsembleKind::Explicit})
    if (to_string(k) == s) return k;
  throw InvalidSpecError("unknown ensemble kind '" + s + "'");
}

/// Description of a test-matrix family member. Only the fields relevant to
/// `kind` are read.
struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::IidGaussian;
  Index m = 1;
  Index n = 1;
  double variance = 1.0;          // IidGaussian
  std::vector<double> taps;       // Circulant: first column h, length n
  Index rank = 1;                 // LowRank
  double sigma = 1.0;             // LowRank: common nonzero singular value
  double kappa = 1.0;             // PrescribedKappa: target peak-to-average ratio
  Matrix explicit_matrix;         // Explicit
  std::uint64_t seed = 0;

  void validate() const {
    if (kind == EnsembleKind::Explicit) {
      if (explicit_matrix.rows() < 1 || explicit_matrix.cols() < 1)
        throw InvalidSpecError("explicit matrix must be non-empty");
      return;
    }
    if (m < 1 || n < 1) throw InvalidSpecError("ensemble dimensions must be positive");
    switch (kind) {
      case EnsembleKind::IidGaussian:
        if (!(variance > 0.0)) throw InvalidSpecError("iid_gaussian variance must be positive");
        break;
      case EnsembleKind::Circulant:
        if (m != n) throw InvalidSpecError("circulant matrices must be square");
        if (static_cast<Index>(taps.size()) != n)
          throw InvalidSpecError("circulant filter must have n taps");
        break;
      case EnsembleKind::LowRank:
        if (rank < 1 || rank > std::min(m, n))
          throw InvalidSpecError("low_rank rank must lie in [1, min(m,n)]");
        if (!(sigma > 0.0)) throw InvalidSpecError("low_rank sigma must be positive");
        break;
      case EnsembleKind::PrescribedKappa: {
        const double k = static_cast<double>(std::min(m, n));
        if (!(kappa >= 1.0) || kappa > k)
          throw InvalidSpecError("prescribed kappa must lie in [1, min(m,n)]");
        break;
      }
      default: break;
    }
  }
};

struct SpectralStats {
  double op_norm_sq = 0.0;
  double frob_norm_sq = 0.0;
  double kappa = 0.0;
  Vector singular_values;  // nonincreasing
};

/// Haar-distributed matrix with `cols` orthonormal columns in R^rows.
/// QR of an i.i.d. Gaussian matrix with the sign of diag(R) fixed positive.
inline Matrix random_orthonormal_columns(Index rows, Index cols, Rng& rng) {
  Matrix g = rng.gaussian_matrix(rows, cols);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix& r = qr.matrixQR();
  for (Index j = 0; j < cols; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

/// U diag(sv) V^T with Haar-random orthonormal U (m x k) and V (n x k).
inline Matrix matrix_with_singular_values(Index m, Index n, const Vector& sv, Rng& rng) {
  const Index k = sv.size();
  Matrix u = random_orthonormal_columns(m, k, rng);
  Matrix v = random_orthonormal_columns(n, k, rng);
  return u * sv.asDiagonal() * v.transpose();
}

/// Singular-value profile with one peak value and min(m,n)-1 equal values
/// whose peak-to-average ratio of squares is exactly `kappa`.
inline Vector prescribed_kappa_profile(Index k, double kappa) {
  Vector sv = Vector::Ones(k);
  if (k == 1) return sv;
  const double kd = static_cast<double>(k);
  if (kappa >= kd) {
    sv.tail(k - 1).setZero();
  } else {
    // peak^2 (k - kappa) = kappa (k - 1) with the remaining squares equal to 1
    sv(0) = std::sqrt(kappa * (kd - 1.0) / (kd - kappa));
  }
  return sv;
}

inline Matrix generate(const EnsembleSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const Index m = spec.m, n = spec.n;
  switch (spec.kind) {
    case EnsembleKind::IidGaussian:
      return rng.gaussian_matrix(m, n, std::sqrt(spec.variance));
    case EnsembleKind::SubsampledUnitary: {
      const Index big = std::max(m, n);
      Matrix q = random_orthonormal_columns(big, big, rng);
      if (m <= n) return q.topRows(m);
      return q.leftCols(n);
    }
    case EnsembleKind::Circulant: {
      Matrix a(n, n);
      for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) a(i, j) = spec.taps[static_cast<std::size_t>(((i - j) % n + n) % n)];
      return a;
    }
    case EnsembleKind::LowRank: {
      Vector sv = Vector::Constant(spec.rank, spec.sigma);
      return matrix_with_singular_values(m, n, sv, rng);
    }
    case EnsembleKind::PrescribedKappa:
      return matrix_with_singular_values(m, n, prescribed_kappa_profile(std::min(m, n), spec.kappa), rng);
    case EnsembleKind::Explicit:
      return spec.explicit_matrix;
  }
  throw InvalidSpecError("unhandled ensemble kind");
}

/// Singular values in nonincreasing order.
inline Vector singular_values(const Matrix& a) {
  if (std::min(a.rows(), a.cols()) <= 64) {
    Eigen::JacobiSVD<Matrix> svd(a);
    return svd.singularValues();
  }
  Eigen::BDCSVD<Matrix> svd(a);
  return svd.singularValues();
}

inline double kappa_from(double op_norm_sq, double frob_norm_sq, Index m, Index n) {
  return op_norm_sq / (frob_norm_sq / static_cast<double>(std::min(m, n)));
}

inline SpectralStats spectral_stats(const Matrix& a) {
  if (a.size() == 0 || a.cwiseAbs().maxCoeff() == 0.0)
    throw DegenerateMatrixError("kappa is undefined for the zero matrix");
  SpectralStats st;
  st.singular_values = singular_values(a);
  st.op_norm_sq = st.singular_values(0) * st.singular_values(0);
  st.frob_norm_sq = a.squaredNorm();
  st.kappa = kappa_from(st.op_norm_sq, st.frob_norm_sq, a.rows(), a.cols());
  return st;
}

/// Peak-to-average ratio of the squared DFT magnitudes of the filter, which
/// equals kappa of the circulant matrix with first column h.
inline double circulant_kappa_fft(const std::vector<double>& h) {
  if (h.empty() || std::all_of(h.begin(), h.end(), [](double v) { return v == 0.0; }))
    throw DegenerateMatrixError("kappa is undefined for the zero filter");
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, h);
  double peak = 0.0, total = 0.0;
  for (const auto& c : spectrum) {
    const double p = std::norm(c);
    peak = std::max(peak, p);
    total += p;
  }
  return peak / (total / static_cast<double>(h.size()));
}

/// lambda_max(|I - J|) for J = tau0 A^T A + tauw_inv I scaled symmetrically to
/// unit diagonal. Values below 1 mean the quadratic is walk-summable.
inline double walk_summability_margin(const Matrix& a, double tau0, double tauw_inv) {
  if (!(tau0 > 0.0)) throw InvalidParameterError("tau0 must be positive");
  if (!(tauw_inv >= 0.0)) throw InvalidParameterError("tauw_inv must be nonnegative");
  const Index n = a.cols();
  Matrix j = tau0 * (a.transpose() * a);
  j.diagonal().array() += tauw_inv;
  Vector d = j.diagonal();
  if ((d.array() <= 0.0).any())
    throw InvalidParameterError("J has a zero diagonal entry; cannot normalize");
  Vector scale = d.cwiseSqrt().cwiseInverse();
  Matrix jn = scale.asDiagonal() * j * scale.asDiagonal();
  Matrix dev = (Matrix::Identity(n, n) - jn).cwiseAbs();
  dev = 0.5 * (dev + dev.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(dev, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw NumericalError("eigen-solver failed in walk_summability_margin");
  return es.eigenvalues().maxCoeff();
}

}  // namespace gamplab
