#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gamplab/analysis.hpp"
#include "gamplab/ensembles.hpp"

using namespace gamplab;

namespace {

EnsembleSpec spec(EnsembleKind kind, Index m, Index n, std::uint64_t seed = 1) {
  EnsembleSpec s;
  s.kind = kind;
  s.m = m;
  s.n = n;
  s.seed = seed;
  return s;
}

}  // namespace

TEST(Generate, DeltaCirculantIsIdentity) {
  auto s = spec(EnsembleKind::Circulant, 4, 4);
  s.taps = {1, 0, 0, 0};
  EXPECT_EQ(generate(s), Matrix::Identity(4, 4));
}

TEST(Generate, CirculantLayout) {
  auto s = spec(EnsembleKind::Circulant, 3, 3);
  s.taps = {1, 2, 3};
  Matrix expect(3, 3);
  expect << 1, 3, 2, 2, 1, 3, 3, 2, 1;
  EXPECT_EQ(generate(s), expect);
}

TEST(Generate, SubsampledUnitaryHasUnitKappa) {
  for (auto [m, n] : {std::pair<Index, Index>{20, 50}, {50, 20}, {30, 30}}) {
    const Matrix a = generate(spec(EnsembleKind::SubsampledUnitary, m, n, 9));
    EXPECT_NEAR(spectral_stats(a).kappa, 1.0, 1e-12);
    if (m <= n)
      EXPECT_TRUE((a * a.transpose()).isApprox(Matrix::Identity(m, m), 1e-12));
    else
      EXPECT_TRUE((a.transpose() * a).isApprox(Matrix::Identity(n, n), 1e-12));
  }
}

TEST(Generate, LowRankSingularValues) {
  auto s = spec(EnsembleKind::LowRank, 4, 4, 3);
  s.rank = 1;
  s.sigma = 2;
  const Vector sv = singular_values(generate(s));
  EXPECT_NEAR(sv(0), 2.0, 1e-12);
  for (Index k = 1; k < 4; ++k) EXPECT_NEAR(sv(k), 0.0, 1e-12);
  EXPECT_NEAR(spectral_stats(generate(s)).kappa, 4.0, 1e-12);
}

TEST(Generate, LowRankKappaIsMinOverRank) {
  auto s = spec(EnsembleKind::LowRank, 60, 40, 4);
  s.rank = 4;
  s.sigma = 0.7;
  EXPECT_NEAR(spectral_stats(generate(s)).kappa, 10.0, 1e-10);
}

TEST(Generate, PrescribedKappaHitsTarget) {
  for (double k : {1.0, 1.5, 7.0, 33.3, 100.0}) {
    auto s = spec(EnsembleKind::PrescribedKappa, 150, 100, 2);
    s.kappa = k;
    EXPECT_NEAR(spectral_stats(generate(s)).kappa, k, 1e-10 * k) << k;
  }
}

TEST(Generate, SeedDeterminism) {
  auto s = spec(EnsembleKind::IidGaussian, 8, 5, 77);
  EXPECT_EQ(generate(s), generate(s));
  auto t = s;
  t.seed = 78;
  EXPECT_NE(generate(s), generate(t));
}

TEST(Generate, InvalidSpecs) {
  auto s = spec(EnsembleKind::IidGaussian, 0, 5);
  EXPECT_THROW(generate(s), InvalidSpecError);
  s = spec(EnsembleKind::LowRank, 5, 5);
  s.rank = 6;
  EXPECT_THROW(generate(s), InvalidSpecError);
  s = spec(EnsembleKind::Circulant, 4, 4);
  s.taps = {1, 2};
  EXPECT_THROW(generate(s), InvalidSpecError);
  s = spec(EnsembleKind::PrescribedKappa, 10, 4);
  s.kappa = 5;
  EXPECT_THROW(generate(s), InvalidSpecError);
  EXPECT_THROW(ensemble_kind_from_string("bogus"), InvalidSpecError);
}

TEST(SpectralStats, Identity) { EXPECT_DOUBLE_EQ(spectral_stats(Matrix::Identity(4, 4)).kappa, 1.0); }

TEST(SpectralStats, SmallReference) {
  Matrix a(2, 3);
  a << 1, 2, 0, 0.5, -1, 3;
  const auto st = spectral_stats(a);
  EXPECT_NEAR(st.kappa, 1.396504479424519, 1e-13);
  EXPECT_NEAR(st.singular_values(0), 3.2631804509729396, 1e-13);
  EXPECT_NEAR(st.singular_values(1), 2.1451464622230443, 1e-13);
}

TEST(SpectralStats, ZeroMatrixIsDegenerate) {
  EXPECT_THROW(spectral_stats(Matrix::Zero(3, 2)), DegenerateMatrixError);
}

TEST(SpectralStats, KappaIsScaleInvariantAndBounded) {
  Rng rng(12);
  for (int k = 0; k < 20; ++k) {
    const Matrix a = rng.gaussian_matrix(7, 4);
    const double kap = spectral_stats(a).kappa;
    EXPECT_GE(kap, 1.0 - 1e-12);
    EXPECT_LE(kap, 4.0 + 1e-12);
    EXPECT_NEAR(spectral_stats(3.7 * a).kappa, kap, 1e-12);
  }
}

TEST(Circulant, FftMatchesSvd) {
  EXPECT_DOUBLE_EQ(circulant_kappa_fft({1, 0, 0, 0, 0}), 1.0);
  std::vector<double> h = {1, 0.6, 0.3, 0.1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0};
  EXPECT_NEAR(circulant_kappa_fft(h), 2.73972602739726, 1e-12);
  Rng rng(8);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> taps(12);
    for (auto& t : taps) t = rng.normal();
    auto s = spec(EnsembleKind::Circulant, 12, 12);
    s.taps = taps;
    EXPECT_NEAR(circulant_kappa_fft(taps), spectral_stats(generate(s)).kappa, 1e-8);
  }
}

TEST(Circulant, IdealHalfBandIsTwo) {
  // H_k = 1 on half the bins (conjugate-symmetric), 0 elsewhere
  const int n = 16;
  std::vector<double> h(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double acc = 0;
    for (int k = 0; k < n; ++k) {
      const bool pass = k < 4 || k > 12 || k == 8;  // 8 bins, closed under k -> n - k
      if (pass) acc += std::cos(2 * std::numbers::pi * k * t / n);
    }
    h[t] = acc / n;
  }
  EXPECT_NEAR(circulant_kappa_fft(h), 2.0, 1e-12);
}

TEST(WalkSummability, OrthonormalColumnsGiveZero) {
  const Matrix q = generate(spec(EnsembleKind::SubsampledUnitary, 10, 4, 2));
  EXPECT_NEAR(walk_summability_margin(q, 1.0, 0.0), 0.0, 1e-12);
}

TEST(WalkSummability, Reference) {
  Matrix a(3, 2);
  a << 1, 0.9, 0.2, 1, 0.1, 0.3;
  EXPECT_NEAR(walk_summability_margin(a, 1.0, 0.01), 0.7941614964638317, 1e-13);
}

TEST(WalkSummability, CorrelatedColumnsExceedOne) {
  Rng rng(21);
  int exceed = 0;
  for (int k = 0; k < 50; ++k) {
    Matrix a = rng.gaussian_matrix(5, 5, 0.1);
    a.colwise() += rng.gaussian_vector(5);  // shared component
    // brute-force reference: normalize explicitly and take eigenvalues of |I - J|
    Matrix j = a.transpose() * a;
    Vector d = j.diagonal().cwiseSqrt().cwiseInverse();
    Matrix dev = (Matrix::Identity(5, 5) - d.asDiagonal() * j * d.asDiagonal()).cwiseAbs();
    const double ref = Eigen::SelfAdjointEigenSolver<Matrix>(dev).eigenvalues().maxCoeff();
    const double got = walk_summability_margin(a, 1.0, 0.0);
    EXPECT_NEAR(got, ref, 1e-12);
    exceed += got > 1.0;
  }
  EXPECT_GT(exceed, 0);
}

TEST(MarchenkoPastur, SmallScale) {
  // 400 x 200 is enough for a 10% check; the full-size check lives in the
  // acceptance binary
  const Matrix a = generate(spec(EnsembleKind::IidGaussian, 400, 200, 5));
  const double expect = (200.0 / 400.0) * std::pow(1 + std::sqrt(2.0), 2);
  EXPECT_NEAR(spectral_stats(a).kappa, expect, 0.1 * expect);
}
