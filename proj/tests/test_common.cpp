#include <gtest/gtest.h>

#include "gamplab/common.hpp"
#include "gamplab/io.hpp"

using namespace gamplab;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  const Matrix ma = a.gaussian_matrix(5, 4), mb = b.gaussian_matrix(5, 4), mc = c.gaussian_matrix(5, 4);
  EXPECT_EQ(ma, mb);
  EXPECT_NE(ma, mc);
}

TEST(Rng, NormalMoments) {
  Rng rng(1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    s += z;
    s2 += z * z;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
}

TEST(Rng, UniformOpenInterval) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Seeds, DerivedStreamsDiffer) {
  EXPECT_EQ(derive_seed(7, {1, 2}), derive_seed(7, {1, 2}));
  EXPECT_NE(derive_seed(7, {1, 2}), derive_seed(7, {2, 1}));
  EXPECT_NE(derive_seed(7, {0}), derive_seed(8, {0}));
}

TEST(Format, ShortestRoundTrip) {
  for (double v : {0.1, 1.0 / 3.0, 2.914213562373095, -1e-300, 6.02e23, 0.0}) {
    const auto s = format_double(v);
    EXPECT_EQ(parse_double(s), v) << s;
  }
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(4.0), "4");
  EXPECT_EQ(format_double(kNaN), "nan");
  EXPECT_THROW(parse_double("1.2.3"), IoError);
}

TEST(MatrixFile, RoundTripIsExact) {
  Rng rng(11);
  const Matrix a = rng.gaussian_matrix(7, 3);
  std::stringstream ss;
  write_matrix(ss, a);
  EXPECT_EQ(read_matrix(ss), a);
}

TEST(MatrixFile, RejectsMalformedInput) {
  std::stringstream bad_header("x y\n1 2\n");
  EXPECT_THROW(read_matrix(bad_header), IoError);
  std::stringstream short_data("2 2\n1 2 3\n");
  EXPECT_THROW(read_matrix(short_data), IoError);
  std::stringstream extra("1 1\n1 2\n");
  EXPECT_THROW(read_matrix(extra), IoError);
}
