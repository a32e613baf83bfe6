#include <gtest/gtest.h>

#include <random>

#include "support.hpp"

using namespace eqtest;

namespace {

RationalMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c, int lo, int hi) {
  std::uniform_int_distribution<int> d(lo, hi);
  RationalMatrix m(r, c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) m(i, j) = d(rng);
  return m;
}

// Rank-deficient matrix: a product of thin random factors.
RationalMatrix low_rank(std::mt19937& rng, std::size_t r, std::size_t c, std::size_t k) {
  return random_matrix(rng, r, k, -1, 1) * random_matrix(rng, k, c, -1, 1);
}

TEST(Rational, FormatAndParse) {
  EXPECT_EQ(format_rational(Rational(3)), "3/1");
  EXPECT_EQ(format_rational(Rational(-1)), "-1/1");
  EXPECT_EQ(format_rational(Rational(0)), "0/1");
  EXPECT_EQ(format_rational(Rational(6) / Rational(-4)), "-3/2");
  EXPECT_EQ(parse_rational("-3/2"), Rational(BigInt(-3), BigInt(2)));
  EXPECT_EQ(parse_rational("4/2"), Rational(2));
  EXPECT_EQ(parse_rational("7"), Rational(7));
  for (const char* bad : {"", "1/0", "x", "1/y", "/2", "3/"}) EXPECT_THROW(parse_rational(bad), std::invalid_argument) << bad;
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> d(-1000, 1000);
  for (int i = 0; i < 200; ++i) {
    const int den = d(rng);
    if (den == 0) continue;
    const Rational q = Rational(d(rng)) / den;
    EXPECT_EQ(parse_rational(format_rational(q)), q);
  }
}

TEST(RationalMatrix, RankAgreesWithFloatingPoint) {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t r = 1 + trial % 7, c = 1 + (trial * 3) % 9;
    const std::size_t k = 1 + trial % std::min(r, c);
    const RationalMatrix m = trial % 2 ? random_matrix(rng, r, c, -1, 1) : low_rank(rng, r, c, k);
    EXPECT_EQ(rank(m), static_cast<std::size_t>(float_rank(m))) << trial;
    EXPECT_EQ(rank(m), rank(m.transpose()));
  }
  EXPECT_EQ(rank(RationalMatrix(0, 4)), 0u);
  EXPECT_EQ(rank(RationalMatrix(3, 3)), 0u);
}

TEST(RationalMatrix, RankWithFractions) {
  RationalMatrix m(2, 2);
  m(0, 0) = Rational(BigInt(1), BigInt(3));
  m(0, 1) = Rational(BigInt(1), BigInt(2));
  m(1, 0) = Rational(BigInt(2), BigInt(3));
  m(1, 1) = 1;
  EXPECT_EQ(rank(m), 1u);
  m(1, 1) = Rational(BigInt(1), BigInt(7));
  EXPECT_EQ(rank(m), 2u);
}

TEST(RationalMatrix, RrefAndNullspace) {
  std::mt19937 rng(23);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t r = 2 + trial % 5, c = 3 + trial % 6;
    const RationalMatrix m = low_rank(rng, r, c, 1 + trial % 3);
    std::vector<std::size_t> pivots;
    const RationalMatrix e = rref(m, &pivots);
    EXPECT_EQ(pivots.size(), rank(m));
    for (std::size_t i = 0; i < pivots.size(); ++i)
      for (std::size_t row = 0; row < e.rows(); ++row) EXPECT_EQ(e(row, pivots[i]), row == i ? 1 : 0);
    for (std::size_t row = pivots.size(); row < e.rows(); ++row)
      for (std::size_t j = 0; j < e.cols(); ++j) EXPECT_EQ(e(row, j), 0);
    const auto kernel = nullspace(m);
    EXPECT_EQ(kernel.size() + rank(m), c);
    if (kernel.empty()) continue;
    const RationalMatrix k = from_columns(kernel, c);
    EXPECT_TRUE((m * k).is_zero());
    EXPECT_EQ(rank(k), kernel.size());
  }
}

TEST(RationalMatrix, TransposeAndMultiply) {
  std::mt19937 rng(3);
  const RationalMatrix a = random_matrix(rng, 3, 4, -5, 5), b = random_matrix(rng, 4, 2, -5, 5);
  EXPECT_EQ((a * b).transpose(), b.transpose() * a.transpose());
  EXPECT_EQ(a.transpose().transpose(), a);
  const RationalMatrix p = a * b;
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      Rational acc = 0;
      for (std::size_t k = 0; k < 4; ++k) acc += a(i, k) * b(k, j);
      EXPECT_EQ(p(i, j), acc);
    }
  EXPECT_EQ(RationalMatrix(2, 3).nonzeros(), 0u);
}

}  // namespace
