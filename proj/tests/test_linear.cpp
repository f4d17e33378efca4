#include <gtest/gtest.h>

#include <random>

#include "specinv/gf2.hpp"
#include "specinv/rational.hpp"

using namespace specinv;

namespace {

gf2::BitVector random_vector(std::mt19937_64& rng, std::size_t n) {
  gf2::BitVector v(n);
  for (std::size_t i = 0; i < n; ++i)
    if (rng() & 1u) v.set(i);
  return v;
}

// rank by brute force: count distinct spans over all subsets
std::size_t brute_rank(const std::vector<gf2::BitVector>& vs, std::size_t n) {
  std::vector<gf2::BitVector> span{gf2::BitVector(n)};
  for (const auto& v : vs) {
    bool inside = false;
    for (const auto& s : span) inside = inside || s == v;
    if (inside) continue;
    const std::size_t m = span.size();
    for (std::size_t i = 0; i < m; ++i) span.push_back(span[i] ^ v);
  }
  std::size_t r = 0;
  while ((std::size_t{1} << r) < span.size()) ++r;
  return r;
}

}  // namespace

TEST(BitVector, SetFlipHighest) {
  gf2::BitVector v(130);
  EXPECT_FALSE(v.any());
  EXPECT_FALSE(v.highest());
  v.set(3);
  v.set(129);
  EXPECT_EQ(*v.highest(), 129u);
  v.flip(129);
  EXPECT_EQ(*v.highest(), 3u);
  EXPECT_EQ(v.popcount(), 1u);
}

TEST(Gf2, KernelVectorsAreInKernel) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12;
    std::vector<gf2::BitVector> columns;
    for (std::size_t c = 0; c < cols; ++c) columns.push_back(random_vector(rng, rows));
    const auto ker = gf2::kernel(columns, rows);
    EXPECT_EQ(ker.size() + gf2::rank(columns, rows), cols);
    for (const auto& k : ker) {
      gf2::BitVector sum(rows);
      for (std::size_t c = 0; c < cols; ++c)
        if (k.test(c)) sum ^= columns[c];
      EXPECT_FALSE(sum.any());
      EXPECT_TRUE(k.any());
    }
  }
}

TEST(Gf2, RankMatchesSpanCount) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng() % 8, m = rng() % 8;
    std::vector<gf2::BitVector> vs;
    for (std::size_t i = 0; i < m; ++i) vs.push_back(random_vector(rng, n));
    EXPECT_EQ(gf2::rank(vs, n), brute_rank(vs, n));
  }
}

TEST(Gf2, SolveFindsPreimage) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t rows = 1 + rng() % 10, cols = 1 + rng() % 10;
    std::vector<gf2::BitVector> columns;
    for (std::size_t c = 0; c < cols; ++c) columns.push_back(random_vector(rng, rows));
    const auto target = random_vector(rng, rows);
    auto x = gf2::solve(columns, target);
    auto with = columns;
    with.push_back(target);
    const bool solvable = gf2::rank(with, rows) == gf2::rank(columns, rows);
    ASSERT_EQ(x.has_value(), solvable);
    if (!x) continue;
    gf2::BitVector sum(rows);
    for (std::size_t c = 0; c < cols; ++c)
      if (x->test(c)) sum ^= columns[c];
    EXPECT_EQ(sum, target);
  }
}

TEST(Rational, ParseForms) {
  EXPECT_EQ(Rational::parse("3"), Rational(3));
  EXPECT_EQ(Rational::parse("-1/4"), Rational(-1, 4));
  EXPECT_EQ(Rational::parse("0.75"), Rational(3, 4));
  EXPECT_EQ(Rational::parse("-0.5"), Rational(-1, 2));
  EXPECT_EQ(Rational::parse("6/8").str(), "3/4");
  EXPECT_THROW(Rational::parse(""), ValidationError);
  EXPECT_THROW(Rational::parse("1/0"), ValidationError);
  EXPECT_THROW(Rational::parse("abc"), ValidationError);
  EXPECT_THROW(Rational::parse("12345678901234567890"), ValidationError);
}

TEST(Rational, Arithmetic) {
  const Rational a(7, 10), b(4, 10);
  EXPECT_EQ(a + b, Rational(11, 10));
  EXPECT_EQ(a - b, Rational(3, 10));
  EXPECT_EQ(a * b, Rational(7, 25));
  EXPECT_EQ(a / b, Rational(7, 4));
  EXPECT_LT(b, a);
  EXPECT_EQ(-a, Rational(-7, 10));
  EXPECT_DOUBLE_EQ((a + b).to_double(), 1.1);
}

TEST(Rational, FieldAxiomsOnRandomValues) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> num(-50, 50), den(1, 30);
  for (int t = 0; t < 500; ++t) {
    const Rational x(num(rng), den(rng)), y(num(rng), den(rng)), z(num(rng), den(rng));
    EXPECT_EQ((x + y) + z, x + (y + z));
    EXPECT_EQ(x * (y + z), x * y + x * z);
    EXPECT_EQ(x - x, Rational(0));
    EXPECT_EQ(Rational::parse(x.str()), x);
    EXPECT_EQ(x < y, x.to_double() < y.to_double());
  }
}
