#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "specinv/field.hpp"
#include "specinv/persistence.hpp"
#include "specinv/random_fields.hpp"

using namespace specinv;

namespace {

// Path complex of f(x) = x^4 - 2x^2 on [-2, 2].
FilteredComplex quartic_path(int samples = 513) {
  FilteredComplex k;
  std::vector<CellId> v;
  std::vector<double> val;
  for (int i = 0; i < samples; ++i) {
    const double x = -2.0 + 4.0 * i / (samples - 1);
    val.push_back(x * x * x * x - 2 * x * x);
    v.push_back(k.add_cell(0, {}, val.back()));
  }
  for (int i = 0; i + 1 < samples; ++i) k.add_cell(1, {v[i], v[i + 1]}, std::max(val[i], val[i + 1]));
  return k;
}

// Every injection of a's bars into b's bars or the diagonal; leftovers of b
// go to the diagonal.
double brute_bottleneck(const std::vector<Bar>& a, const std::vector<Bar>& b) {
  double best = kInfinity;
  std::vector<int> assign(a.size(), -1);
  std::function<void(std::size_t, std::vector<char>&)> go = [&](std::size_t i, std::vector<char>& used) {
    if (i == a.size()) {
      double c = 0.0;
      for (std::size_t x = 0; x < a.size(); ++x) {
        if (assign[x] < 0) {
          c = std::max(c, a[x].length() / 2);
        } else {
          const auto& y = b[static_cast<std::size_t>(assign[x])];
          c = std::max({c, std::abs(a[x].birth - y.birth), std::abs(a[x].death - y.death)});
        }
      }
      for (std::size_t y = 0; y < b.size(); ++y)
        if (!used[y]) c = std::max(c, b[y].length() / 2);
      best = std::min(best, c);
      return;
    }
    assign[i] = -1;
    go(i + 1, used);
    for (std::size_t y = 0; y < b.size(); ++y) {
      if (used[y]) continue;
      used[y] = 1;
      assign[i] = static_cast<int>(y);
      go(i + 1, used);
      used[y] = 0;
    }
    assign[i] = -1;
  };
  std::vector<char> used(b.size(), 0);
  go(0, used);
  return a.empty() && b.empty() ? 0.0 : best;
}

Barcode random_finite_barcode(std::mt19937_64& rng, int max_bars) {
  std::uniform_int_distribution<int> count(0, max_bars), q(0, 8);
  Barcode b;
  const int n = count(rng);
  for (int i = 0; i < n; ++i) {
    const double s = q(rng) * 0.25, l = (1 + q(rng)) * 0.25;
    b.bars.push_back({0, s, s + l});
  }
  return b;
}

}  // namespace

TEST(Reduce, SingleVertex) {
  FilteredComplex k;
  k.add_cell(0, {}, 0.0);
  auto b = reduce(k);
  ASSERT_EQ(b.bars.size(), 1u);
  EXPECT_EQ(b.bars[0], (Bar{0, 0.0, kInfinity}));
}

TEST(Reduce, CosineCircleIsPerfect) {
  auto f = GridField::sample(GridDomain::circle(64), [](auto x) { return std::cos(x[0]); });
  auto b = reduce(lower_star(f));
  ASSERT_EQ(b.bars.size(), 2u);
  EXPECT_EQ(b.bars[0], (Bar{0, -1.0, kInfinity}));
  EXPECT_EQ(b.bars[1], (Bar{1, 1.0, kInfinity}));
  EXPECT_EQ(boundary_depth(b), 0.0);
}

TEST(Reduce, QuarticInterval) {
  auto b = reduce(quartic_path());
  ASSERT_EQ(b.bars.size(), 2u);
  EXPECT_EQ(b.bars[0], (Bar{0, -1.0, 0.0}));
  EXPECT_EQ(b.bars[1], (Bar{0, -1.0, kInfinity}));
  EXPECT_EQ(boundary_depth(b), 1.0);
}

TEST(Reduce, RelativeCellsAreQuotiented) {
  // interval [a, b] relative to its endpoints: one class in degree 1
  FilteredComplex k;
  auto a = k.add_cell(0, {}, 0.0, true);
  auto c = k.add_cell(0, {}, 0.0, true);
  auto m = k.add_cell(0, {}, 1.0);
  k.add_cell(1, {a, m}, 2.0);
  k.add_cell(1, {m, c}, 3.0);
  auto b = reduce(k);
  // m is a relative class until the first edge ties it to the endpoints
  ASSERT_EQ(b.bars.size(), 2u);
  EXPECT_EQ(b.in_degree(0), (std::vector<Bar>{{0, 1.0, 2.0}}));
  EXPECT_EQ(b.in_degree(1), (std::vector<Bar>{{1, 3.0, kInfinity}}));
}

TEST(Reduce, NonMonotoneFiltrationNamesCells) {
  FilteredComplex k;
  auto a = k.add_cell(0, {}, 0.0);
  auto c = k.add_cell(0, {}, 5.0);
  k.add_cell(1, {a, c}, 1.0);
  try {
    reduce(k);
    FAIL() << "expected a validation error";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("facet 1 (value 5) of cell 2"), std::string::npos);
  }
}

TEST(RankOf, QuarticExamples) {
  auto k = quartic_path();
  EXPECT_EQ(rank_of(k, -0.5, 0.5, 0), 1u);
  EXPECT_EQ(rank_of(k, -0.5, -0.1, 0), 2u);
  const double top = 8.0;
  EXPECT_EQ(rank_of(k, top, top, 0), 1u);
  EXPECT_EQ(rank_of(k, top, top, 1), 0u);
  EXPECT_THROW(rank_of(k, 1.0, 0.0, 0), ArgumentError);
}

TEST(RankOf, OracleEquivalenceOnRandomComplexes) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    auto k = random_filtered_complex(rng);
    ASSERT_LE(k.size(), 300u);
    auto bars = reduce(k);
    const auto crit = k.critical_values();
    for (int q = 0; q <= k.max_dim(); ++q)
      for (std::size_t a = 0; a < crit.size(); ++a)
        for (std::size_t b = a; b < crit.size(); ++b)
          ASSERT_EQ(bars.count_containing(crit[a], crit[b], q), rank_of(k, crit[a], crit[b], q))
              << "trial " << trial << " q=" << q << " s=" << crit[a] << " t=" << crit[b];
  }
}

TEST(Reduce, PermutationInvariance) {
  Rng rng(99);
  for (int trial = 0; trial < 40; ++trial) {
    auto k = random_filtered_complex(rng, 120);
    // relabel by a random order compatible with (value, dim)
    std::vector<CellId> perm(k.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::stable_sort(perm.begin(), perm.end(), [&](CellId a, CellId b) {
      if (k.value(a) != k.value(b)) return k.value(a) < k.value(b);
      return k.dim(a) < k.dim(b);
    });
    std::vector<CellId> new_id(k.size());
    FilteredComplex p;
    for (CellId c : perm) {
      std::vector<CellId> f;
      for (CellId x : k.facets(c)) f.push_back(new_id[x]);
      new_id[c] = p.add_cell(k.dim(c), f, k.value(c));
    }
    EXPECT_EQ(reduce(k).bars, reduce(p).bars) << "trial " << trial;
  }
}

TEST(Bottleneck, Examples) {
  Barcode a{{{0, 0.0, 2.0}}}, empty;
  EXPECT_EQ(bottleneck_distance(a, empty), 1.0);
  EXPECT_EQ(bottleneck_distance(a, a), 0.0);
  Barcode x{{{0, 0.0, 4.0}, {0, 1.0, 2.0}}}, y{{{0, 0.5, 4.0}}};
  EXPECT_EQ(bottleneck_distance(x, y), 0.5);
  EXPECT_EQ(brute_bottleneck(x.bars, y.bars), 0.5);
  Barcode inf1{{{0, 0.0, kInfinity}}}, inf2{{{0, 0.0, kInfinity}, {0, 1.0, kInfinity}}};
  EXPECT_TRUE(std::isinf(bottleneck_distance(inf1, inf2)));
}

TEST(Bottleneck, MatchesExhaustiveMatching) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_finite_barcode(rng, 4), b = random_finite_barcode(rng, 4);
    EXPECT_DOUBLE_EQ(bottleneck_distance(a, b), brute_bottleneck(a.bars, b.bars)) << "trial " << trial;
  }
}

TEST(Bottleneck, Pseudometric) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 300; ++trial) {
    auto a = random_finite_barcode(rng, 5), b = random_finite_barcode(rng, 5), c = random_finite_barcode(rng, 5);
    const double ab = bottleneck_distance(a, b), ba = bottleneck_distance(b, a);
    EXPECT_EQ(ab, ba);
    EXPECT_EQ(bottleneck_distance(a, a), 0.0);
    EXPECT_LE(bottleneck_distance(a, c), ab + bottleneck_distance(b, c) + 1e-12);
  }
}

TEST(Bottleneck, StabilityUnderPerturbation) {
  Rng rng(8);
  std::uniform_real_distribution<double> eps(-0.5, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto f = random_trig_field(rng, GridDomain::circle(64));
    auto g = f;
    for (auto& v : g.values) v += eps(rng);
    double sup = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) sup = std::max(sup, std::abs(f.values[i] - g.values[i]));
    EXPECT_LE(bottleneck_distance(reduce(lower_star(f)), reduce(lower_star(g))), sup + 1e-12);
  }
}

TEST(BoundaryDepth, LongestFiniteBar) {
  Barcode b{{{0, 0.0, kInfinity}, {0, 0.25, 1.0}, {1, 2.0, 2.5}}};
  EXPECT_EQ(boundary_depth(b), 0.75);
  EXPECT_EQ(boundary_depth(Barcode{}), 0.0);
}
