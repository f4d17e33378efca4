#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "specinv/field.hpp"
#include "specinv/persistence.hpp"
#include "specinv/random_fields.hpp"

using namespace specinv;

namespace {

constexpr double kPi = std::numbers::pi;

GridField cosine(int n) {
  return GridField::sample(GridDomain::circle(n), [](auto x) { return std::cos(x[0]); });
}

GFQIField quartic_point() {
  return complete_at_infinity(GridDomain::point(), GridDomain::box(1, 513, 4.0), {1},
                              [](auto, auto xi) { return std::pow(xi[0], 4) - 2 * xi[0] * xi[0]; }, 1.2, 1.8);
}

bool same_complex(const FilteredComplex& a, const FilteredComplex& b) {
  if (a.size() != b.size()) return false;
  for (CellId c = 0; c < a.size(); ++c) {
    if (a.dim(c) != b.dim(c) || a.value(c) != b.value(c) || a.relative(c) != b.relative(c)) return false;
    auto fa = a.facets(c), fb = b.facets(c);
    if (!std::equal(fa.begin(), fa.end(), fb.begin(), fb.end())) return false;
  }
  return true;
}

}  // namespace

TEST(GridDomain, Shapes) {
  EXPECT_EQ(GridDomain::circle(16).size(), 16u);
  EXPECT_EQ(GridDomain::torus(4, 6).size(), 24u);
  EXPECT_EQ(GridDomain::point().size(), 1u);
  auto box = GridDomain::box(1, 513, 4.0);
  EXPECT_DOUBLE_EQ(box.axis(0).spacing, 1.0 / 64);
  EXPECT_THROW(GridDomain::box(1, 1, 1.0), ValidationError);
}

TEST(LowerStar, ConstantField) {
  auto f = GridField::sample(GridDomain::circle(8), [](auto) { return 3.5; });
  auto k = lower_star(f);
  for (CellId c = 0; c < k.size(); ++c) EXPECT_EQ(k.value(c), 3.5);
  auto b = reduce(k);
  ASSERT_EQ(b.bars.size(), 2u);
}

TEST(LowerStar, CellValueIsVertexMax) {
  Rng rng(1);
  auto f = random_trig_field(rng, GridDomain::torus(6, 5));
  auto k = lower_star(f);
  // vertices come first in grid order
  for (CellId c = 0; c < k.size(); ++c) {
    if (k.dim(c) == 0) {
      EXPECT_EQ(k.value(c), f.values[c]);
      continue;
    }
    double m = -kInfinity;
    for (CellId g : k.facets(c)) m = std::max(m, k.value(g));
    EXPECT_EQ(k.value(c), m);
  }
}

TEST(LowerStar, TorusCosineSum) {
  auto f = GridField::sample(GridDomain::torus(32, 32), [](auto x) { return std::cos(x[0]) + std::cos(x[1]); });
  auto b = reduce(lower_star(f));
  EXPECT_EQ(b.infinite_births(0), std::vector<double>({-2.0}));
  EXPECT_EQ(b.infinite_births(1), std::vector<double>({0.0, 0.0}));
  EXPECT_EQ(b.infinite_births(2), std::vector<double>({2.0}));
  EXPECT_EQ(boundary_depth(b), 0.0);
}

TEST(RelativeFiltration, NoFiberEqualsLowerStar) {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    auto f = random_trig_field(rng, t % 2 ? GridDomain::torus(8, 8) : GridDomain::circle(40));
    EXPECT_TRUE(same_complex(relative_filtration(graph_gf(f)), lower_star(f)));
  }
}

TEST(RelativeFiltration, ZeroSectionOfPoint) {
  auto s = make_gfqi(GridDomain::point(), GridDomain::box(1, 33, 4.0), {1}, [](auto, auto) { return 0.0; });
  auto b = reduce(relative_filtration(s));
  ASSERT_EQ(b.bars.size(), 1u);
  EXPECT_EQ(b.bars[0], (Bar{0, 0.0, kInfinity}));
}

TEST(RelativeFiltration, NegativeSignShiftsDegree) {
  auto s = make_gfqi(GridDomain::point(), GridDomain::box(1, 33, 4.0), {-1}, [](auto, auto) { return 0.0; });
  auto b = reduce(relative_filtration(s));
  ASSERT_EQ(b.bars.size(), 1u);
  EXPECT_EQ(b.bars[0], (Bar{1, 0.0, kInfinity}));
}

TEST(RelativeFiltration, Quartic) {
  auto b = reduce(relative_filtration(quartic_point()));
  ASSERT_EQ(b.bars.size(), 2u);
  EXPECT_EQ(b.bars[0], (Bar{0, -1.0, 0.0}));
  EXPECT_EQ(b.bars[1], (Bar{0, -1.0, kInfinity}));
}

TEST(GFQIField, MarginViolationRejected) {
  EXPECT_THROW(make_gfqi(GridDomain::point(), GridDomain::box(1, 17, 4.0), {1}, [](auto, auto) { return 1.0; }),
               ValidationError);
  auto s = make_gfqi(GridDomain::circle(8), GridDomain::box(1, 17, 4.0), {1}, [](auto, auto) { return 0.0; });
  s.values[0] += 1.0;  // outermost layer
  s.values[1] += 2.0;
  EXPECT_THROW(s.validate(), ValidationError);
  EXPECT_THROW(relative_filtration(s), ValidationError);
}

TEST(GFQIField, QuadraticIndex) {
  auto s = make_gfqi(GridDomain::point(), GridDomain::box(2, 9, 2.0), {1, -1}, [](auto, auto) { return 0.0; });
  EXPECT_EQ(s.quadratic_index(), 1);
  auto b = reduce(relative_filtration(s));
  ASSERT_EQ(b.bars.size(), 1u);
  EXPECT_EQ(b.bars[0].degree, 1);
}

TEST(GraphGf, Basics) {
  auto f = cosine(64);
  auto s = graph_gf(f);
  EXPECT_TRUE(s.fiber.is_point());
  EXPECT_EQ(s.values, f.values);
  auto zero = graph_gf(GridField::sample(GridDomain::circle(8), [](auto) { return 0.0; }));
  for (double v : zero.values) EXPECT_EQ(v, 0.0);
}

TEST(Pullback, IdentityIsExact) {
  Rng rng(3);
  auto s = random_k1_gfqi(rng, GridDomain::circle(32));
  EXPECT_EQ(pullback_gf(s, MapSpec::identity(s.base)).values, s.values);
  auto t = graph_gf(random_trig_field(rng, GridDomain::torus(8, 6)));
  EXPECT_EQ(pullback_gf(t, MapSpec::identity(t.base)).values, t.values);
}

TEST(Pullback, DegreeTwoCircleMap) {
  auto s = graph_gf(cosine(128));
  auto p = pullback_gf(s, MapSpec::circle_map(s.base, 2, std::vector<double>(128, 0.0)));
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(p.values[i], std::cos(2 * kTwoPi * i / 128), 1e-12);
}

TEST(Pullback, ConstantMap) {
  Rng rng(4);
  auto s = random_k1_gfqi(rng, GridDomain::circle(16));
  const double theta0 = kTwoPi * 5 / 16;
  auto p = pullback_gf(s, MapSpec::constant(s.base, {theta0}));
  for (std::size_t b = 0; b < p.base_size(); ++b)
    for (std::size_t f = 0; f < p.fiber_size(); ++f) EXPECT_EQ(p.at(b, f), s.at(5, f));
}

TEST(Pullback, DimensionMismatch) {
  auto s = graph_gf(cosine(16));
  EXPECT_THROW(pullback_gf(s, MapSpec::identity(GridDomain::torus(4, 4))), ValidationError);
}

TEST(Shift, ZeroFullPeriodAndHalfPeriod) {
  auto s = graph_gf(cosine(128));
  EXPECT_EQ(shift_gf(s, 0.0).values, s.values);
  auto full = shift_gf(s, kTwoPi);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(full.values[i], s.values[i], 1e-12);
  auto half = shift_gf(s, kPi);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(half.values[i], -s.values[i], 1e-12);
  auto flat = graph_gf(GridField::sample(GridDomain::torus(4, 4), [](auto) { return 0.0; }));
  EXPECT_THROW(shift_gf(flat, 1.0), ValidationError);
}

TEST(Shift, RoundTripWithinInterpolationError) {
  Rng rng(5);
  std::uniform_real_distribution<double> th(-3.0, 3.0);
  for (int t = 0; t < 20; ++t) {
    auto f = random_trig_field(rng, GridDomain::circle(128));
    auto s = graph_gf(f);
    double lip = 0.0;
    for (std::size_t i = 0; i < 128; ++i)
      lip = std::max(lip, std::abs(f.values[(i + 1) % 128] - f.values[i]) / s.base.axis(0).spacing);
    const double theta = th(rng);
    auto back = shift_gf(shift_gf(s, theta), -theta);
    for (std::size_t i = 0; i < 128; ++i) EXPECT_LE(std::abs(back.values[i] - s.values[i]), lip * s.base.axis(0).spacing);
  }
}

TEST(Difference, GraphFields) {
  Rng rng(6);
  auto f = random_trig_field(rng, GridDomain::circle(32)), g = random_trig_field(rng, GridDomain::circle(32));
  auto d = gf_difference(graph_gf(f), graph_gf(g));
  EXPECT_TRUE(d.fiber.is_point());
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(d.values[i], f.values[i] - g.values[i]);
  auto z = gf_difference(graph_gf(f), graph_gf(f));
  for (double v : z.values) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(gf_difference(graph_gf(f), graph_gf(cosine(16))), ValidationError);
}

TEST(Difference, CosineAndItsHalfTurn) {
  auto s = graph_gf(cosine(128));
  auto d = gf_difference(s, shift_gf(s, kPi));
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(d.values[i], 2 * std::cos(kTwoPi * i / 128), 1e-12);
}

TEST(Difference, FiberSignsConcatenateNegated) {
  Rng rng(7);
  auto a = random_k1_gfqi(rng, GridDomain::circle(8));
  auto b = random_k1_gfqi(rng, GridDomain::circle(8));
  auto d = gf_difference(a, b);
  EXPECT_EQ(d.signs, std::vector<int>({1, -1}));
  EXPECT_EQ(d.fiber_size(), a.fiber_size() * b.fiber_size());
  EXPECT_NO_THROW(d.validate());
  EXPECT_EQ(d.at(3, 5 * b.fiber_size() + 7), a.at(3, 5) - b.at(3, 7));
}

TEST(Sum, GraphFieldsAndZeroSection) {
  Rng rng(8);
  auto f = random_trig_field(rng, GridDomain::circle(32)), g = random_trig_field(rng, GridDomain::circle(32));
  auto s = fiberwise_sum(graph_gf(f), graph_gf(g));
  for (std::size_t i = 0; i < 32; ++i) EXPECT_EQ(s.values[i], f.values[i] + g.values[i]);
  auto zero = graph_gf(GridField::sample(f.domain, [](auto) { return 0.0; }));
  auto k = random_k1_gfqi(rng, f.domain);
  EXPECT_EQ(fiberwise_sum(k, zero).values, k.values);
}

TEST(Sum, MinimumIsSuperadditive) {
  Rng rng(9);
  for (int t = 0; t < 50; ++t) {
    auto f = random_trig_field(rng, GridDomain::circle(64)), g = random_trig_field(rng, GridDomain::circle(64));
    auto s = fiberwise_sum(graph_gf(f), graph_gf(g));
    EXPECT_GE(*std::min_element(s.values.begin(), s.values.end()), f.min() + g.min());
  }
}
