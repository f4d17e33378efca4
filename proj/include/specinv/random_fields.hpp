#pragma once

// Seeded random instances: trigonometric polynomials on tori and
// compactly supported fiber perturbations of xi^2.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

#include "specinv/field.hpp"
#include "specinv/grid.hpp"
#include "specinv/persistence.hpp"

namespace specinv {

using Rng = std::mt19937_64;

/// sum_k a_k cos(k.x) + b_k sin(k.x) + c over frequency vectors with
/// max |k_i| <= degree; sup norm bounded by the amplitude.
struct TrigPoly {
  std::vector<std::vector<int>> freq;
  std::vector<double> a, b;
  double c = 0.0;

  double operator()(std::span<const double> x) const {
    double v = c;
    for (std::size_t i = 0; i < freq.size(); ++i) {
      double phase = 0.0;
      for (std::size_t j = 0; j < freq[i].size(); ++j) phase += freq[i][j] * x[j];
      v += a[i] * std::cos(phase) + b[i] * std::sin(phase);
    }
    return v;
  }

  double coefficient_sum() const {
    double s = std::abs(c);
    for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i]) + std::abs(b[i]);
    return s;
  }
};

inline TrigPoly random_trig_poly(Rng& rng, int dim, int max_degree = 4, double amplitude = 2.0) {
  std::uniform_int_distribution<int> deg_dist(1, max_degree);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int deg = deg_dist(rng);
  TrigPoly p;
  // one representative of each +-k pair
  std::vector<int> k(static_cast<std::size_t>(dim), -deg);
  while (true) {
    bool positive = false;
    for (int v : k) {
      if (v != 0) {
        positive = v > 0;
        break;
      }
    }
    if (positive) {
      p.freq.push_back(k);
      p.a.push_back(u(rng));
      p.b.push_back(u(rng));
    }
    std::size_t i = 0;
    while (i < k.size() && ++k[i] > deg) k[i++] = -deg;
    if (i == k.size()) break;
  }
  p.c = u(rng);
  std::uniform_real_distribution<double> scale_dist(0.25, 1.0);
  const double target = amplitude * scale_dist(rng);
  const double s = target / p.coefficient_sum();
  for (auto& v : p.a) v *= s;
  for (auto& v : p.b) v *= s;
  p.c *= s;
  return p;
}

inline GridField random_trig_field(Rng& rng, const GridDomain& domain, int max_degree = 4, double amplitude = 2.0) {
  auto p = random_trig_poly(rng, static_cast<int>(domain.dim()), max_degree, amplitude);
  return GridField::sample(domain, [&](std::span<const double> x) { return p(x); });
}

/// Smooth bump: 1 on |t| <= inner, 0 on |t| >= outer.
inline double bump(double t, double inner, double outer) {
  return 1.0 - smoothstep((std::abs(t) - inner) / (outer - inner));
}

struct FiberPerturbationSpec {
  int samples = 17;
  double halfwidth = 4.0;
  double inner = 1.0;  // perturbation unmodified for |xi| <= inner
  double outer = 2.5;  // and gone for |xi| >= outer
  int max_degree = 4;
  double amplitude = 2.0;        // for the xi-independent part
  double slope_amplitude = 1.0;  // for the coefficient of xi
  int sign = 1;
};

/// S(x; xi) = sign*xi^2 + bump(xi) * (a(x) + b(x) xi) with random trig
/// polynomials a, b on the base torus; one fiber axis.
inline GFQIField random_k1_gfqi(Rng& rng, const GridDomain& base, const FiberPerturbationSpec& spec = {}) {
  auto a = random_trig_poly(rng, static_cast<int>(base.dim()), spec.max_degree, spec.amplitude);
  auto b = random_trig_poly(rng, static_cast<int>(base.dim()), spec.max_degree, spec.slope_amplitude);
  return make_gfqi(base, GridDomain::box(1, spec.samples, spec.halfwidth), {spec.sign},
                   [&](std::span<const double> x, std::span<const double> xi) {
                     const double w = bump(xi[0], spec.inner, spec.outer);
                     return w == 0.0 ? 0.0 : w * (a(x) + b(x) * xi[0]);
                   });
}

/// S1 - S2 style pair on T^2 = X x Y: a random k = 1 GFQI and a random graph
/// field, both split after the first axis by the caller.
inline std::pair<GFQIField, GFQIField> random_product_pair(Rng& rng, int n = 24, const FiberPerturbationSpec& spec = {}) {
  const auto base = GridDomain::torus(n, n);
  auto s1 = random_k1_gfqi(rng, base, spec);
  auto s2 = graph_gf(random_trig_field(rng, base, 3, 2.0));
  return {std::move(s1), std::move(s2)};
}

/// Random simplicial complex (up to tetrahedra) with a monotone filtration on
/// a small integer grid, so ties are common; about `max_cells` cells.
inline FilteredComplex random_filtered_complex(Rng& rng, std::size_t max_cells = 300) {
  std::uniform_int_distribution<int> nv_dist(3, 20), step(0, 2), coin(0, 99);
  FilteredComplex k;
  const int nv = nv_dist(rng);
  std::vector<CellId> vertex;
  std::vector<double> value;
  for (int v = 0; v < nv; ++v) {
    const double t = static_cast<double>(step(rng) + step(rng));
    vertex.push_back(k.add_cell(0, {}, t));
    value.push_back(t);
  }
  std::map<std::pair<int, int>, CellId> edges;
  for (int a = 0; a < nv && k.size() < max_cells; ++a)
    for (int b = a + 1; b < nv && k.size() < max_cells; ++b) {
      if (coin(rng) >= 55) continue;
      const double t = std::max(value[a], value[b]) + step(rng);
      edges[{a, b}] = k.add_cell(1, {vertex[a], vertex[b]}, t);
    }
  std::map<std::tuple<int, int, int>, CellId> tris;
  for (int a = 0; a < nv; ++a)
    for (int b = a + 1; b < nv; ++b)
      for (int c = b + 1; c < nv; ++c) {
        if (k.size() >= max_cells) break;
        auto ab = edges.find({a, b}), ac = edges.find({a, c}), bc = edges.find({b, c});
        if (ab == edges.end() || ac == edges.end() || bc == edges.end() || coin(rng) >= 60) continue;
        const double t = std::max({k.value(ab->second), k.value(ac->second), k.value(bc->second)}) + step(rng);
        tris[{a, b, c}] = k.add_cell(2, {ab->second, ac->second, bc->second}, t);
      }
  for (auto it = tris.begin(); it != tris.end() && k.size() < max_cells; ++it) {
    const auto [a, b, c] = it->first;
    for (int d = c + 1; d < nv && k.size() < max_cells; ++d) {
      auto abd = tris.find({a, b, d}), acd = tris.find({a, c, d}), bcd = tris.find({b, c, d});
      if (abd == tris.end() || acd == tris.end() || bcd == tris.end() || coin(rng) >= 50) continue;
      const double t = std::max({k.value(it->second), k.value(abd->second), k.value(acd->second), k.value(bcd->second)}) + step(rng);
      k.add_cell(3, {it->second, abd->second, acd->second, bcd->second}, t);
    }
  }
  return k;
}

}  // namespace specinv
