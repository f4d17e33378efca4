#pragma once

// Sampled functions on tori and discretized generating functions
// S(x; xi) = Q(xi) + P(x; xi) over (torus base) x (fiber box), together with
// the constructions used throughout: pullback, rotation, difference and
// fiberwise sum.

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/grid.hpp"
#include "specinv/persistence.hpp"

namespace specinv {

/// Samples of a function on a torus grid (or on a point).
struct GridField {
  GridDomain domain;
  std::vector<double> values;

  GridField() = default;
  GridField(GridDomain d, std::vector<double> v) : domain(std::move(d)), values(std::move(v)) { validate(); }

  template <class F>
  static GridField sample(const GridDomain& domain, F&& f) {
    std::vector<double> v(domain.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(domain.coordinates(i));
    return GridField(domain, std::move(v));
  }

  void validate() const {
    if (!domain.all_periodic()) throw ValidationError("grid field domain must be a torus");
    if (values.size() != domain.size()) throw ValidationError("grid field value array does not match its domain");
  }

  double max() const { return *std::max_element(values.begin(), values.end()); }
  double min() const { return *std::min_element(values.begin(), values.end()); }
};

/// Discretized generating function quadratic at infinity. Values are stored
/// base-major: index = base_index * fiber.size() + fiber_index.
///
/// On the outer `support_margin` layers of fiber axis i the perturbation
/// P = S - Q does not depend on xi_i; for a field built from a single
/// perturbation it vanishes there. Sums and differences of such fields keep
/// the weaker property, which is all the sublevel topology needs.
struct GFQIField {
  GridDomain base;
  GridDomain fiber;
  std::vector<int> signs;
  std::vector<double> values;
  int support_margin = 1;

  std::size_t base_size() const { return base.size(); }
  std::size_t fiber_size() const { return fiber.size(); }
  std::size_t index(std::size_t b, std::size_t f) const { return b * fiber.size() + f; }
  double at(std::size_t b, std::size_t f) const { return values[index(b, f)]; }
  GridDomain total_domain() const { return base * fiber; }
  int base_dim() const { return static_cast<int>(base.dim()); }
  int fiber_dim() const { return static_cast<int>(fiber.dim()); }

  int quadratic_index() const { return static_cast<int>(std::count(signs.begin(), signs.end(), -1)); }

  double quadratic(std::size_t fiber_index) const {
    if (fiber.is_point()) return 0.0;
    auto xi = fiber.coordinates(fiber_index);
    double q = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) q += signs[i] * xi[i] * xi[i];
    return q;
  }

  /// Fiber points none of whose coordinates lie in the margin layers.
  bool in_core(std::size_t fiber_index) const {
    auto idx = fiber.unflatten(fiber_index);
    for (std::size_t a = 0; a < idx.size(); ++a) {
      const int n = fiber.axis(a).length;
      if (idx[a] < support_margin || idx[a] >= n - support_margin) return false;
    }
    return true;
  }

  void validate() const {
    base.validate();
    fiber.validate();
    if (!base.all_periodic()) throw ValidationError("GFQI base axes must be periodic");
    for (const auto& a : fiber.axes())
      if (a.periodic) throw ValidationError("GFQI fiber axes must be bounded");
    if (signs.size() != fiber.dim()) throw ValidationError("quadratic signs do not match fiber dimension");
    for (int s : signs)
      if (s != 1 && s != -1) throw ValidationError("quadratic signs must be +1 or -1");
    if (values.size() != base.size() * fiber.size()) throw ValidationError("GFQI value array does not match its grid");
    if (support_margin < 1) throw ValidationError("support margin must be at least 1");
    for (std::size_t a = 0; a < fiber.dim(); ++a)
      if (2 * support_margin >= fiber.axis(a).length)
        throw ValidationError("support margin leaves no interior on fiber axis " + std::to_string(a));
    check_margin();
  }

  void check_margin() const {
    if (fiber.is_point()) return;
    CubicalGrid grid(fiber);
    const std::size_t nf = fiber.size();
    std::vector<double> q(nf);
    for (std::size_t f = 0; f < nf; ++f) q[f] = quadratic(f);
    for (std::size_t b = 0; b < base.size(); ++b) {
      for (std::size_t f = 0; f < nf; ++f) {
        for (std::size_t a = 0; a < fiber.dim(); ++a) {
          const int n = fiber.axis(a).length;
          const int c = grid.coord(f, a);
          // compare each margin layer with its outward neighbour
          std::size_t g;
          if (c < support_margin && c > 0) {
            g = f - grid.stride(a);
          } else if (c >= n - support_margin && c + 1 < n) {
            g = f + grid.stride(a);
          } else {
            continue;
          }
          const double p_here = at(b, f) - q[f];
          const double p_out = at(b, g) - q[g];
          if (std::abs(p_here - p_out) > 1e-9 * (1.0 + std::abs(p_here))) {
            throw ValidationError("support margin violated: perturbation varies along fiber axis " + std::to_string(a) +
                                  " in the outer layers (base point " + std::to_string(b) + ")");
          }
        }
      }
    }
  }
};

/// Builds S = Q + P from a perturbation; P is forced to respect the margin
/// (outer layers where it must vanish). Throws if P is nonzero there.
template <class Perturbation>
GFQIField make_gfqi(const GridDomain& base, const GridDomain& fiber, std::vector<int> signs, Perturbation&& perturbation,
                    int support_margin = 2) {
  GFQIField s{base, fiber, std::move(signs), {}, support_margin};
  s.values.resize(base.size() * fiber.size());
  std::vector<std::vector<double>> fiber_coords(fiber.size());
  for (std::size_t f = 0; f < fiber.size(); ++f) fiber_coords[f] = fiber.coordinates(f);
  for (std::size_t b = 0; b < base.size(); ++b) {
    auto x = base.coordinates(b);
    for (std::size_t f = 0; f < fiber.size(); ++f) {
      double p = perturbation(std::span<const double>(x), std::span<const double>(fiber_coords[f]));
      if (!s.in_core(f) && p != 0.0)
        throw ValidationError("perturbation is nonzero on the outer support margin layers");
      s.values[s.index(b, f)] = s.quadratic(f) + p;
    }
  }
  s.validate();
  return s;
}

/// Smooth step: 0 for t <= 0, 1 for t >= 1, C^2 in between.
inline double smoothstep(double t) {
  if (t <= 0) return 0.0;
  if (t >= 1) return 1.0;
  return t * t * t * (t * (6 * t - 15) + 10);
}

/// Deforms an arbitrary function E(x; xi) into Q outside the sup-norm ball of
/// radius `outer`: S = Q + chi(|xi|_inf) (E - Q) with chi = 1 inside `inner`.
template <class Expr>
GFQIField complete_at_infinity(const GridDomain& base, const GridDomain& fiber, std::vector<int> signs, Expr&& expr,
                               double inner, double outer, int support_margin = 2) {
  if (!(inner < outer)) throw ArgumentError("cutoff radii must satisfy inner < outer");
  std::vector<int> sg = signs;
  auto q_of = [&sg](std::span<const double> xi) {
    double q = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) q += sg[i] * xi[i] * xi[i];
    return q;
  };
  return make_gfqi(
      base, fiber, std::move(signs),
      [&](std::span<const double> x, std::span<const double> xi) {
        double rho = 0.0;
        for (double v : xi) rho = std::max(rho, std::abs(v));
        const double chi = 1.0 - smoothstep((rho - inner) / (outer - inner));
        if (chi == 0.0) return 0.0;
        return chi * (expr(x, xi) - q_of(xi));
      },
      support_margin);
}

/// The graph of df: a generating function with no fiber.
inline GFQIField graph_gf(const GridField& f) {
  f.validate();
  GFQIField s{f.domain, GridDomain::point(), {}, f.values, 1};
  return s;
}

/// Sublevel filtration of a grid field on its torus.
inline FilteredComplex lower_star(const GridField& f) {
  f.validate();
  return build_lower_star(f.domain, f.values).complex;
}

/// Level below which sublevel sets of S are its "minus infinity" part.
/// A critical point has xi_a = 0 or lies where P varies along axis a, so
/// |critical value| <= max|P| + sum_a rho_a^2 with rho_a the largest |xi_a|
/// at which P varies along a (one grid step added).
inline double relative_level(const GFQIField& s) {
  double max_p = 0.0;
  if (s.fiber.is_point()) {
    for (double v : s.values) max_p = std::max(max_p, std::abs(v));
    return 1.0 + max_p;
  }
  const std::size_t nf = s.fiber_size();
  CubicalGrid grid(s.fiber);
  std::vector<double> q(nf);
  for (std::size_t f = 0; f < nf; ++f) q[f] = s.quadratic(f);
  std::vector<double> rho(s.fiber.dim(), 0.0);
  for (std::size_t b = 0; b < s.base_size(); ++b) {
    for (std::size_t f = 0; f < nf; ++f) {
      const double p = s.at(b, f) - q[f];
      max_p = std::max(max_p, std::abs(p));
      for (std::size_t a = 0; a < s.fiber.dim(); ++a) {
        if (!grid.exists(f, 1u << a)) continue;
        const std::size_t g = grid.step(f, a);
        // S - Q is recomputed, so allow for rounding at the size of S and Q
        if (std::abs(s.at(b, g) - q[g] - p) <= 1e-12 * (1.0 + std::abs(s.at(b, f)) + std::abs(q[f]))) continue;
        const Axis& ax = s.fiber.axis(a);
        const double r = std::max(std::abs(ax.coordinate(grid.coord(f, a))), std::abs(ax.coordinate(grid.coord(g, a))));
        rho[a] = std::max(rho[a], r + ax.spacing);
      }
    }
  }
  double level = 1.0 + max_p;
  for (double r : rho) level += r * r;
  return level;
}

/// Checks that every negative fiber direction reaches below the relative
/// level at both ends, so the truncated box sees the correct pair.
inline void check_negative_reach(const GFQIField& s, double level) {
  if (s.fiber.is_point()) return;
  std::vector<int> center(s.fiber.dim());
  for (std::size_t a = 0; a < s.fiber.dim(); ++a) center[a] = (s.fiber.axis(a).length - 1) / 2;
  for (std::size_t a = 0; a < s.fiber.dim(); ++a) {
    if (s.signs[a] != -1) continue;
    for (int end : {0, s.fiber.axis(a).length - 1}) {
      auto idx = center;
      idx[a] = end;
      const std::size_t f = s.fiber.flatten(idx);
      for (std::size_t b = 0; b < s.base_size(); ++b)
        if (!(s.at(b, f) < -level))
          throw ValidationError("fiber box too small: negative direction " + std::to_string(a) +
                                " does not reach below the relative level");
    }
  }
}

struct RelativeBuild {
  CubicalBuild build;
  double level = 0.0;
};

/// Cubical complex on base x fiber box with relative subcomplex
/// {S <= -level}; the filtration computes H_*(S^t, S^{-infinity}).
inline RelativeBuild relative_build(const GFQIField& s, CubicalSpec spec = {}) {
  s.validate();
  const double level = relative_level(s);
  check_negative_reach(s, level);
  const auto total = s.total_domain();
  if (!s.fiber.is_point()) {
    spec.relative_vertices.assign(s.values.size(), 0);
    for (std::size_t i = 0; i < s.values.size(); ++i) spec.relative_vertices[i] = s.values[i] <= -level ? 1 : 0;
  }
  return {build_lower_star(total, s.values, spec), level};
}

inline FilteredComplex relative_filtration(const GFQIField& s) { return relative_build(s).build.complex; }

/// A map between torus bases: target coordinate j is
/// sum_i winding[j][i] * x_i + offsets[j](x), mod the target period.
struct MapSpec {
  GridDomain source;
  std::vector<std::vector<int>> winding;
  std::vector<std::vector<double>> offsets;  // per target axis, sampled on `source`

  static MapSpec identity(const GridDomain& d) {
    MapSpec m{d, {}, {}};
    for (std::size_t j = 0; j < d.dim(); ++j) {
      std::vector<int> row(d.dim(), 0);
      row[j] = 1;
      m.winding.push_back(row);
      m.offsets.emplace_back(d.size(), 0.0);
    }
    return m;
  }
  static MapSpec circle_map(const GridDomain& source, int winding, std::vector<double> offset) {
    return MapSpec{source, {{winding}}, {std::move(offset)}};
  }
  static MapSpec constant(const GridDomain& source, std::vector<double> point) {
    MapSpec m{source, {}, {}};
    for (double p : point) {
      m.winding.emplace_back(source.dim(), 0);
      m.offsets.emplace_back(source.size(), p);
    }
    return m;
  }

  void validate() const {
    if (!source.all_periodic()) throw ValidationError("map source must be a torus");
    if (winding.size() != offsets.size()) throw ValidationError("map winding rows and offsets disagree");
    for (const auto& row : winding)
      if (row.size() != source.dim()) throw ValidationError("map winding row has wrong length");
    for (const auto& o : offsets)
      if (o.size() != source.size()) throw ValidationError("map offsets must be sampled on the source grid");
  }
};

namespace detail {

struct Stencil {
  std::vector<std::size_t> index;
  std::vector<double> weight;
};

// Multilinear interpolation stencil for a point of a periodic grid.
inline Stencil periodic_stencil(const GridDomain& grid, std::span<const double> point) {
  Stencil st{{0}, {1.0}};
  std::size_t stride = grid.size();
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const Axis& ax = grid.axis(a);
    stride /= static_cast<std::size_t>(ax.length);
    double u = (point[a] - ax.origin) / ax.spacing;
    u = std::fmod(u, static_cast<double>(ax.length));
    if (u < 0) u += ax.length;
    int i0 = static_cast<int>(std::floor(u));
    double frac = u - i0;
    if (i0 >= ax.length) {
      i0 -= ax.length;
    }
    // snap tiny interpolation weights so grid-aligned maps stay exact
    if (frac < 1e-12) frac = 0.0;
    if (frac > 1 - 1e-12) {
      frac = 0.0;
      i0 = (i0 + 1) % ax.length;
    }
    const int i1 = (i0 + 1) % ax.length;
    Stencil next;
    for (std::size_t k = 0; k < st.index.size(); ++k) {
      next.index.push_back(st.index[k] + static_cast<std::size_t>(i0) * stride);
      next.weight.push_back(st.weight[k] * (1 - frac));
      if (frac != 0.0) {
        next.index.push_back(st.index[k] + static_cast<std::size_t>(i1) * stride);
        next.weight.push_back(st.weight[k] * frac);
      }
    }
    st = std::move(next);
  }
  return st;
}

}  // namespace detail

/// S_f(x, xi) = S(f(x); xi), by multilinear interpolation on the base torus.
inline GFQIField pullback_gf(const GFQIField& s, const MapSpec& m) {
  m.validate();
  if (m.winding.size() != s.base.dim())
    throw ValidationError("map target dimension " + std::to_string(m.winding.size()) +
                          " does not match the generating function base dimension " + std::to_string(s.base.dim()));
  GFQIField out{m.source, s.fiber, s.signs, {}, s.support_margin};
  const std::size_t nf = s.fiber_size();
  out.values.resize(m.source.size() * nf);
  std::vector<double> target(s.base.dim());
  for (std::size_t b = 0; b < m.source.size(); ++b) {
    auto x = m.source.coordinates(b);
    for (std::size_t j = 0; j < target.size(); ++j) {
      double y = m.offsets[j][b];
      for (std::size_t i = 0; i < x.size(); ++i) y += m.winding[j][i] * x[i];
      target[j] = y;
    }
    auto st = detail::periodic_stencil(s.base, target);
    for (std::size_t f = 0; f < nf; ++f) {
      double v = 0.0;
      for (std::size_t k = 0; k < st.index.size(); ++k) v += st.weight[k] * s.at(st.index[k], f);
      out.values[out.index(b, f)] = v;
    }
  }
  return out;
}

/// S_theta(x; xi) = S(x - theta; xi) on a circle base.
inline GFQIField shift_gf(const GFQIField& s, double theta) {
  if (s.base.dim() != 1) throw ValidationError("shift_gf needs a circle base");
  std::vector<double> offset(s.base.size(), -theta);
  return pullback_gf(s, MapSpec::circle_map(s.base, 1, std::move(offset)));
}

namespace detail {

inline GFQIField combine(const GFQIField& a, const GFQIField& b, double sign_b) {
  if (!(a.base == b.base)) throw ValidationError("generating functions live over different bases");
  GFQIField out;
  out.base = a.base;
  out.fiber = a.fiber * b.fiber;
  out.signs = a.signs;
  for (int s : b.signs) out.signs.push_back(static_cast<int>(sign_b) * s);
  if (a.fiber.is_point()) {
    out.support_margin = b.support_margin;
  } else if (b.fiber.is_point()) {
    out.support_margin = a.support_margin;
  } else {
    out.support_margin = std::min(a.support_margin, b.support_margin);
  }
  const std::size_t na = a.fiber_size(), nb = b.fiber_size();
  out.values.resize(a.base_size() * na * nb);
  for (std::size_t x = 0; x < a.base_size(); ++x)
    for (std::size_t i = 0; i < na; ++i)
      for (std::size_t j = 0; j < nb; ++j) out.values[(x * na + i) * nb + j] = a.at(x, i) + sign_b * b.at(x, j);
  return out;
}

}  // namespace detail

/// (S1 (-) S2)(x; xi1, xi2) = S1(x; xi1) - S2(x; xi2).
inline GFQIField gf_difference(const GFQIField& s1, const GFQIField& s2) { return detail::combine(s1, s2, -1.0); }

/// (S1 (+) S2)(x; xi1, xi2) = S1(x; xi1) + S2(x; xi2).
inline GFQIField fiberwise_sum(const GFQIField& s1, const GFQIField& s2) { return detail::combine(s1, s2, 1.0); }

/// The dual generating function -S (quadratic form negated).
inline GFQIField dual_gf(const GFQIField& s) {
  GFQIField out = s;
  for (auto& v : out.values) v = -v;
  for (auto& q : out.signs) q = -q;
  return out;
}

/// S + c.
inline GFQIField add_constant(const GFQIField& s, double c) {
  GFQIField out = s;
  for (auto& v : out.values) v += c;
  return out;
}

}  // namespace specinv
