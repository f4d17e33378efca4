#pragma once

// Slices of generating functions over a product base X x Y and numeric
// checks of the reduction, gluing, pullback and rotation inequalities.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/field.hpp"
#include "specinv/grid.hpp"
#include "specinv/parallel.hpp"
#include "specinv/spectral.hpp"

namespace specinv {

/// A generating function over X x Y; the first `split` base axes form X.
struct ProductGFQI {
  GFQIField field;
  int split = 1;

  ProductGFQI() = default;
  ProductGFQI(GFQIField f, int d) : field(std::move(f)), split(d) { validate(); }

  void validate() const {
    if (split < 1 || split > static_cast<int>(field.base.dim()))
      throw ValidationError("product split " + std::to_string(split) + " does not fit a base of dimension " +
                            std::to_string(field.base.dim()));
  }
  GridDomain x_domain() const {
    return GridDomain(std::vector<Axis>(field.base.axes().begin(), field.base.axes().begin() + split));
  }
  GridDomain y_domain() const {
    return GridDomain(std::vector<Axis>(field.base.axes().begin() + split, field.base.axes().end()));
  }
  int d() const { return split; }
};

/// S_x(y; xi) = S(x, y; xi) for an X grid point x.
inline GFQIField slice(const ProductGFQI& s, std::size_t x) {
  const auto xd = s.x_domain();
  if (x >= xd.size()) throw ArgumentError("slice point " + std::to_string(x) + " is not on the X grid");
  const auto yd = s.y_domain();
  const std::size_t per = yd.size() * s.field.fiber_size();
  GFQIField out{yd, s.field.fiber, s.field.signs, {}, s.field.support_margin};
  out.values.assign(s.field.values.begin() + static_cast<std::ptrdiff_t>(x * per),
                    s.field.values.begin() + static_cast<std::ptrdiff_t>((x + 1) * per));
  return out;
}

struct SliceProfile {
  std::vector<double> c_plus, c_minus, gamma, beta, tolerance;
  double sup_c_plus = -kInfinity;
  double inf_c_minus = kInfinity;
  double sup_gamma = 0.0;
  double sup_beta = 0.0;
  std::size_t argmax_c_plus = 0;
};

inline SliceProfile slice_profile(const ProductGFQI& s) {
  const std::size_t nx = s.x_domain().size();
  SliceProfile p;
  p.c_plus.resize(nx);
  p.c_minus.resize(nx);
  p.gamma.resize(nx);
  p.beta.resize(nx);
  p.tolerance.resize(nx);
  parallel_for(nx, [&](std::size_t x) {
    auto r = spectral_report(slice(s, x));
    p.c_plus[x] = r.c_plus;
    p.c_minus[x] = r.c_minus;
    p.gamma[x] = r.gamma;
    p.beta[x] = r.beta;
    p.tolerance[x] = r.tolerance;
  });
  for (std::size_t x = 0; x < nx; ++x) {
    if (p.c_plus[x] > p.sup_c_plus) {
      p.sup_c_plus = p.c_plus[x];
      p.argmax_c_plus = x;
    }
    p.inf_c_minus = std::min(p.inf_c_minus, p.c_minus[x]);
    p.sup_gamma = std::max(p.sup_gamma, p.gamma[x]);
    p.sup_beta = std::max(p.sup_beta, p.beta[x]);
  }
  return p;
}

namespace detail {

inline ProductGFQI product_difference(const ProductGFQI& s1, const ProductGFQI& s2) {
  if (s1.split != s2.split) throw ValidationError("product splits differ");
  return ProductGFQI(gf_difference(s1.field, s2.field), s1.split);
}

}  // namespace detail

struct DirectReductionReport {
  double c_plus = 0.0, c_minus = 0.0, gamma = 0.0;
  double sup_slice_c_plus = 0.0, inf_slice_c_minus = 0.0, sup_slice_gamma = 0.0;
  double margin_plus = 0.0;   // c_+ - sup_x c_+(x)
  double margin_minus = 0.0;  // inf_x c_-(x) - c_-
  double margin_gamma = 0.0;  // gamma - sup_x gamma(x)
  double tolerance = 0.0;
  bool holds = false;
};

struct InverseReductionReport {
  int d = 1;
  double c_plus = 0.0, c_minus = 0.0;
  double sup_slice_c_plus = 0.0, inf_slice_c_minus = 0.0, sup_slice_gamma = 0.0;
  double excess_plus = 0.0;   // c_+ - sup_x c_+(x)
  double excess_minus = 0.0;  // inf_x c_-(x) - c_-
  double ratio_plus = 0.0;    // excess / sup_x gamma(x); 0 when both vanish
  double ratio_minus = 0.0;
  double tolerance = 0.0;
  bool holds_k_d = false;
  bool holds_k_d1 = false;
  bool degenerate_violation = false;  // sup_x gamma(x) = 0 yet the excess exceeds tolerance
};

struct ReductionReports {
  DirectReductionReport direct;
  InverseReductionReport inverse;
  SliceProfile slices;
};

/// Reports for a difference field given directly.
inline ReductionReports reduction_reports(const ProductGFQI& diff, std::optional<double> tol = std::nullopt) {
  auto global = spectral_report(diff.field);
  ReductionReports out;
  out.slices = slice_profile(diff);
  const auto& p = out.slices;
  const double tau = tol.value_or(global.tolerance);

  auto& dr = out.direct;
  dr.c_plus = global.c_plus;
  dr.c_minus = global.c_minus;
  dr.gamma = global.gamma;
  dr.sup_slice_c_plus = p.sup_c_plus;
  dr.inf_slice_c_minus = p.inf_c_minus;
  dr.sup_slice_gamma = p.sup_gamma;
  dr.margin_plus = global.c_plus - p.sup_c_plus;
  dr.margin_minus = p.inf_c_minus - global.c_minus;
  dr.margin_gamma = global.gamma - p.sup_gamma;
  dr.tolerance = tau;
  dr.holds = dr.margin_plus >= -tau && dr.margin_minus >= -tau && dr.margin_gamma >= -tau;

  auto& ir = out.inverse;
  ir.d = diff.d();
  ir.c_plus = global.c_plus;
  ir.c_minus = global.c_minus;
  ir.sup_slice_c_plus = p.sup_c_plus;
  ir.inf_slice_c_minus = p.inf_c_minus;
  ir.sup_slice_gamma = p.sup_gamma;
  ir.excess_plus = global.c_plus - p.sup_c_plus;
  ir.excess_minus = p.inf_c_minus - global.c_minus;
  ir.tolerance = tau;
  auto ratio = [&](double excess) {
    if (p.sup_gamma > 0) return excess / p.sup_gamma;
    return excess > tau ? kInfinity : 0.0;
  };
  ir.ratio_plus = ratio(ir.excess_plus);
  ir.ratio_minus = ratio(ir.excess_minus);
  auto holds = [&](double k) {
    return ir.excess_plus <= k * p.sup_gamma + tau && ir.excess_minus <= k * p.sup_gamma + tau;
  };
  ir.holds_k_d = holds(ir.d);
  ir.holds_k_d1 = holds(ir.d + 1);
  ir.degenerate_violation = p.sup_gamma == 0 && std::max(ir.excess_plus, ir.excess_minus) > tau;
  return out;
}

inline ReductionReports reduction_reports(const ProductGFQI& s1, const ProductGFQI& s2, std::optional<double> tol = std::nullopt) {
  return reduction_reports(detail::product_difference(s1, s2), tol);
}

inline DirectReductionReport check_direct_reduction(const ProductGFQI& s1, const ProductGFQI& s2, std::optional<double> tol = std::nullopt) {
  return reduction_reports(s1, s2, tol).direct;
}

inline InverseReductionReport check_inverse_reduction(const ProductGFQI& s1, const ProductGFQI& s2, std::optional<double> tol = std::nullopt) {
  return reduction_reports(s1, s2, tol).inverse;
}

struct MVReport {
  double c_plus_u = 0.0, c_plus_v = 0.0, c_plus_union = 0.0;
  double beta_u = 0.0, beta_v = 0.0;
  double gamma_u = 0.0, gamma_v = 0.0;
  double bound_beta = 0.0;   // max(c_+(U), c_+(V)) + max(beta(U), beta(V))
  double bound_gamma = 0.0;  // same with gamma
  double tolerance = 0.0;
  bool holds_beta = false;
  bool holds_gamma = false;
  bool holds() const { return holds_beta && holds_gamma; }
};

inline MVReport mv_bound(const GFQIField& s, const Region& u, const Region& v, std::optional<double> tol = std::nullopt) {
  auto ru = region_report(s, u);
  auto rv = region_report(s, v);
  const double cu = region_c_plus(s, u | v);
  MVReport m;
  m.c_plus_u = ru.c_plus;
  m.c_plus_v = rv.c_plus;
  m.c_plus_union = cu;
  m.beta_u = ru.beta;
  m.beta_v = rv.beta;
  m.gamma_u = ru.c_plus - ru.c_minus;
  m.gamma_v = rv.c_plus - rv.c_minus;
  const double top = std::max(ru.c_plus, rv.c_plus);
  m.bound_beta = top + std::max(ru.beta, rv.beta);
  m.bound_gamma = top + std::max(m.gamma_u, m.gamma_v);
  m.tolerance = tol.value_or(tolerance(s));
  m.holds_beta = cu <= m.bound_beta + m.tolerance;
  m.holds_gamma = cu <= m.bound_gamma + m.tolerance;
  return m;
}

inline MVReport mv_bound(const GridField& f, const Region& u, const Region& v, std::optional<double> tol = std::nullopt) {
  return mv_bound(graph_gf(f), u, v, tol);
}

inline MVReport mv_bound(const ProductGFQI& s, const Region& u_x, const Region& v_x, std::optional<double> tol = std::nullopt) {
  const auto y = s.y_domain();
  return mv_bound(s.field, u_x.lift(y), v_x.lift(y), tol);
}

/// d+1 families U_0..U_d of regions of X; each family is a union of
/// pairwise non-adjacent connected parts.
struct Cover {
  GridDomain x;
  std::vector<std::vector<Region>> parts;

  Region piece(std::size_t j) const {
    Region r = parts[j].front();
    for (std::size_t k = 1; k < parts[j].size(); ++k) r = r | parts[j][k];
    return r;
  }
  std::size_t families() const { return parts.size(); }

  /// Exhaustive certificate: every box is covered, parts are connected with
  /// an interior point, and parts of one family have disjoint closures.
  void validate() const {
    if (parts.size() != x.dim() + 1) throw ValidationError("cover needs dim X + 1 families");
    std::vector<char> covered(x.size(), 0);
    for (std::size_t j = 0; j < parts.size(); ++j) {
      if (parts[j].empty()) throw ValidationError("cover family " + std::to_string(j) + " is empty");
      std::vector<int> owner(x.size(), -1);
      for (std::size_t k = 0; k < parts[j].size(); ++k) {
        const Region& r = parts[j][k];
        if (!(r.base() == x)) throw ValidationError("cover part on a different grid");
        r.validate();
        int comps = 0;
        r.components(&comps);
        if (comps != 1)
          throw ValidationError("cover part " + std::to_string(j) + "," + std::to_string(k) + " is not connected");
        for (std::size_t v = 0; v < x.size(); ++v) {
          if (r.has_box(v)) covered[v] = 1;
          if (!r.in_closure(v, 0)) continue;
          if (owner[v] >= 0)
            throw ValidationError("cover parts " + std::to_string(j) + "," + std::to_string(owner[v]) + " and " +
                                  std::to_string(j) + "," + std::to_string(k) + " are adjacent at grid point " +
                                  std::to_string(v));
          owner[v] = static_cast<int>(k);
        }
      }
    }
    for (std::size_t v = 0; v < x.size(); ++v)
      if (!covered[v]) throw ValidationError("cover misses the box at grid point " + std::to_string(v));
  }
};

namespace detail {

inline std::vector<int> breakpoints(int n, int m) {
  std::vector<int> b(static_cast<std::size_t>(m) + 1);
  for (int i = 0; i <= m; ++i) b[static_cast<std::size_t>(i)] = static_cast<int>((static_cast<long>(i) * n) / m);
  return b;
}

inline Region box_rect(const GridDomain& x, int p0, int p1, int q0, int q1) {
  const int n0 = x.axis(0).length, n1 = x.axis(1).length;
  std::vector<char> boxes(x.size(), 0);
  for (int p = p0; p < p1; ++p)
    for (int q = q0; q < q1; ++q) {
      const int pp = ((p % n0) + n0) % n0, qq = ((q % n1) + n1) % n1;
      boxes[static_cast<std::size_t>(pp) * static_cast<std::size_t>(n1) + static_cast<std::size_t>(qq)] = 1;
    }
  return Region(x, std::move(boxes));
}

}  // namespace detail

/// Arc families on a circle (alternating arcs) or vertex/edge/face families
/// of a coarse square pattern on a 2-torus.
inline Cover triangulation_cover(const GridDomain& x, int pieces_per_axis) {
  if (!x.all_periodic() || x.dim() < 1 || x.dim() > 2) throw ValidationError("covers are built on T^1 or T^2");
  const int m = pieces_per_axis;
  if (m < 3) throw ArgumentError("pieces_per_axis must be at least 3 on periodic axes");
  Cover c{x, {}};
  if (x.dim() == 1) {
    const int n = x.axis(0).length;
    if (m % 2 != 0) throw ArgumentError("arc families alternate, so pieces_per_axis must be even on T^1");
    auto b = detail::breakpoints(n, m);
    for (int i = 0; i < m; ++i)
      if (b[static_cast<std::size_t>(i) + 1] - b[static_cast<std::size_t>(i)] < 3)
        throw ArgumentError("arcs would be shorter than 3 boxes; use fewer pieces");
    c.parts.resize(2);
    for (int i = 0; i < m; ++i) {
      // extend one box back so consecutive arcs overlap
      const int start = b[static_cast<std::size_t>(i)] - 1;
      const int len = b[static_cast<std::size_t>(i) + 1] - b[static_cast<std::size_t>(i)] + 1;
      c.parts[static_cast<std::size_t>(i % 2)].push_back(Region::arc(x, start, len));
    }
  } else {
    const int n0 = x.axis(0).length, n1 = x.axis(1).length;
    auto b0 = detail::breakpoints(n0, m), b1 = detail::breakpoints(n1, m);
    for (int i = 0; i < m; ++i)
      if (b0[static_cast<std::size_t>(i) + 1] - b0[static_cast<std::size_t>(i)] < 6 ||
          b1[static_cast<std::size_t>(i) + 1] - b1[static_cast<std::size_t>(i)] < 6)
        throw ArgumentError("coarse squares need at least 6 boxes per side; use fewer pieces");
    c.parts.resize(3);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        const int p0 = b0[static_cast<std::size_t>(i)], p1 = b0[static_cast<std::size_t>(i) + 1];
        const int q0 = b1[static_cast<std::size_t>(j)], q1 = b1[static_cast<std::size_t>(j) + 1];
        c.parts[0].push_back(detail::box_rect(x, p0 - 2, p0 + 2, q0 - 2, q0 + 2));  // around a coarse vertex
        c.parts[1].push_back(detail::box_rect(x, p0 + 2, p1 - 2, q0 - 1, q0 + 1));  // along an axis-0 edge
        c.parts[1].push_back(detail::box_rect(x, p0 - 1, p0 + 1, q0 + 2, q1 - 2));  // along an axis-1 edge
        c.parts[2].push_back(detail::box_rect(x, p0 + 1, p1 - 1, q0 + 1, q1 - 1));  // inside a coarse square
      }
    }
  }
  c.validate();
  return c;
}

struct GlueStep {
  int family = 0;
  double c_plus_prev = 0.0;   // c_+(U_0 u ... u U_{j-1})
  double c_plus_piece = 0.0;  // c_+(U_j)
  double c_plus_union = 0.0;  // c_+(U_0 u ... u U_j)
  double beta_prev = 0.0, beta_piece = 0.0;
  double bound = 0.0;     // MV bound for this step
  double composed = 0.0;  // bound obtained by chaining the steps so far
  bool holds = false;
};

struct GlueReport {
  std::vector<GlueStep> steps;
  double c_plus_first = 0.0;
  double c_plus_direct = 0.0;
  double composed_bound = 0.0;
  double sup_slice_beta = 0.0;
  double pointwise_bound = 0.0;  // max_j c_+(U_j) + d * sup_x beta(x), reported only
  double tolerance = 0.0;
  bool steps_hold = false;
  bool final_holds = false;
  bool holds() const { return steps_hold && final_holds; }
};

/// Replays the gluing induction over the families of a cover of X.
inline GlueReport glued_upper_bound(const ProductGFQI& s, const Cover& cover, std::optional<double> tol = std::nullopt) {
  if (!(cover.x == s.x_domain())) throw ValidationError("cover is not on the X factor of the product base");
  cover.validate();
  const auto y = s.y_domain();
  const GFQIField& f = s.field;
  GlueReport g;
  g.tolerance = tol.value_or(tolerance(f));
  Region acc = cover.piece(0).lift(y);
  auto first = region_report(f, acc);
  g.c_plus_first = first.c_plus;
  double prev_c = first.c_plus, prev_beta = first.beta, composed = first.c_plus;
  double max_piece = first.c_plus;
  g.steps_hold = true;
  for (std::size_t j = 1; j < cover.families(); ++j) {
    Region piece = cover.piece(j).lift(y);
    auto rp = region_report(f, piece);
    acc = acc | piece;
    auto ra = region_report(f, acc);
    GlueStep st;
    st.family = static_cast<int>(j);
    st.c_plus_prev = prev_c;
    st.c_plus_piece = rp.c_plus;
    st.c_plus_union = ra.c_plus;
    st.beta_prev = prev_beta;
    st.beta_piece = rp.beta;
    st.bound = std::max(prev_c, rp.c_plus) + std::max(prev_beta, rp.beta);
    composed = std::max(composed, rp.c_plus) + std::max(prev_beta, rp.beta);
    st.composed = composed;
    st.holds = ra.c_plus <= st.bound + g.tolerance;
    g.steps_hold = g.steps_hold && st.holds;
    g.steps.push_back(st);
    max_piece = std::max(max_piece, rp.c_plus);
    prev_c = ra.c_plus;
    prev_beta = ra.beta;
  }
  g.c_plus_direct = spectral_report(f).c_plus;
  g.composed_bound = composed;
  g.final_holds = g.c_plus_direct <= composed + g.tolerance;
  g.sup_slice_beta = slice_profile(s).sup_beta;
  g.pointwise_bound = max_piece + s.d() * g.sup_slice_beta;
  return g;
}

struct PullbackReport {
  int winding = 0;
  double gamma_source = 0.0;  // gamma(S)
  double gamma_pulled = 0.0;  // gamma(S o f)
  double tolerance = 0.0;
  bool holds_inequality = false;
  bool holds_equality = true;  // only asserted for nonzero winding
  bool holds() const { return holds_inequality && holds_equality; }
};

inline PullbackReport pullback_check(const GFQIField& s, const MapSpec& m, std::optional<double> tol = std::nullopt) {
  if (s.base.dim() != 1 || m.source.dim() != 1) throw ValidationError("pullback_check works with circle maps");
  auto pulled = pullback_gf(s, m);
  auto a = spectral_report(s);
  auto b = spectral_report(pulled);
  PullbackReport r;
  r.winding = m.winding[0][0];
  r.gamma_source = a.gamma;
  r.gamma_pulled = b.gamma;
  r.tolerance = tol.value_or(std::max(a.tolerance, b.tolerance));
  r.holds_inequality = b.gamma <= a.gamma + r.tolerance;
  if (r.winding != 0) r.holds_equality = std::abs(b.gamma - a.gamma) <= r.tolerance;
  return r;
}

struct ShiftReport {
  double gamma = 0.0;
  double best_gamma_pair = 0.0;
  double best_theta = 0.0;
  double ratio = 0.0;  // best / gamma
  double tolerance = 0.0;
  std::vector<double> thetas, gamma_pairs;
  bool holds = false;
};

/// sup over grid rotations of gamma(S, S_theta) against gamma(S)/3.
inline ShiftReport circle_shift_test(const GFQIField& s, std::optional<double> tol = std::nullopt) {
  if (s.base.dim() != 1) throw ValidationError("circle_shift_test needs a circle base");
  const int n = s.base.axis(0).length;
  auto base = spectral_report(s);
  ShiftReport r;
  r.gamma = base.gamma;
  r.thetas.resize(static_cast<std::size_t>(n));
  r.gamma_pairs.resize(static_cast<std::size_t>(n));
  std::vector<double> taus(static_cast<std::size_t>(n));
  parallel_for(static_cast<std::size_t>(n), [&](std::size_t k) {
    const double theta = s.base.axis(0).spacing * static_cast<double>(k);
    auto rep = spectral_report(gf_difference(s, shift_gf(s, theta)));
    r.thetas[k] = theta;
    r.gamma_pairs[k] = rep.gamma;
    taus[k] = rep.tolerance;
  });
  std::size_t best = 0;
  for (std::size_t k = 1; k < r.gamma_pairs.size(); ++k)
    if (r.gamma_pairs[k] > r.gamma_pairs[best]) best = k;
  r.best_gamma_pair = r.gamma_pairs[best];
  r.best_theta = r.thetas[best];
  r.ratio = r.gamma > 0 ? r.best_gamma_pair / r.gamma : kInfinity;
  r.tolerance = tol.value_or(std::max(base.tolerance, *std::max_element(taus.begin(), taus.end())));
  r.holds = r.best_gamma_pair >= r.gamma / 3.0 - r.tolerance;
  return r;
}

/// A family of quartic double wells over a circle whose deeper well switches
/// sides: S(x; xi) = xi^4 - 2 xi^2 + a xi cos x, completed to xi^2 outside
/// |xi| <= 2. Its slices are not embedded, and the global c_+ exceeds every
/// slice invariant although each slice has gamma = 0.
inline GFQIField switching_wells(int n, int samples = 1025, double a = 1.0) {
  return complete_at_infinity(GridDomain::circle(n), GridDomain::box(1, samples, 4.0), {1},
                              [a](std::span<const double> x, std::span<const double> xi) {
                                const double t = xi[0] * xi[0];
                                return t * t - 2 * t + a * xi[0] * std::cos(x[0]);
                              },
                              1.25, std::sqrt(3.0));
}

}  // namespace specinv
