#pragma once

// Spectral invariants c_-, c_+, gamma and boundary depth beta of generating
// functions, read off the barcode of the relative sublevel filtration, plus
// their localized versions over regions of the base.
//
// Convention: homology of the pair (S^t, S^-inf). The class 1_N shows up in
// degree ind(Q), the class mu_N in degree ind(Q) + dim N.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/field.hpp"
#include "specinv/grid.hpp"
#include "specinv/persistence.hpp"

namespace specinv {

namespace detail {

// Largest change of the perturbation S - Q along a grid edge, and the largest
// difference quotient; spacing * Lipschitz measured axis by axis.
struct EdgeStats {
  double jump = 0.0;
  double lipschitz = 0.0;
};

inline EdgeStats edge_stats(const GFQIField& s) {
  const GridDomain total = s.total_domain();
  EdgeStats e;
  if (total.is_point()) return e;
  CubicalGrid grid(total);
  const std::size_t nf = s.fiber_size();
  std::vector<double> q(nf);
  for (std::size_t f = 0; f < nf; ++f) q[f] = s.quadratic(f);
  for (std::size_t v = 0; v < total.size(); ++v) {
    const double pv = s.values[v] - q[v % nf];
    for (std::size_t a = 0; a < total.dim(); ++a) {
      if (!grid.exists(v, 1u << a)) continue;
      const std::size_t w = grid.step(v, a);
      const double jump = std::abs(s.values[w] - q[w % nf] - pv);
      e.jump = std::max(e.jump, jump);
      e.lipschitz = std::max(e.lipschitz, jump / total.axis(a).spacing);
    }
  }
  return e;
}

}  // namespace detail

/// Largest difference quotient of the perturbation S - Q along grid edges.
inline double lipschitz_estimate(const GFQIField& s) { return detail::edge_stats(s).lipschitz; }

/// Violation budget for inequality checks: 4 * (spacing * Lipschitz), the
/// product taken per axis, i.e. four times the largest edge jump of S - Q.
inline double tolerance(const GFQIField& s) { return 4.0 * detail::edge_stats(s).jump; }

struct SpectralReport {
  double c_plus = 0.0;
  double c_minus = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  int degree_offset = 0;
  int base_dim = 0;
  int fiber_dim = 0;
  std::vector<int> base_samples;
  std::vector<int> fiber_samples;
  double max_spacing = 0.0;
  double lipschitz = 0.0;
  double edge_jump = 0.0;
  double tolerance = 0.0;
  double relative_level = 0.0;
  std::size_t cells = 0;
  Barcode barcode;
};

namespace detail {

inline double unique_infinite_birth(const Barcode& b, int degree, const char* what) {
  auto births = b.infinite_births(degree);
  if (births.size() != 1)
    throw InvariantError(std::string(what) + ": expected one infinite bar in degree " + std::to_string(degree) +
                         ", found " + std::to_string(births.size()));
  return births.front();
}

inline std::vector<int> lengths(const GridDomain& d) {
  std::vector<int> out;
  for (const auto& a : d.axes()) out.push_back(a.length);
  return out;
}

}  // namespace detail

inline SpectralReport spectral_report(const GFQIField& s) {
  auto rb = relative_build(s);
  SpectralReport r;
  r.barcode = reduce(rb.build.complex);
  r.cells = rb.build.complex.size();
  r.degree_offset = s.quadratic_index();
  r.base_dim = s.base_dim();
  r.fiber_dim = s.fiber_dim();
  const int lo = r.degree_offset, hi = r.degree_offset + r.base_dim;
  r.c_minus = detail::unique_infinite_birth(r.barcode, lo, "c_minus");
  r.c_plus = detail::unique_infinite_birth(r.barcode, hi, "c_plus");
  // the terminal pair has the homology of the base torus, shifted by ind(Q)
  std::size_t total_inf = 0;
  for (const auto& b : r.barcode.bars) total_inf += b.infinite() ? 1 : 0;
  if (total_inf != (std::size_t{1} << r.base_dim))
    throw InvariantError("terminal homology does not match the base torus: " + std::to_string(total_inf) +
                         " infinite bars");
  r.gamma = r.c_plus - r.c_minus;
  r.beta = boundary_depth(r.barcode);
  r.base_samples = detail::lengths(s.base);
  r.fiber_samples = detail::lengths(s.fiber);
  r.max_spacing = s.total_domain().max_spacing();
  const auto edges = detail::edge_stats(s);
  r.lipschitz = edges.lipschitz;
  r.edge_jump = edges.jump;
  r.tolerance = 4.0 * edges.jump;
  r.relative_level = rb.level;
  return r;
}

inline double c_minus(const GFQIField& s) { return spectral_report(s).c_minus; }
inline double c_plus(const GFQIField& s) { return spectral_report(s).c_plus; }
inline double gamma(const GFQIField& s) { return spectral_report(s).gamma; }
inline double beta(const GFQIField& s) { return spectral_report(s).beta; }
inline double gamma_pair(const GFQIField& s1, const GFQIField& s2) { return gamma(gf_difference(s1, s2)); }

struct KSReport {
  double beta = 0.0;
  double gamma = 0.0;
  double tolerance = 0.0;
  bool holds = false;
};

inline KSReport verify_ks(const GFQIField& s, std::optional<double> tol = std::nullopt) {
  auto r = spectral_report(s);
  KSReport k{r.beta, r.gamma, tol.value_or(r.tolerance), false};
  k.holds = k.beta <= k.gamma + k.tolerance;
  return k;
}

struct DualityReport {
  double c_plus = 0.0, c_minus = 0.0;
  double dual_c_plus = 0.0, dual_c_minus = 0.0;
  double gap_plus = 0.0;   // |c_+(S) + c_-(dual)|
  double gap_minus = 0.0;  // |c_-(S) + c_+(dual)|
  double tolerance = 0.0;
  bool holds = false;
};

/// c_+(S) = -c_-(-S) and c_-(S) = -c_+(-S), where -S also negates Q.
inline DualityReport verify_duality(const GFQIField& s, std::optional<double> tol = std::nullopt) {
  auto a = spectral_report(s);
  auto b = spectral_report(dual_gf(s));
  DualityReport d;
  d.c_plus = a.c_plus;
  d.c_minus = a.c_minus;
  d.dual_c_plus = b.c_plus;
  d.dual_c_minus = b.c_minus;
  d.gap_plus = std::abs(a.c_plus + b.c_minus);
  d.gap_minus = std::abs(a.c_minus + b.c_plus);
  d.tolerance = tol.value_or(2.0 * a.edge_jump);
  d.holds = d.gap_plus <= d.tolerance + 1e-12 && d.gap_minus <= d.tolerance + 1e-12;
  return d;
}

struct StabilityReport {
  double gap_plus = 0.0;
  double gap_minus = 0.0;
  double sup_norm = 0.0;
  bool holds = false;
};

/// |c_(+-)(S1) - c_(+-)(S2)| <= ||S1 - S2||_inf.
inline StabilityReport stability_gap(const GFQIField& s1, const GFQIField& s2) {
  if (!(s1.base == s2.base) || !(s1.fiber == s2.fiber) || s1.signs != s2.signs)
    throw ValidationError("stability_gap needs fields of identical shape and quadratic form");
  StabilityReport r;
  for (std::size_t i = 0; i < s1.values.size(); ++i) r.sup_norm = std::max(r.sup_norm, std::abs(s1.values[i] - s2.values[i]));
  auto a = spectral_report(s1);
  auto b = spectral_report(s2);
  r.gap_plus = std::abs(a.c_plus - b.c_plus);
  r.gap_minus = std::abs(a.c_minus - b.c_minus);
  const double slack = 1e-12 * (1.0 + r.sup_norm);
  r.holds = r.gap_plus <= r.sup_norm + slack && r.gap_minus <= r.sup_norm + slack;
  return r;
}

struct TriangleReport {
  double c_minus_sum = 0.0, c_plus_sum = 0.0;
  double c_minus_1 = 0.0, c_plus_1 = 0.0, c_minus_2 = 0.0;
  double margin_minus = 0.0;  // c_-(S1+S2) - c_-(S1) - c_-(S2)
  double margin_plus = 0.0;   // c_+(S1+S2) - c_+(S1) - c_-(S2)
  double tolerance = 0.0;
  bool holds = false;
};

inline TriangleReport triangle_check(const GFQIField& s1, const GFQIField& s2, std::optional<double> tol = std::nullopt) {
  auto sum = fiberwise_sum(s1, s2);
  auto rs = spectral_report(sum);
  auto r1 = spectral_report(s1);
  auto r2 = spectral_report(s2);
  TriangleReport t;
  t.c_minus_sum = rs.c_minus;
  t.c_plus_sum = rs.c_plus;
  t.c_minus_1 = r1.c_minus;
  t.c_plus_1 = r1.c_plus;
  t.c_minus_2 = r2.c_minus;
  t.margin_minus = rs.c_minus - r1.c_minus - r2.c_minus;
  t.margin_plus = rs.c_plus - r1.c_plus - r2.c_minus;
  t.tolerance = tol.value_or(std::max({rs.tolerance, r1.tolerance, r2.tolerance}));
  t.holds = t.margin_minus >= -t.tolerance - 1e-12 && t.margin_plus >= -t.tolerance - 1e-12;
  return t;
}

/// A union of top-dimensional boxes of a periodic base grid. Box v is the
/// cube spanned from vertex v one step along every axis.
class Region {
 public:
  Region() = default;
  Region(GridDomain base, std::vector<char> boxes) : base_(std::move(base)), boxes_(std::move(boxes)) { derive(); }

  static Region whole(const GridDomain& base) { return Region(base, std::vector<char>(base.size(), 1)); }

  /// The 2^d boxes around a vertex (its minimal open neighbourhood).
  static Region star(const GridDomain& base, std::size_t vertex) {
    CubicalGrid g(base);
    std::vector<char> boxes(base.size(), 0);
    for (unsigned m = 0; m < g.mask_count(); ++m) {
      std::size_t v = vertex;
      for (std::size_t a = 0; a < base.dim(); ++a)
        if (m & (1u << a)) v = g.step_back(v, a);
      boxes[v] = 1;
    }
    return Region(base, std::move(boxes));
  }

  /// Boxes [start, start + length) on a circle, wrapping.
  static Region arc(const GridDomain& circle, int start, int length) {
    if (circle.dim() != 1) throw ValidationError("arc regions need a circle base");
    const int n = circle.axis(0).length;
    if (length < 1 || length > n) throw ValidationError("arc length out of range");
    std::vector<char> boxes(static_cast<std::size_t>(n), 0);
    for (int i = 0; i < length; ++i) boxes[static_cast<std::size_t>(((start + i) % n + n) % n)] = 1;
    return Region(circle, std::move(boxes));
  }

  /// Boxes of a product base X x Y lying over the boxes of `self` in X.
  Region lift(const GridDomain& y) const {
    const std::size_t ny = y.size();
    std::vector<char> boxes(base_.size() * ny, 0);
    for (std::size_t x = 0; x < base_.size(); ++x)
      if (boxes_[x]) std::fill(boxes.begin() + static_cast<std::ptrdiff_t>(x * ny), boxes.begin() + static_cast<std::ptrdiff_t>((x + 1) * ny), 1);
    return Region(base_ * y, std::move(boxes));
  }

  friend Region operator|(const Region& a, const Region& b) {
    if (!(a.base_ == b.base_)) throw ValidationError("regions on different grids");
    std::vector<char> boxes(a.boxes_.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) boxes[i] = a.boxes_[i] || b.boxes_[i];
    return Region(a.base_, std::move(boxes));
  }
  friend Region operator&(const Region& a, const Region& b) {
    if (!(a.base_ == b.base_)) throw ValidationError("regions on different grids");
    std::vector<char> boxes(a.boxes_.size());
    for (std::size_t i = 0; i < boxes.size(); ++i) boxes[i] = a.boxes_[i] && b.boxes_[i];
    return Region(a.base_, std::move(boxes));
  }

  const GridDomain& base() const { return base_; }
  const std::vector<char>& boxes() const { return boxes_; }
  bool has_box(std::size_t v) const { return boxes_[v] != 0; }
  std::size_t box_count() const { return static_cast<std::size_t>(std::count(boxes_.begin(), boxes_.end(), 1)); }
  bool empty() const { return box_count() == 0; }
  bool is_whole() const { return box_count() == boxes_.size(); }

  // Base cell (v, mask) membership in the closure, the frontier and the
  // interior subcomplex (cells all of whose vertices are interior points).
  bool in_closure(std::size_t v, unsigned mask) const { return closure_[v * masks_ + mask] != 0; }
  bool in_frontier(std::size_t v, unsigned mask) const { return frontier_[v * masks_ + mask] != 0; }
  bool in_interior(std::size_t v, unsigned mask) const { return interior_[v * masks_ + mask] != 0; }
  bool interior_vertex(std::size_t v) const { return interior_[v * masks_] != 0; }
  std::size_t interior_vertex_count() const {
    std::size_t c = 0;
    for (std::size_t v = 0; v < base_.size(); ++v) c += interior_vertex(v) ? 1 : 0;
    return c;
  }

  /// Connected components of the boxes (adjacent through shared facets).
  std::vector<int> components(int* count = nullptr) const {
    CubicalGrid g(base_);
    std::vector<int> comp(base_.size(), -1);
    int c = 0;
    std::vector<std::size_t> stack;
    for (std::size_t s = 0; s < base_.size(); ++s) {
      if (!boxes_[s] || comp[s] >= 0) continue;
      comp[s] = c;
      stack.push_back(s);
      while (!stack.empty()) {
        const std::size_t v = stack.back();
        stack.pop_back();
        for (std::size_t a = 0; a < base_.dim(); ++a) {
          for (std::size_t w : {g.step(v, a), g.step_back(v, a)}) {
            if (boxes_[w] && comp[w] < 0) {
              comp[w] = c;
              stack.push_back(w);
            }
          }
        }
      }
      ++c;
    }
    if (count) *count = c;
    return comp;
  }

  void validate() const {
    if (boxes_.size() != base_.size()) throw ValidationError("region box mask does not match its grid");
    if (!base_.all_periodic()) throw ValidationError("regions live on periodic grids");
    if (empty()) throw ValidationError("empty region");
    int ncomp = 0;
    auto comp = components(&ncomp);
    std::vector<char> has_interior(static_cast<std::size_t>(ncomp), 0);
    CubicalGrid g(base_);
    for (std::size_t v = 0; v < base_.size(); ++v) {
      if (!interior_vertex(v)) continue;
      // any box at v is in the region since v is interior
      has_interior[static_cast<std::size_t>(comp[v])] = 1;
    }
    for (int c = 0; c < ncomp; ++c)
      if (!has_interior[static_cast<std::size_t>(c)])
        throw ValidationError("region component " + std::to_string(c) + " has no interior grid point");
  }

 private:
  void derive() {
    CubicalGrid g(base_);
    const std::size_t d = base_.dim();
    masks_ = g.mask_count();
    const unsigned full = masks_ - 1;
    const std::size_t nv = base_.size();
    closure_.assign(nv * masks_, 0);
    frontier_.assign(nv * masks_, 0);
    interior_.assign(nv * masks_, 0);
    if (boxes_.size() != nv) return;
    for (std::size_t v = 0; v < nv; ++v) {
      for (unsigned m = 0; m < masks_; ++m) {
        // boxes having cell (v, m) as a face: step back along any subset of the free axes
        const unsigned free_axes = full & ~m;
        bool any = false, all = true;
        for (unsigned sub = free_axes;; sub = (sub - 1) & free_axes) {
          std::size_t w = v;
          for (std::size_t a = 0; a < d; ++a)
            if (sub & (1u << a)) w = g.step_back(w, a);
          if (boxes_[w])
            any = true;
          else
            all = false;
          if (sub == 0) break;
        }
        closure_[v * masks_ + m] = any ? 1 : 0;
        frontier_[v * masks_ + m] = (any && !all) ? 1 : 0;
      }
    }
    // vertex interior iff all 2^d incident boxes present, i.e. in closure and not frontier
    std::vector<char> ivert(nv, 0);
    for (std::size_t v = 0; v < nv; ++v) ivert[v] = closure_[v * masks_] && !frontier_[v * masks_];
    for (std::size_t v = 0; v < nv; ++v) {
      for (unsigned m = 0; m < masks_; ++m) {
        bool ok = true;
        for (unsigned sub = m;; sub = (sub - 1) & m) {
          std::size_t w = v;
          for (std::size_t a = 0; a < d; ++a)
            if (sub & (1u << a)) w = g.step(w, a);
          if (!ivert[w]) {
            ok = false;
            break;
          }
          if (sub == 0) break;
        }
        interior_[v * masks_ + m] = ok ? 1 : 0;
      }
    }
  }

  GridDomain base_;
  std::vector<char> boxes_;
  unsigned masks_ = 1;
  std::vector<char> closure_, frontier_, interior_;
};

struct RegionReport {
  double c_plus = 0.0;
  double c_minus = 0.0;
  double beta = 0.0;
  Barcode pair_barcode;  // filtration of (closure, frontier)
};

namespace detail {

inline Barcode region_pair_barcode(const GFQIField& s, const Region& omega) {
  const std::size_t nf = s.fiber_size();
  const unsigned bm = (1u << s.base.dim()) - 1;
  CubicalSpec spec;
  spec.include = [&](std::size_t v, unsigned m) { return omega.in_closure(v / nf, m & bm); };
  spec.extra_relative = [&](std::size_t v, unsigned m) { return omega.in_frontier(v / nf, m & bm); };
  return reduce(relative_build(s, std::move(spec)).build.complex);
}

inline Barcode region_interior_barcode(const GFQIField& s, const Region& omega) {
  const std::size_t nf = s.fiber_size();
  const unsigned bm = (1u << s.base.dim()) - 1;
  CubicalSpec spec;
  spec.include = [&](std::size_t v, unsigned m) { return omega.in_interior(v / nf, m & bm); };
  return reduce(relative_build(s, std::move(spec)).build.complex);
}

inline void check_region(const GFQIField& s, const Region& omega) {
  if (!(omega.base() == s.base)) throw ValidationError("region grid differs from the field's base grid");
  omega.validate();
}

inline double max_infinite_birth(const Barcode& b, int degree, const char* what) {
  auto births = b.infinite_births(degree);
  if (births.empty()) throw InvariantError(std::string(what) + ": no infinite bar in degree " + std::to_string(degree));
  return *std::max_element(births.begin(), births.end());
}

}  // namespace detail

/// Level at which the relative fundamental class of (closure, frontier) is
/// born; over several components the latest one.
inline double region_c_plus(const GFQIField& s, const Region& omega) {
  detail::check_region(s, omega);
  return detail::max_infinite_birth(detail::region_pair_barcode(s, omega), s.quadratic_index() + s.base_dim(),
                                    "region_c_plus");
}

/// Level by which every component of the open region carries the class 1.
inline double region_c_minus(const GFQIField& s, const Region& omega) {
  detail::check_region(s, omega);
  return detail::max_infinite_birth(detail::region_interior_barcode(s, omega), s.quadratic_index(), "region_c_minus");
}

inline double region_beta(const GFQIField& s, const Region& omega) {
  detail::check_region(s, omega);
  return boundary_depth(detail::region_pair_barcode(s, omega));
}

inline RegionReport region_report(const GFQIField& s, const Region& omega) {
  detail::check_region(s, omega);
  RegionReport r;
  r.pair_barcode = detail::region_pair_barcode(s, omega);
  r.c_plus = detail::max_infinite_birth(r.pair_barcode, s.quadratic_index() + s.base_dim(), "region_c_plus");
  r.beta = boundary_depth(r.pair_barcode);
  r.c_minus = detail::max_infinite_birth(detail::region_interior_barcode(s, omega), s.quadratic_index(), "region_c_minus");
  return r;
}

inline double region_c_plus(const GridField& f, const Region& omega) { return region_c_plus(graph_gf(f), omega); }
inline double region_c_minus(const GridField& f, const Region& omega) { return region_c_minus(graph_gf(f), omega); }
inline double region_beta(const GridField& f, const Region& omega) { return region_beta(graph_gf(f), omega); }

struct LocalReport {
  double value = 0.0;      // c(x): region_c_minus on the vertex star
  double star_c_plus = 0.0;
  double tolerance = 0.0;
};

/// Pointwise invariant c(x) from the minimal neighbourhood of a grid vertex.
inline LocalReport local_report(const GFQIField& s, std::size_t vertex) {
  if (vertex >= s.base_size()) throw ArgumentError("base vertex out of range");
  auto omega = Region::star(s.base, vertex);
  auto r = region_report(s, omega);
  LocalReport out{r.c_minus, r.c_plus, tolerance(s)};
  if (std::abs(out.star_c_plus - out.value) > out.tolerance + 1e-12)
    throw InvariantError("local invariants on the vertex star disagree beyond tolerance");
  return out;
}

inline double local_c(const GridField& f, std::size_t vertex) {
  auto r = local_report(graph_gf(f), vertex);
  if (r.value != f.values[vertex]) throw InvariantError("local_c differs from the field value");
  return r.value;
}

}  // namespace specinv
