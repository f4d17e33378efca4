#pragma once

// Rectangular sample grids (periodic torus axes and bounded fiber axes) and
// the cubical complexes they carry.

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/persistence.hpp"

namespace specinv {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Axis {
  int length = 0;
  bool periodic = true;
  double spacing = 1.0;
  double origin = 0.0;

  double coordinate(int i) const { return origin + spacing * i; }
  double period() const { return spacing * length; }
  friend bool operator==(const Axis&, const Axis&) = default;
};

/// A product of sample axes. No axes means a single point.
class GridDomain {
 public:
  GridDomain() = default;
  explicit GridDomain(std::vector<Axis> axes) : axes_(std::move(axes)) { validate(); }

  static GridDomain point() { return GridDomain{}; }
  static GridDomain circle(int n) { return GridDomain({Axis{n, true, kTwoPi / n, 0.0}}); }
  static GridDomain torus(int n, int m) {
    return GridDomain({Axis{n, true, kTwoPi / n, 0.0}, Axis{m, true, kTwoPi / m, 0.0}});
  }
  /// k bounded axes with `samples` points each, symmetric about 0.
  static GridDomain box(int k, int samples, double halfwidth) {
    if (samples < 2) throw ValidationError("fiber axis needs at least 2 samples");
    std::vector<Axis> axes;
    for (int i = 0; i < k; ++i)
      axes.push_back(Axis{samples, false, 2.0 * halfwidth / (samples - 1), -halfwidth});
    return GridDomain(std::move(axes));
  }

  void validate() const {
    for (std::size_t a = 0; a < axes_.size(); ++a) {
      if (axes_[a].length < 4) throw ValidationError("axis " + std::to_string(a) + " has fewer than 4 samples");
      if (!(axes_[a].spacing > 0)) throw ValidationError("axis " + std::to_string(a) + " has non-positive spacing");
    }
  }

  std::size_t dim() const { return axes_.size(); }
  bool is_point() const { return axes_.empty(); }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(std::size_t a) const { return axes_[a]; }

  bool all_periodic() const {
    for (const auto& a : axes_)
      if (!a.periodic) return false;
    return true;
  }

  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes_) n *= static_cast<std::size_t>(a.length);
    return n;
  }

  double max_spacing() const {
    double h = 0.0;
    for (const auto& a : axes_) h = std::max(h, a.spacing);
    return h;
  }

  // Row-major: the first axis varies slowest.
  std::vector<int> unflatten(std::size_t index) const {
    std::vector<int> idx(axes_.size());
    for (std::size_t a = axes_.size(); a-- > 0;) {
      idx[a] = static_cast<int>(index % static_cast<std::size_t>(axes_[a].length));
      index /= static_cast<std::size_t>(axes_[a].length);
    }
    return idx;
  }
  std::size_t flatten(std::span<const int> idx) const {
    std::size_t index = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) index = index * static_cast<std::size_t>(axes_[a].length) + static_cast<std::size_t>(idx[a]);
    return index;
  }

  std::vector<double> coordinates(std::size_t index) const {
    auto idx = unflatten(index);
    std::vector<double> x(axes_.size());
    for (std::size_t a = 0; a < axes_.size(); ++a) x[a] = axes_[a].coordinate(idx[a]);
    return x;
  }

  friend GridDomain operator*(const GridDomain& a, const GridDomain& b) {
    auto axes = a.axes_;
    axes.insert(axes.end(), b.axes_.begin(), b.axes_.end());
    GridDomain out;
    out.axes_ = std::move(axes);
    return out;
  }
  friend bool operator==(const GridDomain&, const GridDomain&) = default;

 private:
  std::vector<Axis> axes_;
};

/// Enumerates the cubes of the cubical complex on a grid. A cell is a base
/// vertex plus a mask of spanned directions; periodic axes wrap around.
class CubicalGrid {
 public:
  explicit CubicalGrid(const GridDomain& domain) : domain_(domain) {
    const std::size_t d = domain.dim();
    strides_.assign(d, 1);
    for (std::size_t a = d; a-- > 1;) strides_[a - 1] = strides_[a] * static_cast<std::size_t>(domain.axis(a).length);
  }

  const GridDomain& domain() const { return domain_; }
  unsigned mask_count() const { return 1u << domain_.dim(); }

  bool exists(std::size_t v, unsigned mask) const {
    for (std::size_t a = 0; a < domain_.dim(); ++a) {
      if (!(mask & (1u << a)) || domain_.axis(a).periodic) continue;
      if (coord(v, a) + 1 >= domain_.axis(a).length) return false;
    }
    return true;
  }

  int coord(std::size_t v, std::size_t a) const {
    return static_cast<int>((v / strides_[a]) % static_cast<std::size_t>(domain_.axis(a).length));
  }

  /// Vertex one step along axis a (wrapping on periodic axes).
  std::size_t step(std::size_t v, std::size_t a) const {
    const int n = domain_.axis(a).length;
    const int c = coord(v, a);
    return c + 1 < n ? v + strides_[a] : v - static_cast<std::size_t>(c) * strides_[a];
  }
  std::size_t step_back(std::size_t v, std::size_t a) const {
    const int n = domain_.axis(a).length;
    const int c = coord(v, a);
    return c > 0 ? v - strides_[a] : v + static_cast<std::size_t>(n - 1) * strides_[a];
  }
  bool can_step_back(std::size_t v, std::size_t a) const { return domain_.axis(a).periodic || coord(v, a) > 0; }

  std::size_t stride(std::size_t a) const { return strides_[a]; }

 private:
  GridDomain domain_;
  std::vector<std::size_t> strides_;
};

struct CubicalBuild {
  FilteredComplex complex;
  // complex cell id for (vertex, mask), or -1 when the cell was not included.
  std::vector<std::int64_t> cell_of;
  unsigned masks = 1;

  std::int64_t id(std::size_t v, unsigned mask) const { return cell_of[v * masks + mask]; }
};

struct CubicalSpec {
  // Included cells must form a subcomplex. Empty means every cell.
  std::function<bool(std::size_t vertex, unsigned mask)> include;
  // Cells quotiented out in addition to those whose vertices are all flagged.
  std::function<bool(std::size_t vertex, unsigned mask)> extra_relative;
  // Per-vertex relative flags (cells with all vertices flagged are relative). Empty means none.
  std::vector<char> relative_vertices;
};

/// Lower-star filtration of vertex values: every cube enters at the maximum
/// of its vertices.
inline CubicalBuild build_lower_star(const GridDomain& domain, std::span<const double> values, const CubicalSpec& spec = {}) {
  if (values.size() != domain.size()) throw ValidationError("value array does not match grid size");
  CubicalGrid grid(domain);
  const std::size_t nv = domain.size();
  const unsigned masks = grid.mask_count();
  CubicalBuild out;
  out.masks = masks;
  out.cell_of.assign(nv * masks, -1);
  std::vector<char> all_rel(nv * masks, 0);
  const std::size_t d = domain.dim();
  out.complex.reserve(nv * masks, nv * masks * 2 * std::max<std::size_t>(d, 1));

  std::vector<std::vector<unsigned>> by_rank(d + 1);
  for (unsigned m = 0; m < masks; ++m) by_rank[static_cast<std::size_t>(__builtin_popcount(m))].push_back(m);

  std::vector<double> cell_value(nv * masks, 0.0);
  std::vector<CellId> facets;
  for (std::size_t r = 0; r <= d; ++r) {
    for (std::size_t v = 0; v < nv; ++v) {
      for (unsigned m : by_rank[r]) {
        if (!grid.exists(v, m)) continue;
        if (spec.include && !spec.include(v, m)) continue;
        const std::size_t key = v * masks + m;
        facets.clear();
        double value;
        bool rel;
        if (r == 0) {
          value = values[v];
          rel = !spec.relative_vertices.empty() && spec.relative_vertices[v];
        } else {
          value = -kInfinity;
          rel = true;
          for (std::size_t a = 0; a < d; ++a) {
            if (!(m & (1u << a))) continue;
            const unsigned fm = m & ~(1u << a);
            const std::size_t k0 = v * masks + fm;
            const std::size_t k1 = grid.step(v, a) * masks + fm;
            if (out.cell_of[k0] < 0 || out.cell_of[k1] < 0)
              throw ValidationError("included cells do not form a subcomplex");
            facets.push_back(static_cast<CellId>(out.cell_of[k0]));
            facets.push_back(static_cast<CellId>(out.cell_of[k1]));
            value = std::max({value, cell_value[k0], cell_value[k1]});
            rel = rel && all_rel[k0] && all_rel[k1];
          }
        }
        cell_value[key] = value;
        all_rel[key] = rel ? 1 : 0;
        const bool relative = rel || (spec.extra_relative && spec.extra_relative(v, m));
        out.cell_of[key] = out.complex.add_cell(static_cast<int>(r), facets, value, relative);
      }
    }
  }
  return out;
}

}  // namespace specinv
