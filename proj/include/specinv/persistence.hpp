#pragma once

// Persistent homology of filtered cell complexes over the two-element field:
// column reduction with clearing, a direct rank oracle, bottleneck matching
// and boundary depth.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <queue>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/gf2.hpp"

namespace specinv {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

using CellId = std::uint32_t;

/// A finite cell complex with a real filtration value per cell and an
/// optional relative subcomplex. Cells of the relative subcomplex are
/// quotiented out: `reduce` computes the persistence of H_*(K_t, A).
class FilteredComplex {
 public:
  CellId add_cell(int dim, std::span<const CellId> facets, double value, bool relative = false) {
    const auto id = static_cast<CellId>(dims_.size());
    dims_.push_back(static_cast<std::int8_t>(dim));
    facet_data_.insert(facet_data_.end(), facets.begin(), facets.end());
    facet_offsets_.push_back(static_cast<std::uint32_t>(facet_data_.size()));
    values_.push_back(value);
    relative_.push_back(relative ? 1 : 0);
    return id;
  }
  CellId add_cell(int dim, std::initializer_list<CellId> facets, double value, bool relative = false) {
    return add_cell(dim, std::span<const CellId>(facets.begin(), facets.size()), value, relative);
  }

  void reserve(std::size_t cells, std::size_t facet_entries) {
    dims_.reserve(cells);
    values_.reserve(cells);
    relative_.reserve(cells);
    facet_offsets_.reserve(cells + 1);
    facet_data_.reserve(facet_entries);
  }

  std::size_t size() const { return dims_.size(); }
  int dim(CellId c) const { return dims_[c]; }
  double value(CellId c) const { return values_[c]; }
  bool relative(CellId c) const { return relative_[c] != 0; }
  std::span<const CellId> facets(CellId c) const {
    return {facet_data_.data() + facet_offsets_[c], facet_data_.data() + facet_offsets_[c + 1]};
  }

  void set_value(CellId c, double v) { values_[c] = v; }
  void set_relative(CellId c, bool r) { relative_[c] = r ? 1 : 0; }

  int max_dim() const {
    int m = -1;
    for (auto d : dims_) m = std::max<int>(m, d);
    return m;
  }

  /// Distinct filtration values of cells outside the relative subcomplex, ascending.
  std::vector<double> critical_values() const {
    std::vector<double> v;
    for (CellId c = 0; c < size(); ++c)
      if (!relative(c)) v.push_back(values_[c]);
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
  }

  /// Throws ValidationError naming the first offending cell (pair).
  void validate() const {
    for (CellId c = 0; c < size(); ++c) {
      for (CellId f : facets(c)) {
        if (f >= size()) {
          throw ValidationError("cell " + std::to_string(c) + " references unknown facet " + std::to_string(f));
        }
        if (dim(f) != dim(c) - 1) {
          throw ValidationError("cell " + std::to_string(c) + " (dim " + std::to_string(dim(c)) +
                                ") has facet " + std::to_string(f) + " of dim " + std::to_string(dim(f)));
        }
        if (relative(c) && !relative(f)) {
          throw ValidationError("relative subcomplex not closed: cell " + std::to_string(c) +
                                " is relative but its facet " + std::to_string(f) + " is not");
        }
        if (!relative(c) && !relative(f) && values_[f] > values_[c]) {
          std::ostringstream msg;
          msg << "non-monotone filtration: facet " << f << " (value " << values_[f] << ") of cell " << c
              << " (value " << values_[c] << ")";
          throw ValidationError(msg.str());
        }
      }
      if (dim(c) >= 2) {
        std::map<CellId, int> incidence;
        for (CellId f : facets(c))
          for (CellId g : facets(f)) incidence[g] ^= 1;
        for (auto [g, odd] : incidence)
          if (odd) {
            throw ValidationError("boundary of boundary of cell " + std::to_string(c) + " hits cell " +
                                  std::to_string(g) + " an odd number of times");
          }
      }
    }
  }

 private:
  std::vector<std::int8_t> dims_;
  std::vector<std::uint32_t> facet_offsets_{0};
  std::vector<CellId> facet_data_;
  std::vector<double> values_;
  std::vector<std::uint8_t> relative_;
};

struct Bar {
  int degree = 0;
  double birth = 0.0;
  double death = kInfinity;

  bool infinite() const { return std::isinf(death); }
  double length() const { return death - birth; }
  bool contains(double s, double t) const { return birth <= s && t < death; }
  friend bool operator==(const Bar&, const Bar&) = default;
  friend auto operator<=>(const Bar&, const Bar&) = default;
};

struct Barcode {
  std::vector<Bar> bars;

  std::vector<Bar> in_degree(int q) const {
    std::vector<Bar> out;
    for (const auto& b : bars)
      if (b.degree == q) out.push_back(b);
    return out;
  }

  /// Births of the infinite bars in degree q, ascending.
  std::vector<double> infinite_births(int q) const {
    std::vector<double> out;
    for (const auto& b : bars)
      if (b.degree == q && b.infinite()) out.push_back(b.birth);
    std::sort(out.begin(), out.end());
    return out;
  }

  std::size_t count_containing(double s, double t, int q) const {
    return static_cast<std::size_t>(
        std::count_if(bars.begin(), bars.end(), [&](const Bar& b) { return b.degree == q && b.contains(s, t); }));
  }

  int max_degree() const {
    int m = -1;
    for (const auto& b : bars) m = std::max(m, b.degree);
    return m;
  }

  void sort() { std::sort(bars.begin(), bars.end()); }
};

namespace detail {

inline void xor_sorted(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b,
                       std::vector<std::uint32_t>& out) {
  out.clear();
  out.reserve(a.size() + b.size());
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else if (b[j] < a[i]) {
      out.push_back(b[j++]);
    } else {
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
  out.insert(out.end(), b.begin() + static_cast<std::ptrdiff_t>(j), b.end());
}

}  // namespace detail

struct ReduceOptions {
  bool validate = true;
};

/// Interval decomposition of H_*(K_t, A) where K_t is the sublevel complex
/// and A the relative subcomplex. Zero-length bars are dropped. Ties are
/// broken by (value, dimension, cell id).
inline Barcode reduce(const FilteredComplex& complex, ReduceOptions options = {}) {
  if (options.validate) complex.validate();

  std::vector<CellId> order;
  order.reserve(complex.size());
  for (CellId c = 0; c < complex.size(); ++c)
    if (!complex.relative(c)) order.push_back(c);
  std::sort(order.begin(), order.end(), [&](CellId a, CellId b) {
    if (complex.value(a) != complex.value(b)) return complex.value(a) < complex.value(b);
    if (complex.dim(a) != complex.dim(b)) return complex.dim(a) < complex.dim(b);
    return a < b;
  });
  constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> position(complex.size(), kNone);
  for (std::uint32_t i = 0; i < order.size(); ++i) position[order[i]] = i;

  const int top = complex.max_dim();
  std::vector<std::vector<std::uint32_t>> by_dim(static_cast<std::size_t>(std::max(top, 0) + 1));
  for (std::uint32_t i = 0; i < order.size(); ++i) by_dim[static_cast<std::size_t>(complex.dim(order[i]))].push_back(i);

  const std::size_t n = order.size();
  std::vector<std::uint32_t> pivot_of_row(n, kNone);  // row -> column owning it as pivot
  std::vector<std::vector<std::uint32_t>> stored(n);
  std::vector<char> cleared(n, 0);
  std::vector<char> paired(n, 0);
  Barcode result;

  std::vector<std::uint32_t> column, scratch;
  for (int d = top; d >= 1; --d) {
    for (std::uint32_t j : by_dim[static_cast<std::size_t>(d)]) {
      if (cleared[j]) continue;
      column.clear();
      for (CellId f : complex.facets(order[j]))
        if (position[f] != kNone) column.push_back(position[f]);
      std::sort(column.begin(), column.end());
      while (!column.empty()) {
        const std::uint32_t low = column.back();
        const std::uint32_t owner = pivot_of_row[low];
        if (owner == kNone) break;
        detail::xor_sorted(column, stored[owner], scratch);
        column.swap(scratch);
      }
      if (column.empty()) continue;
      const std::uint32_t low = column.back();
      pivot_of_row[low] = j;
      cleared[low] = 1;
      paired[low] = 1;
      paired[j] = 1;
      const double birth = complex.value(order[low]);
      const double death = complex.value(order[j]);
      if (birth < death) result.bars.push_back({d - 1, birth, death});
      stored[j] = column;
    }
  }
  for (std::uint32_t i = 0; i < n; ++i)
    if (!paired[i]) result.bars.push_back({complex.dim(order[i]), complex.value(order[i]), kInfinity});
  result.sort();
  return result;
}

/// Rank of H_q(K_s, A) -> H_q(K_t, A), by Gaussian elimination on cycle and
/// boundary spaces; independent of `reduce`.
inline std::size_t rank_of(const FilteredComplex& complex, double s, double t, int degree) {
  if (s > t) throw ArgumentError("rank_of requires s <= t");
  if (degree < 0) return 0;
  std::vector<CellId> q_cells, lower_cells, upper_cells;
  for (CellId c = 0; c < complex.size(); ++c) {
    if (complex.relative(c)) continue;
    if (complex.dim(c) == degree) q_cells.push_back(c);
    if (complex.dim(c) == degree - 1) lower_cells.push_back(c);
    if (complex.dim(c) == degree + 1) upper_cells.push_back(c);
  }
  std::vector<std::int64_t> q_index(complex.size(), -1), lower_index(complex.size(), -1);
  for (std::size_t i = 0; i < q_cells.size(); ++i) q_index[q_cells[i]] = static_cast<std::int64_t>(i);
  for (std::size_t i = 0; i < lower_cells.size(); ++i) lower_index[lower_cells[i]] = static_cast<std::int64_t>(i);

  std::vector<CellId> present;
  std::vector<gf2::BitVector> boundaries;
  for (CellId c : q_cells) {
    if (complex.value(c) > s) continue;
    present.push_back(c);
    gf2::BitVector col(lower_cells.size());
    for (CellId f : complex.facets(c))
      if (lower_index[f] >= 0) col.flip(static_cast<std::size_t>(lower_index[f]));
    boundaries.push_back(std::move(col));
  }
  std::vector<gf2::BitVector> cycles;
  for (const auto& combo : gf2::kernel(boundaries, lower_cells.size())) {
    gf2::BitVector z(q_cells.size());
    for (std::size_t k = 0; k < present.size(); ++k)
      if (combo.test(k)) z.set(static_cast<std::size_t>(q_index[present[k]]));
    cycles.push_back(std::move(z));
  }
  std::vector<gf2::BitVector> bounds;
  for (CellId c : upper_cells) {
    if (complex.value(c) > t) continue;
    gf2::BitVector b(q_cells.size());
    for (CellId f : complex.facets(c))
      if (q_index[f] >= 0) b.flip(static_cast<std::size_t>(q_index[f]));
    bounds.push_back(std::move(b));
  }
  gf2::EchelonBasis boundary_span(q_cells.size());
  for (const auto& b : bounds) boundary_span.insert(b);
  const std::size_t dim_b = boundary_span.rank();
  for (const auto& z : cycles) boundary_span.insert(z);
  return boundary_span.rank() - dim_b;  // dim Z_s - dim(Z_s cap B_t)
}

namespace detail {

// Maximum bipartite matching (Hopcroft-Karp) on an adjacency list.
inline std::size_t max_matching(std::size_t left, std::size_t right, const std::vector<std::vector<std::uint32_t>>& adj) {
  constexpr std::uint32_t kFree = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> match_l(left, kFree), match_r(right, kFree), dist(left);
  std::size_t matched = 0;
  auto bfs = [&]() {
    std::queue<std::uint32_t> q;
    bool found = false;
    for (std::uint32_t u = 0; u < left; ++u) {
      if (match_l[u] == kFree) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = kFree;
      }
    }
    while (!q.empty()) {
      auto u = q.front();
      q.pop();
      for (auto v : adj[u]) {
        auto w = match_r[v];
        if (w == kFree) {
          found = true;
        } else if (dist[w] == kFree) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };
  std::function<bool(std::uint32_t)> dfs = [&](std::uint32_t u) -> bool {
    for (auto v : adj[u]) {
      auto w = match_r[v];
      if (w == kFree || (dist[w] == dist[u] + 1 && dfs(w))) {
        match_l[u] = v;
        match_r[v] = u;
        return true;
      }
    }
    dist[u] = kFree;
    return false;
  };
  while (bfs())
    for (std::uint32_t u = 0; u < left; ++u)
      if (match_l[u] == kFree && dfs(u)) ++matched;
  return matched;
}

inline double bottleneck_finite(const std::vector<Bar>& a, const std::vector<Bar>& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n + m == 0) return 0.0;
  auto cost = [](const Bar& x, const Bar& y) {
    return std::max(std::abs(x.birth - y.birth), std::abs(x.death - y.death));
  };
  std::vector<double> candidates{0.0};
  for (const auto& x : a) candidates.push_back(x.length() / 2);
  for (const auto& y : b) candidates.push_back(y.length() / 2);
  for (const auto& x : a)
    for (const auto& y : b) candidates.push_back(cost(x, y));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  // Left: a-bars then diagonal slots for b-bars; right: b-bars then diagonal slots for a-bars.
  auto feasible = [&](double eps) {
    std::vector<std::vector<std::uint32_t>> adj(n + m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j)
        if (cost(a[i], b[j]) <= eps) adj[i].push_back(static_cast<std::uint32_t>(j));
      if (a[i].length() / 2 <= eps) adj[i].push_back(static_cast<std::uint32_t>(m + i));
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (b[j].length() / 2 <= eps) adj[n + j].push_back(static_cast<std::uint32_t>(j));
      for (std::size_t i = 0; i < n; ++i) adj[n + j].push_back(static_cast<std::uint32_t>(m + i));
    }
    return max_matching(n + m, n + m, adj) == n + m;
  };
  std::size_t lo = 0, hi = candidates.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (feasible(candidates[mid])) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace detail

/// Bottleneck distance, maximized over degrees; +inf if some degree has a
/// different number of infinite bars.
inline double bottleneck_distance(const Barcode& a, const Barcode& b) {
  const int top = std::max(a.max_degree(), b.max_degree());
  double result = 0.0;
  for (int q = 0; q <= top; ++q) {
    auto ia = a.infinite_births(q), ib = b.infinite_births(q);
    if (ia.size() != ib.size()) return kInfinity;
    for (std::size_t k = 0; k < ia.size(); ++k) result = std::max(result, std::abs(ia[k] - ib[k]));
    std::vector<Bar> fa, fb;
    for (const auto& bar : a.bars)
      if (bar.degree == q && !bar.infinite()) fa.push_back(bar);
    for (const auto& bar : b.bars)
      if (bar.degree == q && !bar.infinite()) fb.push_back(bar);
    result = std::max(result, detail::bottleneck_finite(fa, fb));
  }
  return result;
}

/// Length of the longest finite bar over all degrees; 0 if there is none.
inline double boundary_depth(const Barcode& barcode) {
  double depth = 0.0;
  for (const auto& b : barcode.bars)
    if (!b.infinite()) depth = std::max(depth, b.length());
  return depth;
}

}  // namespace specinv
