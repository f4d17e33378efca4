#pragma once

// Finite persistence modules over GF(2) with triangle-type products and
// units. Everything is exact: critical values are rationals and vectors are
// bit masks in the basis of a level (dimensions up to 64).

#include <algorithm>
#include <bit>
#include <cstdint>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "specinv/errors.hpp"
#include "specinv/rational.hpp"

namespace specinv::algebra {

using Mask = std::uint64_t;
inline constexpr int kMaxDim = 64;

inline Mask low_bits(int n) { return n >= 64 ? ~Mask{0} : ((Mask{1} << n) - 1); }

template <class Fn>
void for_bits(Mask m, Fn&& fn) {
  while (m) {
    fn(std::countr_zero(m));
    m &= m - 1;
  }
}

/// Linear map given by the images of the source basis vectors.
struct Matrix {
  int rows = 0;
  std::vector<Mask> cols;

  int source_dim() const { return static_cast<int>(cols.size()); }

  Mask apply(Mask x) const {
    Mask r = 0;
    for_bits(x, [&](int b) { r ^= cols[static_cast<std::size_t>(b)]; });
    return r;
  }

  static Matrix identity(int n) {
    Matrix m{n, {}};
    for (int i = 0; i < n; ++i) m.cols.push_back(Mask{1} << i);
    return m;
  }

  /// this o first
  Matrix after(const Matrix& first) const {
    Matrix m{rows, {}};
    for (Mask c : first.cols) m.cols.push_back(apply(c));
    return m;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;
};

namespace detail {

// Echelon form over masks; rows keyed by their lowest set bit.
struct MaskEchelon {
  std::vector<Mask> rows;
  std::vector<Mask> combos;  // which inserted vectors produced each row

  Mask reduce(Mask v, Mask* combo = nullptr) const {
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (v & (rows[r] & (~rows[r] + 1))) {
        v ^= rows[r];
        if (combo) *combo ^= combos[r];
      }
    }
    return v;
  }

  bool insert(Mask v, Mask tag = 0) {
    Mask combo = tag;
    v = reduce(v, &combo);
    if (!v) return false;
    const Mask pivot = v & (~v + 1);
    // keep rows fully reduced so reduce() is order independent
    for (std::size_t r = 0; r < rows.size(); ++r) {
      if (rows[r] & pivot) {
        rows[r] ^= v;
        combos[r] ^= combo;
      }
    }
    rows.push_back(v);
    combos.push_back(combo);
    return true;
  }
};

inline int rank(const std::vector<Mask>& vs) {
  MaskEchelon e;
  int r = 0;
  for (Mask v : vs) r += e.insert(v) ? 1 : 0;
  return r;
}

/// Some x with sum_{b in x} cols[b] == target.
inline std::optional<Mask> solve(const std::vector<Mask>& cols, Mask target) {
  MaskEchelon e;
  for (std::size_t j = 0; j < cols.size(); ++j) e.insert(cols[j], Mask{1} << j);
  Mask combo = 0;
  if (e.reduce(target, &combo) != 0) return std::nullopt;
  return combo;
}

/// Kernel basis of the map with the given column images.
inline std::vector<Mask> kernel(const std::vector<Mask>& cols) {
  MaskEchelon e;
  std::vector<Mask> out;
  for (std::size_t j = 0; j < cols.size(); ++j) {
    Mask combo = Mask{1} << j;
    if (e.reduce(cols[j], &combo) == 0)
      out.push_back(combo);
    else
      e.insert(cols[j], Mask{1} << j);
  }
  return out;
}

inline std::string mask_str(Mask v) {
  if (!v) return "0";
  std::string s;
  for_bits(v, [&](int b) { s += (s.empty() ? "e" : "+e") + std::to_string(b); });
  return s;
}

}  // namespace detail

struct RBar {
  Rational birth;
  std::optional<Rational> death;

  bool infinite() const { return !death.has_value(); }
  friend bool operator==(const RBar&, const RBar&) = default;
};

/// Longest finite bar; zero when there is none.
inline Rational boundary_depth(const std::vector<RBar>& bars) {
  Rational b = 0;
  for (const auto& bar : bars)
    if (bar.death) b = std::max(b, *bar.death - bar.birth);
  return b;
}

/// V_t is level l for t_l <= t < t_{l+1}, zero below t_0 and V_inf at the top.
struct FinitePersistenceModule {
  std::vector<Rational> critical;
  std::vector<int> dims;
  std::vector<Matrix> maps;  // maps[l]: level l -> level l+1

  int levels() const { return static_cast<int>(critical.size()); }
  int top() const { return levels() - 1; }

  void validate() const {
    if (dims.size() != critical.size()) throw ValidationError("module: dims and critical values differ in length");
    if (maps.size() + 1 != std::max<std::size_t>(critical.size(), 1))
      throw ValidationError("module: need one map between consecutive levels");
    for (std::size_t l = 1; l < critical.size(); ++l)
      if (!(critical[l - 1] < critical[l])) throw ValidationError("module: critical values must increase strictly");
    for (int d : dims)
      if (d < 0 || d > kMaxDim) throw ValidationError("module: dimension out of range");
    for (std::size_t l = 0; l < maps.size(); ++l) {
      const auto& m = maps[l];
      if (m.source_dim() != dims[l] || m.rows != dims[l + 1])
        throw ValidationError("module: map " + std::to_string(l) + " has the wrong shape");
      for (Mask c : m.cols)
        if (c & ~low_bits(m.rows)) throw ValidationError("module: map entry outside the target dimension");
    }
  }

  /// Largest l with t_l <= t, or -1.
  int level_of(const Rational& t) const {
    auto it = std::upper_bound(critical.begin(), critical.end(), t);
    return static_cast<int>(it - critical.begin()) - 1;
  }

  int dim_at(int level) const { return level < 0 ? 0 : dims[static_cast<std::size_t>(level)]; }
  int dim_infinity() const { return levels() == 0 ? 0 : dims.back(); }

  Mask restrict(Mask v, int from, int to) const {
    if (from < 0) return 0;
    for (int l = from; l < to; ++l) v = maps[static_cast<std::size_t>(l)].apply(v);
    return v;
  }

  Matrix restriction(int from, int to) const {
    Matrix m{dim_at(to), {}};
    for (int p = 0; p < dim_at(from); ++p) m.cols.push_back(restrict(Mask{1} << p, from, to));
    return m;
  }

  int rank(int from, int to) const {
    if (from < 0) return 0;
    return detail::rank(restriction(from, to).cols);
  }

  /// Interval decomposition from ranks of the restriction maps.
  std::vector<RBar> barcode() const {
    std::vector<RBar> bars;
    const int m = levels();
    auto r = [&](int i, int j) { return i < 0 ? 0 : rank(i, j); };
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        const int mult = r(i, j - 1) - r(i, j) - r(i - 1, j - 1) + r(i - 1, j);
        for (int c = 0; c < mult; ++c) bars.push_back({critical[static_cast<std::size_t>(i)], critical[static_cast<std::size_t>(j)]});
      }
      const int inf = r(i, m - 1) - r(i - 1, m - 1);
      for (int c = 0; c < inf; ++c) bars.push_back({critical[static_cast<std::size_t>(i)], std::nullopt});
    }
    return bars;
  }
};

/// mu_{i,j,k} on crit levels: entries[a][b][p * dim_b + q] is the product of
/// basis vectors e_p of V^{ij}_{t_a} and e_q of V^{jk}_{t_b}, expressed in
/// V^{ik} at the level of t_a + t_b.
struct ProductTable {
  std::vector<std::vector<std::vector<Mask>>> entries;
};

struct ProductSystem {
  int n = 0;
  std::vector<FinitePersistenceModule> modules;  // i * n + j
  std::vector<ProductTable> products;            // (i * n + j) * n + k
  std::vector<Mask> units;                       // in V^{ij}_inf

  const FinitePersistenceModule& module(int i, int j) const { return modules[static_cast<std::size_t>(i * n + j)]; }
  FinitePersistenceModule& module(int i, int j) { return modules[static_cast<std::size_t>(i * n + j)]; }
  const ProductTable& product(int i, int j, int k) const { return products[static_cast<std::size_t>((i * n + j) * n + k)]; }
  ProductTable& product(int i, int j, int k) { return products[static_cast<std::size_t>((i * n + j) * n + k)]; }
  Mask unit(int i, int j) const { return units[static_cast<std::size_t>(i * n + j)]; }
  Mask& unit(int i, int j) { return units[static_cast<std::size_t>(i * n + j)]; }

  int target_level(int i, int j, int k, int a, int b) const {
    return module(i, k).level_of(module(i, j).critical[static_cast<std::size_t>(a)] +
                                 module(j, k).critical[static_cast<std::size_t>(b)]);
  }

  Rational max_abs_critical() const {
    Rational m = 0;
    for (const auto& v : modules)
      for (const auto& t : v.critical) m = std::max(m, t < Rational(0) ? -t : t);
    return m;
  }

  /// Shape checks; content is judged by validate().
  void check_shapes() const {
    if (n < 1) throw ValidationError("system needs at least one index");
    const auto nn = static_cast<std::size_t>(n);
    if (modules.size() != nn * nn) throw ValidationError("system needs n^2 modules");
    if (products.size() != nn * nn * nn) throw ValidationError("system needs n^3 product tables");
    if (units.size() != nn * nn) throw ValidationError("system needs n^2 units");
    for (const auto& m : modules) m.validate();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const auto& v = module(i, j);
        if (v.levels() == 0 && unit(i, j) != 0) throw ValidationError("unit in an empty module");
        if (unit(i, j) & ~low_bits(v.dim_infinity())) throw ValidationError("unit outside V_inf");
        for (int k = 0; k < n; ++k) {
          const auto& w = module(j, k);
          const auto& target = module(i, k);
          const auto& t = product(i, j, k);
          const std::string where = "product (" + std::to_string(i) + "," + std::to_string(j) + "," + std::to_string(k) + ")";
          if (static_cast<int>(t.entries.size()) != v.levels()) throw ValidationError(where + ": wrong number of rows");
          for (int a = 0; a < v.levels(); ++a) {
            if (static_cast<int>(t.entries[a].size()) != w.levels()) throw ValidationError(where + ": wrong number of columns");
            for (int b = 0; b < w.levels(); ++b) {
              const auto& e = t.entries[a][b];
              if (e.size() != static_cast<std::size_t>(v.dims[a] * w.dims[b]))
                throw ValidationError(where + ": block has the wrong size");
              const Mask allowed = low_bits(target.dim_at(target_level(i, j, k, a, b)));
              for (Mask x : e)
                if (x & ~allowed) throw ValidationError(where + ": entry outside the target level");
            }
          }
        }
      }
  }
};

/// An element of V_t; `v` is in the basis of the level containing t.
struct Element {
  Rational t;
  Mask v = 0;
};

inline Element multiply(const ProductSystem& s, int i, int j, int k, const Element& x, const Element& y) {
  const auto& A = s.module(i, j);
  const auto& B = s.module(j, k);
  const auto& C = s.module(i, k);
  Element out{x.t + y.t, 0};
  const int a = A.level_of(x.t), b = B.level_of(y.t);
  if (a < 0 || b < 0 || !x.v || !y.v) return out;
  const int c0 = s.target_level(i, j, k, a, b);
  if (c0 < 0) return out;
  const auto& block = s.product(i, j, k).entries[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  const int db = B.dims[static_cast<std::size_t>(b)];
  Mask v = 0;
  for_bits(x.v, [&](int p) { for_bits(y.v, [&](int q) { v ^= block[static_cast<std::size_t>(p * db + q)]; }); });
  out.v = C.restrict(v, c0, C.level_of(out.t));
  return out;
}

/// Preimage of a V_inf vector at `level`, if it lies in the image.
inline std::optional<Mask> lift(const FinitePersistenceModule& m, Mask v, int level) {
  if (level < 0) return v == 0 ? std::optional<Mask>(0) : std::nullopt;
  return detail::solve(m.restriction(level, m.top()).cols, v);
}

// ---------------------------------------------------------------- validate

struct Failure {
  std::string condition;
  std::string message;
  std::string witness;
};

struct ValidationReport {
  std::vector<Failure> failures;
  std::size_t checks = 0;

  bool valid() const { return failures.empty(); }
  bool has(const std::string& condition) const {
    return std::any_of(failures.begin(), failures.end(), [&](const Failure& f) { return f.condition == condition; });
  }
};

namespace detail {

inline std::string elem(int i, int j, const Rational& t, Mask v) {
  return "V^{" + std::to_string(i) + "," + std::to_string(j) + "}_" + t.str() + ":" + mask_str(v);
}

class Validator {
 public:
  Validator(const ProductSystem& s, std::size_t per_condition) : s_(s), cap_(per_condition) {}

  ValidationReport run() {
    s_.check_shapes();
    units_nonzero();
    naturality();
    associativity();
    diagonal_spectrum();
    unit_action();
    units_at_infinity();
    return std::move(report_);
  }

 private:
  void fail(const std::string& cond, std::string message, std::string witness) {
    std::size_t count = 0;
    for (const auto& f : report_.failures) count += f.condition == cond ? 1 : 0;
    if (count < cap_) report_.failures.push_back({cond, std::move(message), std::move(witness)});
  }

  void units_nonzero() {
    for (int i = 0; i < s_.n; ++i)
      for (int j = 0; j < s_.n; ++j) {
        ++report_.checks;
        if (s_.unit(i, j) == 0) fail("Property 3", "unit is zero", "u_{" + std::to_string(i) + "," + std::to_string(j) + "}");
      }
  }

  // mu commutes with restriction in each argument (checked between adjacent levels)
  void naturality() {
    const int n = s_.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const auto& A = s_.module(i, j);
          const auto& B = s_.module(j, k);
          const auto& C = s_.module(i, k);
          const auto& T = s_.product(i, j, k).entries;
          for (int a = 0; a < A.levels(); ++a)
            for (int b = 0; b < B.levels(); ++b) {
              const int c0 = s_.target_level(i, j, k, a, b);
              const int da = A.dims[a], db = B.dims[b];
              for (int p = 0; p < da; ++p)
                for (int q = 0; q < db; ++q) {
                  const Mask base = T[a][b][p * db + q];
                  if (a + 1 < A.levels()) {
                    ++report_.checks;
                    const int c1 = s_.target_level(i, j, k, a + 1, b);
                    const Mask lhs = C.restrict(base, c0, c1);
                    Mask rhs = 0;
                    for_bits(A.maps[a].apply(Mask{1} << p), [&](int pp) { rhs ^= T[a + 1][b][pp * db + q]; });
                    if (lhs != rhs)
                      fail("Property 2", "product does not commute with restriction in the first argument",
                           elem(i, j, A.critical[a], Mask{1} << p) + " * " + elem(j, k, B.critical[b], Mask{1} << q) +
                               " -> " + A.critical[a + 1].str());
                  }
                  if (b + 1 < B.levels()) {
                    ++report_.checks;
                    const int c1 = s_.target_level(i, j, k, a, b + 1);
                    const Mask lhs = C.restrict(base, c0, c1);
                    Mask rhs = 0;
                    const int db1 = B.dims[b + 1];
                    for_bits(B.maps[b].apply(Mask{1} << q), [&](int qq) { rhs ^= T[a][b + 1][p * db1 + qq]; });
                    if (lhs != rhs)
                      fail("Property 2", "product does not commute with restriction in the second argument",
                           elem(i, j, A.critical[a], Mask{1} << p) + " * " + elem(j, k, B.critical[b], Mask{1} << q) +
                               " -> " + B.critical[b + 1].str());
                  }
                }
            }
        }
  }

  // (xy)z = x(yz) on basis triples at critical parameters; instances with a
  // diagonal factor are the module axioms.
  void associativity() {
    const int n = s_.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l) {
            const auto& A = s_.module(i, j);
            const auto& B = s_.module(j, k);
            const auto& C = s_.module(k, l);
            const std::string cond = (i == j || k == l) ? "Cond 3" : "Cond 1";
            for (int a = 0; a < A.levels(); ++a)
              for (int b = 0; b < B.levels(); ++b)
                for (int c = 0; c < C.levels(); ++c)
                  for (int p = 0; p < A.dims[a]; ++p)
                    for (int q = 0; q < B.dims[b]; ++q) {
                      const Element x{A.critical[a], Mask{1} << p};
                      const Element y{B.critical[b], Mask{1} << q};
                      const Element xy = multiply(s_, i, j, k, x, y);
                      for (int r = 0; r < C.dims[c]; ++r) {
                        ++report_.checks;
                        const Element z{C.critical[c], Mask{1} << r};
                        const Element lhs = multiply(s_, i, k, l, xy, z);
                        const Element rhs = multiply(s_, i, j, l, x, multiply(s_, j, k, l, y, z));
                        if (lhs.v != rhs.v)
                          fail(cond, "product is not associative",
                               elem(i, j, x.t, x.v) + ", " + elem(j, k, y.t, y.v) + ", " + elem(k, l, z.t, z.v));
                      }
                    }
          }
  }

  void diagonal_spectrum() {
    for (int i = 0; i < s_.n; ++i) {
      const auto& V = s_.module(i, i);
      const std::string name = "V^{" + std::to_string(i) + "," + std::to_string(i) + "}";
      ++report_.checks;
      for (int l = 0; l < V.levels(); ++l)
        if (V.critical[l] < Rational(0) && V.dims[l] != 0)
          fail("Cond 2", "diagonal module is nonzero below 0", name + "_" + V.critical[l].str());
      const int l0 = V.level_of(0);
      if (V.dim_at(l0) != V.dim_infinity() || V.rank(l0, V.top()) != V.dim_infinity())
        fail("Cond 2", "V_0 -> V_inf is not an isomorphism", name + "_0");
    }
  }

  // mu(u_i (x) .) and mu(. (x) u_j) against r_{t,t+a} for a > 0; both sides
  // are constant on the pieces between the breakpoints below.
  void unit_action() {
    const int n = s_.n;
    for (int i = 0; i < n; ++i) {
      const auto& D = s_.module(i, i);
      for (int j = 0; j < n; ++j) {
        for (int side = 0; side < 2; ++side) {
          const auto& V = side == 0 ? s_.module(i, j) : s_.module(j, i);
          std::vector<Rational> cand;
          for (const auto& t : D.critical)
            if (t > Rational(0)) cand.push_back(t);
          for (const auto& s : V.critical)
            for (const auto& t : V.critical)
              if (t > s) cand.push_back(t - s);
          std::sort(cand.begin(), cand.end());
          cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
          const Rational eps = (cand.empty() ? Rational(1) : cand.front()) / Rational(2);
          cand.insert(cand.begin(), eps);
          for (const auto& a : cand) {
            ++report_.checks;
            const auto u = lift(D, s_.unit(i, i), D.level_of(a));
            if (!u) {
              fail("Cond 4", "unit is not present at a > 0", "u_{" + std::to_string(i) + "," + std::to_string(i) + "} at " + a.str());
              continue;
            }
            const Element ua{a, *u};
            for (int l = 0; l < V.levels(); ++l)
              for (int p = 0; p < V.dims[l]; ++p) {
                ++report_.checks;
                const Element x{V.critical[l], Mask{1} << p};
                const Element got = side == 0 ? multiply(s_, i, i, j, ua, x) : multiply(s_, j, i, i, x, ua);
                const Mask want = V.restrict(x.v, l, V.level_of(x.t + a));
                if (got.v != want) {
                  const std::string w = side == 0 ? elem(i, i, a, *u) + " * " + elem(i, j, x.t, x.v)
                                                  : elem(j, i, x.t, x.v) + " * " + elem(i, i, a, *u);
                  fail("Cond 4", side == 0 ? "left unit action differs from restriction" : "right unit action differs from restriction", w);
                }
              }
          }
        }
      }
    }
  }

  void units_at_infinity() {
    const int n = s_.n;
    const Rational T = s_.max_abs_critical() + Rational(1);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          const auto& A = s_.module(i, j);
          const auto& B = s_.module(j, k);
          const auto& C = s_.module(i, k);
          const std::string uij = "u_{" + std::to_string(i) + "," + std::to_string(j) + "}";
          const std::string ujk = "u_{" + std::to_string(j) + "," + std::to_string(k) + "}";
          ++report_.checks;
          const Element prod = multiply(s_, i, j, k, {T, s_.unit(i, j)}, {T, s_.unit(j, k)});
          if (prod.v != s_.unit(i, k))
            fail("Property 3", "u_ij * u_jk != u_ik", uij + " * " + ujk + " = " + mask_str(prod.v));
          ++report_.checks;
          std::vector<Mask> right, left;
          for (int p = 0; p < A.dim_infinity(); ++p)
            right.push_back(multiply(s_, i, j, k, {T, Mask{1} << p}, {T, s_.unit(j, k)}).v);
          for (int q = 0; q < B.dim_infinity(); ++q)
            left.push_back(multiply(s_, i, j, k, {T, s_.unit(i, j)}, {T, Mask{1} << q}).v);
          if (A.dim_infinity() != C.dim_infinity() || detail::rank(right) != C.dim_infinity())
            fail("Property 3", "multiplication by u_jk is not an isomorphism at infinity", ". * " + ujk);
          if (B.dim_infinity() != C.dim_infinity() || detail::rank(left) != C.dim_infinity())
            fail("Property 3", "multiplication by u_ij is not an isomorphism at infinity", uij + " * .");
        }
  }

  const ProductSystem& s_;
  std::size_t cap_;
  ValidationReport report_;
};

}  // namespace detail

/// Exhaustive check of the axioms; shape errors throw ValidationError.
inline ValidationReport validate(const ProductSystem& s, std::size_t failures_per_condition = 4) {
  return detail::Validator(s, failures_per_condition).run();
}

// -------------------------------------------------------------- invariants

/// Smallest critical value c with u_ij in the image of V_c -> V_inf.
inline Rational unit_level(const ProductSystem& s, int i, int j) {
  const auto& V = s.module(i, j);
  const Mask u = s.unit(i, j);
  if (u == 0) throw InvariantError("unit_level: zero unit");
  for (int l = 0; l < V.levels(); ++l)
    if (lift(V, u, l)) return V.critical[static_cast<std::size_t>(l)];
  throw InvariantError("unit_level: unit is not in any image");
}

inline Rational system_gamma(const ProductSystem& s, int i, int j) { return unit_level(s, i, j) + unit_level(s, j, i); }

/// V^inf_t = Im(V_t -> V_inf) with the induced maps (inclusions of images).
inline FinitePersistenceModule infinity_module(const FinitePersistenceModule& V) {
  FinitePersistenceModule out;
  out.critical = V.critical;
  std::vector<std::vector<Mask>> bases;
  for (int l = 0; l < V.levels(); ++l) {
    detail::MaskEchelon e;
    std::vector<Mask> basis;
    for (Mask c : V.restriction(l, V.top()).cols)
      if (e.insert(c)) basis.push_back(c);
    out.dims.push_back(static_cast<int>(basis.size()));
    bases.push_back(std::move(basis));
  }
  for (int l = 0; l + 1 < V.levels(); ++l) {
    Matrix m{out.dims[l + 1], {}};
    for (Mask b : bases[l]) {
      auto x = detail::solve(bases[l + 1], b);
      if (!x) throw InvariantError("infinity_module: images do not increase");
      m.cols.push_back(*x);
    }
    out.maps.push_back(std::move(m));
  }
  std::vector<RBar> expect;
  for (const auto& b : V.barcode())
    if (b.infinite()) expect.push_back(b);
  if (out.barcode() != expect) throw InvariantError("infinity_module: barcode is not the infinite part");
  return out;
}

/// Smallest a such that every element vanishing at infinity already
/// vanishes after restriction by a; the interleaving distance between V
/// and V^inf is a / 2.
inline Rational infinity_shift(const FinitePersistenceModule& V) {
  std::vector<Rational> cand{Rational(0)};
  for (const auto& s : V.critical)
    for (const auto& t : V.critical)
      if (t > s) cand.push_back(t - s);
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (const auto& a : cand) {
    bool ok = true;
    for (int l = 0; l < V.levels() && ok; ++l) {
      const auto to = V.level_of(V.critical[l] + a);
      for (Mask k : detail::kernel(V.restriction(l, V.top()).cols)) {
        if (V.restrict(k, l, to) != 0) {
          ok = false;
          break;
        }
      }
    }
    if (ok) return a;
  }
  throw InvariantError("infinity_shift: no shift kills the kernel");
}

inline Rational distance_to_infinity(const FinitePersistenceModule& V) { return infinity_shift(V) / Rational(2); }

struct InterleavingCertificate {
  int i = 0, j = 0, k = 0;
  Rational c_jk, c_kj, parameter;
  std::vector<Matrix> sigma;  // level l of V^{ij} -> V^{ik} at t_l + c_jk
  std::vector<Matrix> tau;    // level l of V^{ik} -> V^{ij} at t_l + c_kj
  bool verified = false;
  std::vector<Failure> failures;
};

/// The morphisms mu(. (x) u_jk) and mu(. (x) u_kj), lifted to the levels of
/// the units, and a check that both composites are restriction by
/// c_jk + c_kj.
inline InterleavingCertificate unit_interleaving(const ProductSystem& s, int i, int j, int k) {
  InterleavingCertificate cert;
  cert.i = i;
  cert.j = j;
  cert.k = k;
  cert.c_jk = unit_level(s, j, k);
  cert.c_kj = unit_level(s, k, j);
  cert.parameter = cert.c_jk + cert.c_kj;
  const auto& Vjk = s.module(j, k);
  const auto& Vkj = s.module(k, j);
  const Element ujk{cert.c_jk, *lift(Vjk, s.unit(j, k), Vjk.level_of(cert.c_jk))};
  const Element ukj{cert.c_kj, *lift(Vkj, s.unit(k, j), Vkj.level_of(cert.c_kj))};
  const auto& Vij = s.module(i, j);
  const auto& Vik = s.module(i, k);

  for (int l = 0; l < Vij.levels(); ++l) {
    Matrix m{Vik.dim_at(Vik.level_of(Vij.critical[l] + cert.c_jk)), {}};
    for (int p = 0; p < Vij.dims[l]; ++p) m.cols.push_back(multiply(s, i, j, k, {Vij.critical[l], Mask{1} << p}, ujk).v);
    cert.sigma.push_back(std::move(m));
  }
  for (int l = 0; l < Vik.levels(); ++l) {
    Matrix m{Vij.dim_at(Vij.level_of(Vik.critical[l] + cert.c_kj)), {}};
    for (int p = 0; p < Vik.dims[l]; ++p) m.cols.push_back(multiply(s, i, k, j, {Vik.critical[l], Mask{1} << p}, ukj).v);
    cert.tau.push_back(std::move(m));
  }

  auto check = [&](const FinitePersistenceModule& V, int a, int b, const Element& first, const Element& second) {
    for (int l = 0; l < V.levels(); ++l)
      for (int p = 0; p < V.dims[l]; ++p) {
        const Element x{V.critical[l], Mask{1} << p};
        const Element y = multiply(s, i, b, a, multiply(s, i, a, b, x, first), second);
        const Mask want = V.restrict(x.v, l, V.level_of(y.t));
        if (y.v != want)
          cert.failures.push_back({"Cond 1/Cond 4", "interleaving composite differs from restriction",
                                   detail::elem(i, a, x.t, x.v)});
      }
  };
  check(Vij, j, k, ujk, ukj);
  check(Vik, k, j, ukj, ujk);
  cert.verified = cert.failures.empty();
  return cert;
}

struct AlgebraKSReport {
  int i = 0, j = 0;
  Rational c_ij, c_ji, gamma, beta, interleaving_distance;
  bool ks_holds = false;
  bool distance_matches = false;  // 2 d_I(V, V^inf) == beta

  bool holds() const { return ks_holds && distance_matches; }
};

inline AlgebraKSReport ks_check(const ProductSystem& s, int i, int j) {
  AlgebraKSReport r;
  r.i = i;
  r.j = j;
  r.c_ij = unit_level(s, i, j);
  r.c_ji = unit_level(s, j, i);
  r.gamma = r.c_ij + r.c_ji;
  const auto& V = s.module(i, j);
  r.beta = boundary_depth(V.barcode());
  r.interleaving_distance = distance_to_infinity(V);
  r.ks_holds = r.beta <= r.gamma;
  r.distance_matches = r.interleaving_distance * Rational(2) == r.beta;
  return r;
}

// ------------------------------------------------------------- generator

/// Systems spanned by labelled generators. For each label a there is an
/// infinite generator e_a^{ij} born at lambda[a][i][j]; finite bars carry a
/// label too. Products: e_a^{ij} e_b^{jk} = [a == b] e_a^{ik}; diagonal
/// infinite generators act on finite bars of the same label by restriction;
/// everything else multiplies to zero.
struct LabelSystemSpec {
  struct FiniteBar {
    int i = 0, j = 0, label = 0;
    Rational birth, death;
  };
  int n = 1;
  int labels = 1;
  std::vector<std::vector<std::vector<Rational>>> lambda;  // [label][i][j]
  std::vector<FiniteBar> finite;
};

namespace detail {

struct Generator {
  int label = 0;
  Rational birth;
  std::optional<Rational> death;
  bool alive(const Rational& t) const { return birth <= t && (!death || t < *death); }
};

}  // namespace detail

inline ProductSystem build_label_system(const LabelSystemSpec& spec) {
  using detail::Generator;
  const int n = spec.n;
  if (n < 1 || spec.labels < 1) throw ArgumentError("label system needs n >= 1 and at least one label");
  if (static_cast<int>(spec.lambda.size()) != spec.labels) throw ArgumentError("lambda needs one matrix per label");

  std::vector<std::vector<Generator>> gens(static_cast<std::size_t>(n * n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int a = 0; a < spec.labels; ++a) gens[i * n + j].push_back({a, spec.lambda[a][i][j], std::nullopt});
  for (const auto& f : spec.finite) {
    if (f.i < 0 || f.i >= n || f.j < 0 || f.j >= n || f.label < 0 || f.label >= spec.labels || !(f.birth < f.death))
      throw ArgumentError("bad finite bar");
    gens[f.i * n + f.j].push_back({f.label, f.birth, f.death});
  }

  ProductSystem s;
  s.n = n;
  // basis of each level = generators alive there, in generator order
  std::vector<std::vector<std::vector<int>>> basis(static_cast<std::size_t>(n * n));
  for (int ij = 0; ij < n * n; ++ij) {
    FinitePersistenceModule m;
    for (const auto& g : gens[ij]) {
      m.critical.push_back(g.birth);
      if (g.death) m.critical.push_back(*g.death);
    }
    std::sort(m.critical.begin(), m.critical.end());
    m.critical.erase(std::unique(m.critical.begin(), m.critical.end()), m.critical.end());
    for (const auto& t : m.critical) {
      std::vector<int> alive;
      for (int g = 0; g < static_cast<int>(gens[ij].size()); ++g)
        if (gens[ij][g].alive(t)) alive.push_back(g);
      m.dims.push_back(static_cast<int>(alive.size()));
      basis[ij].push_back(std::move(alive));
    }
    if (m.dims.back() > kMaxDim) throw ArgumentError("label system too large");
    for (int l = 0; l + 1 < m.levels(); ++l) {
      Matrix map{m.dims[l + 1], {}};
      for (int g : basis[ij][l]) {
        const auto& next = basis[ij][l + 1];
        auto it = std::find(next.begin(), next.end(), g);
        map.cols.push_back(it == next.end() ? 0 : Mask{1} << (it - next.begin()));
      }
      m.maps.push_back(std::move(map));
    }
    s.modules.push_back(std::move(m));
    Mask u = 0;
    const auto& top = basis[ij].back();
    for (int p = 0; p < static_cast<int>(top.size()); ++p)
      if (!gens[ij][top[p]].death) u |= Mask{1} << p;
    s.units.push_back(u);
  }

  auto position = [&](int ij, int level, int g) -> std::optional<int> {
    if (level < 0) return std::nullopt;
    const auto& b = basis[ij][level];
    auto it = std::find(b.begin(), b.end(), g);
    if (it == b.end()) return std::nullopt;
    return static_cast<int>(it - b.begin());
  };

  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const int ij = i * n + j, jk = j * n + k, ik = i * n + k;
        const auto& A = s.modules[ij];
        const auto& B = s.modules[jk];
        const auto& C = s.modules[ik];
        ProductTable t;
        t.entries.resize(A.levels());
        for (int a = 0; a < A.levels(); ++a) {
          t.entries[a].resize(B.levels());
          for (int b = 0; b < B.levels(); ++b) {
            const Rational sum = A.critical[a] + B.critical[b];
            const int c = C.level_of(sum);
            auto& block = t.entries[a][b];
            for (int g : basis[ij][a])
              for (int h : basis[jk][b]) {
                const auto& x = gens[ij][g];
                const auto& y = gens[jk][h];
                std::optional<int> target;
                if (x.label == y.label) {
                  if (!x.death && !y.death)
                    target = x.label;  // infinite generators come first, one per label
                  else if (!x.death && i == j)
                    target = h;
                  else if (!y.death && j == k)
                    target = g;
                }
                Mask v = 0;
                if (target && gens[ik][*target].alive(sum))
                  if (auto pos = position(ik, c, *target)) v = Mask{1} << *pos;
                block.push_back(v);
              }
          }
        }
        s.products.push_back(std::move(t));
      }
  return s;
}

struct RandomSystemParams {
  int max_indices = 3;
  int max_levels = 6;
  int max_dim = 4;
  int max_labels = 2;
};

/// Random label data with lambda^{ij}_a = h_a(j) - h_a(i) + delta_a(i,j) for
/// a metric delta_a, and finite bars short enough for Cond 1 to hold.
inline LabelSystemSpec random_label_spec(std::uint64_t seed, const RandomSystemParams& params = {}) {
  std::mt19937_64 rng(seed);
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  LabelSystemSpec spec;
  spec.n = uni(1, std::max(1, params.max_indices));
  const int max_labels = std::max(1, std::min({params.max_labels, params.max_dim, params.max_levels}));
  spec.labels = uni(1, max_labels);
  const int n = spec.n, r = spec.labels;
  spec.lambda.assign(r, std::vector<std::vector<Rational>>(n, std::vector<Rational>(n)));
  for (int a = 0; a < r; ++a) {
    std::vector<Rational> h, pos;
    for (int i = 0; i < n; ++i) {
      h.emplace_back(uni(-4, 4), 4);
      pos.emplace_back(uni(0, 8), 4);
    }
    const Rational kappa(uni(1, 4), 4);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Rational d = pos[i] - pos[j];
        if (d < Rational(0)) d = -d;
        spec.lambda[a][i][j] = i == j ? Rational(0) : h[j] - h[i] + d + kappa;
      }
  }
  if (n < 2) return spec;
  const int max_finite = std::max(0, std::min(params.max_dim - r, (params.max_levels - r) / 2));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const int count = uni(0, max_finite);
      for (int c = 0; c < count; ++c) {
        const int a = uni(0, r - 1);
        std::optional<Rational> cap;
        auto take = [&](const Rational& v) { cap = cap ? std::min(*cap, v) : v; };
        for (int k = 0; k < n; ++k) {
          if (k != j) take(spec.lambda[a][j][k] + spec.lambda[a][k][j]);
          if (k != i) take(spec.lambda[a][i][k] + spec.lambda[a][k][i]);
        }
        const Rational birth(uni(-8, 8), 4);
        const Rational length = *cap * Rational(uni(1, 4), 4);
        spec.finite.push_back({i, j, a, birth, birth + length});
      }
    }
  return spec;
}

inline ProductSystem random_system(std::uint64_t seed, const RandomSystemParams& params = {}) {
  return build_label_system(random_label_spec(seed, params));
}

// -------------------------------------------------------------- mutations

enum class MutationKind { UnitFlip, ProductFlip, DiagonalShift };

struct Mutation {
  MutationKind kind = MutationKind::UnitFlip;
  std::string description;
};

/// Applies one random single-field change that no valid system admits:
/// a unit bit flip, a product bit flip whose target survives to infinity,
/// or moving a diagonal critical value off 0 (tables re-targeted so shapes
/// stay consistent).
inline Mutation mutate(ProductSystem& s, std::mt19937_64& rng) {
  s.check_shapes();
  const int n = s.n;
  auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };

  struct Site {
    int i, j, k, a, b, e, bit;
  };
  std::vector<Site> sites;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const auto& A = s.module(i, j);
        const auto& B = s.module(j, k);
        const auto& C = s.module(i, k);
        for (int a = 0; a < A.levels(); ++a)
          for (int b = 0; b < B.levels(); ++b) {
            const int c = s.target_level(i, j, k, a, b);
            if (c < 0) continue;
            const int cells = A.dims[a] * B.dims[b];
            for (int bit = 0; bit < C.dims[c]; ++bit) {
              if (C.restrict(Mask{1} << bit, c, C.top()) == 0) continue;
              for (int e = 0; e < cells; ++e) sites.push_back({i, j, k, a, b, e, bit});
            }
          }
      }
  std::vector<int> diagonal;
  for (int i = 0; i < n; ++i) {
    const auto& V = s.module(i, i);
    if (std::find(V.critical.begin(), V.critical.end(), Rational(0)) != V.critical.end()) diagonal.push_back(i);
  }

  std::vector<MutationKind> kinds{MutationKind::UnitFlip};
  if (!sites.empty()) kinds.push_back(MutationKind::ProductFlip);
  if (!diagonal.empty()) kinds.push_back(MutationKind::DiagonalShift);
  const auto kind = kinds[static_cast<std::size_t>(uni(0, static_cast<int>(kinds.size()) - 1))];
  Mutation m{kind, {}};

  if (kind == MutationKind::UnitFlip) {
    std::vector<std::pair<int, int>> cells;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int b = 0; b < s.module(i, j).dim_infinity(); ++b) cells.push_back({i * n + j, b});
    if (cells.empty()) throw ArgumentError("mutate: no unit coordinates");
    const auto [ij, b] = cells[static_cast<std::size_t>(uni(0, static_cast<int>(cells.size()) - 1))];
    s.units[ij] ^= Mask{1} << b;
    m.description = "flip bit " + std::to_string(b) + " of u_{" + std::to_string(ij / n) + "," + std::to_string(ij % n) + "}";
  } else if (kind == MutationKind::ProductFlip) {
    const auto& st = sites[static_cast<std::size_t>(uni(0, static_cast<int>(sites.size()) - 1))];
    s.product(st.i, st.j, st.k).entries[st.a][st.b][st.e] ^= Mask{1} << st.bit;
    m.description = "flip bit " + std::to_string(st.bit) + " of product (" + std::to_string(st.i) + "," +
                    std::to_string(st.j) + "," + std::to_string(st.k) + ") block (" + std::to_string(st.a) + "," +
                    std::to_string(st.b) + ") entry " + std::to_string(st.e);
  } else {
    const int i = diagonal[static_cast<std::size_t>(uni(0, static_cast<int>(diagonal.size()) - 1))];
    auto& V = s.module(i, i);
    const int l = V.level_of(0);
    Rational shift(1, 2);
    if (l + 1 < V.levels()) shift = std::min(shift, V.critical[l + 1] / Rational(2));
    // remember old targets, move the value up, then restrict entries
    std::vector<std::vector<std::vector<std::vector<int>>>> old(static_cast<std::size_t>(n * n * n));
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          auto& o = old[(a * n + b) * n + c];
          o.resize(s.module(a, b).levels());
          for (int x = 0; x < s.module(a, b).levels(); ++x)
            for (int y = 0; y < s.module(b, c).levels(); ++y) o[x].push_back({s.target_level(a, b, c, x, y)});
        }
    V.critical[l] = shift;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b)
        for (int c = 0; c < n; ++c) {
          const auto& o = old[(a * n + b) * n + c];
          const auto& C = s.module(a, c);
          auto& e = s.product(a, b, c).entries;
          for (int x = 0; x < s.module(a, b).levels(); ++x)
            for (int y = 0; y < s.module(b, c).levels(); ++y) {
              const int from = o[x][y][0], to = s.target_level(a, b, c, x, y);
              for (auto& v : e[x][y]) v = to < from ? 0 : C.restrict(v, from, to);
            }
        }
    m.description = "move critical value 0 of V^{" + std::to_string(i) + "," + std::to_string(i) + "} to " + shift.str();
  }
  return m;
}

}  // namespace specinv::algebra
