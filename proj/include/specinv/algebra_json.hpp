#pragma once

// ProductSystem <-> JSON, schema "v1".
//
// {
//   "schema": "v1", "indices": n,
//   "modules":  [{"i", "j", "critical_values": ["0", "-1/4", "0.75"], "dims": [..],
//                 "maps": [matrix per consecutive pair, rows = dims[l+1]]}],
//   "products": [{"i", "j", "k", "a", "b", "table": [[vector per (p, q)]]}],
//   "units":    [{"i", "j", "vector": [..]}]
// }
//
// Matrices and vectors are 0/1 arrays. Product blocks that are left out are
// zero.

#include <algorithm>
#include <string>
#include <vector>

#include <json.hpp>

#include "specinv/algebra.hpp"

namespace specinv::algebra {

namespace detail {

inline nlohmann::json bits_json(Mask v, int dim) {
  auto a = nlohmann::json::array();
  for (int b = 0; b < dim; ++b) a.push_back((v >> b) & 1u ? 1 : 0);
  return a;
}

inline Mask bits_from(const nlohmann::json& a, int dim, const std::string& where) {
  if (!a.is_array() || static_cast<int>(a.size()) != dim)
    throw ValidationError(where + ": expected a 0/1 array of length " + std::to_string(dim));
  Mask v = 0;
  for (int b = 0; b < dim; ++b) {
    const auto& x = a[static_cast<std::size_t>(b)];
    if (!x.is_number_integer() || (x.get<int>() != 0 && x.get<int>() != 1)) throw ValidationError(where + ": entries must be 0 or 1");
    if (x.get<int>() == 1) v |= Mask{1} << b;
  }
  return v;
}

template <class T>
T field(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ValidationError(where + ": missing '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError(where + ": bad '" + key + "'");
  }
}

}  // namespace detail

inline nlohmann::json to_json(const ProductSystem& s) {
  using nlohmann::json;
  json out{{"schema", "v1"}, {"indices", s.n}};
  auto modules = json::array();
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j) {
      const auto& V = s.module(i, j);
      json m{{"i", i}, {"j", j}, {"dims", V.dims}};
      auto crit = json::array();
      for (const auto& t : V.critical) crit.push_back(t.str());
      m["critical_values"] = crit;
      auto maps = json::array();
      for (const auto& map : V.maps) {
        auto rows = json::array();
        for (int r = 0; r < map.rows; ++r) {
          auto row = json::array();
          for (Mask c : map.cols) row.push_back((c >> r) & 1u ? 1 : 0);
          rows.push_back(row);
        }
        maps.push_back(rows);
      }
      m["maps"] = maps;
      modules.push_back(m);
    }
  out["modules"] = modules;
  auto products = json::array();
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j)
      for (int k = 0; k < s.n; ++k) {
        const auto& A = s.module(i, j);
        const auto& B = s.module(j, k);
        const auto& C = s.module(i, k);
        const auto& T = s.product(i, j, k).entries;
        for (int a = 0; a < A.levels(); ++a)
          for (int b = 0; b < B.levels(); ++b) {
            const auto& block = T[a][b];
            if (std::all_of(block.begin(), block.end(), [](Mask v) { return v == 0; })) continue;
            const int dim = C.dim_at(s.target_level(i, j, k, a, b));
            auto table = json::array();
            for (int p = 0; p < A.dims[a]; ++p) {
              auto row = json::array();
              for (int q = 0; q < B.dims[b]; ++q) row.push_back(detail::bits_json(block[p * B.dims[b] + q], dim));
              table.push_back(row);
            }
            products.push_back(json{{"i", i}, {"j", j}, {"k", k}, {"a", a}, {"b", b}, {"table", table}});
          }
      }
  out["products"] = products;
  auto units = json::array();
  for (int i = 0; i < s.n; ++i)
    for (int j = 0; j < s.n; ++j)
      units.push_back(json{{"i", i}, {"j", j}, {"vector", detail::bits_json(s.unit(i, j), s.module(i, j).dim_infinity())}});
  out["units"] = units;
  return out;
}

/// Parses and shape-checks a system; axioms are left to validate().
inline ProductSystem from_json(const nlohmann::json& j) {
  using detail::field;
  if (!j.is_object()) throw ValidationError("system: expected a JSON object");
  if (field<std::string>(j, "schema", "system") != "v1") throw ValidationError("system: unsupported schema");
  ProductSystem s;
  s.n = field<int>(j, "indices", "system");
  if (s.n < 1 || s.n > 16) throw ValidationError("system: indices must be in [1, 16]");
  const int n = s.n;
  s.modules.assign(static_cast<std::size_t>(n * n), {});
  s.units.assign(static_cast<std::size_t>(n * n), 0);
  std::vector<bool> seen(static_cast<std::size_t>(n * n), false);
  auto index = [&](const nlohmann::json& e, const char* key, const std::string& where) {
    const int v = field<int>(e, key, where);
    if (v < 0 || v >= n) throw ValidationError(where + ": index '" + key + "' out of range");
    return v;
  };

  const auto modules = field<nlohmann::json>(j, "modules", "system");
  if (!modules.is_array()) throw ValidationError("system: 'modules' must be an array");
  for (const auto& m : modules) {
    const int i = index(m, "i", "module"), jj = index(m, "j", "module");
    const std::string where = "module (" + std::to_string(i) + "," + std::to_string(jj) + ")";
    if (seen[i * n + jj]) throw ValidationError(where + ": duplicate");
    seen[i * n + jj] = true;
    FinitePersistenceModule V;
    for (const auto& t : field<std::vector<std::string>>(m, "critical_values", where)) V.critical.push_back(Rational::parse(t));
    V.dims = field<std::vector<int>>(m, "dims", where);
    if (V.dims.size() != V.critical.size()) throw ValidationError(where + ": dims and critical_values differ in length");
    for (int d : V.dims)
      if (d < 0 || d > kMaxDim) throw ValidationError(where + ": dimension out of range");
    const auto maps = field<nlohmann::json>(m, "maps", where);
    if (!maps.is_array() || maps.size() + 1 != std::max<std::size_t>(V.dims.size(), 1))
      throw ValidationError(where + ": need one map between consecutive levels");
    for (std::size_t l = 0; l < maps.size(); ++l) {
      const auto& rows = maps[l];
      const int nr = V.dims[l + 1], nc = V.dims[l];
      if (!rows.is_array() || static_cast<int>(rows.size()) != nr) throw ValidationError(where + ": map has the wrong number of rows");
      Matrix M{nr, std::vector<Mask>(static_cast<std::size_t>(nc), 0)};
      for (int r = 0; r < nr; ++r) {
        const Mask row = detail::bits_from(rows[static_cast<std::size_t>(r)], nc, where + " map");
        for (int c = 0; c < nc; ++c)
          if ((row >> c) & 1u) M.cols[static_cast<std::size_t>(c)] |= Mask{1} << r;
      }
      V.maps.push_back(std::move(M));
    }
    V.validate();
    s.modules[static_cast<std::size_t>(i * n + jj)] = std::move(V);
  }
  for (std::size_t x = 0; x < seen.size(); ++x)
    if (!seen[x]) throw ValidationError("system: missing module (" + std::to_string(x / n) + "," + std::to_string(x % n) + ")");
  for (const auto& V : s.modules)
    if (V.levels() == 0) throw ValidationError("system: modules need at least one critical value");

  s.products.resize(static_cast<std::size_t>(n * n * n));
  for (int i = 0; i < n; ++i)
    for (int jj = 0; jj < n; ++jj)
      for (int k = 0; k < n; ++k) {
        const auto& A = s.module(i, jj);
        const auto& B = s.module(jj, k);
        auto& e = s.product(i, jj, k).entries;
        e.resize(A.levels());
        for (int a = 0; a < A.levels(); ++a) {
          e[a].resize(B.levels());
          for (int b = 0; b < B.levels(); ++b) e[a][b].assign(static_cast<std::size_t>(A.dims[a] * B.dims[b]), 0);
        }
      }
  if (j.contains("products")) {
    const auto& products = j.at("products");
    if (!products.is_array()) throw ValidationError("system: 'products' must be an array");
    for (const auto& p : products) {
      const int i = index(p, "i", "product"), jj = index(p, "j", "product"), k = index(p, "k", "product");
      const auto& A = s.module(i, jj);
      const auto& B = s.module(jj, k);
      const auto& C = s.module(i, k);
      const std::string where = "product (" + std::to_string(i) + "," + std::to_string(jj) + "," + std::to_string(k) + ")";
      const int a = field<int>(p, "a", where), b = field<int>(p, "b", where);
      if (a < 0 || a >= A.levels() || b < 0 || b >= B.levels()) throw ValidationError(where + ": level out of range");
      const int dim = C.dim_at(s.target_level(i, jj, k, a, b));
      const auto table = field<nlohmann::json>(p, "table", where);
      if (!table.is_array() || static_cast<int>(table.size()) != A.dims[a]) throw ValidationError(where + ": table needs dims[a] rows");
      auto& block = s.product(i, jj, k).entries[a][b];
      for (int x = 0; x < A.dims[a]; ++x) {
        const auto& row = table[static_cast<std::size_t>(x)];
        if (!row.is_array() || static_cast<int>(row.size()) != B.dims[b]) throw ValidationError(where + ": table rows need dims[b] entries");
        for (int y = 0; y < B.dims[b]; ++y) block[x * B.dims[b] + y] = detail::bits_from(row[static_cast<std::size_t>(y)], dim, where);
      }
    }
  }

  const auto units = field<nlohmann::json>(j, "units", "system");
  if (!units.is_array()) throw ValidationError("system: 'units' must be an array");
  for (const auto& u : units) {
    const int i = index(u, "i", "unit"), jj = index(u, "j", "unit");
    const auto vec = field<nlohmann::json>(u, "vector", "unit");
    s.unit(i, jj) = detail::bits_from(vec, s.module(i, jj).dim_infinity(), "unit");
  }
  s.check_shapes();
  return s;
}

}  // namespace specinv::algebra
