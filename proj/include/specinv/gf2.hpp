#pragma once

// Dense linear algebra over the two-element field. Vectors are packed
// 64 bits per word; everything here is exact.

#include <bit>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <vector>

namespace specinv::gf2 {

class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t size) : size_(size), words_((size + 63) / 64, 0) {}

  std::size_t size() const { return size_; }

  bool test(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { words_[i >> 6] |= (std::uint64_t{1} << (i & 63)); }
  void reset(std::size_t i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void flip(std::size_t i) { words_[i >> 6] ^= (std::uint64_t{1} << (i & 63)); }

  BitVector& operator^=(const BitVector& other) {
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

  bool any() const {
    for (auto w : words_)
      if (w) return true;
    return false;
  }

  // Index of the highest set bit, or nullopt for the zero vector.
  std::optional<std::size_t> highest() const {
    for (std::size_t w = words_.size(); w-- > 0;)
      if (words_[w]) return w * 64 + 63 - static_cast<std::size_t>(std::countl_zero(words_[w]));
    return std::nullopt;
  }

  std::size_t popcount() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }

 private:
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Incrementally built echelon form keyed by highest set bit.
class EchelonBasis {
 public:
  explicit EchelonBasis(std::size_t ambient) : ambient_(ambient) {}

  // Reduces v against the basis; returns the residue (zero iff v is in the span).
  BitVector reduce(BitVector v) const {
    while (auto h = v.highest()) {
      auto it = pivots_.find(*h);
      if (it == pivots_.end()) break;
      v ^= rows_[it->second];
    }
    return v;
  }

  bool contains(const BitVector& v) const { return !reduce(v).any(); }

  // Adds v; returns true if it enlarged the span.
  bool insert(const BitVector& v) {
    BitVector r = reduce(v);
    auto h = r.highest();
    if (!h) return false;
    pivots_.emplace(*h, rows_.size());
    rows_.push_back(std::move(r));
    return true;
  }

  std::size_t rank() const { return rows_.size(); }
  std::size_t ambient() const { return ambient_; }

 private:
  std::size_t ambient_;
  std::vector<BitVector> rows_;
  std::unordered_map<std::size_t, std::size_t> pivots_;
};

// Kernel basis of the linear map whose images of the source basis vectors
// are `columns` (all of size `target_dim`).
inline std::vector<BitVector> kernel(const std::vector<BitVector>& columns, std::size_t target_dim) {
  const std::size_t n = columns.size();
  std::vector<BitVector> reduced;
  std::vector<BitVector> combo;
  std::unordered_map<std::size_t, std::size_t> pivot_owner;
  std::vector<BitVector> result;
  for (std::size_t j = 0; j < n; ++j) {
    BitVector col = columns[j];
    BitVector track(n);
    track.set(j);
    while (auto h = col.highest()) {
      auto it = pivot_owner.find(*h);
      if (it == pivot_owner.end()) break;
      col ^= reduced[it->second];
      track ^= combo[it->second];
    }
    if (auto h = col.highest()) {
      pivot_owner.emplace(*h, reduced.size());
      reduced.push_back(std::move(col));
      combo.push_back(std::move(track));
    } else {
      result.push_back(std::move(track));
    }
  }
  (void)target_dim;
  return result;
}

inline std::size_t rank(const std::vector<BitVector>& vectors, std::size_t ambient) {
  EchelonBasis basis(ambient);
  for (const auto& v : vectors) basis.insert(v);
  return basis.rank();
}

// One solution x of sum_j x_j columns[j] == target, if any exists.
inline std::optional<BitVector> solve(const std::vector<BitVector>& columns, const BitVector& target) {
  const std::size_t n = columns.size();
  std::vector<BitVector> reduced;
  std::vector<BitVector> combo;
  std::unordered_map<std::size_t, std::size_t> pivot_owner;
  for (std::size_t j = 0; j < n; ++j) {
    BitVector col = columns[j];
    BitVector track(n);
    track.set(j);
    while (auto h = col.highest()) {
      auto it = pivot_owner.find(*h);
      if (it == pivot_owner.end()) break;
      col ^= reduced[it->second];
      track ^= combo[it->second];
    }
    if (auto h = col.highest()) {
      pivot_owner.emplace(*h, reduced.size());
      reduced.push_back(std::move(col));
      combo.push_back(std::move(track));
    }
  }
  BitVector rest = target;
  BitVector x(n);
  while (auto h = rest.highest()) {
    auto it = pivot_owner.find(*h);
    if (it == pivot_owner.end()) return std::nullopt;
    rest ^= reduced[it->second];
    x ^= combo[it->second];
  }
  return x;
}

}  // namespace specinv::gf2
