#pragma once

// Exact rationals on 64-bit integers with overflow detection.

#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>

#include "specinv/errors.hpp"

namespace specinv {

class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT: implicit from integers
  Rational(std::int64_t n, std::int64_t d) { assign(n, d); }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Accepts "3", "-1/4", "0.75"; no exponents.
  static Rational parse(std::string_view text) {
    auto fail = [&]() -> Rational { throw ValidationError("not a rational number: '" + std::string(text) + "'"); };
    if (text.empty()) return fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
      const auto n = parse_int(text.substr(0, slash));
      const auto d = parse_int(text.substr(slash + 1));
      if (!n || !d || *d == 0) return fail();
      return Rational(*n, *d);
    }
    bool neg = false;
    std::string_view body = text;
    if (body.front() == '-' || body.front() == '+') {
      neg = body.front() == '-';
      body.remove_prefix(1);
    }
    if (body.empty()) return fail();
    const auto dot = body.find('.');
    std::string digits(body.substr(0, dot));
    std::int64_t den = 1;
    if (dot != std::string_view::npos) {
      auto frac = body.substr(dot + 1);
      if (frac.empty() && digits.empty()) return fail();
      if (frac.size() > 15) return fail();
      digits += std::string(frac);
      for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    }
    if (digits.empty() || digits.size() > 18) return fail();
    for (char c : digits)
      if (c < '0' || c > '9') return fail();
    const std::int64_t n = std::stoll(digits);
    return Rational(neg ? -n : n, den);
  }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ + static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.den_ - static_cast<__int128>(b.num_) * a.den_,
                static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return make(static_cast<__int128>(a.num_) * b.num_, static_cast<__int128>(a.den_) * b.den_);
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw ArgumentError("division by zero rational");
    return make(static_cast<__int128>(a.num_) * b.den_, static_cast<__int128>(a.den_) * b.num_);
  }
  Rational operator-() const { return make(-static_cast<__int128>(num_), den_); }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator-=(const Rational& o) { return *this = *this - o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const __int128 l = static_cast<__int128>(a.num_) * b.den_;
    const __int128 r = static_cast<__int128>(b.num_) * a.den_;
    return l < r ? std::strong_ordering::less : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

 private:
  static std::optional<std::int64_t> parse_int(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size() || s.size() - i > 18) return std::nullopt;
    for (std::size_t k = i; k < s.size(); ++k)
      if (s[k] < '0' || s[k] > '9') return std::nullopt;
    return std::stoll(std::string(s));
  }

  static Rational make(__int128 n, __int128 d) {
    if (d == 0) throw ArgumentError("zero denominator");
    if (d < 0) {
      n = -n;
      d = -d;
    }
    __int128 a = n < 0 ? -n : n, b = d;
    while (b != 0) {
      const __int128 t = a % b;
      a = b;
      b = t;
    }
    if (a > 1) {
      n /= a;
      d /= a;
    }
    constexpr __int128 lim = std::numeric_limits<std::int64_t>::max();
    if (n > lim || n < -lim || d > lim) throw ValidationError("rational arithmetic overflow");
    Rational r;
    r.num_ = static_cast<std::int64_t>(n);
    r.den_ = static_cast<std::int64_t>(d);
    return r;
  }

  void assign(std::int64_t n, std::int64_t d) { *this = make(n, d); }

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace specinv
