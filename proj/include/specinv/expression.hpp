#pragma once

// Arithmetic expressions in the base variables x1..xd and fiber variables
// xi1..xik: numbers, pi, + - * /, integer powers, sin, cos, exp.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "specinv/errors.hpp"

namespace specinv {

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : ValidationError(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

struct Expr {
  enum class Kind { Number, Pi, BaseVar, FiberVar, Neg, Add, Sub, Mul, Div, Pow, Sin, Cos, Exp };

  Kind kind = Kind::Number;
  double value = 0.0;  // Number
  int index = 0;       // variable index (0-based) or Pow exponent
  std::shared_ptr<const Expr> lhs, rhs;

  friend bool operator==(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.index != b.index) return false;
    if (a.kind == Kind::Number && a.value != b.value) return false;
    auto same = [](const std::shared_ptr<const Expr>& x, const std::shared_ptr<const Expr>& y) {
      return (!x && !y) || (x && y && *x == *y);
    };
    return same(a.lhs, b.lhs) && same(a.rhs, b.rhs);
  }
};

namespace detail {

inline int precedence(Expr::Kind k) {
  using K = Expr::Kind;
  switch (k) {
    case K::Add:
    case K::Sub:
      return 1;
    case K::Mul:
    case K::Div:
      return 2;
    case K::Neg:
      return 3;
    case K::Pow:
      return 4;
    default:
      return 5;
  }
}

class Parser {
 public:
  Parser(std::string_view text, int base_dim, int fiber_dim) : s_(text), nb_(base_dim), nf_(fiber_dim) {}

  Expr parse() {
    skip();
    if (pos_ == s_.size()) throw ParseError("empty expression", 0);
    Expr e = sum();
    skip();
    if (pos_ != s_.size()) throw ParseError(std::string("unexpected '") + s_[pos_] + "'", pos_);
    return e;
  }

 private:
  static std::shared_ptr<const Expr> box(Expr e) { return std::make_shared<const Expr>(std::move(e)); }
  static Expr node(Expr::Kind k, Expr a, Expr b) { return Expr{k, 0.0, 0, box(std::move(a)), box(std::move(b))}; }

  void skip() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t' || s_[pos_] == '\n' || s_[pos_] == '\r')) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr sum() {
    Expr e = product();
    while (true) {
      if (eat('+'))
        e = node(Expr::Kind::Add, std::move(e), product());
      else if (eat('-'))
        e = node(Expr::Kind::Sub, std::move(e), product());
      else
        return e;
    }
  }

  Expr product() {
    Expr e = unary();
    while (true) {
      if (eat('*'))
        e = node(Expr::Kind::Mul, std::move(e), unary());
      else if (eat('/'))
        e = node(Expr::Kind::Div, std::move(e), unary());
      else
        return e;
    }
  }

  Expr unary() {
    if (eat('-')) return Expr{Expr::Kind::Neg, 0.0, 0, box(unary()), nullptr};
    if (eat('+')) return unary();
    return power();
  }

  Expr power() {
    Expr e = primary();
    if (!eat('^')) return e;
    skip();
    const std::size_t at = pos_;
    bool neg = false;
    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) neg = s_[pos_++] == '-';
    const std::size_t start = pos_;
    while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
    if (start == pos_) throw ParseError("exponent must be an integer", at);
    int k = 0;
    auto [p, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, k);
    if (ec != std::errc() || k > 64) throw ParseError("exponent out of range", at);
    (void)p;
    return Expr{Expr::Kind::Pow, 0.0, neg ? -k : k, box(std::move(e)), nullptr};
  }

  Expr primary() {
    skip();
    if (pos_ == s_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = sum();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    double v = 0.0;
    auto [p, ec] = std::from_chars(s_.data() + pos_, s_.data() + s_.size(), v);
    if (ec != std::errc()) throw ParseError("bad number", start);
    pos_ = static_cast<std::size_t>(p - s_.data());
    return Expr{Expr::Kind::Number, v, 0, nullptr, nullptr};
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string name(s_.substr(start, pos_ - start));
    skip();
    const bool call = pos_ < s_.size() && s_[pos_] == '(';
    using K = Expr::Kind;
    K fn = K::Number;
    if (name == "sin") fn = K::Sin;
    if (name == "cos") fn = K::Cos;
    if (name == "exp") fn = K::Exp;
    if (fn != K::Number) {
      if (!call) throw ParseError("function '" + name + "' takes 1 argument", start);
      ++pos_;
      if (eat(')')) throw ParseError("function '" + name + "' takes 1 argument, got 0", start);
      Expr arg = sum();
      if (eat(',')) throw ParseError("function '" + name + "' takes 1 argument, got more", start);
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return Expr{fn, 0.0, 0, box(std::move(arg)), nullptr};
    }
    Expr e;
    if (name == "pi") {
      e.kind = K::Pi;
    } else if (auto v = variable(name, "xi", nf_)) {
      e = Expr{K::FiberVar, 0.0, *v, nullptr, nullptr};
    } else if (auto w = variable(name, "x", nb_)) {
      e = Expr{K::BaseVar, 0.0, *w, nullptr, nullptr};
    } else {
      throw ParseError("unknown identifier '" + name + "'", start);
    }
    if (call) throw ParseError("'" + name + "' is not a function (takes 0 arguments)", start);
    return e;
  }

  static std::optional<int> variable(const std::string& name, std::string_view prefix, int count) {
    if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0) return std::nullopt;
    const std::string digits = name.substr(prefix.size());
    if (digits[0] == '0') return std::nullopt;
    int k = 0;
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc() || p != digits.data() + digits.size()) return std::nullopt;
    if (k < 1 || k > count) return std::nullopt;
    return k - 1;
  }

  std::string_view s_;
  int nb_, nf_;
  std::size_t pos_ = 0;
};

inline void print(const Expr& e, std::string& out) {
  using K = Expr::Kind;
  auto child = [&](const Expr& c, bool paren) {
    if (paren) out += '(';
    print(c, out);
    if (paren) out += ')';
  };
  const int p = precedence(e.kind);
  switch (e.kind) {
    case K::Number: {
      char buf[64];
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, e.value);
      (void)ec;
      out.append(buf, end);
      return;
    }
    case K::Pi:
      out += "pi";
      return;
    case K::BaseVar:
      out += "x" + std::to_string(e.index + 1);
      return;
    case K::FiberVar:
      out += "xi" + std::to_string(e.index + 1);
      return;
    case K::Neg:
      out += '-';
      child(*e.lhs, precedence(e.lhs->kind) < p);
      return;
    case K::Pow:
      child(*e.lhs, precedence(e.lhs->kind) <= p);
      out += "^" + std::to_string(e.index);
      return;
    case K::Sin:
    case K::Cos:
    case K::Exp:
      out += e.kind == K::Sin ? "sin(" : (e.kind == K::Cos ? "cos(" : "exp(");
      print(*e.lhs, out);
      out += ')';
      return;
    default: {
      const char* op = e.kind == K::Add ? " + " : e.kind == K::Sub ? " - " : e.kind == K::Mul ? "*" : "/";
      child(*e.lhs, precedence(e.lhs->kind) < p);
      out += op;
      child(*e.rhs, precedence(e.rhs->kind) <= p);
    }
  }
}

inline double eval(const Expr& e, std::span<const double> x, std::span<const double> xi) {
  using K = Expr::Kind;
  switch (e.kind) {
    case K::Number:
      return e.value;
    case K::Pi:
      return std::numbers::pi;
    case K::BaseVar:
      return x[static_cast<std::size_t>(e.index)];
    case K::FiberVar:
      return xi[static_cast<std::size_t>(e.index)];
    case K::Neg:
      return -eval(*e.lhs, x, xi);
    case K::Add:
      return eval(*e.lhs, x, xi) + eval(*e.rhs, x, xi);
    case K::Sub:
      return eval(*e.lhs, x, xi) - eval(*e.rhs, x, xi);
    case K::Mul:
      return eval(*e.lhs, x, xi) * eval(*e.rhs, x, xi);
    case K::Div:
      return eval(*e.lhs, x, xi) / eval(*e.rhs, x, xi);
    case K::Pow: {
      const double b = eval(*e.lhs, x, xi);
      double r = 1.0;
      for (int k = 0; k < std::abs(e.index); ++k) r *= b;
      return e.index < 0 ? 1.0 / r : r;
    }
    case K::Sin:
      return std::sin(eval(*e.lhs, x, xi));
    case K::Cos:
      return std::cos(eval(*e.lhs, x, xi));
    case K::Exp:
      return std::exp(eval(*e.lhs, x, xi));
  }
  return 0.0;
}

}  // namespace detail

/// A parsed expression bound to its variable counts.
class Expression {
 public:
  const Expr& ast() const { return ast_; }
  int base_dim() const { return nb_; }
  int fiber_dim() const { return nf_; }

  double operator()(std::span<const double> x, std::span<const double> xi = {}) const {
    if (x.size() < static_cast<std::size_t>(nb_) || xi.size() < static_cast<std::size_t>(nf_))
      throw ArgumentError("expression evaluated with too few coordinates");
    return detail::eval(ast_, x, xi);
  }

  std::string str() const {
    std::string out;
    detail::print(ast_, out);
    return out;
  }

  friend Expression parse_expression(std::string_view text, int base_dim, int fiber_dim);

 private:
  Expr ast_;
  int nb_ = 0, nf_ = 0;
};

inline Expression parse_expression(std::string_view text, int base_dim, int fiber_dim = 0) {
  Expression e;
  e.ast_ = detail::Parser(text, base_dim, fiber_dim).parse();
  e.nb_ = base_dim;
  e.nf_ = fiber_dim;
  return e;
}

}  // namespace specinv
