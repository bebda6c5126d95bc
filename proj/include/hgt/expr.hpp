#pragma once

// Small arithmetic language for rate functions in scenario files.
//
//   expr       := comparison
//   comparison := additive (('<' | '>' | '<=' | '>=') additive)*
//   additive   := term (('+' | '-') term)*
//   term       := unary (('*' | '/') unary)*
//   unary      := '-' unary | power
//   power      := primary ('^' unary)?          (right associative)
//   primary    := number | name | name '(' args ')' | '(' expr ')'
//
// Names are the free variables `x` and `y` (whichever the caller allows).
// Functions: exp(a), log(a), abs(a), min(a, b), max(a, b).
// Comparisons evaluate to exactly 0 or 1.

#include <array>
#include <cctype>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

namespace hgt {

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t position, const std::string& message)
      : std::runtime_error("parse error at offset " + std::to_string(position) + ": " + message),
        position_(position),
        message_(message) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t position_;
  std::string message_;
};

class EvalError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

enum class Op : std::uint8_t {
  constant,
  var_x,
  var_y,
  negate,
  add,
  sub,
  mul,
  div,
  pow,
  lt,
  gt,
  le,
  ge,
  exp,
  log,
  abs,
  min,
  max,
};

struct ExprNode {
  Op op = Op::constant;
  double value = 0.0;
  int lhs = -1;
  int rhs = -1;

  friend bool operator==(const ExprNode&, const ExprNode&) = default;
};

/// Closed interval used for bounding an expression over a box of inputs.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

inline int arity(Op op) {
  switch (op) {
    case Op::constant:
    case Op::var_x:
    case Op::var_y:
      return 0;
    case Op::negate:
    case Op::exp:
    case Op::log:
    case Op::abs:
      return 1;
    default:
      return 2;
  }
}

inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace detail

/// Parsed expression over at most two variables. Nodes are stored flat;
/// children always precede their parent so the root is the last node.
class Expr {
 public:
  Expr() { nodes_.push_back({Op::constant, 0.0, -1, -1}); }

  static Expr constant(double v) {
    Expr e;
    e.nodes_[0].value = v;
    return e;
  }

  const std::vector<ExprNode>& nodes() const noexcept { return nodes_; }
  int root() const noexcept { return static_cast<int>(nodes_.size()) - 1; }

  bool uses_x() const noexcept { return uses(Op::var_x); }
  bool uses_y() const noexcept { return uses(Op::var_y); }
  bool is_constant() const noexcept { return !uses_x() && !uses_y(); }

  double operator()(double x, double y = 0.0) const { return eval_node(root(), x, y); }

  double evaluate(const std::map<std::string, double>& bindings) const {
    auto lookup = [&](const char* name, bool needed) {
      if (!needed) return 0.0;
      auto it = bindings.find(name);
      if (it == bindings.end()) throw EvalError(std::string("unbound variable '") + name + "'");
      return it->second;
    };
    return (*this)(lookup("x", uses_x()), lookup("y", uses_y()));
  }

  /// Sound enclosure of the expression's range over x in bx, y in by.
  /// Returns an infinite interval when no finite bound can be certified.
  Interval bound(Interval bx, Interval by) const { return bound_node(root(), bx, by); }

  /// Fully parenthesised text that reparses to an identical node tree.
  std::string to_string() const { return print_node(root()); }

  friend bool operator==(const Expr& a, const Expr& b) { return a.nodes_ == b.nodes_; }

  /// Structural builder used by the parser and by tests.
  int push(ExprNode node) {
    nodes_.push_back(node);
    return static_cast<int>(nodes_.size()) - 1;
  }

  void reset() { nodes_.clear(); }

 private:
  bool uses(Op op) const noexcept {
    for (const auto& n : nodes_)
      if (n.op == op) return true;
    return false;
  }

  double eval_node(int i, double x, double y) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::constant:
        return n.value;
      case Op::var_x:
        return x;
      case Op::var_y:
        return y;
      case Op::negate:
        return -eval_node(n.lhs, x, y);
      case Op::exp:
        return std::exp(eval_node(n.lhs, x, y));
      case Op::abs:
        return std::abs(eval_node(n.lhs, x, y));
      case Op::log: {
        double a = eval_node(n.lhs, x, y);
        if (!(a > 0.0)) throw EvalError("log of nonpositive argument " + detail::format_double(a));
        return std::log(a);
      }
      default:
        break;
    }
    double a = eval_node(n.lhs, x, y);
    double b = eval_node(n.rhs, x, y);
    switch (n.op) {
      case Op::add:
        return a + b;
      case Op::sub:
        return a - b;
      case Op::mul:
        return a * b;
      case Op::div:
        if (b == 0.0) throw EvalError("division by zero");
        return a / b;
      case Op::pow: {
        double v = std::pow(a, b);
        if (std::isnan(v)) throw EvalError("power with negative base and fractional exponent");
        return v;
      }
      case Op::lt:
        return a < b ? 1.0 : 0.0;
      case Op::gt:
        return a > b ? 1.0 : 0.0;
      case Op::le:
        return a <= b ? 1.0 : 0.0;
      case Op::ge:
        return a >= b ? 1.0 : 0.0;
      case Op::min:
        return std::min(a, b);
      case Op::max:
        return std::max(a, b);
      default:
        return 0.0;
    }
  }

  Interval bound_node(int i, Interval bx, Interval by) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const Interval everything{-inf, inf};
    const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
    auto widen = [](Interval v) {
      // one ulp outward per operation covers rounding
      return Interval{std::nextafter(v.lo, -inf), std::nextafter(v.hi, inf)};
    };
    switch (n.op) {
      case Op::constant:
        return {n.value, n.value};
      case Op::var_x:
        return bx;
      case Op::var_y:
        return by;
      default:
        break;
    }
    Interval a = bound_node(n.lhs, bx, by);
    if (std::isnan(a.lo) || std::isnan(a.hi)) return everything;
    switch (n.op) {
      case Op::negate:
        return {-a.hi, -a.lo};
      case Op::exp:
        return widen({std::exp(a.lo), std::exp(a.hi)});
      case Op::log:
        if (a.lo <= 0.0) return everything;
        return widen({std::log(a.lo), std::log(a.hi)});
      case Op::abs:
        if (a.lo >= 0.0) return a;
        if (a.hi <= 0.0) return {-a.hi, -a.lo};
        return {0.0, std::max(-a.lo, a.hi)};
      default:
        break;
    }
    Interval b = bound_node(n.rhs, bx, by);
    if (std::isnan(b.lo) || std::isnan(b.hi)) return everything;
    auto corners = [&](auto f) {
      double c[4] = {f(a.lo, b.lo), f(a.lo, b.hi), f(a.hi, b.lo), f(a.hi, b.hi)};
      Interval r{c[0], c[0]};
      for (double v : c) {
        if (std::isnan(v)) return everything;
        r.lo = std::min(r.lo, v);
        r.hi = std::max(r.hi, v);
      }
      return widen(r);
    };
    auto indicator = [](bool always, bool never) -> Interval {
      if (always) return {1.0, 1.0};
      if (never) return {0.0, 0.0};
      return {0.0, 1.0};
    };
    switch (n.op) {
      case Op::add:
        return widen({a.lo + b.lo, a.hi + b.hi});
      case Op::sub:
        return widen({a.lo - b.hi, a.hi - b.lo});
      case Op::mul:
        if ((a.lo == 0.0 && a.hi == 0.0) || (b.lo == 0.0 && b.hi == 0.0)) return {0.0, 0.0};
        return corners([](double u, double v) { return u * v; });
      case Op::div:
        if (b.lo <= 0.0 && b.hi >= 0.0) return everything;
        return corners([](double u, double v) { return u / v; });
      case Op::pow:
        if (a.lo <= 0.0) {
          // integer-constant exponents of sign-changing bases are handled coarsely
          if (b.lo == b.hi && b.lo >= 0.0 && std::floor(b.lo) == b.lo) {
            double m = std::max(std::abs(a.lo), std::abs(a.hi));
            double top = std::pow(m, b.lo);
            return widen({-top, top});
          }
          return everything;
        }
        return corners([](double u, double v) { return std::pow(u, v); });
      case Op::lt:
        return indicator(a.hi < b.lo, a.lo >= b.hi);
      case Op::gt:
        return indicator(a.lo > b.hi, a.hi <= b.lo);
      case Op::le:
        return indicator(a.hi <= b.lo, a.lo > b.hi);
      case Op::ge:
        return indicator(a.lo >= b.hi, a.hi < b.lo);
      case Op::min:
        return {std::min(a.lo, b.lo), std::min(a.hi, b.hi)};
      case Op::max:
        return {std::max(a.lo, b.lo), std::max(a.hi, b.hi)};
      default:
        return everything;
    }
  }

  std::string print_node(int i) const {
    const ExprNode& n = nodes_[static_cast<std::size_t>(i)];
    switch (n.op) {
      case Op::constant:
        return detail::format_double(n.value);
      case Op::var_x:
        return "x";
      case Op::var_y:
        return "y";
      case Op::negate:
        return "(-" + print_node(n.lhs) + ")";
      case Op::exp:
        return "exp(" + print_node(n.lhs) + ")";
      case Op::log:
        return "log(" + print_node(n.lhs) + ")";
      case Op::abs:
        return "abs(" + print_node(n.lhs) + ")";
      case Op::min:
        return "min(" + print_node(n.lhs) + ", " + print_node(n.rhs) + ")";
      case Op::max:
        return "max(" + print_node(n.lhs) + ", " + print_node(n.rhs) + ")";
      default:
        break;
    }
    const char* sym = "?";
    switch (n.op) {
      case Op::add: sym = " + "; break;
      case Op::sub: sym = " - "; break;
      case Op::mul: sym = " * "; break;
      case Op::div: sym = " / "; break;
      case Op::pow: sym = " ^ "; break;
      case Op::lt: sym = " < "; break;
      case Op::gt: sym = " > "; break;
      case Op::le: sym = " <= "; break;
      case Op::ge: sym = " >= "; break;
      default: break;
    }
    return "(" + print_node(n.lhs) + sym + print_node(n.rhs) + ")";
  }

  std::vector<ExprNode> nodes_;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view src, const std::set<std::string>& allowed) : src_(src), allowed_(allowed) {}

  Expr run() {
    out_.reset();
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(0, "empty expression");
    comparison();
    skip_ws();
    if (pos_ != src_.size()) {
      if (src_[pos_] == ')') throw ParseError(pos_, "unbalanced ')'");
      throw ParseError(pos_, std::string("unexpected '") + src_[pos_] + "'");
    }
    return std::move(out_);
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }

  bool accept(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) == tok) {
      pos_ += tok.size();
      return true;
    }
    return false;
  }

  int binary(Op op, int l, int r) { return out_.push({op, 0.0, l, r}); }

  int comparison() {
    int lhs = additive();
    for (;;) {
      Op op;
      if (accept("<=")) op = Op::le;
      else if (accept(">=")) op = Op::ge;
      else if (accept("<")) op = Op::lt;
      else if (accept(">")) op = Op::gt;
      else return lhs;
      lhs = binary(op, lhs, additive());
    }
  }

  int additive() {
    int lhs = term();
    for (;;) {
      if (accept("+")) lhs = binary(Op::add, lhs, term());
      else if (accept("-")) lhs = binary(Op::sub, lhs, term());
      else return lhs;
    }
  }

  int term() {
    int lhs = unary();
    for (;;) {
      if (accept("*")) lhs = binary(Op::mul, lhs, unary());
      else if (accept("/")) lhs = binary(Op::div, lhs, unary());
      else return lhs;
    }
  }

  int unary() {
    if (accept("-")) {
      int a = unary();
      return out_.push({Op::negate, 0.0, a, -1});
    }
    return power();
  }

  int power() {
    int base = primary();
    if (accept("^")) return binary(Op::pow, base, unary());
    return base;
  }

  int primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError(pos_, "missing operand");
    char c = src_[pos_];
    if (c == '(') {
      std::size_t open = pos_++;
      int inner = comparison();
      if (!accept(")")) throw ParseError(open, "unbalanced '('");
      return inner;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    throw ParseError(pos_, std::string("missing operand before '") + c + "'");
  }

  int number() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_)
      throw ParseError(start, "malformed number '" + std::string(src_.substr(start, pos_ - start)) + "'");
    return out_.push({Op::constant, v, -1, -1});
  }

  int name() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
    std::string id(src_.substr(start, pos_ - start));
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      ++pos_;
      Op op;
      int args;
      if (id == "exp") op = Op::exp, args = 1;
      else if (id == "log") op = Op::log, args = 1;
      else if (id == "abs") op = Op::abs, args = 1;
      else if (id == "min") op = Op::min, args = 2;
      else if (id == "max") op = Op::max, args = 2;
      else throw ParseError(start, "unknown function '" + id + "'");
      int a = comparison();
      int b = -1;
      if (args == 2) {
        if (!accept(",")) throw ParseError(pos_, "expected ',' in call to " + id);
        b = comparison();
      }
      if (!accept(")")) throw ParseError(start, "unbalanced '(' in call to " + id);
      return out_.push({op, 0.0, a, b});
    }
    if (!allowed_.count(id)) throw ParseError(start, "unknown identifier '" + id + "'");
    if (id == "x") return out_.push({Op::var_x, 0.0, -1, -1});
    if (id == "y") return out_.push({Op::var_y, 0.0, -1, -1});
    throw ParseError(start, "unsupported variable '" + id + "' (only x and y)");
  }

  std::string_view src_;
  const std::set<std::string>& allowed_;
  std::size_t pos_ = 0;
  Expr out_;
};

}  // namespace detail

inline Expr parse(std::string_view source, const std::set<std::string>& allowed_vars) {
  return detail::Parser(source, allowed_vars).run();
}

}  // namespace hgt
