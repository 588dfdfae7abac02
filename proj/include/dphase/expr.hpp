#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dphase::expr {

/// Variables of the scalar expression mini-language.
///   x1, x2 : spatial coordinates
///   s1, s2 : state (solution) values
///   g1, g2 : gradient magnitudes |grad u_1|, |grad u_2|
///   n      : band index (ladder formulas only)
enum class Var : std::uint8_t { x1 = 0, x2, s1, s2, g1, g2, n };

inline constexpr int kVarCount = 7;

const char* var_name(Var v);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

class EvalError : public std::runtime_error {
public:
  EvalError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

/// Variable bindings for evaluation. Unset variables raise EvalError on use.
class Bindings {
public:
  Bindings& set(Var v, double value) {
    values_[static_cast<int>(v)] = value;
    bound_[static_cast<int>(v)] = true;
    return *this;
  }
  bool has(Var v) const { return bound_[static_cast<int>(v)]; }
  double get(Var v) const { return values_[static_cast<int>(v)]; }

private:
  std::array<double, kVarCount> values_{};
  std::array<bool, kVarCount> bound_{};
};

enum class Op : std::uint8_t {
  literal,
  variable,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  fn_sin,
  fn_cos,
  fn_atan,
  fn_abs,
  fn_exp,
  fn_log,
  fn_sqrt,
  fn_min,
  fn_max,
};

struct Node {
  Op op;
  std::size_t offset = 0;  // source offset, for error reporting
  double value = 0.0;      // literal payload
  Var var = Var::x1;       // variable payload
  std::shared_ptr<const Node> a, b;
};

/// Immutable parsed expression. Safe to evaluate concurrently.
class Expr {
public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const Node> root) : root_(std::move(root)) {}

  bool empty() const { return root_ == nullptr; }
  const Node* root() const { return root_.get(); }

  double evaluate(const Bindings& bindings) const;

  /// Fully parenthesized rendering; parse(str()) is structurally equal.
  std::string str() const;

  bool uses(Var v) const;
  void collect_vars(std::array<bool, kVarCount>& used) const;

private:
  std::shared_ptr<const Node> root_;
};

/// Grammar:
///   expr    := term (('+'|'-') term)*
///   term    := factor (('*'|'/') factor)*
///   factor  := '-' factor | power
///   power   := primary ('^' factor)?         (right associative)
///   primary := number | name | name '(' args ')' | '(' expr ')'
/// '^' binds tighter than a unary minus on its left: -x1^2 == -(x1^2).
/// Known names: variables x1 x2 s1 s2 g1 g2 n, constant pi, functions
/// sin cos atan (alias arctan) abs exp log sqrt min max.
Expr parse(std::string_view source);

double evaluate(const Expr& e, const Bindings& bindings);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace dphase::expr
