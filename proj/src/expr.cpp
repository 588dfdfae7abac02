#include "dphase/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>

namespace dphase::expr {

namespace {

constexpr double kPi = 3.14159265358979323846;

const char* const kVarNames[kVarCount] = {"x1", "x2", "s1", "s2", "g1", "g2", "n"};

std::optional<Var> var_from_name(std::string_view name) {
  for (int i = 0; i < kVarCount; ++i) {
    if (name == kVarNames[i]) return static_cast<Var>(i);
  }
  return std::nullopt;
}

std::optional<Op> unary_fn_from_name(std::string_view name) {
  if (name == "sin") return Op::fn_sin;
  if (name == "cos") return Op::fn_cos;
  if (name == "atan" || name == "arctan") return Op::fn_atan;
  if (name == "abs") return Op::fn_abs;
  if (name == "exp") return Op::fn_exp;
  if (name == "log") return Op::fn_log;
  if (name == "sqrt") return Op::fn_sqrt;
  return std::nullopt;
}

std::optional<Op> binary_fn_from_name(std::string_view name) {
  if (name == "min") return Op::fn_min;
  if (name == "max") return Op::fn_max;
  return std::nullopt;
}

using NodePtr = std::shared_ptr<const Node>;

NodePtr make_literal(double v, std::size_t off) {
  auto n = std::make_shared<Node>();
  n->op = Op::literal;
  n->value = v;
  n->offset = off;
  return n;
}

NodePtr make_node(Op op, std::size_t off, NodePtr a, NodePtr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->offset = off;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr run() {
    NodePtr e = parse_expr();
    skip_ws();
    if (pos_ < src_.size()) fail("unexpected trailing input");
    return e;
  }

private:
  std::string_view src_;
  std::size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& msg) { throw ParseError(msg, pos_); }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  int peek() {
    skip_ws();
    return pos_ < src_.size() ? static_cast<unsigned char>(src_[pos_]) : -1;
  }

  bool consume(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!consume(c)) fail(std::string("expected '") + c + "'");
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      int c = peek();
      if (c != '+' && c != '-') return lhs;
      std::size_t off = pos_;
      ++pos_;
      NodePtr rhs = parse_term();
      lhs = make_node(c == '+' ? Op::add : Op::sub, off, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    for (;;) {
      int c = peek();
      if (c != '*' && c != '/') return lhs;
      std::size_t off = pos_;
      ++pos_;
      NodePtr rhs = parse_factor();
      lhs = make_node(c == '*' ? Op::mul : Op::div, off, std::move(lhs), std::move(rhs));
    }
  }

  NodePtr parse_factor() {
    if (peek() == '-') {
      std::size_t off = pos_;
      ++pos_;
      NodePtr operand = parse_factor();
      if (operand->op == Op::literal) return make_literal(-operand->value, off);
      return make_node(Op::neg, off, std::move(operand));
    }
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (peek() == '^') {
      std::size_t off = pos_;
      ++pos_;
      NodePtr exponent = parse_factor();  // right associative; allows 2^-3
      return make_node(Op::pow, off, std::move(base), std::move(exponent));
    }
    return base;
  }

  NodePtr parse_primary() {
    int c = peek();
    if (c < 0) fail("expected expression");
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(c) || c == '.') return parse_number();
    if (std::isalpha(c) || c == '_') return parse_name();
    fail("unexpected character");
  }

  NodePtr parse_number() {
    std::size_t off = pos_;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) fail("malformed number");
    pos_ += static_cast<std::size_t>(ptr - first);
    return make_literal(value, off);
  }

  NodePtr parse_name() {
    std::size_t off = pos_;
    std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    std::string_view name = src_.substr(start, pos_ - start);

    if (name == "pi") return make_literal(kPi, off);

    if (auto v = var_from_name(name)) {
      auto n = std::make_shared<Node>();
      n->op = Op::variable;
      n->var = *v;
      n->offset = off;
      return n;
    }

    if (auto fn = unary_fn_from_name(name)) {
      expect('(');
      NodePtr arg = parse_expr();
      expect(')');
      return make_node(*fn, off, std::move(arg));
    }

    if (auto fn = binary_fn_from_name(name)) {
      expect('(');
      NodePtr a = parse_expr();
      expect(',');
      NodePtr b = parse_expr();
      expect(')');
      return make_node(*fn, off, std::move(a), std::move(b));
    }

    pos_ = off;
    fail("unknown identifier '" + std::string(name) + "'");
  }
};

double eval_node(const Node& n, const Bindings& env) {
  switch (n.op) {
    case Op::literal:
      return n.value;
    case Op::variable:
      if (!env.has(n.var))
        throw EvalError(std::string("unbound variable '") + var_name(n.var) + "'", n.offset);
      return env.get(n.var);
    case Op::neg:
      return -eval_node(*n.a, env);
    case Op::add:
      return eval_node(*n.a, env) + eval_node(*n.b, env);
    case Op::sub:
      return eval_node(*n.a, env) - eval_node(*n.b, env);
    case Op::mul:
      return eval_node(*n.a, env) * eval_node(*n.b, env);
    case Op::div: {
      double num = eval_node(*n.a, env);
      double den = eval_node(*n.b, env);
      if (den == 0.0) throw EvalError("division by zero", n.offset);
      return num / den;
    }
    case Op::pow: {
      double base = eval_node(*n.a, env);
      double e = eval_node(*n.b, env);
      if (base == 0.0 && e < 0.0) throw EvalError("zero raised to a negative power", n.offset);
      if (base < 0.0 && e != std::floor(e))
        throw EvalError("negative base with non-integer exponent", n.offset);
      return std::pow(base, e);
    }
    case Op::fn_sin:
      return std::sin(eval_node(*n.a, env));
    case Op::fn_cos:
      return std::cos(eval_node(*n.a, env));
    case Op::fn_atan:
      return std::atan(eval_node(*n.a, env));
    case Op::fn_abs:
      return std::fabs(eval_node(*n.a, env));
    case Op::fn_exp:
      return std::exp(eval_node(*n.a, env));
    case Op::fn_log: {
      double x = eval_node(*n.a, env);
      if (x <= 0.0) throw EvalError("log of non-positive value", n.offset);
      return std::log(x);
    }
    case Op::fn_sqrt: {
      double x = eval_node(*n.a, env);
      if (x < 0.0) throw EvalError("sqrt of negative value", n.offset);
      return std::sqrt(x);
    }
    case Op::fn_min:
      return std::fmin(eval_node(*n.a, env), eval_node(*n.b, env));
    case Op::fn_max:
      return std::fmax(eval_node(*n.a, env), eval_node(*n.b, env));
  }
  throw EvalError("corrupt expression node", n.offset);
}

const char* fn_name(Op op) {
  switch (op) {
    case Op::fn_sin: return "sin";
    case Op::fn_cos: return "cos";
    case Op::fn_atan: return "atan";
    case Op::fn_abs: return "abs";
    case Op::fn_exp: return "exp";
    case Op::fn_log: return "log";
    case Op::fn_sqrt: return "sqrt";
    case Op::fn_min: return "min";
    case Op::fn_max: return "max";
    default: return "?";
  }
}

void print_node(const Node& n, std::string& out) {
  switch (n.op) {
    case Op::literal: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Op::variable:
      out += var_name(n.var);
      return;
    case Op::neg:
      out += "(-";
      print_node(*n.a, out);
      out += ")";
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: {
      const char* sym = n.op == Op::add   ? " + "
                        : n.op == Op::sub ? " - "
                        : n.op == Op::mul ? " * "
                        : n.op == Op::div ? " / "
                                          : " ^ ";
      out += "(";
      print_node(*n.a, out);
      out += sym;
      print_node(*n.b, out);
      out += ")";
      return;
    }
    default:
      out += fn_name(n.op);
      out += "(";
      print_node(*n.a, out);
      if (n.b) {
        out += ", ";
        print_node(*n.b, out);
      }
      out += ")";
      return;
  }
}

bool nodes_equal(const Node* a, const Node* b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op) return false;
  switch (a->op) {
    case Op::literal:
      return a->value == b->value;
    case Op::variable:
      return a->var == b->var;
    default:
      return nodes_equal(a->a.get(), b->a.get()) && nodes_equal(a->b.get(), b->b.get());
  }
}

void collect(const Node* n, std::array<bool, kVarCount>& used) {
  if (!n) return;
  if (n->op == Op::variable) used[static_cast<int>(n->var)] = true;
  collect(n->a.get(), used);
  collect(n->b.get(), used);
}

}  // namespace

const char* var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

EvalError::EvalError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

double Expr::evaluate(const Bindings& bindings) const {
  if (!root_) throw EvalError("empty expression", 0);
  return eval_node(*root_, bindings);
}

std::string Expr::str() const {
  if (!root_) return "";
  std::string out;
  print_node(*root_, out);
  return out;
}

bool Expr::uses(Var v) const {
  std::array<bool, kVarCount> used{};
  collect_vars(used);
  return used[static_cast<int>(v)];
}

void Expr::collect_vars(std::array<bool, kVarCount>& used) const { collect(root_.get(), used); }

Expr parse(std::string_view source) { return Expr(Parser(source).run()); }

double evaluate(const Expr& e, const Bindings& bindings) { return e.evaluate(bindings); }

bool structurally_equal(const Expr& a, const Expr& b) { return nodes_equal(a.root(), b.root()); }

}  // namespace dphase::expr
