#include "hetcal/expr.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "hetcal/common.hpp"

namespace hetcal {

namespace {

bool is_const(const ExprPtr& e, double v) {
  return e->kind == ExprKind::Const && e->value == v;
}

ExprPtr node(Expr e) { return std::make_shared<const Expr>(std::move(e)); }

}  // namespace

ExprPtr make_const(double v) {
  Expr e;
  e.kind = ExprKind::Const;
  e.value = v;
  return node(std::move(e));
}

ExprPtr make_var(int index) {
  Expr e;
  e.kind = ExprKind::Var;
  e.index = index;
  return node(std::move(e));
}

ExprPtr make_theta(int index) {
  Expr e;
  e.kind = ExprKind::Theta;
  e.index = index;
  return node(std::move(e));
}

ExprPtr make_neg(ExprPtr a) {
  if (a->kind == ExprKind::Const) return make_const(-a->value);
  if (a->kind == ExprKind::Neg) return a->a;  // --u = u
  Expr e;
  e.kind = ExprKind::Neg;
  e.a = std::move(a);
  return node(std::move(e));
}

ExprPtr make_binary(ExprKind op, ExprPtr a, ExprPtr b) {
  // Constant folding only where it cannot change the domain-error behaviour
  // of the expression (identities with exact neutral elements).
  if (a->kind == ExprKind::Const && b->kind == ExprKind::Const) {
    switch (op) {
      case ExprKind::Add: return make_const(a->value + b->value);
      case ExprKind::Sub: return make_const(a->value - b->value);
      case ExprKind::Mul: return make_const(a->value * b->value);
      default: break;  // division / powers may raise; keep symbolic
    }
  }
  switch (op) {
    case ExprKind::Add:
      if (is_const(a, 0)) return b;
      if (is_const(b, 0)) return a;
      break;
    case ExprKind::Sub:
      if (is_const(b, 0)) return a;
      if (is_const(a, 0)) return make_neg(b);
      break;
    case ExprKind::Mul:
      if (is_const(a, 0) || is_const(b, 0)) return make_const(0);
      if (is_const(a, 1)) return b;
      if (is_const(b, 1)) return a;
      if (is_const(a, -1)) return make_neg(b);
      if (is_const(b, -1)) return make_neg(a);
      break;
    case ExprKind::Div:
      if (is_const(a, 0) && !is_const(b, 0)) return make_const(0);
      if (is_const(b, 1)) return a;
      break;
    case ExprKind::Pow:
      if (is_const(b, 1)) return a;
      if (is_const(b, 0)) return make_const(1);
      break;
    default:
      break;
  }
  Expr e;
  e.kind = op;
  e.a = std::move(a);
  e.b = std::move(b);
  return node(std::move(e));
}

ExprPtr make_call(ExprFunc f, ExprPtr a) {
  Expr e;
  e.kind = ExprKind::Call;
  e.func = f;
  e.a = std::move(a);
  return node(std::move(e));
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Parser {
  const std::string& src;
  std::size_t pos = 0;
  int d, q;

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("expression error at position " + std::to_string(pos) +
                      ": " + msg + " in '" + src + "'");
  }

  void skip_ws() {
    while (pos < src.size() && (src[pos] == ' ' || src[pos] == '\t')) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < src.size() && src[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < src.size() ? src[pos] : '\0';
  }

  ExprPtr parse() {
    auto e = expr();
    skip_ws();
    if (pos != src.size()) fail("unexpected trailing input");
    return e;
  }

  ExprPtr expr() {
    auto lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make_binary(ExprKind::Add, lhs, term());
      else if (eat('-'))
        lhs = make_binary(ExprKind::Sub, lhs, term());
      else
        return lhs;
    }
  }

  ExprPtr term() {
    auto lhs = unary();
    for (;;) {
      if (eat('*'))
        lhs = make_binary(ExprKind::Mul, lhs, unary());
      else if (eat('/'))
        lhs = make_binary(ExprKind::Div, lhs, unary());
      else
        return lhs;
    }
  }

  ExprPtr unary() {
    if (eat('-')) return make_neg(unary());
    return power();
  }

  ExprPtr power() {
    auto base = atom();
    if (eat('^')) return make_binary(ExprKind::Pow, base, unary());
    return base;
  }

  ExprPtr atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input");
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      auto e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  ExprPtr number() {
    double v = 0.0;
    const char* begin = src.data() + pos;
    const char* end = src.data() + src.size();
    auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc()) fail("malformed number");
    pos = static_cast<std::size_t>(res.ptr - src.data());
    return make_const(v);
  }

  ExprPtr ident() {
    const std::size_t start = pos;
    while (pos < src.size() &&
           ((src[pos] >= 'a' && src[pos] <= 'z') ||
            (src[pos] >= 'A' && src[pos] <= 'Z') ||
            (src[pos] >= '0' && src[pos] <= '9')))
      ++pos;
    const std::string name = src.substr(start, pos - start);

    if (name == "pi") return make_const(std::numbers::pi);

    auto indexed = [&](const std::string& prefix, int limit,
                       const char* what) -> int {
      const std::string digits = name.substr(prefix.size());
      if (digits.empty() || digits.size() > 6 ||
          digits.find_first_not_of("0123456789") != std::string::npos)
        fail("malformed " + std::string(what) + " name '" + name + "'");
      const int idx = std::stoi(digits);
      if (idx < 1 || idx > limit)
        fail("'" + name + "' out of range (" + what + " count is " +
             std::to_string(limit) + ")");
      return idx - 1;
    };

    if (name.rfind("theta", 0) == 0 && name.size() > 5)
      return make_theta(indexed("theta", q, "parameter"));
    if (name.rfind("x", 0) == 0 && name.size() > 1 &&
        name.find_first_not_of("0123456789", 1) == std::string::npos)
      return make_var(indexed("x", d, "input"));

    static const std::pair<const char*, ExprFunc> kFuncs[] = {
        {"sin", ExprFunc::Sin}, {"cos", ExprFunc::Cos},
        {"exp", ExprFunc::Exp}, {"log", ExprFunc::Log},
        {"sqrt", ExprFunc::Sqrt}, {"abs", ExprFunc::Abs}};
    for (const auto& [fname, f] : kFuncs) {
      if (name == fname) {
        if (!eat('(')) fail(std::string("expected '(' after ") + fname);
        auto arg = expr();
        if (peek() == ',') fail(std::string(fname) + " takes one argument");
        if (!eat(')')) fail("expected ')'");
        return make_call(f, arg);
      }
    }
    fail("unknown identifier '" + name + "'");
  }
};

}  // namespace

ExprPtr parse_expr(const std::string& src, int d, int q) {
  if (d < 0 || q < 0) throw ConfigError("parse_expr: d and q must be >= 0");
  Parser p{src, 0, d, q};
  return p.parse();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

// Larger = binds tighter.
int precedence(const ExprPtr& e) {
  switch (e->kind) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

void print_rec(const ExprPtr& e, std::string& out, int parent_prec,
               bool right_operand) {
  const int prec = precedence(e);
  // A '-' or negative constant on the right of a binary operator, and any
  // looser-binding subexpression, must be parenthesized.
  bool parens = prec < parent_prec;
  if (!parens && right_operand && prec == parent_prec &&
      (parent_prec == 1 || parent_prec == 2))
    parens = true;  // a - (b - c), a / (b / c): non-associative rights
  if (!parens && e->kind == ExprKind::Const && e->value < 0 &&
      parent_prec >= 2)
    parens = true;  // 3*(-2), (-2)^k keep token boundaries unambiguous

  if (parens) out += '(';
  switch (e->kind) {
    case ExprKind::Const: out += format_double(e->value); break;
    case ExprKind::Var: out += "x" + std::to_string(e->index + 1); break;
    case ExprKind::Theta: out += "theta" + std::to_string(e->index + 1); break;
    case ExprKind::Neg:
      out += '-';
      print_rec(e->a, out, 3, false);
      break;
    case ExprKind::Add:
    case ExprKind::Sub:
    case ExprKind::Mul:
    case ExprKind::Div:
    case ExprKind::Pow: {
      const char* op = e->kind == ExprKind::Add   ? " + "
                       : e->kind == ExprKind::Sub ? " - "
                       : e->kind == ExprKind::Mul ? "*"
                       : e->kind == ExprKind::Div ? "/"
                                                  : "^";
      print_rec(e->a, out, prec, false);
      out += op;
      print_rec(e->b, out, prec, true);
      break;
    }
    case ExprKind::Call: {
      static const char* kNames[] = {"sin", "cos", "exp", "log", "sqrt", "abs"};
      out += kNames[static_cast<int>(e->func)];
      out += '(';
      print_rec(e->a, out, 0, false);
      out += ')';
      break;
    }
  }
  if (parens) out += ')';
}

}  // namespace

std::string print_expr(const ExprPtr& e) {
  std::string out;
  print_rec(e, out, 0, false);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void eval_fail(const ExprPtr& e, const std::string& msg) {
  throw EvalError(msg + " in subexpression '" + print_expr(e) + "'");
}

}  // namespace

double eval_expr(const ExprPtr& e, std::span<const double> x,
                 std::span<const double> theta) {
  switch (e->kind) {
    case ExprKind::Const: return e->value;
    case ExprKind::Var:
      if (e->index >= static_cast<int>(x.size()))
        eval_fail(e, "input vector too short");
      return x[static_cast<std::size_t>(e->index)];
    case ExprKind::Theta:
      if (e->index >= static_cast<int>(theta.size()))
        eval_fail(e, "parameter vector too short");
      return theta[static_cast<std::size_t>(e->index)];
    case ExprKind::Add: return eval_expr(e->a, x, theta) + eval_expr(e->b, x, theta);
    case ExprKind::Sub: return eval_expr(e->a, x, theta) - eval_expr(e->b, x, theta);
    case ExprKind::Mul: return eval_expr(e->a, x, theta) * eval_expr(e->b, x, theta);
    case ExprKind::Div: {
      const double den = eval_expr(e->b, x, theta);
      if (den == 0.0) eval_fail(e, "division by zero");
      return eval_expr(e->a, x, theta) / den;
    }
    case ExprKind::Pow: {
      const double base = eval_expr(e->a, x, theta);
      const double ex = eval_expr(e->b, x, theta);
      if (base == 0.0 && ex < 0.0) eval_fail(e, "zero raised to a negative power");
      if (base < 0.0 && ex != std::floor(ex))
        eval_fail(e, "negative base with fractional exponent");
      return std::pow(base, ex);
    }
    case ExprKind::Neg: return -eval_expr(e->a, x, theta);
    case ExprKind::Call: {
      const double v = eval_expr(e->a, x, theta);
      switch (e->func) {
        case ExprFunc::Sin: return std::sin(v);
        case ExprFunc::Cos: return std::cos(v);
        case ExprFunc::Exp: return std::exp(v);
        case ExprFunc::Log:
          if (v <= 0.0) eval_fail(e, "log of a non-positive value");
          return std::log(v);
        case ExprFunc::Sqrt:
          if (v < 0.0) eval_fail(e, "sqrt of a negative value");
          return std::sqrt(v);
        case ExprFunc::Abs: return std::abs(v);
      }
      eval_fail(e, "unknown function");
    }
  }
  eval_fail(e, "unknown node kind");
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

using DiffLeaf = ExprPtr (*)(const ExprPtr&, int);

ExprPtr diff_rec(const ExprPtr& e, int j, bool wrt_theta) {
  auto d = [&](const ExprPtr& u) { return diff_rec(u, j, wrt_theta); };
  switch (e->kind) {
    case ExprKind::Const: return make_const(0);
    case ExprKind::Var:
      return make_const(!wrt_theta && e->index == j ? 1 : 0);
    case ExprKind::Theta:
      return make_const(wrt_theta && e->index == j ? 1 : 0);
    case ExprKind::Add: return make_binary(ExprKind::Add, d(e->a), d(e->b));
    case ExprKind::Sub: return make_binary(ExprKind::Sub, d(e->a), d(e->b));
    case ExprKind::Mul:
      return make_binary(
          ExprKind::Add, make_binary(ExprKind::Mul, d(e->a), e->b),
          make_binary(ExprKind::Mul, e->a, d(e->b)));
    case ExprKind::Div:
      // (u/v)' = u'/v - u v'/v^2
      return make_binary(
          ExprKind::Sub, make_binary(ExprKind::Div, d(e->a), e->b),
          make_binary(ExprKind::Div,
                      make_binary(ExprKind::Mul, e->a, d(e->b)),
                      make_binary(ExprKind::Pow, e->b, make_const(2))));
    case ExprKind::Pow: {
      if (e->b->kind == ExprKind::Const) {
        // d u^c = c u^{c-1} u'   (valid for negative u with integer c)
        const double c = e->b->value;
        return make_binary(
            ExprKind::Mul, make_const(c),
            make_binary(ExprKind::Mul,
                        make_binary(ExprKind::Pow, e->a, make_const(c - 1)),
                        d(e->a)));
      }
      // General u^v = exp(v log u): u^v (v' log u + v u' / u), u > 0 domain.
      return make_binary(
          ExprKind::Mul, e,
          make_binary(
              ExprKind::Add,
              make_binary(ExprKind::Mul, d(e->b),
                          make_call(ExprFunc::Log, e->a)),
              make_binary(ExprKind::Div,
                          make_binary(ExprKind::Mul, e->b, d(e->a)), e->a)));
    }
    case ExprKind::Neg: return make_neg(d(e->a));
    case ExprKind::Call: {
      const ExprPtr du = d(e->a);
      ExprPtr outer;
      switch (e->func) {
        case ExprFunc::Sin: outer = make_call(ExprFunc::Cos, e->a); break;
        case ExprFunc::Cos:
          outer = make_neg(make_call(ExprFunc::Sin, e->a));
          break;
        case ExprFunc::Exp: outer = e; break;
        case ExprFunc::Log:
          return make_binary(ExprKind::Div, du, e->a);
        case ExprFunc::Sqrt:
          // u' / (2 sqrt(u))
          return make_binary(
              ExprKind::Div, du,
              make_binary(ExprKind::Mul, make_const(2), e));
        case ExprFunc::Abs:
          // sign(u) u', written |u|/u * u' which shares the domain kink at 0
          outer = make_binary(ExprKind::Div, e, e->a);
          break;
      }
      return make_binary(ExprKind::Mul, outer, du);
    }
  }
  throw ConfigError("diff: unknown node kind");
}

}  // namespace

ExprPtr diff_theta(const ExprPtr& e, int j) { return diff_rec(e, j, true); }
ExprPtr diff_var(const ExprPtr& e, int j) { return diff_rec(e, j, false); }

bool expr_equal(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case ExprKind::Const: return a->value == b->value;
    case ExprKind::Var:
    case ExprKind::Theta: return a->index == b->index;
    case ExprKind::Neg: return expr_equal(a->a, b->a);
    case ExprKind::Call:
      return a->func == b->func && expr_equal(a->a, b->a);
    default:
      return expr_equal(a->a, b->a) && expr_equal(a->b, b->b);
  }
}

}  // namespace hetcal
