#pragma once

#include <memory>
#include <span>
#include <string>

namespace hetcal {

// Expression AST over inputs x1..xd and parameters theta1..thetaq.
//
// Grammar (loosest to tightest binding):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?          -- right associative
//   atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//   func   := sin | cos | exp | log | sqrt | abs
//
// '^' binds tighter than unary minus, so -x1^2 parses as -(x1^2).

enum class ExprKind { Const, Var, Theta, Add, Sub, Mul, Div, Pow, Neg, Call };
enum class ExprFunc { Sin, Cos, Exp, Log, Sqrt, Abs };

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  ExprKind kind;
  double value = 0.0;           // Const
  int index = 0;                // Var / Theta, zero-based
  ExprFunc func = ExprFunc::Sin;  // Call
  ExprPtr a, b;
};

// Constructors apply light canonicalization (constant folding; neutral
// elements) so that symbolic derivatives stay compact.
ExprPtr make_const(double v);
ExprPtr make_var(int index);
ExprPtr make_theta(int index);
ExprPtr make_binary(ExprKind op, ExprPtr a, ExprPtr b);
ExprPtr make_neg(ExprPtr a);
ExprPtr make_call(ExprFunc f, ExprPtr a);

// Parses `src` validating variable indices against d and q.
// Throws ConfigError with position information on malformed input.
ExprPtr parse_expr(const std::string& src, int d, int q);

// Precedence-aware printer; parse(print(e)) reproduces e structurally.
std::string print_expr(const ExprPtr& e);

// Evaluation; domain violations (log of a non-positive, sqrt of a negative,
// division by zero, fractional powers of negatives) throw EvalError naming
// the offending subexpression.
double eval_expr(const ExprPtr& e, std::span<const double> x,
                 std::span<const double> theta);

// Symbolic partial derivatives.
ExprPtr diff_theta(const ExprPtr& e, int j);
ExprPtr diff_var(const ExprPtr& e, int j);

bool expr_equal(const ExprPtr& a, const ExprPtr& b);

}  // namespace hetcal
