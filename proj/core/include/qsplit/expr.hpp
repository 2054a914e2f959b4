#pragma once

// A small arithmetic language for coefficient fields and initial conditions.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := unary ('^' factor)?          -- right associative
//   unary  := '-'? atom
//   atom   := number | ident | func '(' expr ')' | '(' expr ')'
//
// Identifiers: x1..x3 (bounded by the declared dimension), t, pi.
// Functions: sin cos exp tanh abs sqrt, one argument each.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace qsplit {

inline constexpr int kMaxExprDepth = 64;
inline constexpr std::size_t kMaxExprBytes = 64 * 1024;

enum class Variable { x1, x2, x3, t, pi };
enum class Function { sin, cos, exp, tanh, abs, sqrt };
enum class BinaryOp { add, sub, mul, div, pow };

struct ExprNode {
  enum class Kind { number, variable, negate, binary, call };

  Kind kind = Kind::number;
  double number = 0.0;
  Variable variable = Variable::x1;
  BinaryOp op = BinaryOp::add;
  Function function = Function::sin;
  std::shared_ptr<const ExprNode> lhs;  // operand for negate / call
  std::shared_ptr<const ExprNode> rhs;
  int depth = 1;
};

using ExprNodePtr = std::shared_ptr<const ExprNode>;

/// Immutable parsed expression. Cheap to copy; safe to evaluate concurrently.
class Expr {
 public:
  Expr() = default;
  Expr(ExprNodePtr root, int dimension);

  /// Evaluates at x (dimension() coordinates) and time t.
  /// Throws EvalError on division by zero, sqrt of a negative, or a
  /// non-finite result.
  double evaluate(std::span<const double> x, double t) const;

  /// Fully parenthesized text that reparses to an identical tree.
  std::string to_string() const;

  bool uses(Variable v) const;
  /// True when coordinate `axis` (0-based) occurs in the text.
  bool uses_axis(int axis) const { return uses(static_cast<Variable>(axis)); }
  bool depends_on_time() const { return uses(Variable::t); }

  int dimension() const { return dimension_; }
  int depth() const;
  const ExprNodePtr& root() const { return root_; }
  bool empty() const { return root_ == nullptr; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  ExprNodePtr root_;
  int dimension_ = 0;
};

/// Parses `text` for a problem of dimension d (1..3).
/// Throws ParseError carrying a 0-based byte offset.
Expr parse_expression(std::string_view text, int dimension);

bool structurally_equal(const ExprNode& a, const ExprNode& b);

}  // namespace qsplit
