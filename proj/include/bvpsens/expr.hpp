#pragma once

#include <Eigen/Core>
#include <memory>
#include <string>
#include <string_view>

#include "bvpsens/errors.hpp"

namespace bvpsens {

enum class NodeKind { Literal, Variable, Negate, Binary, Call };

enum class FuncId { Sin, Cos, Tan, Exp, Log, Sqrt };

/// One node of the expression tree. Nodes are immutable and shared;
/// copying an Expr is cheap.
struct ExprNode {
  NodeKind kind;
  double literal = 0.0;   // Literal
  int variable = -1;      // Variable: -1 means x, j >= 0 means y<j>
  char op = 0;            // Binary: one of + - * / ^
  FuncId func = FuncId::Sin;
  std::shared_ptr<const ExprNode> lhs;  // Binary lhs; Negate/Call operand
  std::shared_ptr<const ExprNode> rhs;  // Binary rhs
};

/// Arithmetic expression over x, y0..y{n-1}, the operators + - * / ^,
/// unary minus, and the functions sin, cos, tan, exp, log, sqrt.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  bool empty() const { return root_ == nullptr; }
  const ExprNode& root() const { return *root_; }

  /// Largest j such that y<j> appears, or -1 if no y variable appears.
  int max_y_index() const;

  /// Structural equality.
  friend bool operator==(const Expr& a, const Expr& b);
  friend bool operator!=(const Expr& a, const Expr& b) { return !(a == b); }

 private:
  std::shared_ptr<const ExprNode> root_;
};

/// Point at which an expression is evaluated: the abscissa x and the
/// values of y, y', ..., y^(n-1).
struct EvalEnv {
  double x = 0.0;
  Eigen::VectorXd y;
};

/// Parse expression text. Throws ParseError with the byte offset of the
/// failure; unknown function names are parse errors too.
Expr parse_expr(std::string_view src);

/// Unambiguous text form; parsing it back yields a structurally identical
/// tree.
std::string to_string(const Expr& e);

double eval_real(const Expr& e, const EvalEnv& env);

/// Low-level overload used in integrator inner loops.
double eval_real(const Expr& e, double x, const double* y, int count);

struct ValueAndPartial {
  double value;
  double partial;
};

/// Evaluate e and its exact partial derivative with respect to `wrt`
/// ("x" or "y<j>") by dual-number forward mode. The value component is
/// bit-identical to eval_real.
ValueAndPartial eval_with_partial(const Expr& e, const EvalEnv& env,
                                  std::string_view wrt);

/// Value of e together with all partials df/dy_i, i = 0..count-1, computed
/// one dual sweep per variable. dfdy must hold `count` doubles.
void eval_gradient(const Expr& e, double x, const double* y, int count,
                   double& value, double* dfdy);

void eval_gradient(const Expr& e, const EvalEnv& env, double& value,
                   Eigen::VectorXd& dfdy);

}  // namespace bvpsens
