#pragma once

#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace holomap {

/// Base error type for all pipeline failures.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

namespace sym {

enum class NodeKind {
  Constant,
  Symbol,
  Add,
  Sub,
  Mul,
  Div,
  Pow, // integer exponent
  Neg,
  Sin,
  Cos,
  Exp
};

struct Node;
using Expr = std::shared_ptr<const Node>;

/// Immutable expression tree node. Expressions are closed under partial
/// differentiation and safe to share between threads.
struct Node {
  NodeKind kind;
  double value = 0.0;   // Constant
  int symbol = -1;      // Symbol: index into the coordinate list
  std::string name;     // Symbol: display name
  int exponent = 0;     // Pow
  Expr a, b;
};

// Constructors perform structural simplification only: constant folding,
// 0*e -> 0, e+0 -> e, e^1 -> e and the like. No canonical forms.
Expr constant(double v);
Expr symbol(int index, std::string name);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr div(Expr a, Expr b);
Expr pow(Expr a, int exponent);
Expr neg(Expr a);
Expr sin(Expr a);
Expr cos(Expr a);
Expr exp(Expr a);

bool is_zero(const Expr& e);
bool is_constant(const Expr& e, double v);

/// Evaluates at a point given by coordinate index. Throws Error on division
/// by zero.
double eval(const Expr& e, std::span<const double> point);

/// Exact partial derivative with respect to symbol index `coord`.
Expr diff(const Expr& e, int coord);

/// Replaces every symbol i by replacement[i]. Replacements may be expressed
/// over a different coordinate list.
Expr substitute(const Expr& e, std::span<const Expr> replacement);

std::string to_string(const Expr& e);

/// Parses `text` against the coordinate list `coords`.
/// Grammar: expr := term (('+'|'-') term)*; term := factor (('*'|'/') factor)*;
/// factor := base ('^' integer)?; base := number | symbol | '(' expr ')' |
/// func '(' expr ')'; func := 'sin'|'cos'|'exp'. Unary minus allowed.
Expr parse(const std::string& text, std::span<const std::string> coords);

/// Vector field in coordinate components: X = sum_i comps[i] * d/dx_i.
struct VectorField {
  int ambient_dim = 0;
  std::vector<Expr> comps;

  VectorField() = default;
  VectorField(int dim, std::vector<Expr> c);

  static VectorField zero(int dim);
  /// Constant coordinate direction d/dx_i.
  static VectorField unit(int dim, int i);
};

/// [X,Y]^k = sum_i (X^i d_i Y^k - Y^i d_i X^k), exact.
VectorField lie_bracket(const VectorField& x, const VectorField& y);

VectorField scale(const Expr& c, const VectorField& x);
VectorField add(const VectorField& x, const VectorField& y);
VectorField sub(const VectorField& x, const VectorField& y);

std::vector<double> eval_field(const VectorField& x, std::span<const double> p);

/// Derivative of scalar e along the field X: X(e) = sum_i X^i d_i e.
Expr apply_field(const VectorField& x, const Expr& e);

} // namespace sym
} // namespace holomap
