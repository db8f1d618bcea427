#include "symfield.hpp"

#include <cctype>
#include <cmath>
#include <sstream>

namespace holomap::sym {

namespace {

Expr make(NodeKind k, Expr a = nullptr, Expr b = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

bool is_const(const Expr& e) { return e->kind == NodeKind::Constant; }

} // namespace

Expr constant(double v) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Constant;
  n->value = v;
  return n;
}

Expr symbol(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Symbol;
  n->symbol = index;
  n->name = std::move(name);
  return n;
}

bool is_zero(const Expr& e) { return is_const(e) && e->value == 0.0; }
bool is_constant(const Expr& e, double v) { return is_const(e) && e->value == v; }

Expr add(Expr a, Expr b) {
  if (is_zero(a)) return b;
  if (is_zero(b)) return a;
  if (is_const(a) && is_const(b)) return constant(a->value + b->value);
  return make(NodeKind::Add, std::move(a), std::move(b));
}

Expr sub(Expr a, Expr b) {
  if (is_zero(b)) return a;
  if (is_const(a) && is_const(b)) return constant(a->value - b->value);
  if (is_zero(a)) return neg(std::move(b));
  return make(NodeKind::Sub, std::move(a), std::move(b));
}

Expr mul(Expr a, Expr b) {
  if (is_zero(a) || is_zero(b)) return constant(0.0);
  if (is_constant(a, 1.0)) return b;
  if (is_constant(b, 1.0)) return a;
  if (is_const(a) && is_const(b)) return constant(a->value * b->value);
  return make(NodeKind::Mul, std::move(a), std::move(b));
}

Expr div(Expr a, Expr b) {
  if (is_constant(b, 1.0)) return a;
  if (is_zero(a) && !is_zero(b)) return constant(0.0);
  if (is_const(a) && is_const(b) && b->value != 0.0)
    return constant(a->value / b->value);
  return make(NodeKind::Div, std::move(a), std::move(b));
}

Expr pow(Expr a, int exponent) {
  if (exponent == 0) return constant(1.0);
  if (exponent == 1) return a;
  if (is_const(a)) return constant(std::pow(a->value, exponent));
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::Pow;
  n->exponent = exponent;
  n->a = std::move(a);
  return n;
}

Expr neg(Expr a) {
  if (is_const(a)) return constant(-a->value);
  if (a->kind == NodeKind::Neg) return a->a;
  return make(NodeKind::Neg, std::move(a));
}

Expr sin(Expr a) {
  if (is_const(a)) return constant(std::sin(a->value));
  return make(NodeKind::Sin, std::move(a));
}

Expr cos(Expr a) {
  if (is_const(a)) return constant(std::cos(a->value));
  return make(NodeKind::Cos, std::move(a));
}

Expr exp(Expr a) {
  if (is_const(a)) return constant(std::exp(a->value));
  return make(NodeKind::Exp, std::move(a));
}

double eval(const Expr& e, std::span<const double> point) {
  switch (e->kind) {
  case NodeKind::Constant: return e->value;
  case NodeKind::Symbol:
    if (e->symbol < 0 || e->symbol >= static_cast<int>(point.size()))
      throw Error("evaluation point has wrong dimension for symbol " + e->name);
    return point[static_cast<size_t>(e->symbol)];
  case NodeKind::Add: return eval(e->a, point) + eval(e->b, point);
  case NodeKind::Sub: return eval(e->a, point) - eval(e->b, point);
  case NodeKind::Mul: return eval(e->a, point) * eval(e->b, point);
  case NodeKind::Div: {
    double num = eval(e->a, point);
    double den = eval(e->b, point);
    if (den == 0.0) throw Error("division by zero while evaluating expression");
    return num / den;
  }
  case NodeKind::Pow: return std::pow(eval(e->a, point), e->exponent);
  case NodeKind::Neg: return -eval(e->a, point);
  case NodeKind::Sin: return std::sin(eval(e->a, point));
  case NodeKind::Cos: return std::cos(eval(e->a, point));
  case NodeKind::Exp: return std::exp(eval(e->a, point));
  }
  throw Error("corrupt expression node");
}

Expr diff(const Expr& e, int coord) {
  switch (e->kind) {
  case NodeKind::Constant: return constant(0.0);
  case NodeKind::Symbol: return constant(e->symbol == coord ? 1.0 : 0.0);
  case NodeKind::Add: return add(diff(e->a, coord), diff(e->b, coord));
  case NodeKind::Sub: return sub(diff(e->a, coord), diff(e->b, coord));
  case NodeKind::Mul:
    return add(mul(diff(e->a, coord), e->b), mul(e->a, diff(e->b, coord)));
  case NodeKind::Div:
    // (a/b)' = a'/b - a b'/b^2
    return sub(div(diff(e->a, coord), e->b),
               div(mul(e->a, diff(e->b, coord)), pow(e->b, 2)));
  case NodeKind::Pow:
    return mul(mul(constant(e->exponent), pow(e->a, e->exponent - 1)),
               diff(e->a, coord));
  case NodeKind::Neg: return neg(diff(e->a, coord));
  case NodeKind::Sin: return mul(cos(e->a), diff(e->a, coord));
  case NodeKind::Cos: return neg(mul(sin(e->a), diff(e->a, coord)));
  case NodeKind::Exp: return mul(exp(e->a), diff(e->a, coord));
  }
  throw Error("corrupt expression node");
}

Expr substitute(const Expr& e, std::span<const Expr> replacement) {
  switch (e->kind) {
  case NodeKind::Constant: return e;
  case NodeKind::Symbol:
    if (e->symbol < 0 || e->symbol >= static_cast<int>(replacement.size()))
      throw Error("no substitution for symbol " + e->name);
    return replacement[static_cast<size_t>(e->symbol)];
  case NodeKind::Add: return add(substitute(e->a, replacement), substitute(e->b, replacement));
  case NodeKind::Sub: return sub(substitute(e->a, replacement), substitute(e->b, replacement));
  case NodeKind::Mul: return mul(substitute(e->a, replacement), substitute(e->b, replacement));
  case NodeKind::Div: return div(substitute(e->a, replacement), substitute(e->b, replacement));
  case NodeKind::Pow: return pow(substitute(e->a, replacement), e->exponent);
  case NodeKind::Neg: return neg(substitute(e->a, replacement));
  case NodeKind::Sin: return sin(substitute(e->a, replacement));
  case NodeKind::Cos: return cos(substitute(e->a, replacement));
  case NodeKind::Exp: return exp(substitute(e->a, replacement));
  }
  throw Error("corrupt expression node");
}

namespace {

int precedence(NodeKind k) {
  switch (k) {
  case NodeKind::Add:
  case NodeKind::Sub: return 1;
  case NodeKind::Mul:
  case NodeKind::Div: return 2;
  case NodeKind::Neg: return 3;
  case NodeKind::Pow: return 4;
  default: return 5;
  }
}

void print(std::ostream& os, const Expr& e, int parent_prec) {
  int prec = precedence(e->kind);
  bool paren = prec < parent_prec;
  if (paren) os << '(';
  switch (e->kind) {
  case NodeKind::Constant: {
    std::ostringstream tmp;
    tmp.precision(17);
    tmp << e->value;
    std::string s = tmp.str();
    if (e->value < 0) {
      os << '(' << s << ')';
    } else {
      os << s;
    }
    break;
  }
  case NodeKind::Symbol: os << e->name; break;
  case NodeKind::Add:
    print(os, e->a, prec);
    os << '+';
    print(os, e->b, prec);
    break;
  case NodeKind::Sub:
    print(os, e->a, prec);
    os << '-';
    print(os, e->b, prec + 1);
    break;
  case NodeKind::Mul:
    print(os, e->a, prec);
    os << '*';
    print(os, e->b, prec);
    break;
  case NodeKind::Div:
    print(os, e->a, prec);
    os << '/';
    print(os, e->b, prec + 1);
    break;
  case NodeKind::Pow:
    print(os, e->a, prec + 1);
    os << '^' << e->exponent;
    break;
  case NodeKind::Neg:
    os << '-';
    print(os, e->a, prec + 1);
    break;
  case NodeKind::Sin:
    os << "sin(";
    print(os, e->a, 0);
    os << ')';
    break;
  case NodeKind::Cos:
    os << "cos(";
    print(os, e->a, 0);
    os << ')';
    break;
  case NodeKind::Exp:
    os << "exp(";
    print(os, e->a, 0);
    os << ')';
    break;
  }
  if (paren) os << ')';
}

struct Parser {
  const std::string& text;
  std::span<const std::string> coords;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error("syntax error at position " + std::to_string(pos) + ": " + msg);
  }

  void skip_ws() {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  }

  bool eat(char c) {
    skip_ws();
    if (pos < text.size() && text[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos < text.size() ? text[pos] : '\0';
  }

  Expr parse_expr() {
    Expr e = parse_term();
    while (true) {
      if (eat('+')) {
        e = add(e, parse_term());
      } else if (eat('-')) {
        e = sub(e, parse_term());
      } else {
        return e;
      }
    }
  }

  Expr parse_term() {
    Expr e = parse_factor();
    while (true) {
      if (eat('*')) {
        e = mul(e, parse_factor());
      } else if (eat('/')) {
        e = div(e, parse_factor());
      } else {
        return e;
      }
    }
  }

  Expr parse_factor() {
    Expr base = parse_base();
    if (eat('^')) {
      skip_ws();
      bool negexp = eat('-');
      size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      if (pos == start) fail("expected integer exponent after '^'");
      int e = std::stoi(text.substr(start, pos - start));
      if (negexp) e = -e;
      if (e < 0) return div(constant(1.0), pow(base, -e));
      return pow(base, e);
    }
    return base;
  }

  Expr parse_base() {
    skip_ws();
    if (pos >= text.size()) fail("unexpected end of input");
    char c = text[pos];
    if (c == '-') {
      ++pos;
      return neg(parse_factor());
    }
    if (c == '+') {
      ++pos;
      return parse_factor();
    }
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    fail(std::string("unexpected character '") + c + "'");
  }

  Expr parse_number() {
    size_t start = pos;
    while (pos < text.size() &&
           (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '.'))
      ++pos;
    // exponent part like 1e-3
    if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
      size_t save = pos;
      ++pos;
      if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) ++pos;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      } else {
        pos = save;
      }
    }
    try {
      return constant(std::stod(text.substr(start, pos - start)));
    } catch (const std::exception&) {
      fail("malformed number");
    }
  }

  Expr parse_ident() {
    size_t start = pos;
    while (pos < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    std::string id = text.substr(start, pos - start);
    if (id == "sin" || id == "cos" || id == "exp") {
      if (!eat('(')) fail("expected '(' after function name");
      Expr arg = parse_expr();
      if (!eat(')')) fail("expected ')'");
      if (id == "sin") return sin(arg);
      if (id == "cos") return cos(arg);
      return exp(arg);
    }
    if (id == "pi") return constant(3.141592653589793238462643383279502884);
    for (size_t i = 0; i < coords.size(); ++i) {
      if (coords[i] == id) return symbol(static_cast<int>(i), id);
    }
    pos = start;
    fail("unknown symbol '" + id + "'");
  }
};

} // namespace

std::string to_string(const Expr& e) {
  std::ostringstream os;
  print(os, e, 0);
  return os.str();
}

Expr parse(const std::string& text, std::span<const std::string> coords) {
  Parser p{text, coords};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size()) p.fail("trailing input");
  return e;
}

VectorField::VectorField(int dim, std::vector<Expr> c)
    : ambient_dim(dim), comps(std::move(c)) {
  if (static_cast<int>(comps.size()) != dim)
    throw Error("vector field component count does not match ambient dimension");
}

VectorField VectorField::zero(int dim) {
  std::vector<Expr> c(static_cast<size_t>(dim), constant(0.0));
  return VectorField(dim, std::move(c));
}

VectorField VectorField::unit(int dim, int i) {
  auto f = zero(dim);
  f.comps[static_cast<size_t>(i)] = constant(1.0);
  return f;
}

VectorField lie_bracket(const VectorField& x, const VectorField& y) {
  if (x.ambient_dim != y.ambient_dim)
    throw Error("lie_bracket: ambient dimension mismatch");
  int n = x.ambient_dim;
  VectorField out = VectorField::zero(n);
  for (int k = 0; k < n; ++k) {
    Expr acc = constant(0.0);
    for (int i = 0; i < n; ++i) {
      acc = add(acc, mul(x.comps[static_cast<size_t>(i)], diff(y.comps[static_cast<size_t>(k)], i)));
      acc = sub(acc, mul(y.comps[static_cast<size_t>(i)], diff(x.comps[static_cast<size_t>(k)], i)));
    }
    out.comps[static_cast<size_t>(k)] = acc;
  }
  return out;
}

VectorField scale(const Expr& c, const VectorField& x) {
  VectorField out = VectorField::zero(x.ambient_dim);
  for (int i = 0; i < x.ambient_dim; ++i)
    out.comps[static_cast<size_t>(i)] = mul(c, x.comps[static_cast<size_t>(i)]);
  return out;
}

VectorField add(const VectorField& x, const VectorField& y) {
  if (x.ambient_dim != y.ambient_dim) throw Error("field add: dimension mismatch");
  VectorField out = VectorField::zero(x.ambient_dim);
  for (int i = 0; i < x.ambient_dim; ++i)
    out.comps[static_cast<size_t>(i)] =
        add(x.comps[static_cast<size_t>(i)], y.comps[static_cast<size_t>(i)]);
  return out;
}

VectorField sub(const VectorField& x, const VectorField& y) {
  if (x.ambient_dim != y.ambient_dim) throw Error("field sub: dimension mismatch");
  VectorField out = VectorField::zero(x.ambient_dim);
  for (int i = 0; i < x.ambient_dim; ++i)
    out.comps[static_cast<size_t>(i)] =
        sub(x.comps[static_cast<size_t>(i)], y.comps[static_cast<size_t>(i)]);
  return out;
}

std::vector<double> eval_field(const VectorField& x, std::span<const double> p) {
  if (static_cast<int>(p.size()) != x.ambient_dim)
    throw Error("eval_field: point dimension mismatch");
  std::vector<double> out(static_cast<size_t>(x.ambient_dim));
  for (int i = 0; i < x.ambient_dim; ++i)
    out[static_cast<size_t>(i)] = eval(x.comps[static_cast<size_t>(i)], p);
  return out;
}

Expr apply_field(const VectorField& x, const Expr& e) {
  Expr acc = constant(0.0);
  for (int i = 0; i < x.ambient_dim; ++i)
    acc = add(acc, mul(x.comps[static_cast<size_t>(i)], diff(e, i)));
  return acc;
}

} // namespace holomap::sym
