#include "bvpsens/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <sstream>
#include <vector>

namespace bvpsens {

namespace {

using NodePtr = std::shared_ptr<const ExprNode>;

NodePtr make_literal(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Literal;
  n->literal = v;
  return n;
}

NodePtr make_variable(int var) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Variable;
  n->variable = var;
  return n;
}

NodePtr make_negate(NodePtr operand) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Negate;
  n->lhs = std::move(operand);
  return n;
}

NodePtr make_binary(char op, NodePtr lhs, NodePtr rhs) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Binary;
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

NodePtr make_call(FuncId f, NodePtr arg) {
  auto n = std::make_shared<ExprNode>();
  n->kind = NodeKind::Call;
  n->func = f;
  n->lhs = std::move(arg);
  return n;
}

// ---------------------------------------------------------------------------
// Tokenizer

enum class TokKind { Number, Ident, Op, LParen, RParen, End };

struct Token {
  TokKind kind;
  std::size_t offset;
  double number = 0.0;
  std::string text;
  char op = 0;
};

std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> toks;
  std::size_t i = 0;
  while (i < src.size()) {
    char ch = src[i];
    if (std::isspace(static_cast<unsigned char>(ch))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(ch)) || ch == '.') {
      const char* begin = src.data() + i;
      char* end = nullptr;
      double v = std::strtod(begin, &end);
      if (end == begin) throw ParseError("malformed number", i);
      toks.push_back({TokKind::Number, i, v, {}, 0});
      i += static_cast<std::size_t>(end - begin);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
      std::size_t j = i;
      while (j < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_'))
        ++j;
      toks.push_back({TokKind::Ident, i, 0.0, std::string(src.substr(i, j - i)), 0});
      i = j;
      continue;
    }
    switch (ch) {
      case '+':
      case '-':
      case '*':
      case '/':
      case '^':
        toks.push_back({TokKind::Op, i, 0.0, {}, ch});
        break;
      case '(':
        toks.push_back({TokKind::LParen, i, 0.0, {}, 0});
        break;
      case ')':
        toks.push_back({TokKind::RParen, i, 0.0, {}, 0});
        break;
      default:
        throw ParseError(std::string("unexpected character '") + ch + "'", i);
    }
    ++i;
  }
  toks.push_back({TokKind::End, src.size(), 0.0, {}, 0});
  return toks;
}

// ---------------------------------------------------------------------------
// Recursive-descent parser.
//
//   expr   := term (('+'|'-') term)*
//   term   := factor (('*'|'/') factor)*
//   factor := '-' factor | power
//   power  := atom ('^' factor)?          (right-associative)
//   atom   := number | ident '(' expr ')' | ident | '(' expr ')'

class Parser {
 public:
  explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

  NodePtr parse() {
    NodePtr e = parse_expr();
    if (peek().kind != TokKind::End)
      throw ParseError("unexpected trailing input", peek().offset);
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  const Token& advance() { return toks_[pos_++]; }

  bool match_op(char op) {
    if (peek().kind == TokKind::Op && peek().op == op) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    while (true) {
      if (match_op('+'))
        lhs = make_binary('+', lhs, parse_term());
      else if (match_op('-'))
        lhs = make_binary('-', lhs, parse_term());
      else
        return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_factor();
    while (true) {
      if (match_op('*'))
        lhs = make_binary('*', lhs, parse_factor());
      else if (match_op('/'))
        lhs = make_binary('/', lhs, parse_factor());
      else
        return lhs;
    }
  }

  NodePtr parse_factor() {
    if (match_op('-')) return make_negate(parse_factor());
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (match_op('^')) return make_binary('^', base, parse_factor());
    return base;
  }

  NodePtr parse_atom() {
    const Token& t = peek();
    switch (t.kind) {
      case TokKind::Number:
        advance();
        return make_literal(t.number);
      case TokKind::LParen: {
        advance();
        NodePtr e = parse_expr();
        if (peek().kind != TokKind::RParen)
          throw ParseError("expected ')'", peek().offset);
        advance();
        return e;
      }
      case TokKind::Ident: {
        advance();
        if (peek().kind == TokKind::LParen) {
          FuncId f;
          if (t.text == "sin")
            f = FuncId::Sin;
          else if (t.text == "cos")
            f = FuncId::Cos;
          else if (t.text == "tan")
            f = FuncId::Tan;
          else if (t.text == "exp")
            f = FuncId::Exp;
          else if (t.text == "log")
            f = FuncId::Log;
          else if (t.text == "sqrt")
            f = FuncId::Sqrt;
          else
            throw ParseError("unknown function '" + t.text + "'", t.offset);
          advance();  // '('
          NodePtr arg = parse_expr();
          if (peek().kind != TokKind::RParen)
            throw ParseError("expected ')'", peek().offset);
          advance();
          return make_call(f, arg);
        }
        return make_variable(variable_id(t));
      }
      default:
        throw ParseError("expected expression", t.offset);
    }
  }

  static int variable_id(const Token& t) {
    if (t.text == "x") return -1;
    if (t.text.size() >= 2 && t.text[0] == 'y') {
      bool digits = true;
      for (std::size_t i = 1; i < t.text.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(t.text[i]));
      if (digits) return std::atoi(t.text.c_str() + 1);
    }
    throw ParseError("unknown variable '" + t.text +
                         "' (expected x or y<j>)",
                     t.offset);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Dual numbers. Value components use exactly the same double operations as
// plain evaluation, so the value half of a dual sweep is bit-identical to
// eval_real.

struct Dual {
  double v;
  double d;
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}
inline Dual operator/(Dual a, Dual b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline double value_of(double a) { return a; }
inline double value_of(Dual a) { return a.v; }

template <class T>
T from_double(double v);
template <>
double from_double<double>(double v) {
  return v;
}
template <>
Dual from_double<Dual>(double v) {
  return {v, 0.0};
}

inline double apply_func(FuncId f, double a) {
  switch (f) {
    case FuncId::Sin: return std::sin(a);
    case FuncId::Cos: return std::cos(a);
    case FuncId::Tan: return std::tan(a);
    case FuncId::Exp: return std::exp(a);
    case FuncId::Log: return std::log(a);
    case FuncId::Sqrt: return std::sqrt(a);
  }
  return 0.0;
}

inline Dual apply_func(FuncId f, Dual a) {
  double v = apply_func(f, a.v);
  double slope = 0.0;
  switch (f) {
    case FuncId::Sin: slope = std::cos(a.v); break;
    case FuncId::Cos: slope = -std::sin(a.v); break;
    case FuncId::Tan: {
      double c = std::cos(a.v);
      slope = 1.0 / (c * c);
      break;
    }
    case FuncId::Exp: slope = v; break;
    case FuncId::Log: slope = 1.0 / a.v; break;
    case FuncId::Sqrt: slope = 0.5 / v; break;
  }
  return {v, slope * a.d};
}

void check_func_domain(FuncId f, double a) {
  if (f == FuncId::Log && a <= 0.0)
    throw DomainError("log of nonpositive value");
  if (f == FuncId::Sqrt && a < 0.0)
    throw DomainError("sqrt of negative value");
}

// Exponent subtree that is a plain or negated integer literal.
bool integer_literal_exponent(const ExprNode& e, long long& out) {
  const ExprNode* n = &e;
  bool neg = false;
  if (n->kind == NodeKind::Negate) {
    neg = true;
    n = n->lhs.get();
  }
  if (n->kind != NodeKind::Literal) return false;
  double v = n->literal;
  if (v != std::floor(v) || std::abs(v) > 1e9) return false;
  out = static_cast<long long>(neg ? -v : v);
  return true;
}

template <class T>
T pow_by_multiplication(T base, long long k) {
  T r = from_double<T>(1.0);
  for (long long i = 0; i < k; ++i) r = r * base;
  return r;
}

template <class T>
struct Env {
  T x;
  const T* y;
  int count;
};

double pow_general(double a, double b);
Dual pow_general(Dual a, Dual b);

template <class T>
T eval_node(const ExprNode& n, const Env<T>& env) {
  switch (n.kind) {
    case NodeKind::Literal:
      return from_double<T>(n.literal);
    case NodeKind::Variable:
      if (n.variable < 0) return env.x;
      if (n.variable >= env.count)
        throw UnboundVariableError("unbound variable y" +
                                   std::to_string(n.variable));
      return env.y[n.variable];
    case NodeKind::Negate:
      return -eval_node(*n.lhs, env);
    case NodeKind::Binary: {
      T a = eval_node(*n.lhs, env);
      if (n.op == '^') {
        long long k;
        if (integer_literal_exponent(*n.rhs, k)) {
          if (k >= 0) return pow_by_multiplication(a, k);
          T denom = pow_by_multiplication(a, -k);
          if (value_of(denom) == 0.0)
            throw DomainError("division by zero in negative power");
          return from_double<T>(1.0) / denom;
        }
        T b = eval_node(*n.rhs, env);
        if (value_of(a) <= 0.0)
          throw DomainError(
              "power with non-integer exponent requires positive base");
        return pow_general(a, b);
      }
      T b = eval_node(*n.rhs, env);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/':
          if (value_of(b) == 0.0) throw DomainError("division by zero");
          return a / b;
      }
      throw EvalError("corrupt expression node");
    }
    case NodeKind::Call: {
      T a = eval_node(*n.lhs, env);
      check_func_domain(n.func, value_of(a));
      return apply_func(n.func, a);
    }
  }
  throw EvalError("corrupt expression node");
}

double pow_general(double a, double b) { return std::pow(a, b); }

Dual pow_general(Dual a, Dual b) {
  double v = std::pow(a.v, b.v);
  // d(a^b) = a^b * (b' ln a + b a'/a); base is positive here.
  double d = v * (b.d * std::log(a.v) + b.v * a.d / a.v);
  return {v, d};
}

int parse_variable_name(std::string_view name) {
  if (name == "x") return -1;
  if (name.size() >= 2 && name[0] == 'y') {
    bool digits = true;
    for (std::size_t i = 1; i < name.size(); ++i)
      digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
    if (digits) return std::atoi(std::string(name.substr(1)).c_str());
  }
  throw EvalError("bad variable name '" + std::string(name) + "'");
}

int max_y_index_node(const ExprNode& n) {
  switch (n.kind) {
    case NodeKind::Literal: return -1;
    case NodeKind::Variable: return n.variable >= 0 ? n.variable : -1;
    case NodeKind::Negate:
    case NodeKind::Call: return max_y_index_node(*n.lhs);
    case NodeKind::Binary:
      return std::max(max_y_index_node(*n.lhs), max_y_index_node(*n.rhs));
  }
  return -1;
}

bool nodes_equal(const ExprNode& a, const ExprNode& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case NodeKind::Literal: return a.literal == b.literal;
    case NodeKind::Variable: return a.variable == b.variable;
    case NodeKind::Negate: return nodes_equal(*a.lhs, *b.lhs);
    case NodeKind::Call:
      return a.func == b.func && nodes_equal(*a.lhs, *b.lhs);
    case NodeKind::Binary:
      return a.op == b.op && nodes_equal(*a.lhs, *b.lhs) &&
             nodes_equal(*a.rhs, *b.rhs);
  }
  return false;
}

const char* func_name(FuncId f) {
  switch (f) {
    case FuncId::Sin: return "sin";
    case FuncId::Cos: return "cos";
    case FuncId::Tan: return "tan";
    case FuncId::Exp: return "exp";
    case FuncId::Log: return "log";
    case FuncId::Sqrt: return "sqrt";
  }
  return "?";
}

void print_node(const ExprNode& n, std::string& out) {
  char buf[40];
  switch (n.kind) {
    case NodeKind::Literal:
      std::snprintf(buf, sizeof(buf), "%.17g", n.literal);
      out += buf;
      return;
    case NodeKind::Variable:
      if (n.variable < 0)
        out += 'x';
      else {
        out += 'y';
        out += std::to_string(n.variable);
      }
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(*n.lhs, out);
      out += ')';
      return;
    case NodeKind::Binary:
      out += '(';
      print_node(*n.lhs, out);
      out += ' ';
      out += n.op;
      out += ' ';
      print_node(*n.rhs, out);
      out += ')';
      return;
    case NodeKind::Call:
      out += func_name(n.func);
      out += '(';
      print_node(*n.lhs, out);
      out += ')';
      return;
  }
}

void require_nonempty(const Expr& e) {
  if (e.empty()) throw EvalError("empty expression");
}

}  // namespace

int Expr::max_y_index() const {
  return root_ ? max_y_index_node(*root_) : -1;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.empty() || b.empty()) return a.empty() == b.empty();
  return nodes_equal(a.root(), b.root());
}

Expr parse_expr(std::string_view src) {
  if (src.empty()) throw ParseError("empty expression", 0);
  return Expr(Parser(src).parse());
}

std::string to_string(const Expr& e) {
  require_nonempty(e);
  std::string out;
  print_node(e.root(), out);
  return out;
}

double eval_real(const Expr& e, double x, const double* y, int count) {
  require_nonempty(e);
  return eval_node<double>(e.root(), {x, y, count});
}

double eval_real(const Expr& e, const EvalEnv& env) {
  return eval_real(e, env.x, env.y.data(), static_cast<int>(env.y.size()));
}

ValueAndPartial eval_with_partial(const Expr& e, const EvalEnv& env,
                                  std::string_view wrt) {
  require_nonempty(e);
  int var = parse_variable_name(wrt);
  const int count = static_cast<int>(env.y.size());
  if (var >= count)
    throw UnboundVariableError("derivative variable " + std::string(wrt) +
                               " is not bound");
  std::vector<Dual> y(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) y[i] = {env.y[i], var == i ? 1.0 : 0.0};
  Dual x{env.x, var == -1 ? 1.0 : 0.0};
  Dual r = eval_node<Dual>(e.root(), {x, y.data(), count});
  return {r.v, r.d};
}

void eval_gradient(const Expr& e, double x, const double* y, int count,
                   double& value, double* dfdy) {
  require_nonempty(e);
  std::vector<Dual> yd(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) yd[i] = {y[i], 0.0};
  Dual xd{x, 0.0};
  value = 0.0;
  for (int sweep = 0; sweep < count; ++sweep) {
    yd[sweep].d = 1.0;
    Dual r = eval_node<Dual>(e.root(), {xd, yd.data(), count});
    yd[sweep].d = 0.0;
    dfdy[sweep] = r.d;
    value = r.v;
  }
  if (count == 0) value = eval_node<double>(e.root(), {x, y, 0});
}

void eval_gradient(const Expr& e, const EvalEnv& env, double& value,
                   Eigen::VectorXd& dfdy) {
  const int count = static_cast<int>(env.y.size());
  dfdy.resize(count);
  eval_gradient(e, env.x, env.y.data(), count, value, dfdy.data());
}

}  // namespace bvpsens
