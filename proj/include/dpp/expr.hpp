#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "dpp/errors.hpp"

namespace dpp {

/// Variable bindings for expression evaluation. An unbound variable that is
/// actually referenced raises EvalError, so initial-condition expressions
/// (functions of x, y only) fail loudly if they mention t.
struct EvalVars {
  std::optional<double> x;
  std::optional<double> y;
  std::optional<double> t;
};

/// A small arithmetic expression over the variables x, y, t and the constant
/// pi, with operators + - * / ^ and the functions sin, cos, exp, sqrt, abs.
///
/// Trees are immutable and cheap to copy; evaluation is pure and reentrant.
class Expression {
  enum class Kind { Number, Var, Pi, Neg, Add, Sub, Mul, Div, Pow, Call };
  enum class Func { Sin, Cos, Exp, Sqrt, Abs };

  struct Node {
    Kind kind;
    double value = 0.0;  // Number
    char var = 0;        // Var: 'x', 'y' or 't'
    Func func = Func::Sin;
    std::shared_ptr<const Node> a;
    std::shared_ptr<const Node> b;
  };
  using NodeRef = std::shared_ptr<const Node>;

 public:
  Expression() = default;

  /// Parses `source`. Grammar: ^ binds tighter than unary minus, which binds
  /// tighter than * and /, which bind tighter than + and -. All binary
  /// operators are left-associative except ^, which is right-associative.
  /// Throws ParseError with the byte offset and the expected token on failure.
  static Expression parse(std::string_view source) {
    Parser p{source, 0};
    Expression e{p.parse_sum()};
    p.skip_ws();
    if (p.pos != source.size()) {
      throw ParseError("unexpected trailing input", p.pos);
    }
    return e;
  }

  bool empty() const { return root_ == nullptr; }

  double eval(double x, double y, double t) const {
    return eval(EvalVars{x, y, t});
  }

  double eval(const EvalVars& vars) const {
    if (!root_) throw EvalError("evaluating an empty expression");
    double v = eval_node(*root_, vars);
    if (!std::isfinite(v)) throw EvalError("non-finite result");
    return v;
  }

  /// Exact symbolic partial derivative with respect to 'x', 'y' or 't'.
  /// abs and non-constant exponents are rejected (not needed for smooth
  /// manufactured solutions).
  Expression derivative(char var) const {
    if (!root_) throw EvalError("differentiating an empty expression");
    return Expression{diff_node(root_, var)};
  }

  /// Fully parenthesized rendering; parsing it back yields an identical tree.
  std::string to_string() const {
    std::string out;
    if (root_) print_node(*root_, out);
    return out;
  }

  bool same_tree(const Expression& other) const {
    return nodes_equal(root_.get(), other.root_.get());
  }

  // Tree constructors, used when composing manufactured-solution sources.
  static Expression number(double v) {
    return Expression{make(Kind::Number, v)};
  }
  static Expression variable(char name) {
    if (name != 'x' && name != 'y' && name != 't') {
      throw EvalError(std::string("unknown variable '") + name + "'");
    }
    auto n = std::make_shared<Node>();
    n->kind = Kind::Var;
    n->var = name;
    return Expression{n};
  }
  static Expression pi() { return Expression{make(Kind::Pi, 0.0)}; }

  friend Expression operator+(const Expression& a, const Expression& b) {
    return Expression{binary(Kind::Add, a.root_, b.root_)};
  }
  friend Expression operator-(const Expression& a, const Expression& b) {
    return Expression{binary(Kind::Sub, a.root_, b.root_)};
  }
  friend Expression operator*(const Expression& a, const Expression& b) {
    return Expression{binary(Kind::Mul, a.root_, b.root_)};
  }
  friend Expression operator/(const Expression& a, const Expression& b) {
    return Expression{binary(Kind::Div, a.root_, b.root_)};
  }
  friend Expression operator-(const Expression& a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Neg;
    n->a = a.root_;
    return Expression{n};
  }
  static Expression sin(const Expression& a) { return fn(Func::Sin, a); }
  static Expression cos(const Expression& a) { return fn(Func::Cos, a); }
  static Expression exp(const Expression& a) { return fn(Func::Exp, a); }

 private:
  NodeRef root_;

  explicit Expression(NodeRef r) : root_(std::move(r)) {}

  static NodeRef make(Kind k, double v) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->value = v;
    return n;
  }
  static NodeRef binary(Kind k, NodeRef a, NodeRef b) {
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->a = std::move(a);
    n->b = std::move(b);
    return n;
  }
  static Expression fn(Func f, const Expression& a) {
    auto n = std::make_shared<Node>();
    n->kind = Kind::Call;
    n->func = f;
    n->a = a.root_;
    return Expression{n};
  }

  static double eval_node(const Node& n, const EvalVars& vars) {
    switch (n.kind) {
      case Kind::Number:
        return n.value;
      case Kind::Pi:
        return M_PI;
      case Kind::Var: {
        const std::optional<double>& slot =
            n.var == 'x' ? vars.x : (n.var == 'y' ? vars.y : vars.t);
        if (!slot) {
          throw EvalError(std::string("unbound variable '") + n.var + "'");
        }
        return *slot;
      }
      case Kind::Neg:
        return -eval_node(*n.a, vars);
      case Kind::Add:
        return eval_node(*n.a, vars) + eval_node(*n.b, vars);
      case Kind::Sub:
        return eval_node(*n.a, vars) - eval_node(*n.b, vars);
      case Kind::Mul:
        return eval_node(*n.a, vars) * eval_node(*n.b, vars);
      case Kind::Div: {
        double denom = eval_node(*n.b, vars);
        if (denom == 0.0) throw EvalError("division by zero");
        return eval_node(*n.a, vars) / denom;
      }
      case Kind::Pow: {
        double base = eval_node(*n.a, vars);
        double expo = eval_node(*n.b, vars);
        if (base < 0.0 && expo != std::floor(expo)) {
          throw EvalError("negative base with non-integral exponent");
        }
        return std::pow(base, expo);
      }
      case Kind::Call: {
        double a = eval_node(*n.a, vars);
        switch (n.func) {
          case Func::Sin:
            return std::sin(a);
          case Func::Cos:
            return std::cos(a);
          case Func::Exp:
            return std::exp(a);
          case Func::Sqrt:
            if (a < 0.0) throw EvalError("sqrt of a negative value");
            return std::sqrt(a);
          case Func::Abs:
            return std::fabs(a);
        }
      }
    }
    throw EvalError("corrupt expression tree");
  }

  // Light constant folding keeps derivative trees small.
  static bool is_const(const NodeRef& n, double v) {
    return n->kind == Kind::Number && n->value == v;
  }
  static NodeRef d_add(NodeRef a, NodeRef b) {
    if (is_const(a, 0.0)) return b;
    if (is_const(b, 0.0)) return a;
    return binary(Kind::Add, std::move(a), std::move(b));
  }
  static NodeRef d_sub(NodeRef a, NodeRef b) {
    if (is_const(b, 0.0)) return a;
    if (is_const(a, 0.0)) {
      auto n = std::make_shared<Node>();
      n->kind = Kind::Neg;
      n->a = std::move(b);
      return n;
    }
    return binary(Kind::Sub, std::move(a), std::move(b));
  }
  static NodeRef d_mul(NodeRef a, NodeRef b) {
    if (is_const(a, 0.0) || is_const(b, 0.0)) return make(Kind::Number, 0.0);
    if (is_const(a, 1.0)) return b;
    if (is_const(b, 1.0)) return a;
    return binary(Kind::Mul, std::move(a), std::move(b));
  }

  static NodeRef diff_node(const NodeRef& n, char var) {
    switch (n->kind) {
      case Kind::Number:
      case Kind::Pi:
        return make(Kind::Number, 0.0);
      case Kind::Var:
        return make(Kind::Number, n->var == var ? 1.0 : 0.0);
      case Kind::Neg: {
        auto out = std::make_shared<Node>();
        out->kind = Kind::Neg;
        out->a = diff_node(n->a, var);
        return out;
      }
      case Kind::Add:
        return d_add(diff_node(n->a, var), diff_node(n->b, var));
      case Kind::Sub:
        return d_sub(diff_node(n->a, var), diff_node(n->b, var));
      case Kind::Mul:
        return d_add(d_mul(diff_node(n->a, var), n->b),
                     d_mul(n->a, diff_node(n->b, var)));
      case Kind::Div: {
        // (u/v)' = (u'v - uv') / v^2
        NodeRef num = d_sub(d_mul(diff_node(n->a, var), n->b),
                            d_mul(n->a, diff_node(n->b, var)));
        NodeRef den = binary(Kind::Mul, n->b, n->b);
        return binary(Kind::Div, std::move(num), std::move(den));
      }
      case Kind::Pow: {
        if (n->b->kind != Kind::Number) {
          throw EvalError("cannot differentiate a non-constant exponent");
        }
        double k = n->b->value;
        if (k == 0.0) return make(Kind::Number, 0.0);
        // k * u^(k-1) * u'
        NodeRef pw = k == 1.0 ? n->a
                              : binary(Kind::Pow, n->a,
                                       make(Kind::Number, k - 1.0));
        return d_mul(d_mul(make(Kind::Number, k), std::move(pw)),
                     diff_node(n->a, var));
      }
      case Kind::Call: {
        NodeRef inner = diff_node(n->a, var);
        auto chain = [&](NodeRef outer) { return d_mul(std::move(outer), std::move(inner)); };
        switch (n->func) {
          case Func::Sin: {
            auto c = std::make_shared<Node>();
            c->kind = Kind::Call;
            c->func = Func::Cos;
            c->a = n->a;
            return chain(c);
          }
          case Func::Cos: {
            auto s = std::make_shared<Node>();
            s->kind = Kind::Call;
            s->func = Func::Sin;
            s->a = n->a;
            auto neg = std::make_shared<Node>();
            neg->kind = Kind::Neg;
            neg->a = s;
            return chain(neg);
          }
          case Func::Exp:
            return chain(n);
          case Func::Sqrt: {
            // u' / (2 sqrt(u))
            NodeRef den = binary(Kind::Mul, make(Kind::Number, 2.0), n);
            return binary(Kind::Div, std::move(inner), std::move(den));
          }
          case Func::Abs:
            throw EvalError("abs is not differentiable");
        }
      }
    }
    throw EvalError("corrupt expression tree");
  }

  static void print_node(const Node& n, std::string& out) {
    switch (n.kind) {
      case Kind::Number: {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", n.value);
        out += buf;
        return;
      }
      case Kind::Pi:
        out += "pi";
        return;
      case Kind::Var:
        out += n.var;
        return;
      case Kind::Neg:
        out += "(-";
        print_node(*n.a, out);
        out += ')';
        return;
      case Kind::Add:
      case Kind::Sub:
      case Kind::Mul:
      case Kind::Div:
      case Kind::Pow: {
        static constexpr char ops[] = {'+', '-', '*', '/', '^'};
        out += '(';
        print_node(*n.a, out);
        out += ops[static_cast<int>(n.kind) - static_cast<int>(Kind::Add)];
        print_node(*n.b, out);
        out += ')';
        return;
      }
      case Kind::Call: {
        static constexpr const char* names[] = {"sin", "cos", "exp", "sqrt",
                                                "abs"};
        out += names[static_cast<int>(n.func)];
        out += '(';
        print_node(*n.a, out);
        out += ')';
        return;
      }
    }
  }

  static bool nodes_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b || a->kind != b->kind) return false;
    switch (a->kind) {
      case Kind::Number:
        return a->value == b->value;
      case Kind::Pi:
        return true;
      case Kind::Var:
        return a->var == b->var;
      case Kind::Neg:
        return nodes_equal(a->a.get(), b->a.get());
      case Kind::Call:
        return a->func == b->func && nodes_equal(a->a.get(), b->a.get());
      default:
        return nodes_equal(a->a.get(), b->a.get()) &&
               nodes_equal(a->b.get(), b->b.get());
    }
  }

  // Recursive-descent parser. LL(1): juxtaposition multiplication ("2x") is
  // deliberately a syntax error.
  struct Parser {
    std::string_view src;
    std::size_t pos;

    void skip_ws() {
      while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
    }
    char peek() {
      skip_ws();
      return pos < src.size() ? src[pos] : '\0';
    }
    bool accept(char c) {
      if (peek() == c) {
        ++pos;
        return true;
      }
      return false;
    }
    void expect(char c) {
      if (!accept(c)) {
        if (pos >= src.size()) {
          throw ParseError(std::string("unexpected end of input, expected '") + c + "'", pos);
        }
        throw ParseError(std::string("expected '") + c + "'", pos);
      }
    }

    NodeRef parse_sum() {
      NodeRef lhs = parse_product();
      for (;;) {
        if (accept('+')) {
          lhs = binary(Kind::Add, lhs, parse_product());
        } else if (accept('-')) {
          lhs = binary(Kind::Sub, lhs, parse_product());
        } else {
          return lhs;
        }
      }
    }

    NodeRef parse_product() {
      NodeRef lhs = parse_unary();
      for (;;) {
        if (accept('*')) {
          lhs = binary(Kind::Mul, lhs, parse_unary());
        } else if (accept('/')) {
          lhs = binary(Kind::Div, lhs, parse_unary());
        } else {
          return lhs;
        }
      }
    }

    NodeRef parse_unary() {
      if (accept('-')) {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Neg;
        n->a = parse_unary();
        return n;
      }
      return parse_power();
    }

    NodeRef parse_power() {
      NodeRef base = parse_primary();
      if (accept('^')) {
        // Right-associative; the exponent may carry its own unary minus.
        return binary(Kind::Pow, std::move(base), parse_unary());
      }
      return base;
    }

    NodeRef parse_primary() {
      char c = peek();
      if (c == '(') {
        ++pos;
        NodeRef inner = parse_sum();
        expect(')');
        return inner;
      }
      if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
        return parse_number();
      }
      if (std::isalpha(static_cast<unsigned char>(c))) {
        return parse_ident();
      }
      if (pos >= src.size()) {
        throw ParseError("unexpected end of input, expected a value", pos);
      }
      throw ParseError(std::string("unexpected character '") + c + "', expected a value", pos);
    }

    NodeRef parse_number() {
      std::size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      if (pos < src.size() && src[pos] == '.') {
        ++pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      }
      if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
        std::size_t mark = pos;
        ++pos;
        if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
        if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
          while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        } else {
          pos = mark;  // "2e" is the number 2 followed by a stray identifier
        }
      }
      double value = 0.0;
      auto res = std::from_chars(src.data() + start, src.data() + pos, value);
      if (res.ec != std::errc() || res.ptr != src.data() + pos) {
        throw ParseError("malformed number", start);
      }
      return make(Kind::Number, value);
    }

    NodeRef parse_ident() {
      std::size_t start = pos;
      while (pos < src.size() && (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_')) ++pos;
      std::string_view name = src.substr(start, pos - start);
      if (name == "x" || name == "y" || name == "t") {
        auto n = std::make_shared<Node>();
        n->kind = Kind::Var;
        n->var = name[0];
        return n;
      }
      if (name == "pi") return make(Kind::Pi, 0.0);
      Func f;
      if (name == "sin") f = Func::Sin;
      else if (name == "cos") f = Func::Cos;
      else if (name == "exp") f = Func::Exp;
      else if (name == "sqrt") f = Func::Sqrt;
      else if (name == "abs") f = Func::Abs;
      else throw ParseError("unknown identifier '" + std::string(name) + "'", start);
      expect('(');
      NodeRef arg = parse_sum();
      expect(')');
      auto n = std::make_shared<Node>();
      n->kind = Kind::Call;
      n->func = f;
      n->a = arg;
      return n;
    }
  };
};

inline Expression parse_expression(std::string_view source) {
  return Expression::parse(source);
}

inline double eval_expression(const Expression& e, double x, double y, double t) {
  return e.eval(x, y, t);
}

}  // namespace dpp
