#include "degel/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace degel {

Taylor2 Taylor2::constant(double c, int n) {
  Taylor2 t;
  t.v = c;
  t.g = Eigen::VectorXd::Zero(n);
  t.h = Eigen::MatrixXd::Zero(n, n);
  return t;
}

Taylor2 Taylor2::variable(double x, int i, int n) {
  Taylor2 t = constant(x, n);
  t.g(i) = 1.0;
  return t;
}

namespace {

Taylor2 t2_add(const Taylor2& a, const Taylor2& b) {
  Taylor2 r = a;
  r.v += b.v;
  r.g += b.g;
  r.h += b.h;
  return r;
}

Taylor2 t2_sub(const Taylor2& a, const Taylor2& b) {
  Taylor2 r = a;
  r.v -= b.v;
  r.g -= b.g;
  r.h -= b.h;
  return r;
}

Taylor2 t2_neg(const Taylor2& a) {
  Taylor2 r = a;
  r.v = -r.v;
  r.g = -r.g;
  r.h = -r.h;
  return r;
}

Taylor2 t2_mul(const Taylor2& a, const Taylor2& b) {
  Taylor2 r;
  r.v = a.v * b.v;
  r.g = a.g * b.v + b.g * a.v;
  r.h = a.h * b.v + b.h * a.v + a.g * b.g.transpose() + b.g * a.g.transpose();
  return r;
}

Taylor2 t2_inv(const Taylor2& a) {
  Taylor2 r;
  const double iv = 1.0 / a.v;
  r.v = iv;
  r.g = -a.g * (iv * iv);
  r.h = -a.h * (iv * iv) + 2.0 * (iv * iv * iv) * a.g * a.g.transpose();
  return r;
}

// chain rule for scalar map u(f): u' and u'' given
Taylor2 t2_chain(const Taylor2& a, double u, double du, double ddu) {
  Taylor2 r;
  r.v = u;
  r.g = du * a.g;
  r.h = du * a.h + ddu * a.g * a.g.transpose();
  return r;
}

Taylor2 t2_powi(const Taylor2& a, long m) {
  const int n = static_cast<int>(a.g.size());
  if (m == 0) return Taylor2::constant(1.0, n);
  const double v = a.v;
  const double p = std::pow(v, static_cast<double>(m));
  const double dp = static_cast<double>(m) * std::pow(v, static_cast<double>(m - 1));
  const double ddp = static_cast<double>(m) * static_cast<double>(m - 1) *
                     std::pow(v, static_cast<double>(m - 2));
  return t2_chain(a, p, dp, (m == 1) ? 0.0 : ddp);
}

}  // namespace

struct Expression::Node {
  enum class Op {
    kConst,
    kVar,
    kAdd,
    kSub,
    kMul,
    kDiv,
    kPowInt,
    kPowGen,
    kNeg,
    kSin,
    kCos,
    kExp,
    kMin,
    kMax
  };
  Op op;
  double value = 0.0;  // kConst
  int var = 0;         // kVar
  long ipow = 0;       // kPowInt exponent
  std::shared_ptr<const Node> a, b;

  double eval(const Eigen::VectorXd& x) const {
    switch (op) {
      case Op::kConst: return value;
      case Op::kVar: return x(var);
      case Op::kAdd: return a->eval(x) + b->eval(x);
      case Op::kSub: return a->eval(x) - b->eval(x);
      case Op::kMul: return a->eval(x) * b->eval(x);
      case Op::kDiv: return a->eval(x) / b->eval(x);
      case Op::kPowInt: return std::pow(a->eval(x), static_cast<double>(ipow));
      case Op::kPowGen: return std::pow(a->eval(x), b->eval(x));
      case Op::kNeg: return -a->eval(x);
      case Op::kSin: return std::sin(a->eval(x));
      case Op::kCos: return std::cos(a->eval(x));
      case Op::kExp: return std::exp(a->eval(x));
      case Op::kMin: return std::min(a->eval(x), b->eval(x));
      case Op::kMax: return std::max(a->eval(x), b->eval(x));
    }
    return 0.0;
  }

  Taylor2 eval2(const Eigen::VectorXd& x) const {
    const int n = static_cast<int>(x.size());
    switch (op) {
      case Op::kConst: return Taylor2::constant(value, n);
      case Op::kVar: return Taylor2::variable(x(var), var, n);
      case Op::kAdd: return t2_add(a->eval2(x), b->eval2(x));
      case Op::kSub: return t2_sub(a->eval2(x), b->eval2(x));
      case Op::kMul: return t2_mul(a->eval2(x), b->eval2(x));
      case Op::kDiv: return t2_mul(a->eval2(x), t2_inv(b->eval2(x)));
      case Op::kPowInt: return t2_powi(a->eval2(x), ipow);
      case Op::kPowGen: {
        // a^b = exp(b log a), requires a > 0
        Taylor2 ta = a->eval2(x);
        Taylor2 tb = b->eval2(x);
        Taylor2 la = t2_chain(ta, std::log(ta.v), 1.0 / ta.v, -1.0 / (ta.v * ta.v));
        Taylor2 e = t2_mul(tb, la);
        return t2_chain(e, std::exp(e.v), std::exp(e.v), std::exp(e.v));
      }
      case Op::kNeg: return t2_neg(a->eval2(x));
      case Op::kSin: {
        Taylor2 ta = a->eval2(x);
        return t2_chain(ta, std::sin(ta.v), std::cos(ta.v), -std::sin(ta.v));
      }
      case Op::kCos: {
        Taylor2 ta = a->eval2(x);
        return t2_chain(ta, std::cos(ta.v), -std::sin(ta.v), -std::cos(ta.v));
      }
      case Op::kExp: {
        Taylor2 ta = a->eval2(x);
        const double e = std::exp(ta.v);
        return t2_chain(ta, e, e, e);
      }
      case Op::kMin: {
        Taylor2 ta = a->eval2(x);
        Taylor2 tb = b->eval2(x);
        return ta.v <= tb.v ? ta : tb;
      }
      case Op::kMax: {
        Taylor2 ta = a->eval2(x);
        Taylor2 tb = b->eval2(x);
        return ta.v >= tb.v ? ta : tb;
      }
    }
    return Taylor2::constant(0.0, n);
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Node::Op::kConst;
  n->value = v;
  return n;
}

NodePtr make_unary(Node::Op op, NodePtr a) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Node::Op op, NodePtr a, NodePtr b) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, int n_vars) : s_(s), n_(n_vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ExprError(pos_, "unexpected trailing input");
    return e;
  }

 private:
  const std::string& s_;
  int n_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+')) {
        lhs = make_binary(Node::Op::kAdd, lhs, term());
      } else if (consume('-')) {
        lhs = make_binary(Node::Op::kSub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (consume('*')) {
        lhs = make_binary(Node::Op::kMul, lhs, factor());
      } else if (consume('/')) {
        lhs = make_binary(Node::Op::kDiv, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  NodePtr factor() {
    NodePtr base = unary();
    if (consume('^')) {
      NodePtr e = factor();  // right-associative
      if (e->op == Node::Op::kConst) {
        const double ev = e->value;
        if (ev == std::floor(ev) && std::abs(ev) < 64) {
          auto n = std::make_shared<Node>();
          n->op = Node::Op::kPowInt;
          n->a = base;
          n->ipow = static_cast<long>(ev);
          return n;
        }
      }
      return make_binary(Node::Op::kPowGen, base, e);
    }
    return base;
  }

  NodePtr unary() {
    if (consume('-')) return make_unary(Node::Op::kNeg, unary());
    return primary();
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ExprError(pos_, "unexpected end of expression");
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!consume(')')) throw ExprError(pos_, "expected ')'");
      return e;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    throw ExprError(pos_, std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ExprError(pos_, "malformed number");
    pos_ += static_cast<std::size_t>(end - begin);
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);
    if (name == "pi") return make_const(M_PI);
    if (name.size() >= 2 && name[0] == 'x') {
      char* end = nullptr;
      const long idx = std::strtol(name.c_str() + 1, &end, 10);
      if (*end == '\0') {
        if (idx < 1 || idx > n_)
          throw ExprError(start, "variable " + name + " out of range (n = " +
                                     std::to_string(n_) + ")");
        auto node = std::make_shared<Node>();
        node->op = Node::Op::kVar;
        node->var = static_cast<int>(idx - 1);
        return node;
      }
    }
    if (name == "sin" || name == "cos" || name == "exp") {
      if (!consume('(')) throw ExprError(pos_, "expected '(' after " + name);
      NodePtr a = expr();
      if (!consume(')')) throw ExprError(pos_, "expected ')'");
      Node::Op op = name == "sin"   ? Node::Op::kSin
                    : name == "cos" ? Node::Op::kCos
                                    : Node::Op::kExp;
      return make_unary(op, a);
    }
    if (name == "min" || name == "max") {
      if (!consume('(')) throw ExprError(pos_, "expected '(' after " + name);
      NodePtr a = expr();
      if (!consume(',')) throw ExprError(pos_, "expected ',' in " + name);
      NodePtr b = expr();
      if (!consume(')')) throw ExprError(pos_, "expected ')'");
      return make_binary(name == "min" ? Node::Op::kMin : Node::Op::kMax, a, b);
    }
    throw ExprError(start, "unknown identifier '" + name + "'");
  }
};

}  // namespace

Expression Expression::parse(const std::string& text, int n_vars) {
  Expression e;
  e.root_ = Parser(text, n_vars).parse();
  e.n_vars_ = n_vars;
  e.text_ = text;
  return e;
}

Expression Expression::constant(double c, int n_vars) {
  Expression e;
  e.root_ = make_const(c);
  e.n_vars_ = n_vars;
  e.text_ = std::to_string(c);
  return e;
}

double Expression::eval(const Eigen::VectorXd& x) const {
  if (!root_) throw std::logic_error("empty expression");
  return root_->eval(x);
}

Taylor2 Expression::eval2(const Eigen::VectorXd& x) const {
  if (!root_) throw std::logic_error("empty expression");
  return root_->eval2(x);
}

}  // namespace degel
