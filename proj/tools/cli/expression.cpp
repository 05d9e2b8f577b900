#include "expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>

namespace cosymlab::cli {

namespace {

struct Dual {
  double v;
  Eigen::VectorXd g;
};

enum class Op { kConst, kVar, kAdd, kSub, kMul, kDiv, kPow, kNeg, kSin, kCos, kTan, kExp, kLog, kSqrt, kAtan2 };

}  // namespace

struct Expression::Node {
  Op op = Op::kConst;
  double constant = 0.0;
  int index = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

class Parser {
 public:
  Parser(std::string_view s, const std::vector<std::string>& vars) : s_(s), vars_(vars) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip();
    if (pos_ != s_.size()) throw ParseError("unexpected '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) lhs = make(Op::kAdd, lhs, term());
      else if (accept('-')) lhs = make(Op::kSub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) lhs = make(Op::kMul, lhs, unary());
      else if (accept('/')) lhs = make(Op::kDiv, lhs, unary());
      else return lhs;
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::kNeg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::kPow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = s_[pos_];
    if (accept('(')) {
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return name();
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    const std::string rest(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) throw ParseError("malformed number", pos_);
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    auto n = std::make_shared<Expression::Node>();
    n->constant = v;
    return n;
  }

  NodePtr name() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string id(s_.substr(start, pos_ - start));
    if (accept('(')) {
      static const std::pair<const char*, Op> unary_fns[] = {{"sin", Op::kSin}, {"cos", Op::kCos},
                                                             {"tan", Op::kTan}, {"exp", Op::kExp},
                                                             {"log", Op::kLog}, {"sqrt", Op::kSqrt}};
      for (const auto& [fn, op] : unary_fns) {
        if (id == fn) {
          NodePtr arg = expr();
          expect(')');
          return make(op, arg);
        }
      }
      if (id == "atan2") {
        NodePtr y = expr();
        expect(',');
        NodePtr x = expr();
        expect(')');
        return make(Op::kAtan2, y, x);
      }
      throw ParseError("unknown function '" + id + "'", start);
    }
    for (std::size_t i = 0; i < vars_.size(); ++i) {
      if (vars_[i] == id) {
        auto n = std::make_shared<Expression::Node>();
        n->op = Op::kVar;
        n->index = static_cast<int>(i);
        return n;
      }
    }
    if (id == "pi") {
      auto n = std::make_shared<Expression::Node>();
      n->constant = std::numbers::pi;
      return n;
    }
    throw ParseError("unknown variable '" + id + "'", start);
  }

  std::string_view s_;
  const std::vector<std::string>& vars_;
  std::size_t pos_ = 0;
};

double eval(const Expression::Node& n, const Eigen::VectorXd& x) {
  switch (n.op) {
    case Op::kConst: return n.constant;
    case Op::kVar: return x[n.index];
    case Op::kAdd: return eval(*n.a, x) + eval(*n.b, x);
    case Op::kSub: return eval(*n.a, x) - eval(*n.b, x);
    case Op::kMul: return eval(*n.a, x) * eval(*n.b, x);
    case Op::kDiv: return eval(*n.a, x) / eval(*n.b, x);
    case Op::kPow: return std::pow(eval(*n.a, x), eval(*n.b, x));
    case Op::kNeg: return -eval(*n.a, x);
    case Op::kSin: return std::sin(eval(*n.a, x));
    case Op::kCos: return std::cos(eval(*n.a, x));
    case Op::kTan: return std::tan(eval(*n.a, x));
    case Op::kExp: return std::exp(eval(*n.a, x));
    case Op::kLog: return std::log(eval(*n.a, x));
    case Op::kSqrt: return std::sqrt(eval(*n.a, x));
    case Op::kAtan2: return std::atan2(eval(*n.a, x), eval(*n.b, x));
  }
  return 0.0;
}

Dual eval_dual(const Expression::Node& n, const Eigen::VectorXd& x) {
  const auto dim = x.size();
  switch (n.op) {
    case Op::kConst: return {n.constant, Eigen::VectorXd::Zero(dim)};
    case Op::kVar: {
      Dual d{x[n.index], Eigen::VectorXd::Zero(dim)};
      d.g[n.index] = 1.0;
      return d;
    }
    case Op::kNeg: {
      Dual a = eval_dual(*n.a, x);
      return {-a.v, -a.g};
    }
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kPow:
    case Op::kAtan2: {
      const Dual a = eval_dual(*n.a, x), b = eval_dual(*n.b, x);
      switch (n.op) {
        case Op::kAdd: return {a.v + b.v, a.g + b.g};
        case Op::kSub: return {a.v - b.v, a.g - b.g};
        case Op::kMul: return {a.v * b.v, a.g * b.v + b.g * a.v};
        case Op::kDiv: return {a.v / b.v, (a.g * b.v - b.g * a.v) / (b.v * b.v)};
        case Op::kAtan2: {
          const double r2 = a.v * a.v + b.v * b.v;
          return {std::atan2(a.v, b.v), (a.g * b.v - b.g * a.v) / r2};
        }
        default: {
          const double v = std::pow(a.v, b.v);
          // Constant exponents avoid log(a) so negative bases work.
          if (b.g.isZero(0.0)) return {v, a.g * (b.v * std::pow(a.v, b.v - 1.0))};
          return {v, v * (b.g * std::log(a.v) + a.g * (b.v / a.v))};
        }
      }
    }
    default: {
      const Dual a = eval_dual(*n.a, x);
      switch (n.op) {
        case Op::kSin: return {std::sin(a.v), a.g * std::cos(a.v)};
        case Op::kCos: return {std::cos(a.v), a.g * -std::sin(a.v)};
        case Op::kTan: {
          const double t = std::tan(a.v);
          return {t, a.g * (1.0 + t * t)};
        }
        case Op::kExp: {
          const double e = std::exp(a.v);
          return {e, a.g * e};
        }
        case Op::kLog: return {std::log(a.v), a.g / a.v};
        default: {
          const double s = std::sqrt(a.v);
          return {s, a.g / (2.0 * s)};
        }
      }
    }
  }
}

}  // namespace

Expression Expression::parse(std::string_view text, std::vector<std::string> variables) {
  Expression e;
  e.text_ = std::string(text);
  e.variables_ = std::move(variables);
  e.root_ = Parser(e.text_, e.variables_).parse();
  return e;
}

double Expression::value(const Eigen::VectorXd& x) const { return eval(*root_, x); }

Eigen::VectorXd Expression::gradient(const Eigen::VectorXd& x) const { return eval_dual(*root_, x).g; }

}  // namespace cosymlab::cli
