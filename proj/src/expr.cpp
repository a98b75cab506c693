#include "greenfem/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

namespace greenfem {

struct Expr::Node {
  enum Kind { Const, Y1, Y2, Add, Sub, Mul, Div, Neg, Fn1, Fn2 } kind;
  double value = 0.0;
  double (*f1)(double) = nullptr;
  double (*f2)(double, double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(Vec2 y) const {
    switch (kind) {
      case Const: return value;
      case Y1: return y.x;
      case Y2: return y.y;
      case Add: return a->eval(y) + b->eval(y);
      case Sub: return a->eval(y) - b->eval(y);
      case Mul: return a->eval(y) * b->eval(y);
      case Div: return a->eval(y) / b->eval(y);
      case Neg: return -a->eval(y);
      case Fn1: return f1(a->eval(y));
      case Fn2: return f2(a->eval(y), b->eval(y));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

struct Parser {
  const std::string& s;
  std::size_t pos = 0;

  explicit Parser(const std::string& src) : s(src) {}

  [[noreturn]] void fail(const std::string& why) const {
    throw std::invalid_argument("expression error at position " +
                                std::to_string(pos) + ": " + why + " in '" + s +
                                "'");
  }
  void skip() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  bool eat(char c) {
    skip();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  static NodePtr make(Expr::Node n) {
    return std::make_shared<const Expr::Node>(std::move(n));
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+'))
        lhs = make({Expr::Node::Add, 0, nullptr, nullptr, lhs, term()});
      else if (eat('-'))
        lhs = make({Expr::Node::Sub, 0, nullptr, nullptr, lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*'))
        lhs = make({Expr::Node::Mul, 0, nullptr, nullptr, lhs, factor()});
      else if (eat('/'))
        lhs = make({Expr::Node::Div, 0, nullptr, nullptr, lhs, factor()});
      else
        return lhs;
    }
  }

  NodePtr factor() {
    if (eat('-')) return make({Expr::Node::Neg, 0, nullptr, nullptr, factor(), nullptr});
    if (eat('+')) return factor();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos >= s.size()) fail("unexpected end of input");
    const char c = s[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      char* end = nullptr;
      const double v = std::strtod(s.c_str() + pos, &end);
      if (end == s.c_str() + pos) fail("bad number");
      pos = static_cast<std::size_t>(end - s.c_str());
      return make({Expr::Node::Const, v, nullptr, nullptr, nullptr, nullptr});
    }
    if (c == '(') {
      ++pos;
      NodePtr inner = expr();
      if (!eat(')')) fail("missing ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t end = pos;
      while (end < s.size() &&
             (std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_'))
        ++end;
      const std::string name = s.substr(pos, end - pos);
      pos = end;
      if (name == "y1") return make({Expr::Node::Y1, 0, nullptr, nullptr, nullptr, nullptr});
      if (name == "y2") return make({Expr::Node::Y2, 0, nullptr, nullptr, nullptr, nullptr});
      if (name == "pi")
        return make({Expr::Node::Const, M_PI, nullptr, nullptr, nullptr, nullptr});
      struct F1 { const char* n; double (*f)(double); };
      struct F2 { const char* n; double (*f)(double, double); };
      static const F1 fns1[] = {
          {"abs", [](double x) { return std::fabs(x); }},
          {"sqrt", [](double x) { return std::sqrt(x); }},
          {"sin", [](double x) { return std::sin(x); }},
          {"cos", [](double x) { return std::cos(x); }},
          {"exp", [](double x) { return std::exp(x); }},
          {"log", [](double x) { return std::log(x); }}};
      static const F2 fns2[] = {
          {"min", [](double x, double y) { return std::min(x, y); }},
          {"max", [](double x, double y) { return std::max(x, y); }},
          {"pow", [](double x, double y) { return std::pow(x, y); }}};
      for (const F1& f : fns1)
        if (name == f.n) {
          if (!eat('(')) fail("expected '(' after " + name);
          NodePtr a = expr();
          if (!eat(')')) fail("missing ')'");
          return make({Expr::Node::Fn1, 0, f.f, nullptr, a, nullptr});
        }
      for (const F2& f : fns2)
        if (name == f.n) {
          if (!eat('(')) fail("expected '(' after " + name);
          NodePtr a = expr();
          if (!eat(',')) fail("expected ',' in " + name);
          NodePtr b = expr();
          if (!eat(')')) fail("missing ')'");
          return make({Expr::Node::Fn2, 0, nullptr, f.f, a, b});
        }
      fail("unknown identifier '" + name + "'");
    }
    fail(std::string("unexpected character '") + c + "'");
  }
};

}  // namespace

Expr Expr::parse(const std::string& src) {
  Parser p(src);
  Expr e;
  e.root_ = p.expr();
  p.skip();
  if (p.pos != src.size()) p.fail("trailing input");
  e.src_ = src;
  return e;
}

Expr Expr::constant(double v) {
  Expr e;
  e.root_ = std::make_shared<const Node>(
      Node{Node::Const, v, nullptr, nullptr, nullptr, nullptr});
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  e.src_ = buf;
  return e;
}

double Expr::operator()(Vec2 y) const {
  if (!root_) throw std::logic_error("empty expression");
  return root_->eval(y);
}

}  // namespace greenfem
