#pragma once

#include <memory>
#include <string>

#include "greenfem/geometry.hpp"

namespace greenfem {

// Scalar field on the plane given as an arithmetic expression in the
// coordinates y1, y2.  Supported: numeric literals, + - * / with the usual
// precedence, unary minus, parentheses, and the functions min, max, abs,
// sqrt, sin, cos, exp, log, pow.
class Expr {
 public:
  Expr() = default;
  static Expr parse(const std::string& src);
  static Expr constant(double v);

  double operator()(Vec2 y) const;
  bool valid() const { return root_ != nullptr; }
  const std::string& source() const { return src_; }

  struct Node;  // AST node, defined in the implementation

 private:
  std::shared_ptr<const Node> root_;
  std::string src_;
};

}  // namespace greenfem
