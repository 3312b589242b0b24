#pragma once

// Expression trees over a single real variable x: parsing, symbolic
// differentiation, printing and a flat compiled evaluator.

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "stag/error.hpp"

namespace stag::expr {

enum class Op {
  number,
  variable,
  pi,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  sin,
  cos,
  sinh,
  cosh,
  tanh,
  exp,
  ln,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // number only
  NodePtr lhs;         // unary operand / left operand
  NodePtr rhs;         // right operand of binary ops
};

class ParseError : public ConfigError {
 public:
  ParseError(std::size_t position, const std::string& message)
      : ConfigError("profiles", "syntax error at position " + std::to_string(position) + ": " + message),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

NodePtr number(double v);
NodePtr variable();

/// Parses `source`. `^` binds tighter than unary minus and is right-associative.
NodePtr parse(std::string_view source);

/// d/dx of `e`, with constant folding and the usual 0/1 identities applied.
NodePtr differentiate(const NodePtr& e);

/// Fully parenthesized text that parses back to a tree with identical values.
std::string print(const NodePtr& e);

/// Recursive evaluation; the reference path for `Program`.
double evaluate(const Node& e, double x);

bool depends_on_x(const Node& e);

/// Postfix program compiled from a tree. Immutable and safe to share.
class Program {
 public:
  Program() = default;
  explicit Program(const NodePtr& e);

  double operator()(double x) const;

 private:
  struct Instr {
    Op op;
    double value;
  };
  std::vector<Instr> code_;
  std::size_t max_depth_ = 0;
  NodePtr fallback_;
};

}  // namespace stag::expr
