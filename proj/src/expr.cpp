#include "stag/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace stag::expr {

namespace {

NodePtr make(Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  return std::make_shared<const Node>(Node{op, 0.0, std::move(lhs), std::move(rhs)});
}

bool is_number(const NodePtr& e) { return e->op == Op::number; }
bool is_value(const NodePtr& e, double v) { return e->op == Op::number && e->value == v; }

bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div || op == Op::pow;
}

double apply(Op op, double a, double b) {
  switch (op) {
    case Op::neg: return -a;
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div: return a / b;
    case Op::pow: return std::pow(a, b);
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::sinh: return std::sinh(a);
    case Op::cosh: return std::cosh(a);
    case Op::tanh: return std::tanh(a);
    case Op::exp: return std::exp(a);
    case Op::ln: return std::log(a);
    default: return std::nan("");
  }
}

// Folding only when the result is finite, so printed trees stay parseable.
NodePtr fold_or(Op op, const NodePtr& a, const NodePtr& b, NodePtr otherwise) {
  if (is_number(a) && (!b || is_number(b))) {
    double v = apply(op, a->value, b ? b->value : 0.0);
    if (std::isfinite(v)) return number(v);
  }
  return otherwise;
}

NodePtr add(const NodePtr& a, const NodePtr& b) {
  if (is_value(a, 0.0)) return b;
  if (is_value(b, 0.0)) return a;
  return fold_or(Op::add, a, b, make(Op::add, a, b));
}

NodePtr neg(const NodePtr& a) {
  if (a->op == Op::neg) return a->lhs;
  return fold_or(Op::neg, a, nullptr, make(Op::neg, a));
}

NodePtr sub(const NodePtr& a, const NodePtr& b) {
  if (is_value(b, 0.0)) return a;
  if (is_value(a, 0.0)) return neg(b);
  return fold_or(Op::sub, a, b, make(Op::sub, a, b));
}

NodePtr mul(const NodePtr& a, const NodePtr& b) {
  if (is_value(a, 0.0) || is_value(b, 0.0)) return number(0.0);
  if (is_value(a, 1.0)) return b;
  if (is_value(b, 1.0)) return a;
  return fold_or(Op::mul, a, b, make(Op::mul, a, b));
}

NodePtr div(const NodePtr& a, const NodePtr& b) {
  if (is_value(a, 0.0)) return number(0.0);
  if (is_value(b, 1.0)) return a;
  return fold_or(Op::div, a, b, make(Op::div, a, b));
}

NodePtr pow(const NodePtr& a, const NodePtr& b) {
  if (is_value(b, 0.0)) return number(1.0);
  if (is_value(b, 1.0)) return a;
  return fold_or(Op::pow, a, b, make(Op::pow, a, b));
}

NodePtr fn(Op op, const NodePtr& a) { return fold_or(op, a, nullptr, make(op, a)); }

struct FunctionName {
  std::string_view name;
  Op op;
};

constexpr std::array<FunctionName, 7> kFunctions{{
    {"sinh", Op::sinh},
    {"cosh", Op::cosh},
    {"tanh", Op::tanh},
    {"sin", Op::sin},
    {"cos", Op::cos},
    {"exp", Op::exp},
    {"ln", Op::ln},
}};

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr run() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError(pos_, "expected expression, got end of input");
    NodePtr e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("expected operator or end of input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& expected) const {
    std::string got = pos_ < src_.size() ? "'" + std::string(1, src_[pos_]) + "'" : "end of input";
    throw ParseError(pos_, expected + ", got " + got);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expression() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make(Op::add, lhs, term());
      } else if (accept('-')) {
        lhs = make(Op::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make(Op::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make(Op::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make(Op::neg, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make(Op::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ == src_.size()) fail("expected number, 'x', 'pi', function or '('");
    char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return literal();
    if (c == '(') {
      ++pos_;
      NodePtr inner = expression();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      std::size_t start = pos_;
      while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      std::string_view word = src_.substr(start, pos_ - start);
      if (word == "x") return variable();
      if (word == "pi") return make(Op::pi);
      for (const auto& f : kFunctions) {
        if (word == f.name) {
          if (!accept('(')) fail("expected '(' after function name");
          NodePtr arg = expression();
          if (!accept(')')) fail("expected ')'");
          return make(f.op, arg);
        }
      }
      pos_ = start;
      throw ParseError(start, "unknown identifier '" + std::string(word) + "'");
    }
    fail("expected number, 'x', 'pi', function or '('");
  }

  NodePtr literal() {
    std::size_t start = pos_;
    while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t mark = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
      } else {
        pos_ = mark;
      }
    }
    double v = 0.0;
    const char* first = src_.data() + start;
    const char* last = src_.data() + pos_;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
      pos_ = start;
      fail("malformed number");
    }
    return number(v);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

std::string_view function_name(Op op) {
  for (const auto& f : kFunctions) {
    if (f.op == op) return f.name;
  }
  return "?";
}

void print_into(const Node& e, std::string& out) {
  switch (e.op) {
    case Op::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      if (e.value < 0 || std::signbit(e.value)) {
        out += "(";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case Op::variable: out += "x"; return;
    case Op::pi: out += "pi"; return;
    case Op::neg:
      out += "(-";
      print_into(*e.lhs, out);
      out += ")";
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
    case Op::pow: {
      static constexpr char kSymbol[] = {'+', '-', '*', '/', '^'};
      int idx = static_cast<int>(e.op) - static_cast<int>(Op::add);
      out += "(";
      print_into(*e.lhs, out);
      out += kSymbol[idx];
      print_into(*e.rhs, out);
      out += ")";
      return;
    }
    default:
      out += function_name(e.op);
      out += "(";
      print_into(*e.lhs, out);
      out += ")";
      return;
  }
}

void compile_into(const Node& e, std::vector<Op>& ops, std::vector<double>& values, std::size_t depth,
                  std::size_t& max_depth) {
  if (depth > max_depth) max_depth = depth;
  if (e.lhs) compile_into(*e.lhs, ops, values, depth, max_depth);
  if (e.rhs) compile_into(*e.rhs, ops, values, depth + 1, max_depth);
  ops.push_back(e.op);
  values.push_back(e.op == Op::number ? e.value : 0.0);
}

constexpr std::size_t kStackSize = 64;

}  // namespace

NodePtr number(double v) { return std::make_shared<const Node>(Node{Op::number, v, nullptr, nullptr}); }

NodePtr variable() { return make(Op::variable); }

NodePtr parse(std::string_view source) { return Parser(source).run(); }

bool depends_on_x(const Node& e) {
  if (e.op == Op::variable) return true;
  return (e.lhs && depends_on_x(*e.lhs)) || (e.rhs && depends_on_x(*e.rhs));
}

NodePtr differentiate(const NodePtr& e) {
  const NodePtr& u = e->lhs;
  const NodePtr& v = e->rhs;
  switch (e->op) {
    case Op::number:
    case Op::pi: return number(0.0);
    case Op::variable: return number(1.0);
    case Op::neg: return neg(differentiate(u));
    case Op::add: return add(differentiate(u), differentiate(v));
    case Op::sub: return sub(differentiate(u), differentiate(v));
    case Op::mul: return add(mul(differentiate(u), v), mul(u, differentiate(v)));
    case Op::div: {
      // (u'v - uv') / v^2
      NodePtr num = sub(mul(differentiate(u), v), mul(u, differentiate(v)));
      return div(num, pow(v, number(2.0)));
    }
    case Op::pow: {
      if (!depends_on_x(*v)) {
        // c u^(c-1) u'
        return mul(mul(v, pow(u, sub(v, number(1.0)))), differentiate(u));
      }
      // u^v (v' ln u + v u'/u)
      NodePtr inner = add(mul(differentiate(v), fn(Op::ln, u)), div(mul(v, differentiate(u)), u));
      return mul(e, inner);
    }
    case Op::sin: return mul(fn(Op::cos, u), differentiate(u));
    case Op::cos: return mul(neg(fn(Op::sin, u)), differentiate(u));
    case Op::sinh: return mul(fn(Op::cosh, u), differentiate(u));
    case Op::cosh: return mul(fn(Op::sinh, u), differentiate(u));
    case Op::tanh: {
      // 1 - tanh(u)^2
      NodePtr t = fn(Op::tanh, u);
      return mul(sub(number(1.0), pow(t, number(2.0))), differentiate(u));
    }
    case Op::exp: return mul(e, differentiate(u));
    case Op::ln: return div(differentiate(u), u);
  }
  return number(0.0);
}

std::string print(const NodePtr& e) {
  std::string out;
  print_into(*e, out);
  return out;
}

double evaluate(const Node& e, double x) {
  switch (e.op) {
    case Op::number: return e.value;
    case Op::variable: return x;
    case Op::pi: return std::numbers::pi;
    default: break;
  }
  double a = evaluate(*e.lhs, x);
  double b = is_binary(e.op) ? evaluate(*e.rhs, x) : 0.0;
  return apply(e.op, a, b);
}

Program::Program(const NodePtr& e) {
  std::vector<Op> ops;
  std::vector<double> values;
  compile_into(*e, ops, values, 1, max_depth_);
  code_.reserve(ops.size());
  for (std::size_t i = 0; i < ops.size(); ++i) code_.push_back({ops[i], values[i]});
  if (max_depth_ > kStackSize) fallback_ = e;
}

double Program::operator()(double x) const {
  if (fallback_) return evaluate(*fallback_, x);
  std::array<double, kStackSize> stack;
  std::size_t top = 0;
  for (const Instr& in : code_) {
    switch (in.op) {
      case Op::number: stack[top++] = in.value; break;
      case Op::variable: stack[top++] = x; break;
      case Op::pi: stack[top++] = std::numbers::pi; break;
      case Op::add:
      case Op::sub:
      case Op::mul:
      case Op::div:
      case Op::pow: {
        double b = stack[--top];
        stack[top - 1] = apply(in.op, stack[top - 1], b);
        break;
      }
      default: stack[top - 1] = apply(in.op, stack[top - 1], 0.0); break;
    }
  }
  return stack[0];
}

}  // namespace stag::expr
