// Copyright 2026 The qoc Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qoc/expr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "lexer.hpp"
#include "qoc/common.hpp"

namespace qoc {

enum class Op { Num, Var, Neg, Add, Sub, Mul, Div, Pow, Call };

struct Expr::Node {
  Op op = Op::Num;
  double num = 0.0;
  std::string name;  // variable or function name
  std::shared_ptr<const Node> a;
  std::shared_ptr<const Node> b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

constexpr std::string_view kFunctions[] = {"exp", "log", "sqrt", "sin", "cos", "tan", "tanh"};

bool is_function(std::string_view name) {
  return std::find(std::begin(kFunctions), std::end(kFunctions), name) != std::end(kFunctions);
}

NodePtr make_num(double v) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Num;
  n->num = v;
  return n;
}

NodePtr make_var(std::string name) {
  auto n = std::make_shared<Expr::Node>();
  n->op = Op::Var;
  n->name = std::move(name);
  return n;
}

bool is_num(const NodePtr& n, double v) { return n->op == Op::Num && n->num == v; }

double apply_function(const std::string& f, double x) {
  if (f == "exp") return std::exp(x);
  if (f == "log") return std::log(x);
  if (f == "sqrt") return std::sqrt(x);
  if (f == "sin") return std::sin(x);
  if (f == "cos") return std::cos(x);
  if (f == "tan") return std::tan(x);
  if (f == "tanh") return std::tanh(x);
  throw ValidationError("unknown function '" + f + "'");
}

double apply_binary(Op op, double x, double y) {
  switch (op) {
    case Op::Add:
      return x + y;
    case Op::Sub:
      return x - y;
    case Op::Mul:
      return x * y;
    case Op::Div:
      return x / y;
    case Op::Pow:
      return std::pow(x, y);
    default:
      throw ValidationError("not a binary operator");
  }
}

// Constructors with light constant folding, so derivatives stay small.
NodePtr make_unary(Op op, const std::string& name, NodePtr a) {
  if (a->op == Op::Num) {
    if (op == Op::Neg) return make_num(-a->num);
    return make_num(apply_function(name, a->num));
  }
  if (op == Op::Neg && a->op == Op::Neg) return a->a;
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->name = name;
  n->a = std::move(a);
  return n;
}

NodePtr make_binary(Op op, NodePtr a, NodePtr b) {
  if (a->op == Op::Num && b->op == Op::Num) return make_num(apply_binary(op, a->num, b->num));
  switch (op) {
    case Op::Add:
      if (is_num(a, 0.0)) return b;
      if (is_num(b, 0.0)) return a;
      break;
    case Op::Sub:
      if (is_num(b, 0.0)) return a;
      if (is_num(a, 0.0)) return make_unary(Op::Neg, "", b);
      break;
    case Op::Mul:
      if (is_num(a, 0.0) || is_num(b, 0.0)) return make_num(0.0);
      if (is_num(a, 1.0)) return b;
      if (is_num(b, 1.0)) return a;
      break;
    case Op::Div:
      if (is_num(a, 0.0)) return make_num(0.0);
      if (is_num(b, 1.0)) return a;
      break;
    case Op::Pow:
      if (is_num(b, 1.0)) return a;
      if (is_num(b, 0.0)) return make_num(1.0);
      break;
    default:
      break;
  }
  auto n = std::make_shared<Expr::Node>();
  n->op = op;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

double eval_node(const NodePtr& n, const std::map<std::string, double>* env) {
  switch (n->op) {
    case Op::Num:
      return n->num;
    case Op::Var: {
      if (env != nullptr) {
        auto it = env->find(n->name);
        if (it != env->end()) return it->second;
      }
      throw ValidationError("unbound variable '" + n->name + "'");
    }
    case Op::Neg:
      return -eval_node(n->a, env);
    case Op::Call:
      return apply_function(n->name, eval_node(n->a, env));
    default:
      return apply_binary(n->op, eval_node(n->a, env), eval_node(n->b, env));
  }
}

NodePtr substitute_node(const NodePtr& n, const std::map<std::string, double>& env) {
  switch (n->op) {
    case Op::Num:
      return n;
    case Op::Var: {
      auto it = env.find(n->name);
      return it == env.end() ? n : make_num(it->second);
    }
    case Op::Neg:
    case Op::Call:
      return make_unary(n->op, n->name, substitute_node(n->a, env));
    default:
      return make_binary(n->op, substitute_node(n->a, env), substitute_node(n->b, env));
  }
}

NodePtr derive(const NodePtr& n, const std::string& var) {
  switch (n->op) {
    case Op::Num:
      return make_num(0.0);
    case Op::Var:
      return make_num(n->name == var ? 1.0 : 0.0);
    case Op::Neg:
      return make_unary(Op::Neg, "", derive(n->a, var));
    case Op::Add:
      return make_binary(Op::Add, derive(n->a, var), derive(n->b, var));
    case Op::Sub:
      return make_binary(Op::Sub, derive(n->a, var), derive(n->b, var));
    case Op::Mul:
      return make_binary(Op::Add, make_binary(Op::Mul, derive(n->a, var), n->b),
                         make_binary(Op::Mul, n->a, derive(n->b, var)));
    case Op::Div: {
      // (a'b - ab') / b^2
      auto num = make_binary(Op::Sub, make_binary(Op::Mul, derive(n->a, var), n->b),
                             make_binary(Op::Mul, n->a, derive(n->b, var)));
      return make_binary(Op::Div, num, make_binary(Op::Pow, n->b, make_num(2.0)));
    }
    case Op::Pow: {
      auto da = derive(n->a, var);
      auto db = derive(n->b, var);
      // b a^(b-1) a'
      auto term1 = make_binary(
          Op::Mul, make_binary(Op::Mul, n->b, make_binary(Op::Pow, n->a, make_binary(Op::Sub, n->b, make_num(1.0)))),
          da);
      if (is_num(db, 0.0)) return term1;
      // + a^b log(a) b'
      auto term2 = make_binary(Op::Mul, make_binary(Op::Mul, n, make_unary(Op::Call, "log", n->a)), db);
      return make_binary(Op::Add, term1, term2);
    }
    case Op::Call: {
      auto da = derive(n->a, var);
      if (is_num(da, 0.0)) return da;
      const auto& f = n->name;
      NodePtr outer;
      if (f == "exp") {
        outer = n;
      } else if (f == "log") {
        outer = make_binary(Op::Div, make_num(1.0), n->a);
      } else if (f == "sqrt") {
        outer = make_binary(Op::Div, make_num(0.5), n);
      } else if (f == "sin") {
        outer = make_unary(Op::Call, "cos", n->a);
      } else if (f == "cos") {
        outer = make_unary(Op::Neg, "", make_unary(Op::Call, "sin", n->a));
      } else if (f == "tan") {
        auto c = make_unary(Op::Call, "cos", n->a);
        outer = make_binary(Op::Div, make_num(1.0), make_binary(Op::Mul, c, c));
      } else {  // tanh
        outer = make_binary(Op::Sub, make_num(1.0), make_binary(Op::Mul, n, n));
      }
      return make_binary(Op::Mul, outer, da);
    }
  }
  return make_num(0.0);
}

void collect(const NodePtr& n, std::vector<std::string>& out) {
  if (!n) return;
  if (n->op == Op::Var) {
    if (std::find(out.begin(), out.end(), n->name) == out.end()) out.push_back(n->name);
    return;
  }
  collect(n->a, out);
  collect(n->b, out);
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_string(const NodePtr& n) {
  switch (n->op) {
    case Op::Num:
      return n->num < 0 ? "(" + format_number(n->num) + ")" : format_number(n->num);
    case Op::Var:
      return n->name;
    case Op::Neg:
      return "(-" + to_string(n->a) + ")";
    case Op::Call:
      return n->name + "(" + to_string(n->a) + ")";
    default: {
      const char* sym = n->op == Op::Add ? "+" : n->op == Op::Sub ? "-" : n->op == Op::Mul ? "*" : n->op == Op::Div ? "/" : "^";
      return "(" + to_string(n->a) + sym + to_string(n->b) + ")";
    }
  }
}

// Recursive-descent parser.
NodePtr parse_sum(detail::Lexer& lx);

NodePtr parse_primary(detail::Lexer& lx) {
  const auto& tok = lx.peek();
  if (tok.kind == detail::TokenKind::Number) {
    return make_num(lx.next().number);
  }
  if (tok.kind == detail::TokenKind::Identifier) {
    auto id = lx.next();
    if (lx.peek().is('(')) {
      if (!is_function(id.text)) throw lx.error_at(id, "unknown function '" + id.text + "'");
      lx.next();
      auto arg = parse_sum(lx);
      lx.expect(')');
      return make_unary(Op::Call, id.text, arg);
    }
    if (id.text == "pi") return make_num(std::numbers::pi);
    return make_var(id.text);
  }
  if (tok.is('(')) {
    lx.next();
    auto inner = parse_sum(lx);
    lx.expect(')');
    return inner;
  }
  throw lx.error("expected expression but found " + detail::describe(tok));
}

NodePtr parse_unary(detail::Lexer& lx);

NodePtr parse_power(detail::Lexer& lx) {
  auto base = parse_primary(lx);
  if (lx.accept('^')) return make_binary(Op::Pow, base, parse_unary(lx));
  return base;
}

NodePtr parse_unary(detail::Lexer& lx) {
  if (lx.accept('-')) return make_unary(Op::Neg, "", parse_unary(lx));
  if (lx.accept('+')) return parse_unary(lx);
  return parse_power(lx);
}

NodePtr parse_product(detail::Lexer& lx) {
  auto lhs = parse_unary(lx);
  for (;;) {
    if (lx.accept('*')) {
      lhs = make_binary(Op::Mul, lhs, parse_unary(lx));
    } else if (lx.accept('/')) {
      lhs = make_binary(Op::Div, lhs, parse_unary(lx));
    } else {
      return lhs;
    }
  }
}

NodePtr parse_sum(detail::Lexer& lx) {
  auto lhs = parse_product(lx);
  for (;;) {
    if (lx.accept('+')) {
      lhs = make_binary(Op::Add, lhs, parse_product(lx));
    } else if (lx.accept('-')) {
      lhs = make_binary(Op::Sub, lhs, parse_product(lx));
    } else {
      return lhs;
    }
  }
}

}  // namespace

Expr::Expr() : node_(make_num(0.0)) {}

Expr Expr::number(double value) { return Expr(make_num(value)); }

Expr Expr::variable(std::string name) { return Expr(make_var(std::move(name))); }

Expr parse_expression(detail::Lexer& lexer) { return Expr(parse_sum(lexer)); }

Expr Expr::parse(std::string_view text) {
  detail::Lexer lx(text);
  auto e = parse_expression(lx);
  if (!lx.at_end()) throw lx.error("unexpected " + detail::describe(lx.peek()) + " after expression");
  return e;
}

bool Expr::is_constant() const { return node_->op == Op::Num || variables().empty(); }

double Expr::value() const {
  if (!is_constant()) throw ValidationError("expression '" + str() + "' has free variables");
  return eval_node(node_, nullptr);
}

double Expr::evaluate(const std::map<std::string, double>& env) const { return eval_node(node_, &env); }

Expr Expr::substitute(const std::map<std::string, double>& env) const { return Expr(substitute_node(node_, env)); }

Expr Expr::derivative(const std::string& var) const { return Expr(derive(node_, var)); }

std::vector<std::string> Expr::variables() const {
  std::vector<std::string> out;
  collect(node_, out);
  return out;
}

std::string Expr::str() const { return to_string(node_); }

CompiledExpr Expr::compile(const std::vector<std::string>& slots) const {
  CompiledExpr out;
  std::size_t depth = 0;
  auto emit = [&](auto&& self, const NodePtr& n) -> void {
    using C = decltype(CompiledExpr::Instr::code);
    switch (n->op) {
      case Op::Num:
        out.program_.push_back({C::Push, n->num, 0});
        ++depth;
        break;
      case Op::Var: {
        auto it = std::find(slots.begin(), slots.end(), n->name);
        if (it == slots.end()) throw ValidationError("unknown variable '" + n->name + "' in expression");
        out.program_.push_back({C::Load, 0.0, static_cast<std::size_t>(it - slots.begin())});
        ++depth;
        break;
      }
      case Op::Neg:
        self(self, n->a);
        out.program_.push_back({C::Neg});
        break;
      case Op::Call: {
        self(self, n->a);
        const auto& f = n->name;
        C code = f == "exp" ? C::Exp : f == "log" ? C::Log : f == "sqrt" ? C::Sqrt : f == "sin" ? C::Sin
               : f == "cos" ? C::Cos : f == "tan" ? C::Tan : C::Tanh;
        out.program_.push_back({code});
        break;
      }
      default: {
        self(self, n->a);
        self(self, n->b);
        C code = n->op == Op::Add ? C::Add : n->op == Op::Sub ? C::Sub : n->op == Op::Mul ? C::Mul
               : n->op == Op::Div ? C::Div : C::Pow;
        out.program_.push_back({code});
        --depth;
        break;
      }
    }
    out.max_depth_ = std::max(out.max_depth_, depth);
  };
  emit(emit, node_);
  return out;
}

double CompiledExpr::operator()(std::span<const double> slots) const {
  constexpr std::size_t kInline = 32;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* stack = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(max_depth_);
    stack = heap.data();
  }
  std::size_t sp = 0;
  for (const auto& ins : program_) {
    switch (ins.code) {
      case Code::Push:
        stack[sp++] = ins.value;
        break;
      case Code::Load:
        stack[sp++] = slots[ins.slot];
        break;
      case Code::Neg:
        stack[sp - 1] = -stack[sp - 1];
        break;
      case Code::Exp:
        stack[sp - 1] = std::exp(stack[sp - 1]);
        break;
      case Code::Log:
        stack[sp - 1] = std::log(stack[sp - 1]);
        break;
      case Code::Sqrt:
        stack[sp - 1] = std::sqrt(stack[sp - 1]);
        break;
      case Code::Sin:
        stack[sp - 1] = std::sin(stack[sp - 1]);
        break;
      case Code::Cos:
        stack[sp - 1] = std::cos(stack[sp - 1]);
        break;
      case Code::Tan:
        stack[sp - 1] = std::tan(stack[sp - 1]);
        break;
      case Code::Tanh:
        stack[sp - 1] = std::tanh(stack[sp - 1]);
        break;
      case Code::Add:
        --sp;
        stack[sp - 1] += stack[sp];
        break;
      case Code::Sub:
        --sp;
        stack[sp - 1] -= stack[sp];
        break;
      case Code::Mul:
        --sp;
        stack[sp - 1] *= stack[sp];
        break;
      case Code::Div:
        --sp;
        stack[sp - 1] /= stack[sp];
        break;
      case Code::Pow:
        --sp;
        stack[sp - 1] = std::pow(stack[sp - 1], stack[sp]);
        break;
    }
  }
  return sp == 0 ? 0.0 : stack[0];
}

}  // namespace qoc
