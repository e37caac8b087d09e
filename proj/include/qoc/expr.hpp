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

#pragma once

#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace qoc {

namespace detail {
class Lexer;
}

class CompiledExpr;

/// Immutable real-valued arithmetic expression.
///
/// Grammar: numbers, identifiers, the constant `pi`, `+ - * / ^`, unary
/// minus, parentheses and the functions exp, log, sqrt, sin, cos, tan, tanh.
/// Identifiers other than `pi` are free variables.
class Expr {
 public:
  Expr();  // the constant 0

  static Expr number(double value);
  static Expr variable(std::string name);

  /// Parses the whole string; trailing tokens are an error.
  static Expr parse(std::string_view text);

  bool is_constant() const;
  /// Value of a constant expression. Throws ValidationError if free variables remain.
  double value() const;
  double evaluate(const std::map<std::string, double>& env) const;

  /// Replaces the given variables by numbers and folds constant subtrees.
  Expr substitute(const std::map<std::string, double>& env) const;
  /// Symbolic partial derivative.
  Expr derivative(const std::string& var) const;

  /// Free variables in order of first appearance.
  std::vector<std::string> variables() const;

  /// Binds variables to slot indices for repeated evaluation.
  /// Variables not listed in `slots` raise ValidationError.
  CompiledExpr compile(const std::vector<std::string>& slots) const;

  std::string str() const;

  struct Node;

 private:
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  friend Expr parse_expression(detail::Lexer& lexer);
  friend class CompiledExpr;

  std::shared_ptr<const Node> node_;
};

/// Parses one expression from the token stream (used by the circuit parser).
Expr parse_expression(detail::Lexer& lexer);

/// Stack-machine form of an Expr; cheap to evaluate in tight loops.
class CompiledExpr {
 public:
  double operator()(std::span<const double> slots) const;

 private:
  friend class Expr;
  enum class Code { Push, Load, Neg, Add, Sub, Mul, Div, Pow, Exp, Log, Sqrt, Sin, Cos, Tan, Tanh };
  struct Instr {
    Code code;
    double value = 0.0;
    std::size_t slot = 0;
  };
  std::vector<Instr> program_;
  std::size_t max_depth_ = 0;
};

}  // namespace qoc
