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
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include "qoc/common.hpp"

namespace qoc {

enum class PauliOp { I, X, Y, Z, SP, SM };

struct OperatorFactor {
  PauliOp op;
  int qubit;

  bool operator==(const OperatorFactor&) const = default;
};

struct OperatorTerm {
  double coef = 1.0;
  std::vector<OperatorFactor> factors;  // applied right to left, like matrix products

  bool operator==(const OperatorTerm&) const = default;
};

/// Operator expression such as "0.5*X0*X1 + Z0 - SP1*SM1".
///
/// Tokens are {X,Y,Z,I,SP,SM} followed by a qubit index. SP = |1><0| raises,
/// SM = |0><1| lowers. Factors on the same qubit multiply as matrices in the
/// written order; factors on different qubits form a tensor product.
class OperatorExpr {
 public:
  OperatorExpr() = default;
  static OperatorExpr parse(std::string_view text);

  const std::string& text() const { return text_; }
  const std::vector<OperatorTerm>& terms() const { return terms_; }
  /// Sorted distinct qubit indices referenced by the expression.
  std::vector<int> qubits() const;
  int max_qubit() const;

  bool operator==(const OperatorExpr& other) const { return text_ == other.text_; }

 private:
  std::string text_;
  std::vector<OperatorTerm> terms_;
};

/// Dense 2^n x 2^n matrix, qubit 0 = least-significant bit.
Matrix build_operator(const OperatorExpr& expr, int n_qubits);
Matrix build_operator(std::string_view expr, int n_qubits);

struct DriftTerm {
  double coef = 0.0;  // rad / time-unit
  OperatorExpr op;

  bool operator==(const DriftTerm&) const = default;
};

struct ControlChannel {
  std::string channel;
  OperatorExpr op;
  /// Operator multiplied by the imaginary part of a complex sample.
  std::optional<OperatorExpr> quadrature;

  bool operator==(const ControlChannel&) const = default;
};

struct CollapseTerm {
  double rate = 0.0;  // 1 / time-unit
  OperatorExpr op;

  bool operator==(const CollapseTerm&) const = default;
};

inline constexpr double kDefaultQubitFrequency = 2.0 * std::numbers::pi;

/// Backend description. H(t) = sum coef*drift + sum_c s_c(t) * control_c (hbar = 1).
struct SystemModel {
  int n_qubits = 1;
  double dt = 1.0;
  std::vector<DriftTerm> drift;
  std::vector<ControlChannel> control;
  std::vector<CollapseTerm> collapse;
  std::map<std::string, double> lo_delta;
  /// Lab-frame qubit frequencies used to convert LO detuning into a Z drift.
  /// Missing entries default to kDefaultQubitFrequency.
  std::vector<double> qubit_freq;

  int dim() const { return 1 << n_qubits; }
  std::vector<std::string> channels() const;
  std::optional<std::size_t> channel_index(std::string_view channel) const;
  double qubit_frequency(int qubit) const;
  void validate() const;

  bool operator==(const SystemModel&) const = default;
};

/// Reads the model document (keys n_qubits, dt, drift, control, collapse,
/// lo_delta, qubit_freq). Throws ParseError on schema violations.
SystemModel parse_model(const nlohmann::json& doc);
SystemModel parse_model_text(std::string_view text);
nlohmann::json model_to_json(const SystemModel& model);

/// Adds the static frame-mismatch drift -delta * w0_i / 2 * Z_i on every qubit.
SystemModel apply_detuning(const SystemModel& model, double delta);

/// Operator matrices of a model, including the drift implied by `lo_delta`.
struct ModelOperators {
  int n_qubits = 1;
  int dim = 2;
  double dt = 1.0;
  Matrix drift;
  std::vector<std::string> channels;
  std::vector<Matrix> control;
  std::vector<std::optional<Matrix>> quadrature;
  std::vector<double> rates;
  std::vector<Matrix> collapse;

  std::optional<std::size_t> channel_index(std::string_view channel) const;
};

ModelOperators materialize(const SystemModel& model);

}  // namespace qoc
