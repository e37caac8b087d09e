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

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qoc/common.hpp"
#include "qoc/expr.hpp"

namespace qoc {

enum class GateKind { X, Y, Z, H, Rx, Ry, Rz, CNOT, CZ, CPhase, Swap };

std::string_view gate_name(GateKind kind);
/// Case-insensitive lookup of a gate mnemonic.
std::optional<GateKind> gate_kind_from_name(std::string_view name);
int gate_arity(GateKind kind);
int gate_param_count(GateKind kind);

struct Gate {
  GateKind kind = GateKind::X;
  std::vector<int> targets;
  std::vector<Expr> params;  // radians; may reference free parameters

  std::string_view name() const { return gate_name(kind); }
  bool is_concrete() const;
};

/// Builds a gate and checks target/parameter arity.
Gate make_gate(GateKind kind, std::vector<int> targets, std::vector<Expr> params = {});

/// Gate-level program. Qubit 0 is the least-significant bit of a basis index.
struct Circuit {
  int n_qubits = 1;
  std::vector<Gate> gates;
  std::vector<std::string> free_params;

  bool is_concrete() const;
  void validate() const;
};

/// Parses the assembly dialect:
///
///     [__qpu__ void name(qbit q[, double p]...) {]
///       Name(q[i][, q[j]][, expr]);
///     [}]
///
/// Without the kernel header, every identifier other than `pi` becomes a free
/// parameter in order of first use. With it, identifiers must be declared.
/// When `n_qubits` is omitted it is inferred as max index + 1.
Circuit parse_circuit(std::string_view source, std::optional<int> n_qubits = std::nullopt);

/// Substitutes `values` for the circuit's free parameters (same order).
Circuit eval_parametric(const Circuit& circuit, std::span<const double> values);

/// 2x2 or 4x4 unitary. For two-qubit gates the first target is the more
/// significant bit of the local index, e.g. CNOT(control, target).
Matrix gate_matrix(const Gate& gate);

/// Lifts a 1- or 2-qubit matrix acting on `targets` to the full 2^n space.
Matrix embed_gate(const Matrix& local, std::span<const int> targets, int n_qubits);

inline constexpr int kDefaultMaxQubits = 4;

/// U = G_last ... G_first over 2^n_qubits.
Matrix circuit_unitary(const Circuit& circuit, int max_qubits = kDefaultMaxQubits);

}  // namespace qoc
