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

#include "qoc/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

#include "lexer.hpp"

namespace qoc {

namespace {

struct GateInfo {
  GateKind kind;
  std::string_view name;
  int arity;
  int params;
};

constexpr GateInfo kGates[] = {
    {GateKind::X, "X", 1, 0},       {GateKind::Y, "Y", 1, 0},         {GateKind::Z, "Z", 1, 0},
    {GateKind::H, "H", 1, 0},       {GateKind::Rx, "Rx", 1, 1},       {GateKind::Ry, "Ry", 1, 1},
    {GateKind::Rz, "Rz", 1, 1},     {GateKind::CNOT, "CNOT", 2, 0},   {GateKind::CZ, "CZ", 2, 0},
    {GateKind::CPhase, "CPhase", 2, 1}, {GateKind::Swap, "Swap", 2, 0},
};

const GateInfo& info(GateKind kind) {
  for (const auto& g : kGates) {
    if (g.kind == kind) return g;
  }
  throw ValidationError("unknown gate kind");
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
         });
}

// Anything beyond this cannot be represented densely anyway.
constexpr int kMaxQubitIndex = 30;

}  // namespace

std::string_view gate_name(GateKind kind) { return info(kind).name; }

std::optional<GateKind> gate_kind_from_name(std::string_view name) {
  for (const auto& g : kGates) {
    if (iequals(g.name, name)) return g.kind;
  }
  return std::nullopt;
}

int gate_arity(GateKind kind) { return info(kind).arity; }

int gate_param_count(GateKind kind) { return info(kind).params; }

bool Gate::is_concrete() const {
  return std::all_of(params.begin(), params.end(), [](const Expr& e) { return e.is_constant(); });
}

Gate make_gate(GateKind kind, std::vector<int> targets, std::vector<Expr> params) {
  const auto& gi = info(kind);
  if (static_cast<int>(targets.size()) != gi.arity) {
    throw ValidationError(std::string(gi.name) + " expects " + std::to_string(gi.arity) + " qubit(s), got " +
                          std::to_string(targets.size()));
  }
  if (static_cast<int>(params.size()) != gi.params) {
    throw ValidationError(std::string(gi.name) + " expects " + std::to_string(gi.params) + " parameter(s), got " +
                          std::to_string(params.size()));
  }
  for (int t : targets) {
    if (t < 0) throw ValidationError("negative qubit index");
  }
  if (targets.size() == 2 && targets[0] == targets[1]) {
    throw ValidationError(std::string(gi.name) + " needs two distinct qubits");
  }
  return Gate{kind, std::move(targets), std::move(params)};
}

bool Circuit::is_concrete() const {
  return free_params.empty() && std::all_of(gates.begin(), gates.end(), [](const Gate& g) { return g.is_concrete(); });
}

void Circuit::validate() const {
  if (n_qubits <= 0) throw ValidationError("circuit needs at least one qubit");
  for (const auto& g : gates) {
    for (int t : g.targets) {
      if (t >= n_qubits) {
        throw ValidationError("qubit index " + std::to_string(t) + " out of range for " + std::to_string(n_qubits) +
                              "-qubit circuit");
      }
    }
  }
}

Circuit parse_circuit(std::string_view source, std::optional<int> n_qubits) {
  detail::Lexer lx(source);
  Circuit circuit;
  std::optional<std::vector<std::string>> declared;
  std::string reg_name;
  bool kernel = false;

  if (lx.peek().kind == detail::TokenKind::Identifier && lx.peek().text == "__qpu__") {
    kernel = true;
    lx.next();
    auto ret = lx.expect_identifier("'void'");
    if (ret.text != "void") throw lx.error_at(ret, "expected 'void'");
    lx.expect_identifier("kernel name");
    lx.expect('(');
    auto qtype = lx.expect_identifier("'qbit'");
    if (qtype.text != "qbit" && qtype.text != "qreg") throw lx.error_at(qtype, "first kernel argument must be a qbit");
    reg_name = lx.expect_identifier("register name").text;
    declared.emplace();
    while (lx.accept(',')) {
      auto type = lx.expect_identifier("'double'");
      if (type.text != "double") throw lx.error_at(type, "kernel parameters must be 'double'");
      auto name = lx.expect_identifier("parameter name");
      if (std::find(declared->begin(), declared->end(), name.text) != declared->end()) {
        throw lx.error_at(name, "duplicate parameter '" + name.text + "'");
      }
      declared->push_back(name.text);
    }
    lx.expect(')');
    lx.expect('{');
  }

  std::vector<std::string> free;
  if (declared) free = *declared;
  int max_index = -1;

  while (!lx.at_end() && !(kernel && lx.peek().is('}'))) {
    auto name_tok = lx.expect_identifier("gate name");
    auto kind = gate_kind_from_name(name_tok.text);
    if (!kind) throw lx.error_at(name_tok, "unknown gate '" + name_tok.text + "'");
    lx.expect('(');

    std::vector<int> targets;
    std::vector<Expr> params;
    bool first = true;
    do {
      // A qubit operand looks like  ident '[' ...
      if (lx.peek().kind == detail::TokenKind::Identifier && lx.peek(1).is('[')) {
        if (!params.empty()) throw lx.error("qubit operands must precede parameters");
        auto reg = lx.next();
        if (reg_name.empty()) reg_name = reg.text;
        if (reg.text != reg_name) throw lx.error_at(reg, "unknown register '" + reg.text + "'");
        lx.expect('[');
        auto idx_tok = lx.expect_number("qubit index");
        double idx = idx_tok.number;
        if (idx != std::floor(idx) || idx < 0) throw lx.error_at(idx_tok, "qubit index must be a non-negative integer");
        if (idx > kMaxQubitIndex || (n_qubits && idx >= *n_qubits)) {
          throw lx.error_at(idx_tok, "qubit index " + idx_tok.text + " out of range");
        }
        lx.expect(']');
        targets.push_back(static_cast<int>(idx));
      } else {
        if (first) throw lx.error("expected qubit operand");
        auto start = lx.peek();
        auto expr = parse_expression(lx);
        for (const auto& v : expr.variables()) {
          if (std::find(free.begin(), free.end(), v) != free.end()) continue;
          if (declared) throw lx.error_at(start, "undeclared identifier '" + v + "'");
          free.push_back(v);
        }
        params.push_back(std::move(expr));
      }
      first = false;
    } while (lx.accept(','));
    lx.expect(')');
    lx.expect(';');

    try {
      auto gate = make_gate(*kind, std::move(targets), std::move(params));
      for (int t : gate.targets) max_index = std::max(max_index, t);
      circuit.gates.push_back(std::move(gate));
    } catch (const ValidationError& e) {
      throw lx.error_at(name_tok, e.what());
    }
  }

  if (kernel) {
    lx.expect('}');
    if (!lx.at_end()) throw lx.error("unexpected " + detail::describe(lx.peek()) + " after kernel body");
  }

  circuit.n_qubits = n_qubits ? *n_qubits : std::max(1, max_index + 1);
  circuit.free_params = std::move(free);
  circuit.validate();
  return circuit;
}

Circuit eval_parametric(const Circuit& circuit, std::span<const double> values) {
  if (values.size() != circuit.free_params.size()) {
    throw ValidationError("expected " + std::to_string(circuit.free_params.size()) + " parameter value(s), got " +
                          std::to_string(values.size()));
  }
  std::map<std::string, double> env;
  for (std::size_t i = 0; i < values.size(); ++i) env[circuit.free_params[i]] = values[i];

  Circuit out;
  out.n_qubits = circuit.n_qubits;
  out.gates.reserve(circuit.gates.size());
  for (const auto& g : circuit.gates) {
    Gate bound = g;
    for (auto& p : bound.params) p = p.substitute(env);
    out.gates.push_back(std::move(bound));
  }
  return out;
}

Matrix gate_matrix(const Gate& gate) {
  if (!gate.is_concrete()) {
    throw ValidationError(std::string(gate.name()) + " has a symbolic parameter; bind it first");
  }
  const double theta = gate.params.empty() ? 0.0 : gate.params[0].value();
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  const double r = 1.0 / std::sqrt(2.0);

  Matrix m;
  switch (gate.kind) {
    case GateKind::X:
      m = Matrix(2, 2);
      m << 0, 1, 1, 0;
      break;
    case GateKind::Y:
      m = Matrix(2, 2);
      m << 0, -kI, kI, 0;
      break;
    case GateKind::Z:
      m = Matrix(2, 2);
      m << 1, 0, 0, -1;
      break;
    case GateKind::H:
      m = Matrix(2, 2);
      m << r, r, r, -r;
      break;
    case GateKind::Rx:
      m = Matrix(2, 2);
      m << c, -kI * s, -kI * s, c;
      break;
    case GateKind::Ry:
      m = Matrix(2, 2);
      m << c, -s, s, c;
      break;
    case GateKind::Rz:
      m = Matrix(2, 2);
      m << std::exp(-kI * (theta / 2)), 0, 0, std::exp(kI * (theta / 2));
      break;
    case GateKind::CNOT:
      m = Matrix::Zero(4, 4);
      m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1;
      break;
    case GateKind::CZ:
      m = Matrix::Identity(4, 4);
      m(3, 3) = -1;
      break;
    case GateKind::CPhase:
      m = Matrix::Identity(4, 4);
      m(3, 3) = std::exp(kI * theta);
      break;
    case GateKind::Swap:
      m = Matrix::Zero(4, 4);
      m(0, 0) = m(1, 2) = m(2, 1) = m(3, 3) = 1;
      break;
  }
  return m;
}

Matrix embed_gate(const Matrix& local, std::span<const int> targets, int n_qubits) {
  const auto k = static_cast<int>(targets.size());
  if (local.rows() != (1 << k) || local.cols() != (1 << k)) throw ValidationError("gate matrix size mismatch");
  int mask = 0;
  for (int t : targets) {
    if (t < 0 || t >= n_qubits) throw ValidationError("qubit index out of range");
    mask |= 1 << t;
  }
  // First target is the most significant bit of the local index.
  auto local_index = [&](int basis) {
    int idx = 0;
    for (int t : targets) idx = (idx << 1) | ((basis >> t) & 1);
    return idx;
  };
  const int dim = 1 << n_qubits;
  Matrix full = Matrix::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      if ((i & ~mask) != (j & ~mask)) continue;
      full(i, j) = local(local_index(i), local_index(j));
    }
  }
  return full;
}

Matrix circuit_unitary(const Circuit& circuit, int max_qubits) {
  if (!circuit.is_concrete()) {
    throw ValidationError("circuit has unresolved free parameters");
  }
  if (circuit.n_qubits > max_qubits) {
    throw ValidationError("circuit has " + std::to_string(circuit.n_qubits) + " qubits; the dense cap is " +
                          std::to_string(max_qubits));
  }
  circuit.validate();
  const int dim = 1 << circuit.n_qubits;
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& g : circuit.gates) {
    u = embed_gate(gate_matrix(g), g.targets, circuit.n_qubits) * u;
  }
  return u;
}

}  // namespace qoc
