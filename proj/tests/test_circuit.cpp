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

#include <cmath>
#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "qoc/circuit.hpp"

using namespace qoc;
using std::numbers::pi;

namespace {

Matrix cnot_oracle() {
  // control = more significant local bit
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(1, 1) = m(2, 3) = m(3, 2) = 1.0;
  return m;
}

Matrix cphase_oracle(double phi) {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = std::polar(1.0, phi);
  return m;
}

Matrix swap_oracle() {
  Matrix m = Matrix::Zero(4, 4);
  m(0, 0) = m(3, 3) = m(1, 2) = m(2, 1) = 1.0;
  return m;
}

Circuit random_circuit(std::mt19937_64& rng, int n, int length) {
  const GateKind kinds[] = {GateKind::X,  GateKind::Y,    GateKind::Z,      GateKind::H,   GateKind::Rx, GateKind::Ry,
                            GateKind::Rz, GateKind::CNOT, GateKind::CPhase, GateKind::Swap, GateKind::CZ};
  std::uniform_int_distribution<int> pick(0, 10), qubit(0, n - 1);
  std::uniform_real_distribution<double> angle(-pi, pi);
  Circuit c;
  c.n_qubits = n;
  while (static_cast<int>(c.gates.size()) < length) {
    const GateKind k = kinds[pick(rng)];
    std::vector<int> targets{qubit(rng)};
    if (gate_arity(k) == 2) {
      if (n < 2) continue;
      int b = qubit(rng);
      while (b == targets[0]) b = qubit(rng);
      targets.push_back(b);
    }
    std::vector<Expr> params;
    if (gate_param_count(k)) params.push_back(Expr::number(angle(rng)));
    c.gates.push_back(make_gate(k, targets, params));
  }
  return c;
}

}  // namespace

TEST_SUITE("circuit") {
  TEST_CASE("single gate program") {
    const Circuit c = parse_circuit("X(q[0]);", 1);
    REQUIRE(c.gates.size() == 1);
    CHECK(c.gates[0].kind == GateKind::X);
    CHECK(c.gates[0].targets == std::vector<int>{0});
    CHECK(c.free_params.empty());
  }

  TEST_CASE("two gate Hadamard sequence") {
    const Circuit c = parse_circuit("Ry(q[0], pi/2); X(q[0]);");
    REQUIRE(c.gates.size() == 2);
    CHECK(c.gates[0].kind == GateKind::Ry);
    CHECK(c.gates[0].params[0].value() == doctest::Approx(pi / 2));
    CHECK(c.gates[1].kind == GateKind::X);
    CHECK(c.free_params.empty());
    CHECK(c.n_qubits == 1);
  }

  TEST_CASE("symbolic angle becomes a free parameter") {
    const Circuit c = parse_circuit("Rx(q[0], theta);");
    CHECK(c.free_params == std::vector<std::string>{"theta"});
    CHECK_FALSE(c.is_concrete());
    CHECK_THROWS_AS(circuit_unitary(c), ValidationError);
  }

  TEST_CASE("kernel header declares parameters") {
    const Circuit c = parse_circuit("__qpu__ void f(qbit q, double theta) {\n  Rx(q[0], theta);\n  H(q[1]);\n}\n");
    CHECK(c.n_qubits == 2);
    CHECK(c.free_params == std::vector<std::string>{"theta"});
    CHECK_THROWS_AS(parse_circuit("__qpu__ void f(qbit q) { Rx(q[0], phi); }"), ParseError);
  }

  TEST_CASE("comments and statement separators") {
    const Circuit c = parse_circuit("// prepare\nH(q[0]); // superpose\nCNOT(q[0], q[1]);\n");
    CHECK(c.gates.size() == 2);
  }

  TEST_CASE("errors carry positions") {
    try {
      parse_circuit("X(q[0]);\nFoo(q[0]);");
      FAIL("expected a parse error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(e.column() == 1);
      CHECK(std::string(e.what()).find("Foo") != std::string::npos);
    }
    try {
      parse_circuit("X(q[3]);", 2);
      FAIL("expected a range error");
    } catch (const ParseError& e) {
      CHECK(e.line() == 1);
      CHECK(e.column() == 5);
    }
    CHECK_THROWS_AS(parse_circuit("X(q[0])"), ParseError);
    CHECK_THROWS_AS(parse_circuit("CNOT(q[0]);"), ParseError);
    CHECK_THROWS_AS(parse_circuit("CNOT(q[1], q[1]);"), ParseError);
    CHECK_THROWS_AS(parse_circuit("Rx(q[0]);"), ParseError);
  }

  TEST_CASE("binding parameters") {
    const Circuit c = parse_circuit("Rx(q[0], theta);");
    const Circuit at_pi = eval_parametric(c, std::vector<double>{pi});
    CHECK(at_pi.free_params.empty());
    CHECK(at_pi.gates[0].params[0].value() == doctest::Approx(pi));
    CHECK(eval_parametric(c, std::vector<double>{0.5}).gates[0].params[0].value() == 0.5);
    CHECK_THROWS_AS(eval_parametric(c, std::vector<double>{}), ValidationError);
    CHECK_THROWS_AS(eval_parametric(c, std::vector<double>{1.0, 2.0}), ValidationError);
  }

  TEST_CASE("standard gate matrices") {
    CHECK(max_abs_diff(gate_matrix(make_gate(GateKind::X, {0})), oracle::X()) == 0.0);
    CHECK(max_abs_diff(gate_matrix(make_gate(GateKind::Rx, {0}, {Expr::number(0.0)})), oracle::I2()) < 1e-15);
    const Matrix ry = gate_matrix(make_gate(GateKind::Ry, {0}, {Expr::number(pi / 2)}));
    CHECK(max_abs_diff(ry, oracle::mat2(1, -1, 1, 1) / std::sqrt(2.0)) < 1e-15);
    const Matrix rx = gate_matrix(make_gate(GateKind::Rx, {0}, {Expr::number(0.7)}));
    CHECK(max_abs_diff(rx, oracle::propagator(oracle::X(), 0.35)) < 1e-13);
    const Matrix rz = gate_matrix(make_gate(GateKind::Rz, {0}, {Expr::number(-1.3)}));
    CHECK(max_abs_diff(rz, oracle::propagator(oracle::Z(), -0.65)) < 1e-13);
    CHECK(max_abs_diff(gate_matrix(make_gate(GateKind::CNOT, {0, 1})), cnot_oracle()) == 0.0);
    CHECK_THROWS_AS(gate_matrix(make_gate(GateKind::Rx, {0}, {Expr::parse("theta")})), ValidationError);
  }

  TEST_CASE("qubit zero is the least significant bit") {
    // CNOT with control q0 and target q1: |q1 q0> = |01> (index 1) -> |11> (index 3).
    const Matrix u = circuit_unitary(parse_circuit("CNOT(q[0], q[1]);"));
    const int expected[4] = {0, 3, 2, 1};
    for (int in = 0; in < 4; ++in) {
      for (int out = 0; out < 4; ++out) CHECK(std::abs(u(out, in)) == (out == expected[in] ? 1.0 : 0.0));
    }
    const Matrix x1 = circuit_unitary(parse_circuit("X(q[1]);"));
    CHECK(max_abs_diff(x1, oracle::kron(oracle::X(), oracle::I2())) == 0.0);
  }

  TEST_CASE("Pauli X circuit") {
    CHECK(max_abs_diff(circuit_unitary(parse_circuit("X(q[0]);")), oracle::X()) == 0.0);
  }

  TEST_CASE("Y half-rotation followed by X is exactly Hadamard") {
    const Matrix u = circuit_unitary(parse_circuit("Ry(q[0], pi/2); X(q[0]);"));
    CHECK(max_abs_diff(u, oracle::H()) < 1e-15);
  }

  TEST_CASE("two-qubit Fourier transform") {
    const Matrix u = circuit_unitary(parse_circuit("H(q[1]); CPhase(q[0], q[1], pi/2); H(q[0]); Swap(q[0], q[1]);"));
    Matrix dft(4, 4);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) dft(k, j) = std::polar(0.5, pi / 2 * j * k);
    CHECK(max_abs_diff(u, dft) < 1e-14);
    // Brute-force product of the embedded gate matrices.
    const Matrix brute = swap_oracle() * oracle::kron(oracle::I2(), oracle::H()) * cphase_oracle(pi / 2) *
                         oracle::kron(oracle::H(), oracle::I2());
    CHECK(max_abs_diff(u, brute) < 1e-14);
  }

  TEST_CASE("embedding agrees with Kronecker products") {
    std::mt19937_64 rng(5);
    for (int n = 1; n <= 4; ++n) {
      for (int q = 0; q < n; ++q) {
        const Matrix local = oracle::random_unitary(rng, 2);
        const int t[1] = {q};
        CHECK(max_abs_diff(embed_gate(local, t, n), oracle::on_qubit(local, q, n)) < 1e-14);
      }
    }
    // Two-qubit gate on non-adjacent, reversed qubits: CNOT(q2, q0) on 3 qubits.
    const int t[2] = {2, 0};
    const Matrix u = embed_gate(cnot_oracle(), t, 3);
    for (int in = 0; in < 8; ++in) {
      const int out = (in & 4) ? in ^ 1 : in;
      CHECK(std::abs(u(out, in)) == 1.0);
    }
  }

  TEST_CASE("random circuits are unitary") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
      const Circuit c = random_circuit(rng, 1 + trial % 4, 12);
      CHECK(unitarity_defect(circuit_unitary(c)) <= 1e-10);
    }
  }

  TEST_CASE("unitary of a concatenation is the product") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 30; ++trial) {
      const int n = 1 + trial % 3;
      const Circuit a = random_circuit(rng, n, 3);
      const Circuit b = random_circuit(rng, n, 3);
      Circuit ab = a;
      ab.gates.insert(ab.gates.end(), b.gates.begin(), b.gates.end());
      CHECK(max_abs_diff(circuit_unitary(ab), circuit_unitary(b) * circuit_unitary(a)) <= 1e-12);
    }
  }

  TEST_CASE("opposite rotations cancel") {
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> angle(-10.0, 10.0);
    for (GateKind k : {GateKind::Rx, GateKind::Ry, GateKind::Rz}) {
      for (int i = 0; i < 100; ++i) {
        const double th = angle(rng);
        const Matrix p = gate_matrix(make_gate(k, {0}, {Expr::number(th)})) *
                         gate_matrix(make_gate(k, {0}, {Expr::number(-th)}));
        CHECK(max_abs_diff(p, oracle::I2()) <= 1e-12);
      }
    }
  }

  TEST_CASE("binding then building equals literal angles") {
    const Circuit param = parse_circuit("Rx(q[0], a); CPhase(q[0], q[1], 2*b - a); Ry(q[1], -b/3);");
    CHECK(param.free_params == std::vector<std::string>{"a", "b"});
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> angle(-pi, pi);
    for (int i = 0; i < 20; ++i) {
      const double a = angle(rng), b = angle(rng);
      char src[256];
      std::snprintf(src, sizeof src, "Rx(q[0], %.17g); CPhase(q[0], q[1], %.17g); Ry(q[1], %.17g);", a, 2 * b - a,
                    -b / 3);
      const Matrix literal = circuit_unitary(parse_circuit(src));
      const Matrix bound = circuit_unitary(eval_parametric(param, std::vector<double>{a, b}));
      CHECK(max_abs_diff(literal, bound) <= 1e-14);
    }
  }

  TEST_CASE("dimension cap") {
    const Circuit c = parse_circuit("X(q[4]);");
    CHECK(c.n_qubits == 5);
    CHECK_THROWS_AS(circuit_unitary(c), ValidationError);
    CHECK(circuit_unitary(c, 5).rows() == 32);
  }
}
