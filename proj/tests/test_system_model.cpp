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

#include <numbers>
#include <random>

#include <doctest.h>

#include "oracles.hpp"
#include "test_data.hpp"
#include "qoc/system_model.hpp"

using namespace qoc;
using nlohmann::json;

TEST_SUITE("system-model") {
  TEST_CASE("one channel model") {
    const SystemModel m = parse_model(
        json{{"n_qubits", 1}, {"dt", 1.0}, {"drift", json::array()}, {"control", {{{"channel", "d0"}, {"op", "X0"}}}}});
    CHECK(m.n_qubits == 1);
    CHECK(m.channels() == std::vector<std::string>{"d0"});
    CHECK(m.dt == 1.0);
    const ModelOperators ops = materialize(m);
    CHECK(max_abs_diff(ops.control[0], oracle::X()) == 0.0);
    CHECK(ops.drift.isZero());
  }

  TEST_CASE("two-qubit generic model has nine control channels") {
    const SystemModel m = parse_model_text(read_test_file("eq7model.json"));
    CHECK(m.n_qubits == 2);
    CHECK(m.control.size() == 9);
    const ModelOperators ops = materialize(m);
    CHECK(max_abs_diff(ops.control[0], oracle::kron(oracle::X(), oracle::X())) == 0.0);
    CHECK(max_abs_diff(ops.control[2], oracle::kron(oracle::Z(), oracle::Z())) == 0.0);
    CHECK(max_abs_diff(ops.control[8], oracle::kron(oracle::Z(), oracle::I2())) == 0.0);
  }

  TEST_CASE("zero-rate collapse terms leave a closed system") {
    const SystemModel m = parse_model(json{{"n_qubits", 1},
                                           {"dt", 0.5},
                                           {"drift", json::array()},
                                           {"control", {{{"channel", "d0"}, {"op", "X0"}}}},
                                           {"collapse", {{{"rate", 0.0}, {"op", "SM0"}}}}});
    CHECK(materialize(m).collapse.empty());
  }

  TEST_CASE("operator matrices") {
    CHECK(max_abs_diff(build_operator("X0", 1), oracle::X()) == 0.0);
    Matrix anti = Matrix::Zero(4, 4);
    anti(0, 3) = anti(1, 2) = anti(2, 1) = anti(3, 0) = 1.0;
    CHECK(max_abs_diff(build_operator("X0*X1", 2), anti) == 0.0);
    Matrix diag = Matrix::Zero(4, 4);
    diag.diagonal() << 2.0, 0.0, 0.0, -2.0;
    CHECK(max_abs_diff(build_operator("Z0 + Z1", 2), diag) == 0.0);
    CHECK(max_abs_diff(build_operator("0.5*Y1 - 2*Z0", 2),
                       0.5 * oracle::kron(oracle::Y(), oracle::I2()) - 2.0 * oracle::kron(oracle::I2(), oracle::Z())) <
          1e-15);
    // Same-qubit factors multiply as matrices: X0*Y0 = iZ.
    CHECK(max_abs_diff(build_operator("X0*Y0", 1), Complex(0, 1) * oracle::Z()) < 1e-15);
    // SP raises |0> to |1>.
    const Matrix sp = build_operator("SP0", 1);
    CHECK(sp(1, 0) == Complex(1.0));
    CHECK(sp(0, 1) == Complex(0.0));
    CHECK(max_abs_diff(build_operator("SM0", 1), sp.adjoint()) == 0.0);
    CHECK(max_abs_diff(build_operator("SP0*SM0", 1), (oracle::I2() - oracle::Z()) / 2.0) == 0.0);
  }

  TEST_CASE("operator errors") {
    CHECK_THROWS_AS(build_operator("Q0", 1), ParseError);
    CHECK_THROWS_AS(build_operator("X", 1), ParseError);
    CHECK_THROWS_AS(build_operator("X0 +", 1), ParseError);
    CHECK_THROWS_AS(build_operator("X3", 2), ValidationError);
  }

  TEST_CASE("random Pauli expressions are Hermitian and linear") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<int> tok(0, 3), qubit(0, 2), nfac(1, 3);
    std::uniform_real_distribution<double> coef(-2.0, 2.0);
    const char* names = "IXYZ";
    auto term = [&] {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.6f", coef(rng));
      std::string t = buf;
      const int k = nfac(rng);
      std::vector<int> used;
      for (int i = 0; i < k; ++i) {
        int q = qubit(rng);
        if (std::find(used.begin(), used.end(), q) != used.end()) continue;
        used.push_back(q);
        t += std::string("*") + names[tok(rng)] + std::to_string(q);
      }
      return t;
    };
    for (int i = 0; i < 100; ++i) {
      const std::string a = term(), b = term();
      const Matrix ma = build_operator(a, 3), mb = build_operator(b, 3);
      CHECK(hermiticity_defect(ma) <= 1e-14);
      CHECK(max_abs_diff(build_operator(a + " + " + b, 3), ma + mb) <= 1e-14);
    }
  }

  TEST_CASE("serialization round trip") {
    for (const char* name : {"model1q.json", "model1q_x.json", "eq7model.json"}) {
      const SystemModel m = parse_model_text(read_test_file(name));
      const std::string once = model_to_json(m).dump(2);
      const SystemModel again = parse_model_text(once);
      CHECK(again == m);
      CHECK(model_to_json(again).dump(2) == once);
    }
    SystemModel rich;
    rich.n_qubits = 2;
    rich.dt = 0.25;
    rich.drift = {{0.3, OperatorExpr::parse("Z0*Z1")}};
    rich.control = {{"d0", OperatorExpr::parse("X0"), OperatorExpr::parse("Y0")}, {"d1", OperatorExpr::parse("X1"), {}}};
    rich.collapse = {{0.01, OperatorExpr::parse("SM1")}};
    rich.lo_delta = {{"d1", 0.02}};
    rich.qubit_freq = {6.0, 5.5};
    CHECK(parse_model(model_to_json(rich)) == rich);
  }

  TEST_CASE("schema violations") {
    const json base = {{"n_qubits", 1}, {"dt", 1.0}, {"drift", json::array()}, {"control", {{{"channel", "d0"}, {"op", "X0"}}}}};
    auto with = [&](const char* key, json v) {
      json d = base;
      d[key] = std::move(v);
      return d;
    };
    CHECK_THROWS_AS(parse_model(with("nqubits", 1)), ParseError);
    CHECK_THROWS_AS(parse_model(with("dt", -1.0)), ParseError);
    CHECK_THROWS_AS(parse_model(with("dt", "fast")), ParseError);
    CHECK_THROWS_AS(parse_model(with("control", {{{"channel", "d0"}, {"op", "X0"}}, {{"channel", "d0"}, {"op", "Y0"}}})),
                    ParseError);
    CHECK_THROWS_AS(parse_model(with("control", {{{"channel", "d0"}, {"op", "W0"}}})), ParseError);
    CHECK_THROWS_AS(parse_model(with("control", {{{"channel", "d0"}, {"op", "X1"}}})), ParseError);
    CHECK_THROWS_AS(parse_model(with("collapse", {{{"rate", -1.0}, {"op", "SM0"}}})), ParseError);
    CHECK_THROWS_AS(parse_model(with("lo_delta", {{"d9", 0.1}})), ParseError);
    CHECK_THROWS_AS(parse_model_text("{"), ParseError);
  }

  TEST_CASE("detuning adds a static Z drift") {
    const SystemModel m = parse_model_text(read_test_file("model1q.json"));
    CHECK(apply_detuning(m, 0.0) == m);
    const ModelOperators d = materialize(apply_detuning(m, 0.01));
    CHECK(max_abs_diff(d.drift, -0.01 * std::numbers::pi * oracle::Z()) < 1e-15);
    const ModelOperators neg = materialize(apply_detuning(m, -0.01));
    CHECK(max_abs_diff(neg.drift, 0.01 * std::numbers::pi * oracle::Z()) < 1e-15);
    // Per-channel detuning through the model document folds into the same drift.
    SystemModel lo = m;
    lo.lo_delta = {{"d0", 0.01}};
    CHECK(max_abs_diff(materialize(lo).drift, d.drift) < 1e-15);
  }
}
