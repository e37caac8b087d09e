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
#include "qoc/dynamics.hpp"

using namespace qoc;
using std::numbers::pi;

namespace {

SystemModel xy_model(double dt) {
  SystemModel m;
  m.n_qubits = 1;
  m.dt = dt;
  m.control = {{"d0", OperatorExpr::parse("X0"), {}}, {"d1", OperatorExpr::parse("Y0"), {}}};
  return m;
}

SystemModel random_model(std::mt19937_64& rng, int n) {
  const char* paulis[] = {"X", "Y", "Z"};
  std::uniform_int_distribution<int> p(0, 2);
  std::uniform_real_distribution<double> c(-1.0, 1.0);
  SystemModel m;
  m.n_qubits = n;
  m.dt = 0.1;
  for (int q = 0; q < n; ++q) {
    m.drift.push_back({c(rng), OperatorExpr::parse(std::string(paulis[p(rng)]) + std::to_string(q))});
    m.control.push_back({"x" + std::to_string(q), OperatorExpr::parse("X" + std::to_string(q)), {}});
    m.control.push_back({"y" + std::to_string(q), OperatorExpr::parse("Y" + std::to_string(q)), {}});
  }
  if (n == 2) m.control.push_back({"zz", OperatorExpr::parse("Z0*Z1"), {}});
  return m;
}

SampledSignal random_signal(std::mt19937_64& rng, const SystemModel& m, std::size_t n, double scale = 1.0) {
  std::uniform_real_distribution<double> a(-scale, scale);
  SampledSignal s = SampledSignal::zeros(m.dt, n, m.channels());
  for (auto& ch : s.samples)
    for (auto& v : ch) v = a(rng);
  return s;
}

// Same product, built from the Taylor-series exponential.
Matrix oracle_propagator(const SystemModel& m, const SampledSignal& s) {
  const ModelOperators ops = materialize(m);
  Matrix u = Matrix::Identity(ops.dim, ops.dim);
  for (std::size_t k = 0; k < s.n_samples; ++k) {
    Matrix h = ops.drift;
    for (std::size_t c = 0; c < ops.control.size(); ++c) h += s.samples[c][k].real() * ops.control[c];
    u = oracle::propagator(h, s.dt) * u;
  }
  return u;
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("matrix exponential closed forms") {
    CHECK(max_abs_diff(expm_hermitian(oracle::X(), pi / 2), Complex(0, -1) * oracle::X()) < 1e-15);
    CHECK(max_abs_diff(expm_hermitian(Matrix::Zero(2, 2), 1.0), oracle::I2()) == 0.0);
    CHECK(max_abs_diff(expm_hermitian(oracle::Z(), pi), -oracle::I2()) < 1e-15);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
      const Matrix h = oracle::random_hermitian(rng, 4);
      const Matrix u = expm_hermitian(h, 0.7);
      CHECK(max_abs_diff(u, oracle::propagator(h, 0.7)) < 1e-12);
      CHECK(unitarity_defect(u) <= 1e-10);
    }
    Matrix bad = oracle::X();
    bad(0, 1) = 2.0;
    CHECK_THROWS_AS(expm_hermitian(bad, 1.0), ValidationError);
  }

  TEST_CASE("piecewise propagator") {
    const SystemModel m = xy_model(0.5);
    CHECK(max_abs_diff(piecewise_propagator(m, SampledSignal::zeros(0.5, 8, m.channels())), oracle::I2()) == 0.0);

    // Constant u on X with u * tau = pi/2 is an X gate.
    SampledSignal s = SampledSignal::zeros(0.5, 20, m.channels());
    for (auto& v : s.samples[0]) v = pi / 2 / s.duration();
    const Matrix u = piecewise_propagator(m, s);
    CHECK(oracle::infidelity(u, oracle::X()) <= 1e-12);

    // Commuting X segments collapse into one segment carrying the total area.
    SampledSignal two = SampledSignal::zeros(0.5, 2, m.channels());
    two.samples[0] = {0.3, 1.1};
    SampledSignal one = SampledSignal::zeros(1.0, 1, m.channels());
    one.samples[0] = {0.7};
    CHECK(max_abs_diff(piecewise_propagator(m, two), piecewise_propagator(m, one)) < 1e-14);

    std::mt19937_64 rng(2);
    const SystemModel m2 = random_model(rng, 2);
    const SampledSignal r = random_signal(rng, m2, 30);
    CHECK(max_abs_diff(piecewise_propagator(m2, r), oracle_propagator(m2, r)) < 1e-11);
  }

  TEST_CASE("channel and sample checks") {
    const SystemModel m = xy_model(0.5);
    SampledSignal s = SampledSignal::zeros(0.5, 4, {"d0", "dz"});
    CHECK_THROWS_AS(piecewise_propagator(m, s), ValidationError);
    SampledSignal imag = SampledSignal::zeros(0.5, 2, m.channels());
    imag.samples[0][0] = Complex(0.0, 1.0);
    CHECK_THROWS_AS(piecewise_propagator(m, imag), ValidationError);

    // A declared quadrature partner takes the imaginary part.
    SystemModel iq = m;
    iq.control = {{"d0", OperatorExpr::parse("X0"), OperatorExpr::parse("Y0")}};
    SampledSignal z = SampledSignal::zeros(0.5, 1, iq.channels());
    z.samples[0][0] = Complex(0.4, -0.8);
    CHECK(max_abs_diff(piecewise_propagator(iq, z), oracle::propagator(0.4 * oracle::X() - 0.8 * oracle::Y(), 0.5)) <
          1e-13);
  }

  TEST_CASE("random signals stay unitary") {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
      const SystemModel m = random_model(rng, 1 + i % 2);
      const Matrix u = piecewise_propagator(m, random_signal(rng, m, 25, 2.0));
      CHECK(unitarity_defect(u) <= 1e-9);
    }
  }

  TEST_CASE("propagation composes over split windows") {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
      const SystemModel m = random_model(rng, 1 + i % 2);
      const SampledSignal s = random_signal(rng, m, 16);
      SampledSignal a = s, b = s;
      a.n_samples = b.n_samples = 8;
      for (std::size_t c = 0; c < s.samples.size(); ++c) {
        a.samples[c].assign(s.samples[c].begin(), s.samples[c].begin() + 8);
        b.samples[c].assign(s.samples[c].begin() + 8, s.samples[c].end());
      }
      CHECK(max_abs_diff(piecewise_propagator(m, s), piecewise_propagator(m, b) * piecewise_propagator(m, a)) <= 1e-10);
    }
  }

  TEST_CASE("state propagation follows the unitary") {
    std::mt19937_64 rng(5);
    const SystemModel m = random_model(rng, 2);
    const SampledSignal s = random_signal(rng, m, 12);
    const auto states = propagate_state(materialize(m), s, basis_state({1, 0}));
    REQUIRE(states.size() == 13);
    CHECK((states.back() - piecewise_propagator(m, s).col(1)).cwiseAbs().maxCoeff() < 1e-13);
  }

  TEST_CASE("RK3 agrees with the piecewise product on held samples") {
    std::mt19937_64 rng(6);
    for (int i = 0; i < 10; ++i) {
      const SystemModel m = random_model(rng, 1 + i % 2);
      const SampledSignal s = random_signal(rng, m, 20);
      const ContinuousEvolution ev = evolve_continuous(materialize(m), s);
      CHECK(unitarity_defect(ev.unitary) <= 1e-7);
      CHECK(max_abs_diff(ev.unitary, piecewise_propagator(m, s)) <= 1e-7);
    }
  }

  TEST_CASE("RK3 with analytic envelopes") {
    const SystemModel m = [] {
      SystemModel x;
      x.n_qubits = 1;
      x.dt = 1.0;
      x.control = {{"d0", OperatorExpr::parse("X0"), {}}};
      return x;
    }();
    const ModelOperators ops = materialize(m);

    const ContinuousEvolution zero = evolve_continuous(ops, {{"d0"}, {[](double) { return Complex(0.0); }}}, 10.0);
    CHECK(max_abs_diff(zero.unitary, oracle::I2()) == 0.0);

    const ContinuousEvolution flat = evolve_continuous(ops, {{"d0"}, {[](double) { return Complex(0.3); }}}, 10.0);
    SampledSignal s = SampledSignal::zeros(1.0, 10, {"d0"});
    for (auto& v : s.samples[0]) v = 0.3;
    CHECK(max_abs_diff(flat.unitary, piecewise_propagator(ops, s)) <= 1e-8);

    // The rotation angle of a Gaussian on X is its area.
    const double sigma = 8.0;
    auto gauss = [sigma](double t) { return std::exp(-t * t / (2 * sigma * sigma)); };
    const ContinuousEvolution g = evolve_continuous(ops, {{"d0"}, {[&](double t) { return Complex(gauss(t)); }}}, 100.0);
    const double area = oracle::simpson(gauss, 0.0, 100.0, 200000);
    CHECK(max_abs_diff(g.unitary, oracle::propagator(oracle::X(), area)) <= 1e-6);

    CHECK_THROWS_AS(evolve_continuous(ops, {{"d0"}, {[](double) { return Complex(NAN); }}}, 1.0), NumericalError);
  }

  TEST_CASE("Lindblad without collapse matches the unitary") {
    std::mt19937_64 rng(7);
    const SystemModel m = random_model(rng, 2);
    const SampledSignal s = random_signal(rng, m, 15);
    const Matrix rho0 = density(basis_state({0, 1}));
    const auto rhos = lindblad_evolve(materialize(m), s, rho0);
    const Matrix u = piecewise_propagator(m, s);
    CHECK(max_abs_diff(rhos.back(), u * rho0 * u.adjoint()) <= 1e-7);
  }

  TEST_CASE("amplitude damping") {
    const double t1 = 7.0;
    SystemModel m = xy_model(0.5);
    m.collapse = {{1.0 / t1, OperatorExpr::parse("SM0")}};
    const ModelOperators ops = materialize(m);
    const SampledSignal idle = SampledSignal::zeros(0.5, 40, m.channels());
    const auto decay = lindblad_evolve(ops, idle, density(basis_state({1})));
    for (std::size_t k = 0; k < decay.size(); ++k) {
      const double t = 0.5 * static_cast<double>(k);
      CHECK(std::abs(decay[k](1, 1).real() - std::exp(-t / t1)) <= 1e-6);
    }
    const auto ground = lindblad_evolve(ops, idle, density(basis_state({0})));
    CHECK(max_abs_diff(ground.back(), density(basis_state({0}))) < 1e-15);
  }

  TEST_CASE("driven dissipative evolution keeps trace and Hermiticity") {
    std::mt19937_64 rng(8);
    SystemModel m = random_model(rng, 2);
    m.collapse = {{0.05, OperatorExpr::parse("SM0")}, {0.08, OperatorExpr::parse("SM1")}, {0.02, OperatorExpr::parse("Z0")}};
    const auto rhos = lindblad_evolve(materialize(m), random_signal(rng, m, 30), density(basis_state({1, 1})));
    for (const Matrix& r : rhos) {
      CHECK(std::abs(r.trace() - Complex(1.0)) <= 1e-7);
      CHECK(hermiticity_defect(r) <= 1e-8);
    }
  }

  TEST_CASE("negative rates are rejected") {
    ModelOperators ops = materialize(xy_model(0.5));
    ops.rates = {-0.1};
    ops.collapse = {build_operator("SM0", 1)};
    CHECK_THROWS_AS(lindblad_evolve(ops, SampledSignal::zeros(0.5, 2, ops.channels), density(basis_state({0}))),
                    ValidationError);
  }

  TEST_CASE("expectation values") {
    CHECK(expectation(oracle::Z(), basis_state({0})) == doctest::Approx(1.0));
    const Vector plus = oracle::H() * basis_state({0});
    CHECK(expectation(oracle::X(), plus) == doctest::Approx(1.0));
    CHECK(expectation(oracle::Z(), Matrix(Matrix::Identity(2, 2) / 2.0)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(expectation(oracle::Z(), basis_state({0, 0})), ValidationError);
    Matrix nh = oracle::X();
    nh(0, 1) = 3.0;
    CHECK_THROWS_AS(expectation(nh, basis_state({0})), ValidationError);
  }

  TEST_CASE("static detuning matches a lab-frame simulation") {
    // Lab frame: H = (w0/2) Z + 2 W cos(wL t) X with wL = (1 + delta) w0.
    const double w0 = 2 * pi, delta = 0.01, drive = 0.02, tau = 50.0;
    const double wl = (1 + delta) * w0;
    SystemModel lab;
    lab.n_qubits = 1;
    lab.dt = 0.1;
    lab.drift = {{w0 / 2, OperatorExpr::parse("Z0")}};
    lab.control = {{"d0", OperatorExpr::parse("X0"), {}}};
    const ContinuousEvolution ev = evolve_continuous(
        materialize(lab), {{"d0"}, {[&](double t) { return Complex(2 * drive * std::cos(wl * t)); }}}, tau);
    // Move into the frame rotating at wL.
    const Matrix frame = oracle::propagator(oracle::Z(), -wl * tau / 2);
    const Vector lab_state = frame * ev.unitary.col(0);

    SystemModel rot;
    rot.n_qubits = 1;
    rot.dt = 0.1;
    rot.control = {{"d0", OperatorExpr::parse("X0"), {}}};
    SampledSignal s = SampledSignal::zeros(0.1, 500, {"d0"});
    for (auto& v : s.samples[0]) v = drive;
    const Vector rot_state = piecewise_propagator(apply_detuning(rot, delta), s).col(0);
    CHECK((lab_state - rot_state).cwiseAbs().maxCoeff() < 5e-3);
    // The wrong sign of the frame shift is clearly distinguishable.
    const Vector wrong = piecewise_propagator(apply_detuning(rot, -delta), s).col(0);
    CHECK((lab_state - wrong).cwiseAbs().maxCoeff() > 5e-2);
  }
}
