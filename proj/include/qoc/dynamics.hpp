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

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "qoc/common.hpp"
#include "qoc/system_model.hpp"

namespace qoc {

/// Piecewise-constant controls: sample n holds on [n*dt, (n+1)*dt).
struct SampledSignal {
  double dt = 1.0;
  std::size_t n_samples = 0;
  std::vector<std::string> channels;
  std::vector<std::vector<Complex>> samples;  // [channel][n]

  static SampledSignal zeros(double dt, std::size_t n, std::vector<std::string> channels);

  double duration() const { return dt * static_cast<double>(n_samples); }
  void validate() const;
};

using Envelope = std::function<Complex(double)>;

struct AnalyticSignal {
  std::vector<std::string> channels;
  std::vector<Envelope> envelopes;
};

/// exp(-i H s) for Hermitian H, via eigendecomposition.
Matrix expm_hermitian(const Matrix& h, double s);

/// Hamiltonian for one set of channel values (one entry per model channel).
/// The real part multiplies the channel operator, the imaginary part its
/// quadrature partner; a non-zero imaginary part without a partner is an error.
Matrix control_hamiltonian(const ModelOperators& ops, const std::vector<Complex>& channel_values);

/// Per-sample propagators exp(-i H_n dt), n = 0..N-1.
std::vector<Matrix> piecewise_slices(const ModelOperators& ops, const SampledSignal& signal);

/// U(tau) = U_{N-1} ... U_0.
Matrix piecewise_propagator(const ModelOperators& ops, const SampledSignal& signal);
Matrix piecewise_propagator(const SystemModel& model, const SampledSignal& signal);

/// Closed-system state at every sample boundary (N + 1 entries).
std::vector<Vector> propagate_state(const ModelOperators& ops, const SampledSignal& signal, const Vector& psi0);

struct Rk3Options {
  int initial_substeps = 10;     // first step is dt / initial_substeps
  double unitarity_tol = 1e-7;   // max |U^dagger U - I| accepted
  int max_halvings = 12;
};

struct ContinuousEvolution {
  Matrix unitary;
  double step = 0.0;
  std::size_t steps = 0;
};

/// Integrates dU/dt = -i H(t) U with fixed-step third-order Kutta, halving
/// the step until the result is unitary to `unitarity_tol`.
ContinuousEvolution evolve_continuous(const ModelOperators& ops, const AnalyticSignal& signal, double tau,
                                      const Rk3Options& options = {});

/// Same integrator with each sample held over its interval; steps align with
/// sample boundaries.
ContinuousEvolution evolve_continuous(const ModelOperators& ops, const SampledSignal& signal,
                                      const Rk3Options& options = {});

struct LindbladOptions {
  int min_substeps = 10;
  /// Upper bound on h * ||generator|| per RK3 step.
  double max_step_norm = 0.005;
};

/// Lindblad evolution drho/dt = -i[H, rho] + sum_j g_j (L rho L^dagger - {L^dagger L, rho}/2).
/// Returns rho at every sample boundary (N + 1 entries). The map is linear,
/// so non-Hermitian inputs (e.g. |i><j|) are propagated too.
std::vector<Matrix> lindblad_evolve(const ModelOperators& ops, const SampledSignal& signal, const Matrix& rho0,
                                    const LindbladOptions& options = {});

/// (1/d^2) sum_ij <i|U_t^dagger E(|i><j|) U_t|j>; equals 1 - infidelity for unitary E.
double process_fidelity(const ModelOperators& ops, const SampledSignal& signal, const Matrix& target,
                        const LindbladOptions& options = {});

double expectation(const Matrix& op, const Vector& psi);
double expectation(const Matrix& op, const Matrix& rho);

/// Density matrix |psi><psi|.
Matrix density(const Vector& psi);

/// Computational basis state; `bits[q]` is the value of qubit q.
Vector basis_state(const std::vector<int>& bits);

}  // namespace qoc
