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

#include <algorithm>
#include <cmath>

#include "qoc/optimizers.hpp"

namespace qoc {
namespace {

Matrix slice_propagator(const ModelOperators& ops, const std::vector<double>& amps, std::size_t n, std::size_t k) {
  Matrix h = ops.drift;
  for (std::size_t c = 0; c < ops.control.size(); ++c) h += amps[c * n + k] * ops.control[c];
  return expm_hermitian(h, ops.dt);
}

}  // namespace

OptimResult krotov_optimize(const ControlProblem& problem, const KrotovOptions& options) {
  problem.validate();
  if (!(options.lambda > 0.0)) throw ValidationError("krotov: lambda must be positive");
  const double tol = problem.tol.value_or(options.tol);
  const int max_sweeps = problem.max_iters.value_or(options.max_sweeps);
  const ModelOperators ops = materialize(problem.model);
  const std::size_t n = problem.n_samples;
  const std::size_t c_count = ops.control.size();
  const auto d = static_cast<Eigen::Index>(ops.dim);
  const double dd = static_cast<double>(d) * static_cast<double>(d);
  const double bound = problem.amplitude_bound;

  std::vector<double> amps = problem.initial_guess;
  if (amps.empty()) {
    amps.assign(n * c_count, bound > 0.0 ? std::min(0.1, bound) : 0.1);
  } else if (amps.size() != n * c_count) {
    throw ValidationError("krotov: initial-parameters has " + std::to_string(amps.size()) + " entries, expected " +
                          std::to_string(n * c_count));
  }
  if (bound > 0.0) {
    for (double& a : amps) a = std::clamp(a, -bound, bound);
  }

  std::vector<Matrix> slices(n);
  Matrix u = Matrix::Identity(d, d);
  for (std::size_t k = 0; k < n; ++k) {
    slices[k] = slice_propagator(ops, amps, n, k);
    u = slices[k] * u;
  }
  const Matrix& target = problem.target;
  Complex tau = (target.adjoint() * u).trace();
  double value = std::max(0.0, 1.0 - std::norm(tau) / dd);

  OptimResult result;
  result.trace.push_back(value);
  std::vector<Matrix> chi(n + 1);
  std::vector<double> shape(n, 1.0);
  if (options.update_shape) {
    for (std::size_t k = 0; k < n; ++k) shape[k] = options.update_shape(ops.dt * static_cast<double>(k));
  }

  int sweep = 0;
  bool stalled = false;
  while (value > tol && sweep < max_sweeps) {
    // Co-states chi_k(T) = (tau / d^2) U_t|k>, propagated backward under the old controls.
    chi[n] = (tau / dd) * target;
    for (std::size_t k = n; k-- > 0;) chi[k] = slices[k].adjoint() * chi[k + 1];

    Matrix psi = Matrix::Identity(d, d);
    std::vector<double> delta(c_count);
    for (std::size_t k = 0; k < n; ++k) {
      const Matrix chi_dag = chi[k].adjoint();
      bool any = false;
      for (std::size_t c = 0; c < c_count; ++c) {
        const double g = std::imag((chi_dag * ops.control[c] * psi).trace());
        delta[c] = shape[k] / options.lambda * g;
        any = any || delta[c] != 0.0;
      }
      if (!any) {
        psi = slices[k] * psi;
        continue;
      }
      // Accept the step only if its contribution to Re <chi|psi> is non-negative;
      // the summed contributions bound the change of |tau|^2 from below.
      const Matrix chi_next_dag = chi[k + 1].adjoint();
      std::vector<double> old(c_count);
      for (std::size_t c = 0; c < c_count; ++c) old[c] = amps[c * n + k];
      Matrix trial = slices[k];
      bool accepted = false;
      for (int halving = 0; halving < 40; ++halving) {
        for (std::size_t c = 0; c < c_count; ++c) {
          double a = old[c] + delta[c];
          if (bound > 0.0) a = std::clamp(a, -bound, bound);
          amps[c * n + k] = a;
        }
        trial = slice_propagator(ops, amps, n, k);
        const Complex gain = (chi_next_dag * (trial - slices[k]) * psi).trace();
        if (std::real(gain) >= 0.0) {
          accepted = true;
          break;
        }
        for (double& x : delta) x *= 0.5;
      }
      if (!accepted) {
        for (std::size_t c = 0; c < c_count; ++c) amps[c * n + k] = old[c];
        trial = slices[k];
      }
      slices[k] = trial;
      psi = trial * psi;
    }

    const Complex tau_new = (target.adjoint() * psi).trace();
    const double value_new = std::max(0.0, 1.0 - std::norm(tau_new) / dd);
    if (value_new > value + 1e-10) {
      throw NumericalError("krotov: infidelity increased from " + std::to_string(value) + " to " +
                           std::to_string(value_new));
    }
    ++sweep;
    result.trace.push_back(value_new);
    if (value - value_new <= 0.0 && value_new > tol) {
      value = value_new;
      tau = tau_new;
      stalled = true;
      break;
    }
    value = value_new;
    tau = tau_new;
  }

  result.iterations = sweep;
  result.final_infidelity = value;
  result.status = value <= tol ? "converged" : (stalled ? "stalled" : "max-iters");
  result.samples = amplitudes_to_signal(problem, amps);
  result.params = std::move(amps);
  return result;
}

}  // namespace qoc
