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

#include "qoc/optimizers.hpp"

#include <algorithm>
#include <cmath>

namespace qoc {

double infidelity(const Matrix& u, const Matrix& target) {
  if (u.rows() != target.rows() || u.cols() != target.cols() || u.rows() != u.cols()) {
    throw ValidationError("infidelity: dimension mismatch (" + std::to_string(u.rows()) + " vs " +
                          std::to_string(target.rows()) + ")");
  }
  const double d = static_cast<double>(u.rows());
  const Complex tr = (target.adjoint() * u).trace();
  return std::max(0.0, 1.0 - std::norm(tr) / (d * d));
}

void ControlProblem::validate() const {
  model.validate();
  if (model.control.empty()) throw ValidationError("control problem: model has no control channels");
  if (target.rows() != model.dim() || target.cols() != model.dim()) {
    throw ValidationError("control problem: target is " + std::to_string(target.rows()) + "x" +
                          std::to_string(target.cols()) + ", model dimension is " + std::to_string(model.dim()));
  }
  if (unitarity_defect(target) > 1e-8) throw ValidationError("control problem: target is not unitary");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ValidationError("control problem: max-time must be positive");
  if (n_samples == 0) throw ValidationError("control problem: n-samples must be positive");
  if (std::abs(static_cast<double>(n_samples) * model.dt - horizon) > 1e-9 * std::max(1.0, horizon)) {
    throw ValidationError("control problem: n-samples * dt does not equal max-time");
  }
  if (!(amplitude_bound >= 0.0)) throw ValidationError("control problem: amplitude-bound must be non-negative");
  if (tol && !(*tol >= 0.0)) throw ValidationError("control problem: tol must be non-negative");
  if (max_iters && *max_iters < 0) throw ValidationError("control problem: max-iters must be non-negative");
}

SampledSignal amplitudes_to_signal(const ControlProblem& problem, std::span<const double> amps) {
  const std::size_t n = problem.n_samples;
  const std::size_t c_count = problem.num_channels();
  if (amps.size() != n * c_count) {
    throw ValidationError("expected " + std::to_string(n * c_count) + " amplitudes, got " +
                          std::to_string(amps.size()));
  }
  SampledSignal sig = SampledSignal::zeros(problem.model.dt, n, problem.model.channels());
  for (std::size_t c = 0; c < c_count; ++c) {
    for (std::size_t k = 0; k < n; ++k) sig.samples[c][k] = amps[c * n + k];
  }
  return sig;
}

}  // namespace qoc
