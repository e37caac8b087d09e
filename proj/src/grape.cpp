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
#include <random>

#include <Eigen/Eigenvalues>

#include "qoc/optimizers.hpp"

namespace qoc {
namespace {

class GrapeEvaluator {
 public:
  explicit GrapeEvaluator(const ControlProblem& problem)
      : ops_(materialize(problem.model)), target_(problem.target), n_(problem.n_samples), dt_(problem.model.dt) {}

  double operator()(std::span<const double> amps, std::span<double> grad) const {
    const std::size_t c_count = ops_.control.size();
    if (amps.size() != n_ * c_count) {
      throw ValidationError("GRAPE: expected " + std::to_string(n_ * c_count) + " amplitudes, got " +
                            std::to_string(amps.size()));
    }
    const bool want_grad = !grad.empty();
    if (want_grad && grad.size() != amps.size()) throw ValidationError("GRAPE: gradient buffer has the wrong size");

    const auto d = static_cast<Eigen::Index>(ops_.dim);
    std::vector<Matrix> slices(n_);
    std::vector<Eigen::VectorXd> evals(want_grad ? n_ : 0);
    std::vector<Matrix> evecs(want_grad ? n_ : 0);
    Eigen::SelfAdjointEigenSolver<Matrix> solver;
    for (std::size_t k = 0; k < n_; ++k) {
      Matrix h = ops_.drift;
      for (std::size_t c = 0; c < c_count; ++c) h += amps[c * n_ + k] * ops_.control[c];
      solver.compute(h);
      const Eigen::VectorXd& lam = solver.eigenvalues();
      const Matrix& v = solver.eigenvectors();
      Eigen::VectorXcd phase(d);
      for (Eigen::Index j = 0; j < d; ++j) phase(j) = std::exp(-kI * lam(j) * dt_);
      slices[k] = v * phase.asDiagonal() * v.adjoint();
      if (want_grad) {
        evals[k] = lam;
        evecs[k] = v;
      }
    }

    std::vector<Matrix> prefix(n_ + 1);
    prefix[0] = Matrix::Identity(d, d);
    for (std::size_t k = 0; k < n_; ++k) prefix[k + 1] = slices[k] * prefix[k];
    const Matrix& u = prefix[n_];
    const double dd = static_cast<double>(d) * static_cast<double>(d);
    const Complex tau = (target_.adjoint() * u).trace();
    const double value = std::max(0.0, 1.0 - std::norm(tau) / dd);
    if (!want_grad) return value;

    Matrix back = Matrix::Identity(d, d);  // U_{N-1} ... U_{k+1}
    const Matrix target_dag = target_.adjoint();
    Matrix phi(d, d);
    for (std::size_t kk = n_; kk-- > 0;) {
      const Eigen::VectorXd& lam = evals[kk];
      const Matrix& v = evecs[kk];
      for (Eigen::Index j = 0; j < d; ++j) {
        const Complex ej = std::exp(-kI * lam(j) * dt_);
        for (Eigen::Index l = 0; l < d; ++l) {
          const double gap = lam(j) - lam(l);
          if (std::abs(gap) > 1e-10) {
            phi(j, l) = (ej - std::exp(-kI * lam(l) * dt_)) / gap;
          } else {
            phi(j, l) = -kI * dt_ * ej;
          }
        }
      }
      const Matrix w = v.adjoint() * (prefix[kk] * (target_dag * back)) * v;
      const Matrix wt_phi = w.transpose().cwiseProduct(phi);
      for (std::size_t c = 0; c < c_count; ++c) {
        const Matrix a = v.adjoint() * ops_.control[c] * v;
        const Complex dtau = wt_phi.cwiseProduct(a).sum();
        const double g = -2.0 * std::real(std::conj(tau) * dtau) / dd;
        if (!std::isfinite(g)) throw NumericalError("GRAPE: non-finite gradient");
        grad[c * n_ + kk] = g;
      }
      back = back * slices[kk];
    }
    return value;
  }

 private:
  ModelOperators ops_;
  Matrix target_;
  std::size_t n_;
  double dt_;
};

void clip(std::vector<double>& amps, double bound) {
  if (bound <= 0.0) return;
  for (double& a : amps) a = std::clamp(a, -bound, bound);
}

}  // namespace

double grape_objective(const ControlProblem& problem, std::span<const double> amps, std::span<double> grad) {
  problem.validate();
  return GrapeEvaluator(problem)(amps, grad);
}

std::vector<double> grape_gradient(const ControlProblem& problem, std::span<const double> amps) {
  std::vector<double> grad(amps.size());
  grape_objective(problem, amps, grad);
  return grad;
}

OptimResult grape_optimize(const ControlProblem& problem, const GrapeOptions& options) {
  problem.validate();
  const double tol = problem.tol.value_or(options.tol);
  const int max_iters = problem.max_iters.value_or(options.max_iters);
  const std::size_t size = problem.n_samples * problem.num_channels();
  if (!(options.learning_rate > 0.0)) throw ValidationError("GRAPE: learning-rate must be positive");

  std::vector<double> amps = problem.initial_guess;
  if (amps.empty()) {
    std::mt19937_64 rng(problem.seed);
    std::uniform_real_distribution<double> dist(-0.1, 0.1);
    amps.resize(size);
    for (double& a : amps) a = dist(rng);
  } else if (amps.size() != size) {
    throw ValidationError("GRAPE: initial-parameters has " + std::to_string(amps.size()) + " entries, expected " +
                          std::to_string(size));
  }
  clip(amps, problem.amplitude_bound);

  const GrapeEvaluator eval(problem);
  std::vector<double> grad(size);
  std::vector<double> trial(size);
  double value = eval(amps, grad);

  OptimResult result;
  result.trace.push_back(value);
  bool stalled = false;
  int it = 0;
  while (value > tol && it < max_iters) {
    double step = options.learning_rate;
    bool accepted = false;
    double trial_value = value;
    for (int b = 0; b <= options.max_backtracks; ++b) {
      for (std::size_t i = 0; i < size; ++i) trial[i] = amps[i] - step * grad[i];
      clip(trial, problem.amplitude_bound);
      trial_value = eval(trial, {});
      double predicted = 0.0;
      for (std::size_t i = 0; i < size; ++i) predicted += grad[i] * (amps[i] - trial[i]);
      if (trial_value < value && trial_value <= value - options.sufficient_decrease * predicted) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      stalled = true;
      break;
    }
    amps.swap(trial);
    value = eval(amps, grad);
    result.trace.push_back(value);
    ++it;
  }

  result.iterations = it;
  result.final_infidelity = value;
  result.status = value <= tol ? "converged" : (stalled ? "stalled" : "max-iters");
  result.samples = amplitudes_to_signal(problem, amps);
  result.params = std::move(amps);
  return result;
}

}  // namespace qoc
