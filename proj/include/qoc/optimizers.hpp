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

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>
#include "qoc/common.hpp"
#include "qoc/dynamics.hpp"
#include "qoc/expr.hpp"
#include "qoc/system_model.hpp"

namespace qoc {

/// 1 - |Tr(target^dagger u)|^2 / d^2. Phase-insensitive, in [0, 1].
double infidelity(const Matrix& u, const Matrix& target);

/// A gate-synthesis problem over a system model.
struct ControlProblem {
  SystemModel model;
  Matrix target;
  double horizon = 0.0;        // tau
  std::size_t n_samples = 0;   // sampled methods; tau = n_samples * model.dt
  double amplitude_bound = 0.0;  // 0 = unbounded
  /// Explicit starting point; empty selects the method's default guess.
  std::vector<double> initial_guess;
  std::uint64_t seed = 0;
  std::optional<double> tol;
  std::optional<int> max_iters;

  std::size_t num_channels() const { return model.control.size(); }
  void validate() const;
};

struct OptimResult {
  std::vector<double> params;
  double final_infidelity = 1.0;
  int iterations = 0;
  std::vector<double> trace;  // infidelity before the first and after every iteration
  SampledSignal samples;
  std::string status;  // converged | max-iters | stalled | line-search-failure
};

// ---------------------------------------------------------------------------
// GRAPE: one real amplitude per channel per sample, amplitudes stored
// channel-major (amps[c * N + n]).

struct GrapeOptions {
  double learning_rate = 0.1;
  double tol = 1e-4;
  int max_iters = 1000;
  int max_backtracks = 40;
  /// Armijo constant: a step is kept once it achieves this fraction of the
  /// decrease predicted by the gradient; otherwise the step is halved.
  double sufficient_decrease = 0.1;
};

/// Infidelity of piecewise-constant amplitudes; fills `grad` when non-empty.
/// The gradient is exact: each slice derivative uses the eigenbasis
/// divided-difference formula, combined with forward/backward partial products.
double grape_objective(const ControlProblem& problem, std::span<const double> amps, std::span<double> grad);
std::vector<double> grape_gradient(const ControlProblem& problem, std::span<const double> amps);
SampledSignal amplitudes_to_signal(const ControlProblem& problem, std::span<const double> amps);
OptimResult grape_optimize(const ControlProblem& problem, const GrapeOptions& options = {});

// ---------------------------------------------------------------------------
// GOAT: analytic envelopes optimized by L-BFGS with gradients from the
// co-integrated variational equation d(dU)/dt = -i (dH U + H dU).

/// Differentiable family of per-channel envelopes Omega_c(t; params).
class EnvelopeFamily {
 public:
  virtual ~EnvelopeFamily() = default;
  virtual std::size_t num_channels() const = 0;
  virtual std::size_t num_params() const = 0;
  virtual std::vector<std::string> param_names() const = 0;
  virtual std::vector<double> initial_params() const = 0;
  /// values[c] = Omega_c(t); when `jac` is given, (*jac)(c, p) = dOmega_c/dp.
  virtual void evaluate(double t, std::span<const double> params, std::span<double> values,
                        Eigen::MatrixXd* jac) const = 0;
  /// Maps params back into the admissible set (e.g. widths above a floor).
  virtual void project(std::span<double> /*params*/) const {}
};

struct GaussianPulse {
  double amplitude = 1.0;
  double center = 0.0;
  double width = 1.0;
  bool train_amplitude = false;
  bool train_center = false;
  bool train_width = true;
};

/// Sum of K Gaussians a_k exp(-(t - t_k)^2 / (2 s_k^2)) for one channel.
struct GoatEnvelopeSpec {
  std::vector<GaussianPulse> pulses;
};

inline constexpr double kWidthFloor = 1e-3;

class GaussianEnvelopes : public EnvelopeFamily {
 public:
  explicit GaussianEnvelopes(std::vector<GoatEnvelopeSpec> channels, double width_floor = kWidthFloor);

  std::size_t num_channels() const override { return channels_.size(); }
  std::size_t num_params() const override { return slots_.size(); }
  std::vector<std::string> param_names() const override;
  std::vector<double> initial_params() const override;
  void evaluate(double t, std::span<const double> params, std::span<double> values,
                Eigen::MatrixXd* jac) const override;
  void project(std::span<double> params) const override;

  /// The specs with trainable fields replaced by `params`.
  std::vector<GoatEnvelopeSpec> with_params(std::span<const double> params) const;

 private:
  enum class Field { Amplitude, Center, Width };
  struct Slot {
    std::size_t channel;
    std::size_t pulse;
    Field field;
  };
  std::vector<GoatEnvelopeSpec> channels_;
  std::vector<Slot> slots_;
  double width_floor_;
};

/// Envelopes given as expression strings in `t` and named parameters,
/// e.g. "exp(-t^2/(2*sigma^2))". Gradients are taken symbolically.
class ExpressionEnvelopes : public EnvelopeFamily {
 public:
  ExpressionEnvelopes(const std::vector<std::string>& funcs, std::vector<std::string> param_names,
                      std::vector<double> initial);

  std::size_t num_channels() const override { return values_.size(); }
  std::size_t num_params() const override { return names_.size(); }
  std::vector<std::string> param_names() const override { return names_; }
  std::vector<double> initial_params() const override { return initial_; }
  void evaluate(double t, std::span<const double> params, std::span<double> values,
                Eigen::MatrixXd* jac) const override;

 private:
  std::vector<std::string> names_;
  std::vector<double> initial_;
  std::vector<CompiledExpr> values_;
  std::vector<std::vector<CompiledExpr>> partials_;  // [channel][param]
};

struct GoatOptions {
  double tol = 1e-5;
  int max_iters = 500;
  int lbfgs_memory = 10;
  Rk3Options rk3;
  /// Fixed RK3 step count; 0 picks one from the initial guess by step halving.
  std::size_t steps = 0;
  /// Hold each envelope at its left-endpoint sample value for one sample
  /// period, so the optimized propagator is exactly that of the emitted samples.
  bool sample_hold = false;
};

/// Infidelity of the RK3-propagated envelope and its exact gradient.
class GoatObjective {
 public:
  GoatObjective(const ControlProblem& problem, std::shared_ptr<const EnvelopeFamily> envelopes,
                const GoatOptions& options = {});

  double evaluate(std::span<const double> params, std::span<double> grad) const;
  Matrix propagate(std::span<const double> params) const;
  std::size_t steps() const { return steps_; }
  std::size_t num_params() const { return envelopes_->num_params(); }
  const EnvelopeFamily& envelopes() const { return *envelopes_; }

 private:
  double run(std::span<const double> params, std::span<double> grad, Matrix* unitary) const;

  ModelOperators ops_;
  Matrix target_;
  double horizon_;
  std::size_t n_samples_;
  bool sample_hold_;
  std::shared_ptr<const EnvelopeFamily> envelopes_;
  std::size_t steps_ = 0;
};

OptimResult goat_optimize(const ControlProblem& problem, std::shared_ptr<const EnvelopeFamily> envelopes,
                          const GoatOptions& options = {});

/// Left-endpoint samples of a fitted envelope family over the problem horizon.
SampledSignal sample_envelopes(const ControlProblem& problem, const EnvelopeFamily& envelopes,
                               std::span<const double> params);

// ---------------------------------------------------------------------------
// Krotov: sequential first-order update over sampled controls.

struct KrotovOptions {
  double lambda = 1.0;
  double tol = 1e-4;
  int max_sweeps = 200;
  /// Update shape S(t); flat 1 when empty.
  std::function<double(double)> update_shape;
};

OptimResult krotov_optimize(const ControlProblem& problem, const KrotovOptions& options = {});

// ---------------------------------------------------------------------------
// Name-dispatched registry.

class Optimizer {
 public:
  virtual ~Optimizer() = default;
  virtual std::string_view name() const = 0;

  const nlohmann::json& options() const { return options_; }
  /// Merges further options; same validation as at construction.
  void set_options(const nlohmann::json& extra);
  /// Builds the problem from the options (and `model` when the options carry
  /// no `control-H`) and runs the method.
  OptimResult optimize(const SystemModel* model = nullptr) const;

 protected:
  explicit Optimizer(nlohmann::json options) : options_(std::move(options)) {}
  virtual void check_options(const nlohmann::json& options) const = 0;
  virtual OptimResult run(const ControlProblem& problem, const nlohmann::json& options) const = 0;

  nlohmann::json options_;
};

/// Registered method names: GRAPE, GOAT, krotov (lookup is case-insensitive).
std::vector<std::string> optimizer_methods();

/// Looks up `method` and returns a handle configured with `options`.
/// Unknown methods and options raise ValidationError.
std::unique_ptr<Optimizer> get_optimizer(std::string_view method, const nlohmann::json& options);

/// Problem assembly shared by the registry and the pulse transform.
ControlProblem problem_from_options(const nlohmann::json& options, const SystemModel* model);

/// Parses a `target-U` value: a gate key like "X0", assembly source, or a
/// matrix given as rows of numbers or [re, im] pairs.
Matrix parse_target(const nlohmann::json& value, int n_qubits);

}  // namespace qoc
