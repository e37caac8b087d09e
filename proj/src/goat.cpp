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
#include <memory>
#include <set>

#include <ceres/ceres.h>

#include "qoc/optimizers.hpp"

namespace qoc {

// ---------------------------------------------------------------------------
// Gaussian envelopes

GaussianEnvelopes::GaussianEnvelopes(std::vector<GoatEnvelopeSpec> channels, double width_floor)
    : channels_(std::move(channels)), width_floor_(width_floor) {
  if (channels_.empty()) throw ValidationError("GOAT: no envelope channels");
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    for (std::size_t k = 0; k < channels_[c].pulses.size(); ++k) {
      const GaussianPulse& g = channels_[c].pulses[k];
      if (!std::isfinite(g.amplitude) || !std::isfinite(g.center) || !std::isfinite(g.width) || g.width <= 0.0) {
        throw ValidationError("GOAT: Gaussian " + std::to_string(k) + " on channel " + std::to_string(c) +
                              " needs finite parameters and a positive width");
      }
      if (g.train_amplitude) slots_.push_back({c, k, Field::Amplitude});
      if (g.train_center) slots_.push_back({c, k, Field::Center});
      if (g.train_width) slots_.push_back({c, k, Field::Width});
    }
  }
}

std::vector<std::string> GaussianEnvelopes::param_names() const {
  std::vector<std::string> names;
  for (const Slot& s : slots_) {
    const char* field = s.field == Field::Amplitude ? "amplitude" : (s.field == Field::Center ? "center" : "width");
    names.push_back("c" + std::to_string(s.channel) + ".g" + std::to_string(s.pulse) + "." + field);
  }
  return names;
}

std::vector<double> GaussianEnvelopes::initial_params() const {
  std::vector<double> p;
  for (const Slot& s : slots_) {
    const GaussianPulse& g = channels_[s.channel].pulses[s.pulse];
    p.push_back(s.field == Field::Amplitude ? g.amplitude : (s.field == Field::Center ? g.center : g.width));
  }
  return p;
}

std::vector<GoatEnvelopeSpec> GaussianEnvelopes::with_params(std::span<const double> params) const {
  if (params.size() != slots_.size()) throw ValidationError("GOAT: wrong number of envelope parameters");
  std::vector<GoatEnvelopeSpec> out = channels_;
  for (std::size_t i = 0; i < slots_.size(); ++i) {
    GaussianPulse& g = out[slots_[i].channel].pulses[slots_[i].pulse];
    switch (slots_[i].field) {
      case Field::Amplitude: g.amplitude = params[i]; break;
      case Field::Center: g.center = params[i]; break;
      case Field::Width: g.width = std::max(params[i], width_floor_); break;
    }
  }
  return out;
}

void GaussianEnvelopes::project(std::span<double> params) const {
  for (std::size_t i = 0; i < slots_.size() && i < params.size(); ++i) {
    if (slots_[i].field == Field::Width) params[i] = std::max(params[i], width_floor_);
  }
}

void GaussianEnvelopes::evaluate(double t, std::span<const double> params, std::span<double> values,
                                 Eigen::MatrixXd* jac) const {
  if (params.size() != slots_.size()) throw ValidationError("GOAT: wrong number of envelope parameters");
  std::fill(values.begin(), values.end(), 0.0);
  if (jac) jac->setZero(static_cast<Eigen::Index>(channels_.size()), static_cast<Eigen::Index>(slots_.size()));
  std::size_t slot = 0;
  for (std::size_t c = 0; c < channels_.size(); ++c) {
    for (const GaussianPulse& g : channels_[c].pulses) {
      double a = g.amplitude, mu = g.center, s = g.width;
      long ia = -1, ic = -1, iw = -1;
      if (g.train_amplitude) a = params[ia = static_cast<long>(slot++)];
      if (g.train_center) mu = params[ic = static_cast<long>(slot++)];
      if (g.train_width) s = params[iw = static_cast<long>(slot++)];
      const bool floored = s < width_floor_;
      s = std::max(s, width_floor_);
      const double x = t - mu;
      const double e = std::exp(-x * x / (2.0 * s * s));
      values[c] += a * e;
      if (jac) {
        const auto row = static_cast<Eigen::Index>(c);
        if (ia >= 0) (*jac)(row, ia) += e;
        if (ic >= 0) (*jac)(row, ic) += a * e * x / (s * s);
        if (iw >= 0 && !floored) (*jac)(row, iw) += a * e * x * x / (s * s * s);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Expression envelopes

ExpressionEnvelopes::ExpressionEnvelopes(const std::vector<std::string>& funcs, std::vector<std::string> param_names,
                                         std::vector<double> initial)
    : names_(std::move(param_names)), initial_(std::move(initial)) {
  if (funcs.empty()) throw ValidationError("GOAT: control-funcs is empty");
  if (initial_.size() != names_.size()) {
    throw ValidationError("GOAT: initial-parameters has " + std::to_string(initial_.size()) + " entries for " +
                          std::to_string(names_.size()) + " control-params");
  }
  std::set<std::string> seen;
  for (const std::string& n : names_) {
    if (n == "t" || n == "pi") throw ValidationError("GOAT: '" + n + "' cannot be a control parameter name");
    if (!seen.insert(n).second) throw ValidationError("GOAT: duplicate control parameter '" + n + "'");
  }
  std::vector<std::string> slots{"t"};
  slots.insert(slots.end(), names_.begin(), names_.end());
  for (const std::string& f : funcs) {
    const Expr e = Expr::parse(f);
    for (const std::string& v : e.variables()) {
      if (v != "t" && !seen.count(v)) {
        throw ValidationError("GOAT: control function '" + f + "' uses undeclared parameter '" + v + "'");
      }
    }
    values_.push_back(e.compile(slots));
    std::vector<CompiledExpr> partials;
    for (const std::string& n : names_) partials.push_back(e.derivative(n).compile(slots));
    partials_.push_back(std::move(partials));
  }
}

void ExpressionEnvelopes::evaluate(double t, std::span<const double> params, std::span<double> values,
                                   Eigen::MatrixXd* jac) const {
  if (params.size() != names_.size()) throw ValidationError("GOAT: wrong number of envelope parameters");
  std::vector<double> slots(params.size() + 1);
  slots[0] = t;
  std::copy(params.begin(), params.end(), slots.begin() + 1);
  if (jac) jac->resize(static_cast<Eigen::Index>(values_.size()), static_cast<Eigen::Index>(names_.size()));
  for (std::size_t c = 0; c < values_.size(); ++c) {
    values[c] = values_[c](slots);
    if (jac) {
      for (std::size_t p = 0; p < names_.size(); ++p) {
        (*jac)(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)) = partials_[c][p](slots);
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Objective

GoatObjective::GoatObjective(const ControlProblem& problem, std::shared_ptr<const EnvelopeFamily> envelopes,
                             const GoatOptions& options)
    : ops_(materialize(problem.model)),
      target_(problem.target),
      horizon_(problem.horizon),
      n_samples_(problem.n_samples),
      sample_hold_(options.sample_hold),
      envelopes_(std::move(envelopes)) {
  problem.validate();
  if (!envelopes_) throw ValidationError("GOAT: missing envelope family");
  if (envelopes_->num_channels() != ops_.control.size()) {
    throw ValidationError("GOAT: " + std::to_string(envelopes_->num_channels()) + " envelopes for " +
                          std::to_string(ops_.control.size()) + " control channels");
  }
  if (options.steps > 0) {
    steps_ = options.steps;
    if (sample_hold_ && steps_ % n_samples_ != 0) {
      throw ValidationError("GOAT: with sample hold the step count must be a multiple of n-samples");
    }
    return;
  }
  std::vector<double> p0 = problem.initial_guess.empty() ? envelopes_->initial_params() : problem.initial_guess;
  if (p0.size() != envelopes_->num_params()) throw ValidationError("GOAT: wrong number of initial parameters");
  envelopes_->project(p0);
  const double h0 = ops_.dt / std::max(1, options.rk3.initial_substeps);
  steps_ = static_cast<std::size_t>(std::max(1.0, std::ceil(horizon_ / h0 - 1e-9)));
  if (sample_hold_) steps_ = n_samples_ * ((steps_ + n_samples_ - 1) / n_samples_);
  for (int halving = 0;; ++halving) {
    Matrix u;
    run(p0, {}, &u);
    if (unitarity_defect(u) <= options.rk3.unitarity_tol) return;
    if (halving >= options.rk3.max_halvings) {
      throw NumericalError("GOAT: RK3 did not reach unitarity tolerance after " + std::to_string(halving) +
                           " step halvings");
    }
    steps_ *= 2;
  }
}

double GoatObjective::evaluate(std::span<const double> params, std::span<double> grad) const {
  return run(params, grad, nullptr);
}

Matrix GoatObjective::propagate(std::span<const double> params) const {
  Matrix u;
  run(params, {}, &u);
  return u;
}

double GoatObjective::run(std::span<const double> params, std::span<double> grad, Matrix* unitary) const {
  const std::size_t n_par = envelopes_->num_params();
  const std::size_t n_ch = ops_.control.size();
  if (params.size() != n_par) throw ValidationError("GOAT: wrong number of envelope parameters");
  const bool want_grad = !grad.empty();
  if (want_grad && grad.size() != n_par) throw ValidationError("GOAT: gradient buffer has the wrong size");
  const std::size_t n_aux = want_grad ? n_par : 0;
  const auto d = static_cast<Eigen::Index>(ops_.dim);

  std::vector<double> values(n_ch);
  Eigen::MatrixXd jac;
  Matrix h(d, d);
  std::vector<Matrix> dh(n_aux, Matrix(d, d));

  auto hamiltonians = [&](double t) {
    envelopes_->evaluate(t, params, values, want_grad ? &jac : nullptr);
    h = ops_.drift;
    for (std::size_t c = 0; c < n_ch; ++c) h += values[c] * ops_.control[c];
    for (std::size_t p = 0; p < n_aux; ++p) {
      dh[p].setZero();
      for (std::size_t c = 0; c < n_ch; ++c) {
        dh[p] += jac(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p)) * ops_.control[c];
      }
    }
  };
  // Y = (U, dU/dp_1, ..., dU/dp_P); f(Y) = -i (H U, dH_p U + H dU_p).
  auto rhs = [&](double t, const std::vector<Matrix>& y, std::vector<Matrix>& out) {
    hamiltonians(t);
    out[0].noalias() = -kI * (h * y[0]);
    for (std::size_t p = 0; p < n_aux; ++p) {
      out[p + 1].noalias() = -kI * (dh[p] * y[0] + h * y[p + 1]);
    }
  };

  const std::size_t width = n_aux + 1;
  std::vector<Matrix> y(width, Matrix::Zero(d, d));
  y[0] = Matrix::Identity(d, d);
  std::vector<Matrix> k1(width, Matrix(d, d)), k2(width, Matrix(d, d)), k3(width, Matrix(d, d)), tmp(width);
  const double step = horizon_ / static_cast<double>(steps_);
  const std::size_t per_sample = sample_hold_ ? steps_ / n_samples_ : 1;
  const double sample_dt = horizon_ / static_cast<double>(n_samples_);
  for (std::size_t s = 0; s < steps_; ++s) {
    const double t = step * static_cast<double>(s);
    const double held = sample_dt * static_cast<double>(s / per_sample);
    rhs(sample_hold_ ? held : t, y, k1);
    for (std::size_t i = 0; i < width; ++i) tmp[i] = y[i] + (0.5 * step) * k1[i];
    rhs(sample_hold_ ? held : t + 0.5 * step, tmp, k2);
    for (std::size_t i = 0; i < width; ++i) tmp[i] = y[i] - step * k1[i] + (2.0 * step) * k2[i];
    rhs(sample_hold_ ? held : t + step, tmp, k3);
    for (std::size_t i = 0; i < width; ++i) y[i] += (step / 6.0) * (k1[i] + 4.0 * k2[i] + k3[i]);
  }
  if (!y[0].allFinite()) throw NumericalError("GOAT: propagation produced non-finite values");

  const double dd = static_cast<double>(d) * static_cast<double>(d);
  const Matrix target_dag = target_.adjoint();
  const Complex tau = (target_dag * y[0]).trace();
  for (std::size_t p = 0; p < n_aux; ++p) {
    const Complex dtau = (target_dag * y[p + 1]).trace();
    grad[p] = -2.0 * std::real(std::conj(tau) * dtau) / dd;
    if (!std::isfinite(grad[p])) throw NumericalError("GOAT: non-finite gradient");
  }
  if (unitary) *unitary = y[0];
  return std::max(0.0, 1.0 - std::norm(tau) / dd);
}

// ---------------------------------------------------------------------------
// Optimization

namespace {

class CeresObjective : public ceres::FirstOrderFunction {
 public:
  explicit CeresObjective(const GoatObjective& objective) : objective_(objective) {}

  bool Evaluate(const double* parameters, double* cost, double* gradient) const override {
    std::vector<double> p(parameters, parameters + NumParameters());
    objective_.envelopes().project(p);
    try {
      if (gradient) {
        *cost = objective_.evaluate(p, std::span<double>(gradient, p.size()));
      } else {
        *cost = objective_.evaluate(p, {});
      }
    } catch (const NumericalError&) {
      return false;
    }
    return std::isfinite(*cost);
  }

  int NumParameters() const override { return static_cast<int>(objective_.num_params()); }

 private:
  const GoatObjective& objective_;
};

class TraceCallback : public ceres::IterationCallback {
 public:
  TraceCallback(double tol, std::vector<double>& trace) : tol_(tol), trace_(trace) {}

  ceres::CallbackReturnType operator()(const ceres::IterationSummary& summary) override {
    trace_.push_back(summary.cost);
    return summary.cost <= tol_ ? ceres::SOLVER_TERMINATE_SUCCESSFULLY : ceres::SOLVER_CONTINUE;
  }

 private:
  double tol_;
  std::vector<double>& trace_;
};

}  // namespace

SampledSignal sample_envelopes(const ControlProblem& problem, const EnvelopeFamily& envelopes,
                               std::span<const double> params) {
  const std::size_t n = problem.n_samples;
  SampledSignal sig = SampledSignal::zeros(problem.model.dt, n, problem.model.channels());
  if (envelopes.num_channels() != sig.channels.size()) {
    throw ValidationError("GOAT: envelope count does not match the model channels");
  }
  std::vector<double> values(envelopes.num_channels());
  for (std::size_t k = 0; k < n; ++k) {
    envelopes.evaluate(problem.model.dt * static_cast<double>(k), params, values, nullptr);
    for (std::size_t c = 0; c < values.size(); ++c) {
      if (!std::isfinite(values[c])) throw NumericalError("GOAT: envelope is not finite at sample " + std::to_string(k));
      sig.samples[c][k] = values[c];
    }
  }
  return sig;
}

OptimResult goat_optimize(const ControlProblem& problem, std::shared_ptr<const EnvelopeFamily> envelopes,
                          const GoatOptions& options) {
  GoatOptions current = options;
  auto objective = std::make_unique<GoatObjective>(problem, envelopes, current);
  const double tol = problem.tol.value_or(options.tol);
  const int max_iters = problem.max_iters.value_or(options.max_iters);

  std::vector<double> x = problem.initial_guess.empty() ? envelopes->initial_params() : problem.initial_guess;
  envelopes->project(x);

  OptimResult result;
  if (x.empty() || max_iters == 0) {
    result.final_infidelity = objective->evaluate(x, {});
    result.trace.push_back(result.final_infidelity);
    result.status = result.final_infidelity <= tol ? "converged" : "max-iters";
    result.samples = sample_envelopes(problem, *envelopes, x);
    result.params = std::move(x);
    return result;
  }

  ceres::GradientProblemSolver::Summary summary;
  for (int refinement = 0;; ++refinement) {
    ceres::GradientProblem gp(new CeresObjective(*objective));
    ceres::GradientProblemSolver::Options so;
    so.line_search_direction_type = ceres::LBFGS;
    so.line_search_type = ceres::WOLFE;
    so.max_lbfgs_rank = options.lbfgs_memory;
    so.max_num_iterations = std::max(1, max_iters - result.iterations);
    so.function_tolerance = 1e-14;
    so.gradient_tolerance = 1e-14;
    so.parameter_tolerance = 1e-14;
    so.logging_type = ceres::SILENT;
    so.minimizer_progress_to_stdout = false;
    std::vector<double> trace;
    TraceCallback callback(tol, trace);
    so.callbacks.push_back(&callback);
    summary = ceres::GradientProblemSolver::Summary{};
    ceres::Solve(so, gp, x.data(), &summary);
    envelopes->project(x);
    const std::size_t skip = result.trace.empty() ? 0 : std::min<std::size_t>(1, trace.size());
    result.trace.insert(result.trace.end(), trace.begin() + static_cast<std::ptrdiff_t>(skip), trace.end());
    result.iterations += std::max(0, static_cast<int>(summary.iterations.size()) - 1);

    // The step count was sized for the initial guess; the optimum may drive harder.
    if (options.steps > 0 || refinement >= options.rk3.max_halvings ||
        unitarity_defect(objective->propagate(x)) <= options.rk3.unitarity_tol) {
      break;
    }
    current.steps = objective->steps() * 2;
    objective = std::make_unique<GoatObjective>(problem, envelopes, current);
    if (result.iterations >= max_iters) break;
  }

  result.final_infidelity = objective->evaluate(x, {});
  if (result.final_infidelity <= tol) {
    result.status = "converged";
  } else if (summary.termination_type == ceres::NO_CONVERGENCE || result.iterations >= max_iters) {
    result.status = "max-iters";
  } else if (summary.termination_type == ceres::FAILURE) {
    result.status = "line-search-failure";
  } else {
    result.status = "stalled";
  }
  result.samples = sample_envelopes(problem, *envelopes, x);
  result.params = std::move(x);
  return result;
}

}  // namespace qoc
