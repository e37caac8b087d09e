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
#include <cctype>
#include <cmath>
#include <cstdio>

#include "qoc/pulse.hpp"

namespace qoc {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& u) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < u.cols(); ++c) row.push_back({u(r, c).real(), u(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

// One Gaussian per channel in the middle of the window, every field trainable.
json default_gaussians(std::size_t channels, double horizon, double dt) {
  const json g = {{"amplitude", 0.1}, {"center", horizon / 2.0}, {"width", std::min(8.0 * dt, horizon / 6.0)}};
  json all = json::array();
  for (std::size_t c = 0; c < channels; ++c) all.push_back(json::array({g}));
  return all;
}

}  // namespace

TransformResult transform(const Circuit& circuit, const SystemModel& model, std::string_view method,
                          const json& options) {
  circuit.validate();
  if (!circuit.is_concrete()) throw ValidationError("transform: circuit has free parameters; bind them first");
  model.validate();
  if (circuit.n_qubits > model.n_qubits) {
    throw ValidationError("transform: circuit uses " + std::to_string(circuit.n_qubits) + " qubits, model has " +
                          std::to_string(model.n_qubits));
  }
  json opts = options.is_null() ? json::object() : options;
  if (!opts.is_object()) throw ValidationError("transform: options must be a key-value map");
  double threshold = kDefaultAcceptThreshold;
  if (opts.contains("accept-threshold")) {
    if (!opts["accept-threshold"].is_number() || !(opts["accept-threshold"].get<double>() >= 0.0)) {
      throw ValidationError("transform: accept-threshold must be a non-negative number");
    }
    threshold = opts["accept-threshold"].get<double>();
    opts.erase("accept-threshold");
  }
  for (const char* key : {"target-U", "control-H", "dimension"}) {
    if (opts.contains(key)) throw ValidationError(std::string("transform: '") + key + "' is deduced from the circuit and model");
  }

  Circuit wide = circuit;
  wide.n_qubits = model.n_qubits;
  const Matrix target = circuit_unitary(wide, std::max(kDefaultMaxQubits, model.n_qubits));
  opts["target-U"] = matrix_json(target);

  std::string lowered(method);
  std::transform(lowered.begin(), lowered.end(), lowered.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (lowered == "goat") {
    if (!opts.contains("control-funcs") && !opts.contains("gaussians")) {
      const ControlProblem probe = problem_from_options(opts, &model);
      opts["gaussians"] = default_gaussians(probe.num_channels(), probe.horizon, probe.model.dt);
    }
    if (!opts.contains("sample-hold")) opts["sample-hold"] = true;
  }
  const auto handle = get_optimizer(method, opts);
  const ControlProblem problem = problem_from_options(opts, &model);
  OptimResult optim = handle->optimize(&model);

  PulseProgram program;
  program.dt = problem.model.dt;
  program.metadata.method = std::string(handle->name());
  for (std::size_t c = 0; c < optim.samples.channels.size(); ++c) {
    program.instructions.push_back({optim.samples.channels[c], 0, optim.samples.samples[c]});
  }
  const double emitted = infidelity(piecewise_propagator(problem.model, optim.samples), target);
  program.metadata.infidelity = emitted;
  program = program.canonical();
  if (!(emitted <= threshold)) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s did not converge: infidelity %.6g above accept-threshold %.6g (%s)",
                  program.metadata.method.c_str(), emitted, threshold, optim.status.c_str());
    throw ConvergenceError(buf, std::move(program), std::move(optim));
  }
  return {std::move(program), std::move(optim)};
}

}  // namespace qoc
