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
#include <map>
#include <regex>
#include <set>

#include "qoc/circuit.hpp"
#include "qoc/optimizers.hpp"

namespace qoc {
namespace {

using nlohmann::json;

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

const std::set<std::string>& common_keys() {
  static const std::set<std::string> keys{"method",      "dimension", "target-U", "control-H", "drift-H",
                                          "dt",          "max-time",  "n-samples", "amplitude-bound", "seed",
                                          "tol",         "max-iters", "initial-parameters"};
  return keys;
}

void require(bool ok, const std::string& key, const char* what) {
  if (!ok) throw ValidationError("option '" + key + "' must be " + what);
}

bool is_string_list(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
}

bool is_number_list(const json& v) {
  return v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_number(); });
}

void check_common(const json& options, std::string_view method, const std::set<std::string>& extra) {
  if (!options.is_object()) throw ValidationError("optimizer options must be a key-value map");
  for (const auto& [key, v] : options.items()) {
    if (!common_keys().count(key) && !extra.count(key)) {
      throw ValidationError("unknown option '" + key + "' for " + std::string(method));
    }
    if (key == "method") {
      require(v.is_string() && lower(v.get<std::string>()) == lower(method), key, "the handle's method name");
    } else if (key == "dimension") {
      require(v.is_number_integer() && v.get<long>() >= 1, key, "a positive integer");
    } else if (key == "control-H" || key == "drift-H" || key == "control-params" || key == "control-funcs") {
      require(is_string_list(v), key, "a list of strings");
    } else if (key == "target-U") {
      require(v.is_string() || v.is_array(), key, "a gate name, assembly source or matrix");
    } else if (key == "dt" || key == "max-time") {
      require(v.is_number() && v.get<double>() > 0.0, key, "a positive number");
    } else if (key == "n-samples" || key == "max-iters") {
      require(v.is_number_integer() && v.get<long>() >= (key == "n-samples" ? 1 : 0), key,
              key == "n-samples" ? "a positive integer" : "a non-negative integer");
    } else if (key == "seed") {
      require(v.is_number_unsigned() || (v.is_number_integer() && v.get<long>() >= 0), key,
              "a non-negative integer");
    } else if (key == "amplitude-bound" || key == "tol") {
      require(v.is_number() && v.get<double>() >= 0.0, key, "a non-negative number");
    } else if (key == "learning-rate" || key == "lambda") {
      require(v.is_number() && v.get<double>() > 0.0, key, "a positive number");
    } else if (key == "initial-parameters") {
      require(is_number_list(v), key, "a list of numbers");
    } else if (key == "sample-hold") {
      require(v.is_boolean(), key, "a boolean");
    } else if (key == "gaussians") {
      require(v.is_array(), key, "a list (one entry per channel) of Gaussian lists");
    }
  }
}

std::vector<std::string> strings(const json& v) { return v.get<std::vector<std::string>>(); }

Complex json_complex(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
    return {v[0].get<double>(), v[1].get<double>()};
  }
  throw ValidationError("target-U entries must be numbers or [re, im] pairs");
}

std::vector<GoatEnvelopeSpec> parse_gaussians(const json& v) {
  std::vector<GoatEnvelopeSpec> channels;
  for (const json& ch : v) {
    if (!ch.is_array() || ch.empty()) throw ValidationError("gaussians: each channel needs a non-empty list");
    GoatEnvelopeSpec spec;
    for (const json& g : ch) {
      if (!g.is_object()) throw ValidationError("gaussians: entries must be objects");
      GaussianPulse p;
      p.train_amplitude = p.train_center = p.train_width = true;
      for (const auto& [k, x] : g.items()) {
        if (k == "amplitude" || k == "center" || k == "width") {
          if (!x.is_number()) throw ValidationError("gaussians: '" + k + "' must be a number");
          (k == "amplitude" ? p.amplitude : (k == "center" ? p.center : p.width)) = x.get<double>();
        } else if (k == "trainable") {
          if (!is_string_list(x)) throw ValidationError("gaussians: 'trainable' must be a list of field names");
          p.train_amplitude = p.train_center = p.train_width = false;
          for (const std::string& f : strings(x)) {
            if (f == "amplitude") p.train_amplitude = true;
            else if (f == "center") p.train_center = true;
            else if (f == "width") p.train_width = true;
            else throw ValidationError("gaussians: unknown trainable field '" + f + "'");
          }
        } else {
          throw ValidationError("gaussians: unknown key '" + k + "'");
        }
      }
      spec.pulses.push_back(p);
    }
    channels.push_back(std::move(spec));
  }
  return channels;
}

class GrapeHandle : public Optimizer {
 public:
  explicit GrapeHandle(json options) : Optimizer(std::move(options)) {}
  std::string_view name() const override { return "GRAPE"; }

 protected:
  void check_options(const json& options) const override { check_common(options, name(), {"learning-rate"}); }
  OptimResult run(const ControlProblem& problem, const json& options) const override {
    GrapeOptions o;
    if (options.contains("learning-rate")) o.learning_rate = options["learning-rate"].get<double>();
    return grape_optimize(problem, o);
  }
};

class KrotovHandle : public Optimizer {
 public:
  explicit KrotovHandle(json options) : Optimizer(std::move(options)) {}
  std::string_view name() const override { return "krotov"; }

 protected:
  void check_options(const json& options) const override { check_common(options, name(), {"lambda"}); }
  OptimResult run(const ControlProblem& problem, const json& options) const override {
    KrotovOptions o;
    if (options.contains("lambda")) o.lambda = options["lambda"].get<double>();
    return krotov_optimize(problem, o);
  }
};

class GoatHandle : public Optimizer {
 public:
  explicit GoatHandle(json options) : Optimizer(std::move(options)) {}
  std::string_view name() const override { return "GOAT"; }

 protected:
  void check_options(const json& options) const override {
    check_common(options, name(), {"control-params", "control-funcs", "gaussians", "sample-hold"});
    const bool funcs = options.contains("control-funcs");
    const bool gauss = options.contains("gaussians");
    if (funcs == gauss) {
      throw ValidationError("GOAT needs exactly one envelope specification: control-funcs or gaussians");
    }
    if (options.contains("control-params") && !funcs) {
      throw ValidationError("GOAT: control-params requires control-funcs");
    }
    if (gauss) parse_gaussians(options["gaussians"]);
  }

  OptimResult run(const ControlProblem& problem, const json& options) const override {
    ControlProblem p = problem;
    std::shared_ptr<const EnvelopeFamily> env;
    if (options.contains("control-funcs")) {
      std::vector<std::string> names;
      if (options.contains("control-params")) names = strings(options["control-params"]);
      // initial-parameters seed the expression parameters themselves.
      env = std::make_shared<ExpressionEnvelopes>(strings(options["control-funcs"]), names, p.initial_guess);
      p.initial_guess.clear();
    } else {
      env = std::make_shared<GaussianEnvelopes>(parse_gaussians(options["gaussians"]));
    }
    GoatOptions o;
    if (options.contains("sample-hold")) o.sample_hold = options["sample-hold"].get<bool>();
    return goat_optimize(p, env, o);
  }
};

}  // namespace

void Optimizer::set_options(const json& extra) {
  if (!extra.is_object()) throw ValidationError("optimizer options must be a key-value map");
  json merged = options_;
  merged.update(extra);
  check_options(merged);
  options_ = std::move(merged);
}

OptimResult Optimizer::optimize(const SystemModel* model) const {
  check_options(options_);
  return run(problem_from_options(options_, model), options_);
}

std::vector<std::string> optimizer_methods() { return {"GRAPE", "GOAT", "krotov"}; }

std::unique_ptr<Optimizer> get_optimizer(std::string_view method, const json& options) {
  const json opts = options.is_null() ? json::object() : options;
  const std::string key = lower(method);
  std::unique_ptr<Optimizer> handle;
  if (key == "grape") {
    handle = std::make_unique<GrapeHandle>(opts);
  } else if (key == "goat") {
    handle = std::make_unique<GoatHandle>(opts);
  } else if (key == "krotov") {
    handle = std::make_unique<KrotovHandle>(opts);
  } else {
    throw ValidationError("unknown optimization method '" + std::string(method) + "' (available: GRAPE, GOAT, krotov)");
  }
  handle->set_options(json::object());
  return handle;
}

Matrix parse_target(const json& value, int n_qubits) {
  const auto dim = static_cast<Eigen::Index>(1) << n_qubits;
  if (value.is_string()) {
    const std::string text = value.get<std::string>();
    static const std::regex key_re(R"(^\s*([A-Za-z]+)([0-9]+)\s*$)");
    std::smatch m;
    if (std::regex_match(text, m, key_re)) {
      const auto kind = gate_kind_from_name(m[1].str());
      if (!kind) throw ValidationError("target-U: unknown gate '" + m[1].str() + "'");
      if (gate_param_count(*kind) != 0) throw ValidationError("target-U: gate '" + m[1].str() + "' needs an angle");
      const std::string digits = m[2].str();
      std::vector<int> targets;
      if (gate_arity(*kind) == 1) {
        targets.push_back(std::stoi(digits));
      } else if (digits.size() == 2) {
        targets = {digits[0] - '0', digits[1] - '0'};
      } else {
        throw ValidationError("target-U: two-qubit key '" + text + "' needs two single-digit qubit indices");
      }
      for (int q : targets) {
        if (q >= n_qubits) {
          throw ValidationError("target-U: qubit " + std::to_string(q) + " outside a " + std::to_string(n_qubits) +
                                "-qubit system");
        }
      }
      return embed_gate(gate_matrix(make_gate(*kind, targets)), targets, n_qubits);
    }
    const Circuit c = parse_circuit(text, n_qubits);
    if (!c.is_concrete()) throw ValidationError("target-U: circuit has free parameters");
    return circuit_unitary(c);
  }
  if (!value.is_array() || static_cast<Eigen::Index>(value.size()) != dim) {
    throw ValidationError("target-U: expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  }
  Matrix u(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const json& row = value[static_cast<std::size_t>(r)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != dim) {
      throw ValidationError("target-U: row " + std::to_string(r) + " has the wrong length");
    }
    for (Eigen::Index c = 0; c < dim; ++c) u(r, c) = json_complex(row[static_cast<std::size_t>(c)]);
  }
  if (unitarity_defect(u) > 1e-8) throw ValidationError("target-U: matrix is not unitary to 1e-8");
  return u;
}

ControlProblem problem_from_options(const json& options, const SystemModel* model) {
  ControlProblem p;
  if (options.contains("control-H")) {
    if (model) throw ValidationError("control-H given together with a system model");
    const auto ops = strings(options["control-H"]);
    if (ops.empty()) throw ValidationError("control-H is empty");
    std::vector<std::string> drift = options.contains("drift-H") ? strings(options["drift-H"]) : std::vector<std::string>{};
    int max_q = 0;
    for (const auto& s : ops) max_q = std::max(max_q, OperatorExpr::parse(s).max_qubit());
    for (const auto& s : drift) max_q = std::max(max_q, OperatorExpr::parse(s).max_qubit());
    p.model.n_qubits = options.contains("dimension") ? options["dimension"].get<int>() : max_q + 1;
    p.model.dt = 1.0;
    for (std::size_t i = 0; i < ops.size(); ++i) {
      p.model.control.push_back({"d" + std::to_string(i), OperatorExpr::parse(ops[i]), std::nullopt});
    }
    for (const auto& s : drift) p.model.drift.push_back({1.0, OperatorExpr::parse(s)});
  } else if (model) {
    p.model = *model;
    if (options.contains("dimension") && options["dimension"].get<int>() != model->n_qubits) {
      throw ValidationError("dimension " + std::to_string(options["dimension"].get<int>()) +
                            " does not match the model's " + std::to_string(model->n_qubits) + " qubits");
    }
    if (options.contains("drift-H")) {
      for (const auto& s : strings(options["drift-H"])) p.model.drift.push_back({1.0, OperatorExpr::parse(s)});
    }
  } else {
    throw ValidationError("no control Hamiltonian: pass control-H or a system model");
  }
  if (options.contains("dt")) p.model.dt = options["dt"].get<double>();

  if (!options.contains("max-time")) throw ValidationError("missing required option 'max-time'");
  p.horizon = options["max-time"].get<double>();
  if (options.contains("n-samples")) {
    p.n_samples = options["n-samples"].get<std::size_t>();
    p.model.dt = p.horizon / static_cast<double>(p.n_samples);
  } else {
    const double ratio = p.horizon / p.model.dt;
    const double n = std::round(ratio);
    if (n < 1.0 || std::abs(ratio - n) > 1e-9 * std::max(1.0, ratio)) {
      throw ValidationError("max-time " + std::to_string(p.horizon) + " is not a positive multiple of dt " +
                            std::to_string(p.model.dt));
    }
    p.n_samples = static_cast<std::size_t>(n);
    p.horizon = n * p.model.dt;
  }
  p.model.validate();

  if (!options.contains("target-U")) throw ValidationError("missing required option 'target-U'");
  p.target = parse_target(options["target-U"], p.model.n_qubits);
  if (options.contains("amplitude-bound")) p.amplitude_bound = options["amplitude-bound"].get<double>();
  if (options.contains("seed")) p.seed = options["seed"].get<std::uint64_t>();
  if (options.contains("tol")) p.tol = options["tol"].get<double>();
  if (options.contains("max-iters")) p.max_iters = options["max-iters"].get<int>();
  if (options.contains("initial-parameters")) p.initial_guess = options["initial-parameters"].get<std::vector<double>>();
  p.validate();
  return p;
}

}  // namespace qoc
