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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qoc/circuit.hpp"
#include "qoc/common.hpp"
#include "qoc/dynamics.hpp"
#include "qoc/optimizers.hpp"
#include "qoc/system_model.hpp"

namespace qoc {

struct PulseInstruction {
  std::string channel;
  std::int64_t t0 = 0;  // start, in samples
  std::vector<Complex> samples;

  std::int64_t end() const { return t0 + static_cast<std::int64_t>(samples.size()); }
  bool operator==(const PulseInstruction&) const = default;
};

struct ProgramMetadata {
  std::string method;
  std::optional<double> infidelity;

  bool operator==(const ProgramMetadata&) const = default;
};

struct PulseProgram {
  double dt = 1.0;
  std::vector<PulseInstruction> instructions;
  ProgramMetadata metadata;

  /// max(t0 + length) over instructions, 0 when empty.
  std::int64_t total_duration() const;
  /// Sorted distinct channel names.
  std::vector<std::string> channels() const;
  /// Checks t0 >= 0, non-empty samples, dt > 0 and no overlap on a channel.
  void validate() const;
  /// Instructions ordered by (t0, channel).
  PulseProgram canonical() const;

  /// Equality of canonical forms.
  bool operator==(const PulseProgram& other) const;
};

/// Raised by transform() when the optimized pulse misses the acceptance
/// threshold; carries the best-effort program.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, PulseProgram program, OptimResult result)
      : Error(what), program_(std::move(program)), result_(std::move(result)) {}

  const PulseProgram& program() const { return program_; }
  const OptimResult& result() const { return result_; }

 private:
  PulseProgram program_;
  OptimResult result_;
};

nlohmann::json emit_program(const PulseProgram& program);
/// Canonical text form; equal programs give byte-identical text.
std::string dump_program(const PulseProgram& program);
PulseProgram parse_program(const nlohmann::json& doc);
PulseProgram parse_program_text(std::string_view text);

/// Lays the program out on the model's channels (dt taken from the program).
/// Channels missing from the model raise ValidationError.
SampledSignal to_signal(const PulseProgram& program, const SystemModel& model);

/// N = round(tau / dt) left-endpoint samples f(n * dt).
std::vector<Complex> discretize_envelope(const Envelope& f, double tau, double dt);

/// Gate key used by pulse libraries: "X(0)", "CNOT(0,1)", "Rx(0;1.57079632679)".
std::string gate_key(const Gate& gate);

using PulseLibrary = std::map<std::string, PulseProgram>;

/// Concatenates library fragments gate by gate. A fragment starts once every
/// channel it uses is free, so gates sharing a channel stay atomic and ordered
/// while gates on disjoint channels overlap.
PulseProgram library_lower(const Circuit& circuit, const PulseLibrary& library, const SystemModel* model = nullptr);

struct TransformResult {
  PulseProgram program;
  OptimResult optim;
};

inline constexpr double kDefaultAcceptThreshold = 5e-2;

/// Circuit -> target unitary -> optimizer -> one instruction per channel.
/// `options` takes the optimizer keys (max-time, n-samples, seed, tol, ...)
/// plus `accept-threshold`; target-U, channels and sample count are deduced.
/// The metadata infidelity is that of the emitted samples.
TransformResult transform(const Circuit& circuit, const SystemModel& model, std::string_view method,
                          const nlohmann::json& options);

}  // namespace qoc
