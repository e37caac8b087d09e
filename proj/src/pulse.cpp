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

#include "qoc/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace qoc {

using nlohmann::json;

std::int64_t PulseProgram::total_duration() const {
  std::int64_t end = 0;
  for (const auto& ins : instructions) end = std::max(end, ins.end());
  return end;
}

std::vector<std::string> PulseProgram::channels() const {
  std::set<std::string> names;
  for (const auto& ins : instructions) names.insert(ins.channel);
  return {names.begin(), names.end()};
}

void PulseProgram::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("pulse program: dt must be positive");
  std::map<std::string, std::vector<std::pair<std::int64_t, std::int64_t>>> spans;
  for (const auto& ins : instructions) {
    if (ins.channel.empty()) throw ValidationError("pulse program: empty channel name");
    if (ins.t0 < 0) throw ValidationError("pulse program: negative start time on " + ins.channel);
    if (ins.samples.empty()) throw ValidationError("pulse program: empty instruction on " + ins.channel);
    for (const Complex& s : ins.samples) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        throw ValidationError("pulse program: non-finite sample on " + ins.channel);
      }
    }
    spans[ins.channel].emplace_back(ins.t0, ins.end());
  }
  for (auto& [channel, list] : spans) {
    std::sort(list.begin(), list.end());
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (list[i].first < list[i - 1].second) {
        throw ValidationError("pulse program: overlapping instructions on " + channel + " at sample " +
                              std::to_string(list[i].first));
      }
    }
  }
}

PulseProgram PulseProgram::canonical() const {
  PulseProgram out = *this;
  std::stable_sort(out.instructions.begin(), out.instructions.end(), [](const auto& a, const auto& b) {
    return a.t0 != b.t0 ? a.t0 < b.t0 : a.channel < b.channel;
  });
  return out;
}

bool PulseProgram::operator==(const PulseProgram& other) const {
  const PulseProgram a = canonical();
  const PulseProgram b = other.canonical();
  return a.dt == b.dt && a.instructions == b.instructions && a.metadata == b.metadata;
}

namespace {

double clean(double x) { return x == 0.0 ? 0.0 : x; }  // drops the sign of -0

[[noreturn]] void bad(const std::string& what) { throw ParseError("pulse program: " + what); }

Complex parse_sample(const json& v) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) bad("samples must be [re, im] pairs");
  return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

json emit_program(const PulseProgram& program) {
  const PulseProgram p = program.canonical();
  json instructions = json::array();
  for (const auto& ins : p.instructions) {
    json samples = json::array();
    for (const Complex& s : ins.samples) samples.push_back({clean(s.real()), clean(s.imag())});
    instructions.push_back({{"channel", ins.channel}, {"t0", ins.t0}, {"samples", std::move(samples)}});
  }
  json meta = {{"method", p.metadata.method}, {"infidelity", nullptr}};
  if (p.metadata.infidelity) meta["infidelity"] = clean(*p.metadata.infidelity);
  return {{"dt", p.dt}, {"instructions", std::move(instructions)}, {"metadata", std::move(meta)}};
}

std::string dump_program(const PulseProgram& program) { return emit_program(program).dump(1) + "\n"; }

PulseProgram parse_program(const json& doc) {
  if (!doc.is_object()) bad("document must be an object");
  PulseProgram p;
  for (const auto& [key, v] : doc.items()) {
    if (key == "dt") {
      if (!v.is_number() || !(v.get<double>() > 0.0)) bad("dt must be a positive number");
      p.dt = v.get<double>();
    } else if (key == "instructions") {
      if (!v.is_array()) bad("instructions must be a list");
      for (const json& e : v) {
        if (!e.is_object()) bad("instruction must be an object");
        PulseInstruction ins;
        bool has_channel = false, has_t0 = false, has_samples = false;
        for (const auto& [k, x] : e.items()) {
          if (k == "channel") {
            if (!x.is_string()) bad("channel must be a string");
            ins.channel = x.get<std::string>();
            has_channel = true;
          } else if (k == "t0") {
            if (!x.is_number_integer() || x.get<std::int64_t>() < 0) bad("t0 must be a non-negative integer");
            ins.t0 = x.get<std::int64_t>();
            has_t0 = true;
          } else if (k == "samples") {
            if (!x.is_array()) bad("samples must be a list");
            for (const json& s : x) ins.samples.push_back(parse_sample(s));
            has_samples = true;
          } else {
            bad("unknown instruction key '" + k + "'");
          }
        }
        if (!has_channel || !has_t0 || !has_samples) bad("instruction needs channel, t0 and samples");
        p.instructions.push_back(std::move(ins));
      }
    } else if (key == "metadata") {
      if (!v.is_object()) bad("metadata must be an object");
      for (const auto& [k, x] : v.items()) {
        if (k == "method") {
          if (!x.is_string()) bad("metadata.method must be a string");
          p.metadata.method = x.get<std::string>();
        } else if (k == "infidelity") {
          if (x.is_null()) continue;
          if (!x.is_number()) bad("metadata.infidelity must be a number or null");
          p.metadata.infidelity = x.get<double>();
        } else {
          bad("unknown metadata key '" + k + "'");
        }
      }
    } else {
      bad("unknown key '" + key + "'");
    }
  }
  if (!doc.contains("dt")) bad("missing dt");
  if (!doc.contains("instructions")) bad("missing instructions");
  try {
    p.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return p;
}

PulseProgram parse_program_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("pulse program: ") + e.what());
  }
  return parse_program(doc);
}

SampledSignal to_signal(const PulseProgram& program, const SystemModel& model) {
  program.validate();
  const auto n = static_cast<std::size_t>(program.total_duration());
  SampledSignal sig = SampledSignal::zeros(program.dt, n, model.channels());
  for (const auto& ins : program.instructions) {
    const auto c = model.channel_index(ins.channel);
    if (!c) throw ValidationError("channel mismatch: '" + ins.channel + "' is not a channel of the model");
    for (std::size_t k = 0; k < ins.samples.size(); ++k) {
      sig.samples[*c][static_cast<std::size_t>(ins.t0) + k] = ins.samples[k];
    }
  }
  return sig;
}

std::vector<Complex> discretize_envelope(const Envelope& f, double tau, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("discretize: dt must be positive");
  if (!(tau >= dt * (1.0 - 1e-12))) throw ValidationError("discretize: duration is shorter than one sample");
  const auto n = static_cast<std::size_t>(std::llround(tau / dt));
  std::vector<Complex> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    out[k] = f(dt * static_cast<double>(k));
    if (!std::isfinite(out[k].real()) || !std::isfinite(out[k].imag())) {
      throw NumericalError("discretize: envelope is not finite at t = " + std::to_string(dt * static_cast<double>(k)));
    }
  }
  return out;
}

std::string gate_key(const Gate& gate) {
  std::string key(gate.name());
  key += '(';
  for (std::size_t i = 0; i < gate.targets.size(); ++i) {
    if (i) key += ',';
    key += std::to_string(gate.targets[i]);
  }
  for (std::size_t i = 0; i < gate.params.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", gate.params[i].value());
    key += i ? "," : ";";
    key += buf;
  }
  key += ')';
  return key;
}

PulseProgram library_lower(const Circuit& circuit, const PulseLibrary& library, const SystemModel* model) {
  circuit.validate();
  if (!circuit.is_concrete()) throw ValidationError("library lowering needs a circuit without free parameters");
  PulseProgram out;
  out.metadata.method = "library";
  bool have_dt = false;
  std::map<std::string, std::int64_t> busy_until;
  for (const Gate& g : circuit.gates) {
    const std::string key = gate_key(g);
    const auto it = library.find(key);
    if (it == library.end()) throw ValidationError("no pulse library entry for gate " + key);
    const PulseProgram& frag = it->second;
    frag.validate();
    if (have_dt && std::abs(frag.dt - out.dt) > 1e-12 * out.dt) {
      throw ValidationError("pulse library entry " + key + " has a different dt");
    }
    out.dt = frag.dt;
    have_dt = true;
    std::int64_t start = 0;
    for (const auto& ins : frag.instructions) {
      if (model && !model->channel_index(ins.channel)) {
        throw ValidationError("pulse library entry " + key + " uses unknown channel " + ins.channel);
      }
      const auto b = busy_until.find(ins.channel);
      if (b != busy_until.end()) start = std::max(start, b->second);
    }
    for (const auto& ins : frag.instructions) {
      PulseInstruction shifted = ins;
      shifted.t0 += start;
      busy_until[ins.channel] = std::max(busy_until[ins.channel], shifted.end());
      out.instructions.push_back(std::move(shifted));
    }
  }
  if (!have_dt && model) out.dt = model->dt;
  return out.canonical();
}

}  // namespace qoc
