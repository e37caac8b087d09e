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

#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qoc/circuit.hpp"
#include "qoc/dynamics.hpp"
#include "qoc/expr.hpp"
#include "qoc/pulse.hpp"
#include "qoc/system_model.hpp"

#ifndef QOC_VERSION
#define QOC_VERSION "unknown"
#endif

namespace qoc::cli {
namespace {

using nlohmann::json;

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error while reading " + path);
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << content;
  out.flush();
  if (!out) throw IoError("error while writing " + path);
}

std::string num(double x) {
  if (x == 0.0 || std::abs(x) < 1e-300) x = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string join(const std::vector<std::string>& cells) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) line += ", ";
    line += cells[i];
  }
  return line + "\n";
}

std::vector<std::string> split(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : text) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  for (auto& p : parts) {
    const auto b = p.find_first_not_of(" \t");
    const auto e = p.find_last_not_of(" \t");
    p = b == std::string::npos ? "" : p.substr(b, e - b + 1);
  }
  if (parts.size() == 1 && parts[0].empty()) parts.clear();
  return parts;
}

double constant(const std::string& text) {
  const Expr e = Expr::parse(text);
  if (!e.is_constant()) throw ValidationError("'" + text + "' is not a numeric value");
  return e.value();
}

void emit(const std::string& output, const std::string& content, std::ostream& out) {
  if (output.empty()) {
    out << content;
  } else {
    write_file(output, content);
  }
}

// ---------------------------------------------------------------------------
// Commands. Each takes the manifest fields: inputs, resolved options, output.

const char* const kTransformKeys[] = {"max-time", "n-samples", "seed", "tol", "amplitude-bound", "max-iters",
                                      "accept-threshold"};

json transform_options(const json& options) {
  json t = json::object();
  for (const char* k : kTransformKeys) {
    if (options.contains(k)) t[k] = options[k];
  }
  return t;
}

void check_method(const std::string& method) {
  const auto names = optimizer_methods();
  for (const auto& n : names) {
    if (n.size() == method.size() &&
        std::equal(n.begin(), n.end(), method.begin(), [](char a, char b) { return std::tolower(a) == std::tolower(b); })) {
      return;
    }
  }
  throw ValidationError("unknown optimization method '" + method + "' (available: GRAPE, GOAT, krotov)");
}

int cmd_compile(const json& inputs, const json& options, const std::string& output, std::ostream& out,
                std::ostream& err) {
  const Circuit circuit = parse_circuit(read_file(inputs.at("circuit")));
  const SystemModel model = parse_model_text(read_file(inputs.at("model")));
  const std::string method = options.at("method");
  check_method(method);
  if (output.empty()) throw ValidationError("compile needs --output");
  try {
    const TransformResult r = transform(circuit, model, method, transform_options(options));
    write_file(output, dump_program(r.program));
    char buf[200];
    std::snprintf(buf, sizeof buf, "method=%s infidelity=%.6e iterations=%d status=%s\n",
                  r.program.metadata.method.c_str(), *r.program.metadata.infidelity, r.optim.iterations,
                  r.optim.status.c_str());
    out << buf;
    return kOk;
  } catch (const ConvergenceError& e) {
    write_file(output, dump_program(e.program()));
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  }
}

std::vector<int> parse_bits(const std::string& text, int n_qubits) {
  // Written as a ket: the leftmost character is the highest qubit.
  std::vector<int> bits(static_cast<std::size_t>(n_qubits), 0);
  if (text.empty()) return bits;
  if (static_cast<int>(text.size()) != n_qubits) {
    throw ValidationError("initial state '" + text + "' needs " + std::to_string(n_qubits) + " bits");
  }
  for (int q = 0; q < n_qubits; ++q) {
    const char c = text[static_cast<std::size_t>(n_qubits - 1 - q)];
    if (c != '0' && c != '1') throw ValidationError("initial state must be a bit string, got '" + text + "'");
    bits[static_cast<std::size_t>(q)] = c - '0';
  }
  return bits;
}

int cmd_simulate(const json& inputs, const json& options, const std::string& output, std::ostream& out,
                 std::ostream& /*err*/) {
  const PulseProgram program = parse_program_text(read_file(inputs.at("pulse")));
  SystemModel model = parse_model_text(read_file(inputs.at("model")));
  if (options.contains("lo-delta")) model = apply_detuning(model, options["lo-delta"].get<double>());
  if (options.contains("t1")) {
    const double t1 = options["t1"].get<double>();
    if (!(t1 > 0.0)) throw ValidationError("--t1 must be positive");
    for (int q = 0; q < model.n_qubits; ++q) {
      model.collapse.push_back({1.0 / t1, OperatorExpr::parse("SM" + std::to_string(q))});
    }
  }
  const int n = model.n_qubits;
  const SampledSignal sig = to_signal(program, model);
  const ModelOperators ops = materialize(model);
  const Vector psi0 = basis_state(parse_bits(options.value("initial-state", std::string()), n));

  std::vector<std::string> header{"t"};
  std::vector<Matrix> observables;
  for (int q = 0; q < n; ++q) {
    for (const char* p : {"X", "Y", "Z"}) {
      const std::string name = p + std::to_string(q);
      header.push_back("<" + name + ">");
      observables.push_back(build_operator(name, n));
    }
    header.push_back(q == 0 ? "p_excited" : "p_excited" + std::to_string(q));
  }
  const std::vector<std::string> extra = options.value("observables", std::vector<std::string>{});
  std::vector<Matrix> extra_ops;
  for (const auto& o : extra) {
    header.push_back("<" + o + ">");
    extra_ops.push_back(build_operator(o, n));
  }

  std::string csv = join(header);
  auto row = [&](std::size_t k, auto&& expect) {
    std::vector<std::string> cells{num(sig.dt * static_cast<double>(k))};
    for (int q = 0; q < n; ++q) {
      const double z = expect(observables[static_cast<std::size_t>(3 * q + 2)]);
      for (int p = 0; p < 3; ++p) cells.push_back(num(expect(observables[static_cast<std::size_t>(3 * q + p)])));
      cells.push_back(num((1.0 - z) / 2.0));
    }
    for (const Matrix& o : extra_ops) cells.push_back(num(expect(o)));
    csv += join(cells);
  };
  if (ops.collapse.empty()) {
    const auto states = propagate_state(ops, sig, psi0);
    for (std::size_t k = 0; k < states.size(); ++k) row(k, [&](const Matrix& o) { return expectation(o, states[k]); });
  } else {
    const auto rhos = lindblad_evolve(ops, sig, density(psi0));
    for (std::size_t k = 0; k < rhos.size(); ++k) row(k, [&](const Matrix& o) { return expectation(o, rhos[k]); });
  }
  emit(output, csv, out);
  return kOk;
}

std::string format_entry(Complex z) {
  double re = std::abs(z.real()) < 1e-14 ? 0.0 : z.real();
  double im = std::abs(z.imag()) < 1e-14 ? 0.0 : z.imag();
  if (im == 0.0) return num(re);
  std::string s = re == 0.0 ? "" : num(re);
  if (!s.empty() && im > 0.0) s += "+";
  return s + num(im) + "j";
}

int cmd_unitary(const json& inputs, const json& options, const std::string& output, std::ostream& out,
                std::ostream& /*err*/) {
  Circuit circuit = parse_circuit(read_file(inputs.at("circuit")));
  const json bind = options.value("bind", json::object());
  for (const auto& item : bind.items()) {
    const auto& names = circuit.free_params;
    if (std::find(names.begin(), names.end(), item.key()) == names.end()) {
      throw ValidationError("--bind names '" + item.key() + "', which is not a free parameter of the circuit");
    }
  }
  if (!circuit.free_params.empty()) {
    std::vector<double> values;
    for (const auto& p : circuit.free_params) {
      if (!bind.contains(p)) throw ValidationError("free parameter '" + p + "' is unbound; pass --bind " + p + "=<value>");
      values.push_back(bind[p].get<double>());
    }
    circuit = eval_parametric(circuit, values);
  }
  const Matrix u = circuit_unitary(circuit);
  std::string text = "[";
  for (Eigen::Index r = 0; r < u.rows(); ++r) {
    text += r ? " [" : "[";
    for (Eigen::Index c = 0; c < u.cols(); ++c) {
      if (c) text += ", ";
      text += format_entry(u(r, c));
    }
    text += r + 1 < u.rows() ? "],\n" : "]]\n";
  }
  emit(output, text, out);
  return kOk;
}

struct SweepRow {
  double value = 0.0;
  double infidelity = 1.0;
  double p_excited = 0.0;
  bool converged = true;
  std::string error;
};

SweepRow sweep_point(const Circuit& circuit, const SystemModel& model, const std::string& method, const json& topts,
                     double value) {
  SweepRow row;
  row.value = value;
  const Circuit bound = eval_parametric(circuit, std::vector<double>{value});
  PulseProgram program;
  try {
    program = transform(bound, model, method, topts).program;
  } catch (const ConvergenceError& e) {
    program = e.program();
    row.converged = false;
    row.error = e.what();
  }
  row.infidelity = program.metadata.infidelity.value_or(1.0);
  const SampledSignal sig = to_signal(program, model);
  const auto states = propagate_state(materialize(model), sig, basis_state(std::vector<int>(
                                                                   static_cast<std::size_t>(model.n_qubits), 0)));
  row.p_excited = std::clamp(1.0 - std::norm(states.back()(0)), 0.0, 1.0);
  return row;
}

int cmd_sweep(const json& inputs, const json& options, const std::string& output, std::ostream& out,
              std::ostream& err, unsigned jobs) {
  const Circuit circuit = parse_circuit(read_file(inputs.at("circuit")));
  const SystemModel model = parse_model_text(read_file(inputs.at("model")));
  if (circuit.free_params.size() != 1) {
    throw ValidationError("sweep needs a circuit with exactly one free parameter, found " +
                          std::to_string(circuit.free_params.size()));
  }
  const std::string method = options.at("method");
  check_method(method);
  const std::vector<double> values = options.at("values").get<std::vector<double>>();
  const json topts = transform_options(options);

  std::vector<SweepRow> rows(values.size());
  std::vector<std::exception_ptr> failures(values.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < values.size();) {
      try {
        rows[i] = sweep_point(circuit, model, method, topts, values[i]);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(values.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  std::string csv = join({"value", "infidelity", "p_excited"});
  int code = kOk;
  for (const SweepRow& r : rows) {
    csv += join({num(r.value), num(r.infidelity), num(r.p_excited)});
    if (!r.converged) {
      err << "error: value " << num(r.value) << ": " << r.error << "\n";
      code = kNotConverged;
    }
  }
  emit(output, csv, out);
  return code;
}

// ---------------------------------------------------------------------------

struct Invocation {
  std::string command;
  json inputs = json::object();
  json options = json::object();
  std::string output;
  unsigned jobs = 0;
};

json manifest_for(const Invocation& inv) {
  json m;
  m["command"] = inv.command;
  m["inputs"] = inv.inputs;
  m["options"] = inv.options;
  m["outputs"] = {{"primary", inv.output}};
  m["seed"] = inv.options.contains("seed") ? inv.options["seed"] : json(nullptr);
  m["version"] = QOC_VERSION;
  return m;
}

int execute(const Invocation& inv, std::ostream& out, std::ostream& err) {
  int code = kOk;
  if (inv.command == "compile") {
    code = cmd_compile(inv.inputs, inv.options, inv.output, out, err);
  } else if (inv.command == "simulate") {
    code = cmd_simulate(inv.inputs, inv.options, inv.output, out, err);
  } else if (inv.command == "unitary") {
    code = cmd_unitary(inv.inputs, inv.options, inv.output, out, err);
  } else if (inv.command == "sweep") {
    const unsigned jobs = inv.jobs ? inv.jobs : std::max(1u, std::thread::hardware_concurrency());
    code = cmd_sweep(inv.inputs, inv.options, inv.output, out, err, jobs);
  } else {
    throw ValidationError("manifest names unknown command '" + inv.command + "'");
  }
  if (!inv.output.empty()) write_file(inv.output + ".manifest.json", manifest_for(inv).dump(2) + "\n");
  return code;
}

Invocation from_manifest(const json& m) {
  if (!m.is_object()) throw ParseError("manifest must be an object");
  for (const char* key : {"command", "inputs", "options", "outputs"}) {
    if (!m.contains(key)) throw ParseError(std::string("manifest is missing '") + key + "'");
  }
  Invocation inv;
  inv.command = m["command"].get<std::string>();
  inv.inputs = m["inputs"];
  inv.options = m["options"];
  inv.output = m["outputs"].value("primary", std::string());
  return inv;
}

void add_optimizer_flags(CLI::App* sub, Invocation& inv, std::string& method, double& max_time, std::size_t& n_samples,
                         std::uint64_t& seed, double& tol, double& bound, int& max_iters, double& accept) {
  sub->add_option("--method", method, "Optimization method: GRAPE, GOAT or krotov")->capture_default_str();
  sub->add_option("--max-time", max_time, "Pulse duration (time units)")->required();
  sub->add_option("--n-samples", n_samples, "Number of samples (default max-time / dt)");
  sub->add_option("--seed", seed, "Random seed")->capture_default_str();
  sub->add_option("--tol", tol, "Infidelity tolerance");
  sub->add_option("--amplitude-bound", bound, "Clip amplitudes to +-bound (0 = unbounded)");
  sub->add_option("--max-iters", max_iters, "Iteration cap");
  sub->add_option("--accept-threshold", accept, "Largest accepted infidelity");
  sub->add_option("-o,--output", inv.output, "Output file");
}

void collect_optimizer_flags(CLI::App* sub, Invocation& inv, const std::string& method, double max_time,
                             std::size_t n_samples, std::uint64_t seed, double tol, double bound, int max_iters,
                             double accept) {
  inv.options["method"] = method;
  inv.options["max-time"] = max_time;
  inv.options["seed"] = seed;
  if (sub->count("--n-samples")) inv.options["n-samples"] = n_samples;
  if (sub->count("--tol")) inv.options["tol"] = tol;
  if (sub->count("--amplitude-bound")) inv.options["amplitude-bound"] = bound;
  if (sub->count("--max-iters")) inv.options["max-iters"] = max_iters;
  if (sub->count("--accept-threshold")) inv.options["accept-threshold"] = accept;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"qoc: gate-to-pulse compiler and pulse simulator"};
  app.set_version_flag("--version", QOC_VERSION);
  app.require_subcommand(1);

  Invocation inv;
  std::string circuit_path, model_path, pulse_path, manifest_path;
  std::string method = "GRAPE";
  double max_time = 0.0, tol = 0.0, bound = 0.0, accept = kDefaultAcceptThreshold;
  std::size_t n_samples = 0;
  std::uint64_t seed = 0;
  int max_iters = 0;

  CLI::App* compile = app.add_subcommand("compile", "Compile a circuit into a pulse program");
  compile->add_option("circuit", circuit_path, "Circuit assembly file")->required();
  compile->add_option("model", model_path, "System model JSON")->required();
  add_optimizer_flags(compile, inv, method, max_time, n_samples, seed, tol, bound, max_iters, accept);

  std::string initial_state, observables;
  double t1 = 0.0, lo_delta = 0.0;
  CLI::App* simulate = app.add_subcommand("simulate", "Simulate a pulse program; writes a trajectory CSV");
  simulate->add_option("pulse", pulse_path, "Pulse program JSON")->required();
  simulate->add_option("model", model_path, "System model JSON")->required();
  simulate->add_option("--initial-state", initial_state, "Basis state as a ket bit string, e.g. 01 (qubit 0 rightmost)");
  simulate->add_option("--observables", observables, "Extra comma-separated operator expressions, e.g. Z0*Z1");
  simulate->add_option("--t1", t1, "Amplitude-damping time T1 on every qubit (Lindblad path)");
  simulate->add_option("--lo-delta", lo_delta, "Static LO detuning delta on every qubit");
  simulate->add_option("-o,--output", inv.output, "Output CSV (default: stdout)");

  std::vector<std::string> binds;
  CLI::App* unitary = app.add_subcommand("unitary", "Print the unitary of a circuit");
  unitary->add_option("circuit", circuit_path, "Circuit assembly file")->required();
  unitary->add_option("--bind", binds, "Free parameter binding name=value (repeatable)");
  unitary->add_option("-o,--output", inv.output, "Output file (default: stdout)");

  std::string values;
  unsigned jobs = 0;
  CLI::App* sweep = app.add_subcommand("sweep", "Compile and simulate a one-parameter circuit over values");
  sweep->add_option("circuit", circuit_path, "Circuit assembly file with one free parameter")->required();
  sweep->add_option("model", model_path, "System model JSON")->required();
  sweep->add_option("--values", values, "Comma-separated values, e.g. 0,pi/4,pi/2")->required();
  sweep->add_option("--jobs", jobs, "Worker threads (default: hardware concurrency)");
  add_optimizer_flags(sweep, inv, method, max_time, n_samples, seed, tol, bound, max_iters, accept);

  CLI::App* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "Manifest JSON")->required();
  std::string replay_output;
  replay->add_option("-o,--output", replay_output, "Write the primary output here instead");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (compile->parsed() || sweep->parsed()) {
      CLI::App* sub = compile->parsed() ? compile : sweep;
      inv.command = sub->get_name();
      inv.inputs = {{"circuit", circuit_path}, {"model", model_path}};
      collect_optimizer_flags(sub, inv, method, max_time, n_samples, seed, tol, bound, max_iters, accept);
      if (sweep->parsed()) {
        json list = json::array();
        for (const auto& v : split(values, ',')) list.push_back(constant(v));
        inv.options["values"] = list;
        inv.jobs = jobs;
      }
    } else if (simulate->parsed()) {
      inv.command = "simulate";
      inv.inputs = {{"pulse", pulse_path}, {"model", model_path}};
      if (simulate->count("--initial-state")) inv.options["initial-state"] = initial_state;
      if (simulate->count("--observables")) inv.options["observables"] = split(observables, ',');
      if (simulate->count("--t1")) inv.options["t1"] = t1;
      if (simulate->count("--lo-delta")) inv.options["lo-delta"] = lo_delta;
    } else if (unitary->parsed()) {
      inv.command = "unitary";
      inv.inputs = {{"circuit", circuit_path}};
      json bind = json::object();
      for (const auto& b : binds) {
        const auto eq = b.find('=');
        if (eq == std::string::npos) throw ValidationError("--bind expects name=value, got '" + b + "'");
        bind[b.substr(0, eq)] = constant(b.substr(eq + 1));
      }
      if (!bind.empty()) inv.options["bind"] = bind;
    } else {
      json m;
      try {
        m = json::parse(read_file(manifest_path));
      } catch (const json::parse_error& e) {
        throw ParseError(std::string("manifest: ") + e.what());
      }
      inv = from_manifest(m);
      if (!replay_output.empty()) inv.output = replay_output;
    }
    return execute(inv, out, err);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const NumericalError& e) {
    err << "error: " << e.what() << "\n";
    return kNotConverged;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kIoError;
  }
}

}  // namespace qoc::cli
