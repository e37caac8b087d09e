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
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cli.hpp"
#include "qoc/circuit.hpp"
#include "qoc/dynamics.hpp"
#include "qoc/optimizers.hpp"
#include "qoc/pulse.hpp"
#include "qoc/system_model.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

qoc::Circuit bound_circuit(const std::string& source, const std::map<std::string, double>& values) {
  qoc::Circuit c = qoc::parse_circuit(source);
  for (const auto& [name, _] : values) {
    if (std::find(c.free_params.begin(), c.free_params.end(), name) == c.free_params.end()) {
      throw qoc::ValidationError("'" + name + "' is not a free parameter of the circuit");
    }
  }
  if (c.free_params.empty()) return c;
  std::vector<double> ordered;
  for (const auto& p : c.free_params) {
    auto it = values.find(p);
    if (it == values.end()) throw qoc::ValidationError("free parameter '" + p + "' is unbound");
    ordered.push_back(it->second);
  }
  return qoc::eval_parametric(c, ordered);
}

py::dict result_dict(const qoc::OptimResult& r) {
  py::dict samples;
  for (std::size_t c = 0; c < r.samples.channels.size(); ++c) {
    samples[py::str(r.samples.channels[c])] = r.samples.samples[c];
  }
  py::dict d;
  d["params"] = r.params;
  d["final_infidelity"] = r.final_infidelity;
  d["iterations"] = r.iterations;
  d["trace"] = r.trace;
  d["status"] = r.status;
  d["dt"] = r.samples.dt;
  d["samples"] = samples;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Gate-to-pulse compilation by quantum optimal control";

  static py::exception<qoc::Error> error(m, "QocError", PyExc_ValueError);
  static py::exception<qoc::ParseError> parse_error(m, "ParseError", error.ptr());
  static py::exception<qoc::ValidationError> validation_error(m, "ValidationError", error.ptr());
  static py::exception<qoc::NumericalError> numerical_error(m, "NumericalError", error.ptr());
  static py::exception<qoc::ConvergenceError> convergence_error(m, "ConvergenceError", error.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const qoc::ConvergenceError& e) {
      py::object exc = py::handle(convergence_error.ptr())(e.what());
      exc.attr("program") = qoc::dump_program(e.program());
      exc.attr("infidelity") = e.result().final_infidelity;
      PyErr_SetObject(convergence_error.ptr(), exc.ptr());
    } catch (const qoc::ParseError& e) {
      py::set_error(parse_error, e.what());
    } catch (const qoc::ValidationError& e) {
      py::set_error(validation_error, e.what());
    } catch (const qoc::NumericalError& e) {
      py::set_error(numerical_error, e.what());
    } catch (const qoc::Error& e) {
      py::set_error(error, e.what());
    } catch (const json::exception& e) {
      py::set_error(validation_error, e.what());
    }
  });

  m.def("methods", &qoc::optimizer_methods, "Registered optimization methods.");

  m.def("free_parameters", [](const std::string& source) { return qoc::parse_circuit(source).free_params; },
        py::arg("source"), "Free parameters of a circuit, in order of first use.");

  m.def(
      "circuit_unitary",
      [](const std::string& source, const std::map<std::string, double>& values) {
        return qoc::circuit_unitary(bound_circuit(source, values));
      },
      py::arg("source"), py::arg("values") = std::map<std::string, double>{},
      "Unitary of an assembly circuit; qubit 0 is the least-significant bit.");

  m.def("infidelity", &qoc::infidelity, py::arg("u"), py::arg("target"));

  m.def(
      "optimize",
      [](const std::string& method, const std::string& options, std::optional<std::string> model) {
        const auto handle = qoc::get_optimizer(method, json::parse(options));
        std::optional<qoc::SystemModel> sm;
        if (model) sm = qoc::parse_model_text(*model);
        qoc::OptimResult r;
        {
          py::gil_scoped_release release;
          r = handle->optimize(sm ? &*sm : nullptr);
        }
        return result_dict(r);
      },
      py::arg("method"), py::arg("options"), py::arg("model") = py::none(),
      "Runs an optimizer; options and model are JSON documents.");

  m.def(
      "transform",
      [](const std::string& source, const std::string& model, const std::string& method, const std::string& options,
         const std::map<std::string, double>& values) {
        const qoc::Circuit c = bound_circuit(source, values);
        const qoc::SystemModel sm = qoc::parse_model_text(model);
        const json opts = json::parse(options);
        qoc::TransformResult r;
        {
          py::gil_scoped_release release;
          r = qoc::transform(c, sm, method, opts);
        }
        return py::make_tuple(qoc::dump_program(r.program), result_dict(r.optim));
      },
      py::arg("source"), py::arg("model"), py::arg("method"), py::arg("options"),
      py::arg("values") = std::map<std::string, double>{},
      "Compiles a circuit into a pulse program; returns (program JSON, optimizer result).");

  m.def(
      "propagator",
      [](const std::string& program, const std::string& model) {
        const qoc::SystemModel sm = qoc::parse_model_text(model);
        return qoc::piecewise_propagator(sm, qoc::to_signal(qoc::parse_program_text(program), sm));
      },
      py::arg("program"), py::arg("model"), "Unitary generated by a pulse program on a model.");

  m.def(
      "evolve_state",
      [](const std::string& program, const std::string& model, const std::vector<int>& bits) {
        const qoc::SystemModel sm = qoc::parse_model_text(model);
        const auto sig = qoc::to_signal(qoc::parse_program_text(program), sm);
        return qoc::propagate_state(qoc::materialize(sm), sig, qoc::basis_state(bits));
      },
      py::arg("program"), py::arg("model"), py::arg("bits"),
      "State at every sample boundary, starting from the basis state with bits[q] on qubit q.");

  m.def("discretize_envelope", &qoc::discretize_envelope, py::arg("f"), py::arg("tau"), py::arg("dt"),
        "Left-endpoint samples f(n*dt), n < round(tau/dt).");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = qoc::cli::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit code, stdout, stderr).");
}
