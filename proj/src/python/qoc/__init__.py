# Copyright 2026 The qoc Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Gate-to-pulse compilation by quantum optimal control.

Options and system models may be given as dicts or as JSON text.
"""

import json as _json

from . import _core
from ._core import (
    ConvergenceError,
    NumericalError,
    ParseError,
    QocError,
    ValidationError,
    circuit_unitary,
    discretize_envelope,
    free_parameters,
    infidelity,
    methods,
)

__all__ = [
    "ConvergenceError",
    "NumericalError",
    "ParseError",
    "QocError",
    "ValidationError",
    "circuit_unitary",
    "discretize_envelope",
    "evolve_state",
    "free_parameters",
    "infidelity",
    "methods",
    "optimize",
    "propagator",
    "run_cli",
    "transform",
]


def _text(doc):
    if doc is None or isinstance(doc, str):
        return doc
    return _json.dumps(doc)


def optimize(method, options, model=None):
    """Runs `method` with `options`; returns a dict with params, trace, samples, ..."""
    return _core.optimize(method, _text(options), _text(model))


def transform(source, model, method, options, values=None):
    """Compiles assembly `source` on `model`; returns (program dict, optimizer result)."""
    program, result = _core.transform(source, _text(model), method, _text(options), values or {})
    return _json.loads(program), result


def propagator(program, model):
    return _core.propagator(_text(program), _text(model))


def evolve_state(program, model, bits):
    return _core.evolve_state(_text(program), _text(model), list(bits))


def run_cli(*args):
    """Runs the qoc command line in-process; returns (exit code, stdout, stderr)."""
    return _core.run_cli([str(a) for a in args])
