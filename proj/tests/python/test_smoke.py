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

import json
import math
import pathlib

import numpy as np
import pytest

import qoc

DATA = pathlib.Path(__file__).resolve().parent.parent / "data"


def model(name):
    return json.loads((DATA / name).read_text())


def test_methods():
    assert qoc.methods() == ["GRAPE", "GOAT", "krotov"]


def test_circuit_unitary():
    u = qoc.circuit_unitary((DATA / "h_as_yx.xasm").read_text())
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert np.allclose(u, h, atol=1e-12)
    src = (DATA / "rx_theta.xasm").read_text()
    assert qoc.free_parameters(src) == ["theta"]
    rx = qoc.circuit_unitary(src, {"theta": math.pi})
    assert np.allclose(rx, [[0, -1j], [-1j, 0]], atol=1e-12)
    with pytest.raises(qoc.ValidationError):
        qoc.circuit_unitary(src)


def test_parse_error_is_a_value_error():
    with pytest.raises(qoc.ParseError) as info:
        qoc.circuit_unitary("H(q[0]);\nFOO(q[0]);")
    assert isinstance(info.value, ValueError)
    assert "2:" in str(info.value)


def test_infidelity():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    assert qoc.infidelity(x, x) == pytest.approx(0.0, abs=1e-15)
    assert qoc.infidelity(np.eye(2, dtype=complex), x) == pytest.approx(1.0)


def test_goat_pi_pulse():
    result = qoc.optimize(
        "GOAT",
        {
            "target-U": "X0",
            "max-time": 100,
            "control-H": ["X0"],
            "control-params": ["sigma"],
            "control-funcs": ["exp(-t^2/(2*sigma^2))"],
            "initial-parameters": [8.0],
        },
    )
    assert result["final_infidelity"] <= 1e-5
    assert result["status"] == "converged"
    assert len(result["samples"]["d0"]) == 100


def test_unknown_method():
    with pytest.raises(qoc.ValidationError):
        qoc.optimize("NELDER", {})


def test_transform_and_simulate():
    m = model("model1q.json")
    program, result = qoc.transform((DATA / "h.xasm").read_text(), m, "GRAPE", {"max-time": 10, "seed": 3})
    assert {ins["channel"] for ins in program["instructions"]} == {"d0", "d1"}
    u = qoc.propagator(program, m)
    h = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    assert abs(qoc.infidelity(u, h) - result["final_infidelity"]) <= 1e-6
    states = qoc.evolve_state(program, m, [0])
    assert len(states) == 101
    psi = states[-1]
    x = np.vdot(psi, np.array([[0, 1], [1, 0]]) @ psi).real
    assert x >= 0.999


def test_convergence_error_carries_the_program():
    with pytest.raises(qoc.ConvergenceError) as info:
        qoc.transform((DATA / "h.xasm").read_text(), model("model1q_x.json"), "GRAPE", {"max-time": 10})
    assert info.value.infidelity >= 0.5 - 1e-9
    assert json.loads(info.value.program)["metadata"]["method"] == "GRAPE"


def test_discretize_envelope():
    samples = qoc.discretize_envelope(lambda t: 1.0, 5.0, 1.0)
    assert samples == [1.0] * 5
    with pytest.raises(qoc.ValidationError):
        qoc.discretize_envelope(lambda t: 1.0, 0.5, 1.0)


def test_cli_in_process():
    code, out, err = qoc.run_cli("unitary", DATA / "x.xasm")
    assert code == 0
    assert out == "[[0, 1],\n [1, 0]]\n"
    code, _, err = qoc.run_cli("unitary", DATA / "rx_theta.xasm")
    assert code == 2
    assert "theta" in err
