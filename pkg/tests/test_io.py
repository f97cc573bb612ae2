import copy
import json

import numpy as np
import pytest

from stabcert import io
from stabcert.errors import SchemaError, StabilityConditionError
from stabcert.scenarios import example1_text
from stabcert.simulator import rk4_integrate


@pytest.fixture
def raw():
    return json.loads(example1_text())


def test_example_file_parses(system1):
    assert system1.field.n == 2 and system1.field.m == 1
    assert system1.perturbation.c == 0.001
    assert system1.perturbation.phase == "cosine"
    assert system1.remainder.rho == pytest.approx(4.305038313613819)
    np.testing.assert_array_equal(system1.initial_state, [6e-4, 5e-4])
    assert system1.name == "example1"


def test_round_trip(raw, system1):
    again = io.system_from_dict(io.system_to_dict(system1))
    assert io.system_to_dict(again) == io.system_to_dict(system1)
    assert io.system_to_dict(system1)["field"] == raw["field"]


@pytest.mark.parametrize("where", ["$", "$.perturbation", "$.field[0]", "$.perturbation.phase"])
def test_unknown_keys_rejected(raw, where):
    target = {"$": raw, "$.perturbation": raw["perturbation"], "$.field[0]": raw["field"][0],
              "$.perturbation.phase": raw["perturbation"]["phase"]}[where]
    target["bogus"] = 1
    with pytest.raises(SchemaError, match=r"unknown key") as info:
        io.system_from_dict(raw)
    assert where in str(info.value)


def test_component_index_range(raw):
    raw["field"][0]["component_index"] = 2
    with pytest.raises(SchemaError, match=r"component_index"):
        io.system_from_dict(raw)


def test_exponent_arity(raw):
    raw["field"][1]["x_exponents"] = [0, 2, 1]
    with pytest.raises(SchemaError, match=r"\$\.field\[1\]\.x_exponents"):
        io.system_from_dict(raw)


def test_constant_term_rejected(raw):
    raw["field"].append({"component_index": 0, "coefficient": 1.0,
                         "x_exponents": [0, 0], "u_exponents": [0]})
    with pytest.raises(SchemaError, match="constant"):
        io.system_from_dict(raw)


@pytest.mark.parametrize("bad", [True, "1.0", None, float("nan")])
def test_numeric_fields_checked(raw, bad):
    raw["perturbation"]["c"] = bad
    with pytest.raises(SchemaError):
        io.system_from_dict(raw)


def test_eigenvalue_conjugate_check(raw):
    raw["desired_eigenvalues"] = [{"re": -1.0, "im": 1.0}, {"re": -2.0, "im": 0.0}]
    with pytest.raises(SchemaError, match="conjugate"):
        io.system_from_dict(raw)


def test_optional_keys():
    minimal = {"n": 1, "m": 1, "desired_eigenvalues": [{"re": -1.0, "im": 0.0}],
               "field": [{"component_index": 0, "coefficient": 1.0,
                          "x_exponents": [0], "u_exponents": [1]}]}
    s = io.system_from_dict(minimal)
    assert s.perturbation.c == 0.0 and s.perturbation.phase == "zero"
    assert s.remainder is None and s.initial_state is None and s.name == ""


def test_gain_override_shape(raw):
    raw["gain_override"] = [0.375, 1.25]
    assert io.system_from_dict(raw).gain_override.shape == (1, 2)
    raw["gain_override"] = [0.375]
    with pytest.raises(SchemaError, match="gain_override"):
        io.system_from_dict(raw)


def test_json_syntax_error_location():
    text = '{\n  "n": 2,\n  "m": 1,\n  "field": [,]\n}'
    with pytest.raises(SchemaError, match=r"line 4, column 13") as info:
        io.parse_system(text, "broken.json")
    assert "broken.json" in str(info.value)


def test_load_system(tmp_path):
    p = tmp_path / "sys.json"
    p.write_text(example1_text())
    assert io.load_system(p).name == "example1"


def test_certificate_dict_and_text(cert1, system1):
    d = io.certificate_to_dict(cert1, system1)
    assert d["verdict"] == "CERTIFIED"
    assert d["delta"] == cert1.delta and d["limiting"] is True
    assert d["K"] == [[pytest.approx(0.375), pytest.approx(1.25)]]
    text = io.certificate_text(cert1, system1)
    assert "0.3750, 1.2500" in text
    assert "delta             0.005973" in text
    assert io.dumps(d) == io.dumps(copy.deepcopy(d))
    assert io.dumps(d).endswith("}\n")


def test_failure_serialisation(system1):
    exc = StabilityConditionError("no room", inequality="a < b", sigma_max=0.045)
    d = io.failure_to_dict(exc, system1)
    assert d["verdict"] == "INFEASIBLE" and d["exit_code"] == 12
    assert d["failing_inequality"] == "a < b"
    assert d["limits"] == {"sigma_max": 0.045}
    assert "failing inequality: a < b" in io.failure_text(exc)


def test_trajectory_csv(tmp_path):
    traj = rk4_integrate(lambda t, x: -x, [1.0, 2.0], 0.0, 0.1, 0.05)
    path = tmp_path / "traj.csv"
    io.write_trajectory_csv(path, traj, envelope=np.ones(3), epsilon0=0.5)
    lines = path.read_text().splitlines()
    assert lines[0] == "t,x1,x2,norm,envelope,epsilon0"
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    np.testing.assert_array_equal(data[:, 1:3], traj.states)
    np.testing.assert_array_equal(data[:, 4], 1.0)


def test_sweep_csv(tmp_path):
    from stabcert.simulator import SweepRow
    rows = [SweepRow(0.1, 0, True, 0.2, 1e-12, True, 0, 0),
            SweepRow(0.5, 1, False, 9.0, np.inf, False, 3, 3)]
    path = tmp_path / "sweep.csv"
    io.write_sweep_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "radius,dir_index,converged,max_norm,final_norm"
    assert lines[1].split(",")[2] == "1" and lines[2].split(",")[2] == "0"
    assert lines[2].endswith("inf")
