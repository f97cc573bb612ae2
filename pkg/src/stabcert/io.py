"""System definition files (JSON) and report serialisation.

The system file is a JSON object::

    {
      "name": "optional label",
      "n": 2, "m": 1,
      "field": [
        {"component_index": 0, "coefficient": 1.0,
         "x_exponents": [3, 0], "u_exponents": [0]},
        ...
      ],
      "perturbation": {
        "sigma": 0.0, "c": 0.001, "gamma": -10.0, "t0": 0.0,
        "phase": {"kind": "cosine",
                  "params": {"direction": [0, 1], "weights": [1, 1]}}
      },
      "desired_eigenvalues": [{"re": -0.5, "im": 0.0}, {"re": -0.75, "im": 0.0}],
      "gain_override": [0.375, 1.25],
      "initial_state": [6e-4, 5e-4],
      "remainder_model": {"kind": "manual", "rho": 4.305, "p": 3}
    }

``component_index`` is zero based.  ``perturbation``, ``gain_override``,
``initial_state``, ``remainder_model`` and ``name`` are optional; unknown
keys anywhere are rejected.  See ``docs/system_schema.md`` for the full
reference.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .certifier import Certificate, remainder_bound_manual
from .errors import SchemaError, StabCertError
from .sysmodel import PHASE_KINDS, PerturbationSpec, PolynomialVectorField, SystemDefinition

TOP_KEYS = {"name", "n", "m", "field", "perturbation", "desired_eigenvalues",
            "gain_override", "initial_state", "remainder_model"}
TOP_REQUIRED = {"n", "m", "field"}
TERM_KEYS = {"component_index", "coefficient", "x_exponents", "u_exponents"}
PERT_KEYS = {"sigma", "c", "gamma", "t0", "phase"}
PHASE_KEYS = {"kind", "params"}
EIG_KEYS = {"re", "im"}


def _err(path, msg):
    return SchemaError(f"{path}: {msg}")


def _check_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise _err(path, "expected an object")
    unknown = sorted(set(obj) - allowed)
    if unknown:
        raise _err(path, f"unknown key(s) {unknown}")
    missing = sorted(required - set(obj))
    if missing:
        raise _err(path, f"missing key(s) {missing}")


def _real(value, path):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise _err(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise _err(path, "expected a finite number")
    return float(value)


def _int(value, path):
    if isinstance(value, bool) or not isinstance(value, int):
        raise _err(path, f"expected an integer, got {value!r}")
    return value


def _real_list(value, path, length=None):
    if not isinstance(value, list):
        raise _err(path, "expected a list")
    if length is not None and len(value) != length:
        raise _err(path, f"expected {length} entries, got {len(value)}")
    return [_real(v, f"{path}[{i}]") for i, v in enumerate(value)]


def _int_list(value, path, length):
    if not isinstance(value, list) or len(value) != length:
        raise _err(path, f"expected a list of {length} integers")
    return [_int(v, f"{path}[{i}]") for i, v in enumerate(value)]


def system_from_dict(data: dict) -> SystemDefinition:
    """Validate a decoded system file and build the SystemDefinition."""
    _check_keys(data, TOP_KEYS, TOP_REQUIRED, "$")
    n = _int(data["n"], "$.n")
    m = _int(data["m"], "$.m")
    if n < 1 or m < 1:
        raise _err("$", "n and m must be positive")

    if not isinstance(data["field"], list):
        raise _err("$.field", "expected a list of terms")
    terms = []
    for i, term in enumerate(data["field"]):
        path = f"$.field[{i}]"
        _check_keys(term, TERM_KEYS, TERM_KEYS, path)
        idx = _int(term["component_index"], f"{path}.component_index")
        if not 0 <= idx < n:
            raise _err(f"{path}.component_index", f"must lie in 0..{n - 1}")
        xe = _int_list(term["x_exponents"], f"{path}.x_exponents", n)
        ue = _int_list(term["u_exponents"], f"{path}.u_exponents", m)
        coef = _real(term["coefficient"], f"{path}.coefficient")
        if sum(xe) + sum(ue) == 0:
            raise _err(path, "constant term rejected: f(0, 0) must be 0")
        terms.append((idx, coef, xe, ue))
    try:
        field = PolynomialVectorField.from_terms(n, m, terms)
    except SchemaError as exc:
        raise _err("$.field", str(exc)) from None

    pert = PerturbationSpec()
    if "perturbation" in data:
        pd = data["perturbation"]
        _check_keys(pd, PERT_KEYS, {"gamma"}, "$.perturbation")
        phase, params = "zero", {}
        if "phase" in pd:
            ph = pd["phase"]
            _check_keys(ph, PHASE_KEYS, {"kind"}, "$.perturbation.phase")
            phase = ph["kind"]
            if phase not in PHASE_KINDS:
                raise _err("$.perturbation.phase.kind",
                           f"unknown kind {phase!r}; expected one of {list(PHASE_KINDS)}")
            raw = ph.get("params", {})
            if not isinstance(raw, dict):
                raise _err("$.perturbation.phase.params", "expected an object")
            for key, val in raw.items():
                ppath = f"$.perturbation.phase.params.{key}"
                if key in ("direction", "weights"):
                    params[key] = _real_list(val, ppath, n)
                else:
                    params[key] = _real(val, ppath)
        try:
            pert = PerturbationSpec(
                sigma=_real(pd.get("sigma", 0.0), "$.perturbation.sigma"),
                c=_real(pd.get("c", 0.0), "$.perturbation.c"),
                gamma=_real(pd["gamma"], "$.perturbation.gamma"),
                t0=_real(pd.get("t0", 0.0), "$.perturbation.t0"),
                phase=phase,
                params=params,
            )
        except SchemaError as exc:
            raise _err("$.perturbation", str(exc)) from None

    eigs = []
    if "desired_eigenvalues" in data:
        if not isinstance(data["desired_eigenvalues"], list):
            raise _err("$.desired_eigenvalues", "expected a list")
        for i, e in enumerate(data["desired_eigenvalues"]):
            path = f"$.desired_eigenvalues[{i}]"
            _check_keys(e, EIG_KEYS, {"re"}, path)
            eigs.append(complex(_real(e["re"], f"{path}.re"), _real(e.get("im", 0.0), f"{path}.im")))

    gain = None
    if "gain_override" in data:
        gain = np.array(_real_list(data["gain_override"], "$.gain_override", m * n)).reshape(m, n)
    x0 = None
    if "initial_state" in data:
        x0 = np.array(_real_list(data["initial_state"], "$.initial_state", n))

    model = None
    if "remainder_model" in data:
        rm = data["remainder_model"]
        _check_keys(rm, {"kind", "rho", "p"}, {"kind"}, "$.remainder_model")
        if rm["kind"] == "manual":
            if "rho" not in rm or "p" not in rm:
                raise _err("$.remainder_model", "manual model needs rho and p")
            model = remainder_bound_manual(_real(rm["rho"], "$.remainder_model.rho"),
                                           _real(rm["p"], "$.remainder_model.p"))
        elif rm["kind"] != "auto" or set(rm) != {"kind"}:
            raise _err("$.remainder_model", "kind must be 'auto' (no other keys) or 'manual'")

    name = data.get("name", "")
    if not isinstance(name, str):
        raise _err("$.name", "expected a string")
    try:
        return SystemDefinition(field=field, perturbation=pert, desired_eigenvalues=tuple(eigs),
                                gain_override=gain, initial_state=x0, remainder=model, name=name)
    except SchemaError as exc:
        raise _err("$", str(exc)) from None


def parse_system(text: str, source: str = "<string>") -> SystemDefinition:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{source}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    try:
        return system_from_dict(data)
    except SchemaError as exc:
        raise SchemaError(f"{source}: {exc}") from None


def load_system(path) -> SystemDefinition:
    path = Path(path)
    return parse_system(path.read_text(), str(path))


def system_to_dict(system: SystemDefinition) -> dict:
    """Inverse of ``system_from_dict``."""
    f = system.field
    out = {
        "n": f.n,
        "m": f.m,
        "field": [
            {"component_index": i, "coefficient": t.coefficient,
             "x_exponents": list(t.x_exponents), "u_exponents": list(t.u_exponents)}
            for i, comp in enumerate(f.components) for t in comp
        ],
    }
    if system.name:
        out["name"] = system.name
    p = system.perturbation
    phase = {"kind": p.phase}
    if p.params:
        phase["params"] = {k: (list(map(float, v)) if isinstance(v, (list, tuple, np.ndarray)) else float(v))
                           for k, v in p.params.items()}
    out["perturbation"] = {"sigma": p.sigma, "c": p.c, "gamma": p.gamma, "t0": p.t0, "phase": phase}
    if system.desired_eigenvalues:
        out["desired_eigenvalues"] = [complex_to_dict(z) for z in system.desired_eigenvalues]
    if system.gain_override is not None:
        out["gain_override"] = system.gain_override.ravel().tolist()
    if system.initial_state is not None:
        out["initial_state"] = system.initial_state.tolist()
    if system.remainder is not None:
        out["remainder_model"] = {"kind": "manual", "rho": system.remainder.rho,
                                  "p": system.remainder.p}
    return out


def complex_to_dict(z) -> dict:
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _matrix(M):
    return np.asarray(M, dtype=float).tolist()


def certificate_to_dict(cert: Certificate, system: SystemDefinition) -> dict:
    """Machine-readable certificate: inputs, every intermediate constant, verdict."""
    s = cert.synthesis
    return {
        "verdict": "CERTIFIED",
        "inputs": system_to_dict(system),
        "A": _matrix(s.A),
        "B": _matrix(s.B),
        "K": _matrix(s.K),
        "K_norm": cert.k_norm,
        "closed_loop_matrix": _matrix(s.A_cl),
        "eigenvalues": [complex_to_dict(z) for z in s.spectrum],
        "lambda_m": cert.lambda_m,
        "eta": cert.eta,
        "remainder_model": {"rho": cert.model.rho, "p": cert.model.p, "source": cert.model.source},
        "margin": cert.margin,
        "gamma0_max": cert.gamma0_max,
        "gamma0": cert.gamma0,
        "epsilon0": cert.epsilon0,
        "theta": cert.theta,
        "sigma": cert.sigma,
        "c": cert.c,
        "gamma": cert.gamma,
        "t0": cert.t0,
        "delta": cert.delta,
        "alpha1": cert.alpha1,
        "alpha2": cert.alpha2,
        "alpha3": cert.alpha3,
        "stability_lhs": cert.stability_lhs,
        "limiting": cert.limiting,
    }


def failure_to_dict(exc: StabCertError, system=None) -> dict:
    out = {
        "verdict": "INFEASIBLE",
        "error": type(exc).__name__,
        "exit_code": exc.exit_code,
        "message": str(exc),
    }
    inequality = getattr(exc, "inequality", None)
    if inequality:
        out["failing_inequality"] = inequality
    limits = getattr(exc, "limits", None)
    if limits:
        out["limits"] = dict(limits)
    if system is not None:
        out["inputs"] = system_to_dict(system)
    return out


def dumps(obj) -> str:
    """Canonical JSON: sorted keys, fixed indentation, trailing newline."""
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


def _fmt_complex(z):
    z = complex(z)
    if z.imag == 0:
        return f"{z.real:.6g}"
    return f"{z.real:.6g}{z.imag:+.6g}j"


def certificate_text(cert: Certificate, system: SystemDefinition) -> str:
    s = cert.synthesis
    p = system.perturbation
    lines = [
        f"Certificate for {system.name or 'system'} (n={system.field.n}, m={system.field.m})",
        "",
        "Inputs",
        f"  perturbation      |w| <= {p.sigma:g}*|x| + {p.c:g}*exp({p.gamma:g}*(t - {p.t0:g}))"
        f"  [phase: {p.phase}]",
        "  desired poles     " + ", ".join(_fmt_complex(z) for z in system.desired_eigenvalues),
        f"  remainder model   |R1| <= {cert.model.rho:.6g}*|x|^{cert.model.p:g}  ({cert.model.source})",
        f"  margin            {cert.margin:g}",
        "",
        "Linearisation and gain",
        f"  A                 {_matrix(s.A)}",
        f"  B                 {_matrix(s.B)}",
        "  K                 [" + ", ".join(f"{k:.4f}" for k in s.K.ravel()) + "]",
        f"  ||K||             {cert.k_norm:.4f}",
        "  eigenvalues       " + ", ".join(_fmt_complex(z) for z in s.spectrum),
        f"  lambda_m          {cert.lambda_m:.6g}",
        f"  eta               {cert.eta:.4f}",
        "",
        "Certificate",
        f"  Gamma0 (max)      {cert.gamma0_max:.4f}  ({cert.gamma0_max:.10g})",
        f"  Gamma0 (used)     {cert.gamma0:.10g}",
        f"  epsilon0          {cert.epsilon0:.4f}  ({cert.epsilon0:.10g})",
        f"  Theta             {cert.theta:.10g}",
        f"  delta             {cert.delta:.4g}  ({cert.delta:.10g})",
        f"  alpha1            {cert.alpha1:.10g}",
        f"  alpha2            {cert.alpha2:.10g}",
        f"  alpha3            {cert.alpha3:.10g}",
        "",
    ]
    if cert.limiting:
        lines.append("Verdict: CERTIFIED (limiting Gamma0: containment |x(t)| <= epsilon0 holds, "
                     "decay rate not certified; use margin > 0 for a strict certificate)")
    else:
        lines.append("Verdict: CERTIFIED")
    lines.append(f"  every |x(t0)| <= {cert.delta:.6g} stays within |x| <= {cert.epsilon0:.6g} "
                 "and converges to 0")
    return "\n".join(lines) + "\n"


def failure_text(exc: StabCertError) -> str:
    lines = [f"Verdict: INFEASIBLE ({type(exc).__name__}, exit status {exc.exit_code})", f"  {exc}"]
    if getattr(exc, "inequality", None):
        lines.append(f"  failing inequality: {exc.inequality}")
    for k, v in (getattr(exc, "limits", None) or {}).items():
        lines.append(f"  {k}: {v:.6g}")
    return "\n".join(lines) + "\n"


def write_trajectory_csv(path, traj, envelope=None, epsilon0=None):
    """``t,x1,...,xn,norm,envelope,epsilon0`` with 17 significant digits."""
    n = traj.states.shape[1]
    env = np.full(len(traj), np.nan) if envelope is None else np.asarray(envelope)
    eps = float("nan") if epsilon0 is None else float(epsilon0)
    header = ["t"] + [f"x{i + 1}" for i in range(n)] + ["norm", "envelope", "epsilon0"]
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(len(traj)):
            row = [traj.times[k], *traj.states[k], traj.norms[k], env[k], eps]
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def write_sweep_csv(path, rows):
    with open(path, "w") as fh:
        fh.write("radius,dir_index,converged,max_norm,final_norm\n")
        for r in rows:
            fh.write(f"{r.radius:.17g},{r.dir_index},{int(r.converged)},"
                     f"{r.max_norm:.17g},{r.final_norm:.17g}\n")

