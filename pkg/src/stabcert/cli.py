"""Command line front end.

    stabcert certify  --input SYSTEM.json --out DIR [--margin M]
    stabcert simulate --input SYSTEM.json --out DIR [--x0 a,b] [--dt] [--t-end]
                      [--epsilon-tilde] [--uncertified]
    stabcert sweep    --input SYSTEM.json --out DIR [--radii r1,r2,...] [--directions N] [--seed S]
    stabcert example1 --out DIR

Exit statuses
    0   success
    1   other package error
    2   command line usage error
    3   malformed system file
    10  (A, B) not controllable
    11  certification unsupported (repeated/unstable closed-loop eigenvalues, m > 1 without gain)
    12  stability condition fails (no admissible Gamma0)
    13  delta infeasible: gamma >= lambda_m
    14  delta infeasible: delta <= 0 (perturbation amplitude too large)
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import io
from .certifier import certify
from .errors import SchemaError, StabCertError
from .scenarios import example1_system
from .simulator import (
    DEFAULT_SEED,
    decay_rate_fit,
    default_t_end,
    envelope_series,
    eventual_las_metrics,
    integrate,
    sweep_roa,
    verify_envelope,
)
from .synthesis import synthesize

OVERRIDE_TYPES = {
    "dt": float,
    "t_end": float,
    "margin": float,
    "epsilon_tilde": float,
    "radii": list,
    "seed": int,
    "directions": int,
    "x0": list,
}


@dataclass
class RunConfig:
    command: str
    input_path: Optional[Path]
    output_dir: Path
    overrides: dict = field(default_factory=dict)
    uncertified: bool = False

    def __post_init__(self):
        for key, value in self.overrides.items():
            if key not in OVERRIDE_TYPES:
                raise SchemaError(f"unknown override {key!r}")
            if not isinstance(value, OVERRIDE_TYPES[key]):
                raise SchemaError(f"override {key!r} must be {OVERRIDE_TYPES[key].__name__}")

    def get(self, key, default=None):
        return self.overrides.get(key, default)

    def load(self):
        if self.input_path is None:
            return example1_system()
        return io.load_system(self.input_path)


def _float_list(text):
    text = text.strip()
    if not text:
        return []
    try:
        return [float(v) for v in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got {text!r}")


def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def _certify_or_report(config: RunConfig, system, out: Path, write=True):
    try:
        cert = certify(system, margin=config.get("margin", 0.0))
    except StabCertError as exc:
        if write:
            _write(out / "certificate.json", io.dumps(io.failure_to_dict(exc, system)))
            _write(out / "certificate.txt", io.failure_text(exc))
        raise
    if write:
        _write(out / "certificate.json", io.dumps(io.certificate_to_dict(cert, system)))
        _write(out / "certificate.txt", io.certificate_text(cert, system))
    return cert


def run_certify(config: RunConfig):
    system = config.load()
    cert = _certify_or_report(config, system, config.output_dir)
    print(io.certificate_text(cert, system), end="")
    return cert


def _initial_state(config, system, cert):
    n = system.field.n
    if config.get("x0") is not None:
        x0 = np.asarray(config.get("x0"), dtype=float)
        if x0.shape != (n,):
            raise SchemaError(f"--x0 must have {n} entries")
        return x0
    if system.initial_state is not None:
        return np.array(system.initial_state)
    if cert is None:
        raise SchemaError("--x0 is required for uncertified runs without initial_state")
    return 0.5 * cert.delta * np.ones(n) / np.sqrt(n)


def run_simulate(config: RunConfig):
    system = config.load()
    out = config.output_dir
    cert = None
    try:
        cert = _certify_or_report(config, system, out)
    except StabCertError:
        if not config.uncertified:
            raise
    synth = cert.synthesis if cert is not None else synthesize(system)
    x0 = _initial_state(config, system, cert)
    dt = config.get("dt", 1e-3)
    t0 = system.perturbation.t0
    if config.get("t_end") is not None:
        t_end = config.get("t_end")
    elif cert is not None:
        t_end = t0 + default_t_end(cert)
    else:
        t_end = t0 + 30.0 / abs(synth.lambda_m)
    traj = integrate(system, synth, x0, (t0, t_end), dt)

    eps_tilde = config.get("epsilon_tilde")
    if cert is not None:
        report = verify_envelope(traj, cert, epsilon_tilde=eps_tilde)
        env, eps0 = envelope_series(cert, traj), cert.epsilon0
        info = report.as_dict()
    else:
        env, eps0 = None, None
        info = {
            "certified": False,
            "verdict": "UNCERTIFIED",
            "max_norm": float(traj.norms.max()),
            "final_norm": float(traj.norms[-1]),
            "blew_up": traj.blew_up,
            "decay_rate_fit": decay_rate_fit(traj),
            "epsilon_tilde": eps_tilde,
            "t_star": None if eps_tilde is None else eventual_las_metrics(traj, eps_tilde),
        }
    info.update({"x0": x0.tolist(), "dt": dt, "t0": t0, "t_end": t_end,
                 "blowup_time": traj.blowup_time})
    out.mkdir(parents=True, exist_ok=True)
    io.write_trajectory_csv(out / "trajectory.csv", traj, env, eps0)
    _write(out / "stability.json", io.dumps(info))
    text = "\n".join(f"{k}: {info[k]}" for k in sorted(info)) + "\n"
    _write(out / "stability.txt", text)
    print(text, end="")
    return info


def default_radii(delta):
    """Half and full delta, then 12 geometric steps from 2*delta up to 1."""
    tail = np.geomspace(2.0 * delta, 1.0, 12) if delta < 0.5 else np.array([1.0])
    return [0.5 * delta, delta] + [float(r) for r in tail]


def run_sweep(config: RunConfig):
    system = config.load()
    out = config.output_dir
    cert = _certify_or_report(config, system, out)
    radii = config.get("radii")
    if radii is None:
        radii = default_radii(cert.delta)
    radii = sorted(radii)
    seed = config.get("seed", DEFAULT_SEED)
    t_end = config.get("t_end")
    result = sweep_roa(system, cert.synthesis, cert, radii, config.get("directions", 16),
                       t_end=t_end, dt=config.get("dt", 1e-3), seed=seed, check=False)
    out.mkdir(parents=True, exist_ok=True)
    io.write_sweep_csv(out / "sweep.csv", result.rows)
    summary = result.summary()
    _write(out / "sweep_summary.json", io.dumps(summary))
    lines = [f"certified delta: {cert.delta:.6g}", f"runs: {summary['runs']} (seed {seed})"]
    if summary["certified_runs"]:
        lines.append("all certified radii converged" if summary["all_certified_converged"]
                     else "CERTIFIED RUN FAILED")
    first = summary["smallest_non_converged_radius"]
    if first is None:
        lines.append("no non-converged radius found")
    else:
        lines.append(f"smallest non-converged radius: {first:.6g}")
        lines.append(f"conservatism ratio: {summary['conservatism_ratio']:.4g}")
    text = "\n".join(lines) + "\n"
    _write(out / "sweep_summary.txt", text)
    print(text, end="")
    return summary


def run_example1(config: RunConfig):
    """Certificate, reference trajectory and a short sweep for the bundled example."""
    base = config.output_dir
    cert = run_certify(RunConfig("certify", None, base / "certify", dict(config.overrides)))
    sim_over = {k: v for k, v in config.overrides.items() if k != "radii"}
    sim_over.setdefault("epsilon_tilde", 1e-3)
    run_simulate(RunConfig("simulate", None, base / "simulate", sim_over))
    run_sweep(RunConfig("sweep", None, base / "sweep", dict(config.overrides)))
    return cert


COMMANDS = {
    "certify": run_certify,
    "simulate": run_simulate,
    "sweep": run_sweep,
    "example1": run_example1,
}


def build_parser():
    parser = argparse.ArgumentParser(prog="stabcert", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--input", type=Path, required=name != "example1",
                       help="system definition file (JSON)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        p.add_argument("--margin", type=float, help="Gamma0 = (1 - margin) * Gamma0_max")
        p.add_argument("--dt", type=float)
        p.add_argument("--t-end", dest="t_end", type=float)
        p.add_argument("--epsilon-tilde", dest="epsilon_tilde", type=float)
        p.add_argument("--radii", type=_float_list, help="comma separated sweep radii")
        p.add_argument("--directions", type=int, help="directions per radius")
        p.add_argument("--seed", type=int)
        p.add_argument("--x0", type=_float_list, help="comma separated initial state")
        p.add_argument("--uncertified", action="store_true",
                       help="simulate even when certification fails")
    return parser


def config_from_args(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in OVERRIDE_TYPES if getattr(args, k) is not None}
    return RunConfig(args.command, args.input, args.out, overrides, args.uncertified)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = config_from_args(args)
        COMMANDS[config.command](config)
    except StabCertError as exc:
        print(io.failure_text(exc), end="", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
