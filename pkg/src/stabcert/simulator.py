"""Fixed-step simulation of the perturbed closed loop and certificate checks.

Integration is classical RK4 with a fixed step so that traces are
bit-reproducible.  Batches of initial states are integrated together as one
``(N, n)`` array; only per-run summaries are kept for batches.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.stats import norm as _normal, qmc

from .certifier import Certificate
from .synthesis import GainSynthesis
from .sysmodel import SystemDefinition, evaluate_closed_loop

BLOWUP_FACTOR = 1e6
ENVELOPE_RTOL = 1e-9
DEFAULT_SEED = 20240607


def rk4_step(rhs, t, x, dt):
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _n_steps(t0, t_end, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    if not t_end > t0:
        raise ValueError("t_end must exceed t0")
    return int(round((t_end - t0) / dt))


def closed_loop_rhs(system: SystemDefinition, K):
    field_, pert = system.field, system.perturbation
    return lambda t, x: evaluate_closed_loop(field_, K, pert, t, x)


@dataclass
class Trajectory:
    t0: float
    dt: float
    times: np.ndarray
    states: np.ndarray
    norms: np.ndarray
    blew_up: bool = False
    blowup_time: Optional[float] = None

    def __len__(self):
        return len(self.times)


def rk4_integrate(rhs, x0, t0, t_end, dt):
    """Integrate ``xdot = rhs(t, x)``, stopping at blow-up or non-finite states."""
    n_steps = _n_steps(t0, t_end, dt)
    x = np.array(x0, dtype=float)
    limit = BLOWUP_FACTOR * max(1.0, float(np.linalg.norm(x)))
    states = np.empty((n_steps + 1,) + x.shape)
    states[0] = x
    blew_up, t_blow = False, None
    last = n_steps
    for k in range(n_steps):
        t = t0 + k * dt
        with np.errstate(over="ignore", invalid="ignore"):
            x = rk4_step(rhs, t, x, dt)
            r = np.linalg.norm(x)
        if not np.isfinite(r) or r > limit:
            blew_up, t_blow, last = True, t0 + (k + 1) * dt, k
            break
        states[k + 1] = x
    states = states[: last + 1]
    times = t0 + dt * np.arange(last + 1)
    return Trajectory(t0, dt, times, states, np.linalg.norm(states, axis=-1), blew_up, t_blow)


def integrate(system: SystemDefinition, synth: GainSynthesis, x0, t_span, dt) -> Trajectory:
    """Simulate ``xdot = f(x, -Kx) + w(x, t)`` from ``x0`` over ``t_span``."""
    t0, t_end = t_span
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (system.field.n,):
        raise ValueError(f"x0 must have length {system.field.n}")
    return rk4_integrate(closed_loop_rhs(system, synth.K), x0, float(t0), float(t_end), dt)


def default_t_end(cert: Certificate) -> float:
    """Horizon for certified runs, relative to ``t0``.

    ``20 / |alpha2|`` drives the envelope down by ``e**-20``; it is capped at
    ``30 / |lambda_m|`` since alpha2 can be arbitrarily close to zero.
    """
    cap = 30.0 / abs(cert.lambda_m)
    if cert.alpha2 < 0:
        return min(20.0 / abs(cert.alpha2), cap)
    return cap


def is_converged(x0_norm, final_norm) -> bool:
    return bool(final_norm < 1e-8 * x0_norm or final_norm < 1e-12)


@dataclass
class StabilityReport:
    certified: bool
    samples: int
    envelope_violations: int
    worst_envelope_excess: float
    epsilon0_violations: int
    max_norm: float
    final_norm: float
    converged: bool
    decay_rate_fit: float
    t_star: Optional[float] = None
    epsilon_tilde: Optional[float] = None
    blew_up: bool = False

    @property
    def verdict(self) -> str:
        if not self.certified:
            return "UNCERTIFIED"
        ok = self.envelope_violations == 0 and self.epsilon0_violations == 0
        return "PASS" if ok and self.converged and not self.blew_up else "FAIL"

    def as_dict(self):
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["verdict"] = self.verdict
        return out


def decay_rate_fit(traj: Trajectory, tail_fraction: float = 0.5) -> float:
    """Least-squares slope of ``log|x(t)|`` over the last part of the run."""
    start = int(len(traj) * (1.0 - tail_fraction))
    t, r = traj.times[start:], traj.norms[start:]
    keep = r > 0
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(t[keep], np.log(r[keep]), 1)[0])


def eventual_las_metrics(traj: Trajectory, epsilon_tilde: float) -> Optional[float]:
    """Delay ``t* - t0`` after which every sample satisfies ``|x| < epsilon_tilde``.

    None if the final sample is not below ``epsilon_tilde`` or the run blew up.
    """
    if not epsilon_tilde > 0:
        raise ValueError("epsilon_tilde must be positive")
    if traj.blew_up or traj.norms[-1] >= epsilon_tilde:
        return None
    above = np.nonzero(traj.norms >= epsilon_tilde)[0]
    idx = 0 if above.size == 0 else above[-1] + 1
    return float(traj.times[idx] - traj.t0)


def _relative_excess(r, env):
    # norm/envelope - 1, with a zero envelope only respected by a zero norm.
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(env > 0, r / env - 1.0, np.where(r > 0, np.inf, -1.0))


def envelope_series(cert: Certificate, traj: Trajectory) -> np.ndarray:
    return cert.alpha1 * np.exp(cert.alpha2 * (traj.times - cert.t0)) * (traj.norms[0] + cert.alpha3)


def verify_envelope(traj: Trajectory, cert: Certificate,
                    epsilon_tilde: Optional[float] = None) -> StabilityReport:
    """Compare a trajectory with the certified envelope and the ball ``|x| <= eps0``.

    Initial states outside ``|x0| <= delta`` are compared anyway but the
    report is marked uncertified.
    """
    env = envelope_series(cert, traj)
    excess = _relative_excess(traj.norms, env)
    over = excess > ENVELOPE_RTOL
    x0n = float(traj.norms[0])
    return StabilityReport(
        certified=bool(x0n <= cert.delta),
        samples=len(traj),
        envelope_violations=int(over.sum()),
        worst_envelope_excess=float(excess.max()),
        epsilon0_violations=int((traj.norms > cert.epsilon0).sum()),
        max_norm=float(traj.norms.max()),
        final_norm=float(traj.norms[-1]),
        converged=(not traj.blew_up) and is_converged(x0n, traj.norms[-1]),
        decay_rate_fit=decay_rate_fit(traj),
        t_star=None if epsilon_tilde is None else eventual_las_metrics(traj, epsilon_tilde),
        epsilon_tilde=epsilon_tilde,
        blew_up=traj.blew_up,
    )


def sphere_directions(n: int, count: int, seed: int = DEFAULT_SEED) -> np.ndarray:
    """Deterministic unit vectors, spread by a scrambled Sobol sequence."""
    if count <= 0:
        return np.zeros((0, n))
    if n == 1:
        return np.where(np.arange(count) % 2 == 0, 1.0, -1.0)[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        pts = qmc.Sobol(d=n, scramble=True, seed=seed).random(count)
    g = _normal.ppf(np.clip(pts, 1e-12, 1 - 1e-12))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass
class BatchResult:
    """Per-run summaries of a batch integration."""

    x0: np.ndarray
    converged: np.ndarray
    max_norm: np.ndarray
    final_norm: np.ndarray
    blew_up: np.ndarray
    envelope_violations: np.ndarray
    worst_envelope_excess: np.ndarray
    epsilon0_violations: np.ndarray


def integrate_batch(system: SystemDefinition, synth: GainSynthesis, X0, t_span, dt,
                    cert: Optional[Certificate] = None) -> BatchResult:
    """Integrate many initial states at once, tracking summaries step by step.

    Rows that blow up are frozen at their last finite state.
    """
    X = np.array(X0, dtype=float)
    N = X.shape[0]
    t0, t_end = float(t_span[0]), float(t_span[1])
    n_steps = _n_steps(t0, t_end, dt)
    rhs = closed_loop_rhs(system, synth.K)
    x0n = np.linalg.norm(X, axis=1)
    limit = BLOWUP_FACTOR * np.maximum(1.0, x0n)
    alive = np.ones(N, dtype=bool)
    max_norm = x0n.copy()
    env_viol = np.zeros(N, dtype=np.int64)
    env_worst = np.full(N, -np.inf)
    eps_viol = np.zeros(N, dtype=np.int64)

    def track(r, t):
        nonlocal max_norm
        max_norm = np.maximum(max_norm, np.where(alive, r, 0.0))
        if cert is not None:
            env = cert.alpha1 * np.exp(cert.alpha2 * (t - cert.t0)) * (x0n + cert.alpha3)
            ex = np.where(alive, _relative_excess(r, env), -np.inf)
            np.maximum(env_worst, ex, out=env_worst)
            env_viol[:] += ex > ENVELOPE_RTOL
            eps_viol[:] += alive & (r > cert.epsilon0)

    r = x0n
    track(r, t0)
    for k in range(n_steps):
        t = t0 + k * dt
        with np.errstate(over="ignore", invalid="ignore"):
            Xn = rk4_step(rhs, t, X, dt)
            rn = np.linalg.norm(Xn, axis=1)
        bad = alive & (~np.isfinite(rn) | (rn > limit))
        alive &= ~bad
        X = np.where(alive[:, None], Xn, X)
        r = np.where(alive, rn, r)
        track(r, t + dt)
        if not alive.any():
            break
    converged = alive & (r < 1e-8 * x0n) | alive & (r < 1e-12)
    return BatchResult(
        x0=np.array(X0, dtype=float),
        converged=converged,
        max_norm=max_norm,
        final_norm=np.where(alive, r, np.inf),
        blew_up=~alive,
        envelope_violations=env_viol,
        worst_envelope_excess=env_worst,
        epsilon0_violations=eps_viol,
    )


@dataclass
class SweepRow:
    radius: float
    dir_index: int
    converged: bool
    max_norm: float
    final_norm: float
    certified: bool
    envelope_violations: int
    epsilon0_violations: int


@dataclass
class SweepResult:
    rows: list
    delta: float
    seed: int

    @property
    def certified_rows(self):
        return [r for r in self.rows if r.certified]

    @property
    def certified_ok(self) -> bool:
        return all(
            r.converged and r.envelope_violations == 0 and r.epsilon0_violations == 0
            for r in self.certified_rows
        )

    @property
    def smallest_failed_radius(self) -> Optional[float]:
        failed = [r.radius for r in self.rows if not r.converged]
        return min(failed) if failed else None

    @property
    def largest_all_converged_radius(self) -> Optional[float]:
        """Largest swept radius below which every run converged."""
        best = None
        for radius in sorted({r.radius for r in self.rows}):
            if all(r.converged for r in self.rows if r.radius <= radius):
                best = radius
            else:
                break
        return best

    def summary(self) -> dict:
        first_fail = self.smallest_failed_radius
        return {
            "delta": self.delta,
            "seed": self.seed,
            "runs": len(self.rows),
            "certified_runs": len(self.certified_rows),
            "all_certified_converged": self.certified_ok,
            "smallest_non_converged_radius": first_fail,
            "largest_all_converged_radius": self.largest_all_converged_radius,
            "conservatism_ratio": None if first_fail is None else first_fail / self.delta,
        }


class CertificateViolation(AssertionError):
    """A simulated run from inside the certified ball broke the certificate."""


def sweep_roa(system: SystemDefinition, synth: GainSynthesis, cert: Certificate, radii,
              directions_per_radius: int, t_end: Optional[float] = None, dt: float = 1e-3,
              seed: int = DEFAULT_SEED, check: bool = True) -> SweepResult:
    """Simulate from ``r * d`` for every radius r and every sampled direction d.

    With ``check`` set, a run with ``r <= delta`` that fails to converge or
    leaves the envelope raises CertificateViolation.
    """
    radii = [float(r) for r in radii]
    if radii != sorted(radii):
        raise ValueError("radii must be sorted ascending")
    n = system.field.n
    dirs = sphere_directions(n, directions_per_radius, seed)
    if not radii or dirs.shape[0] == 0:
        return SweepResult([], cert.delta, seed)
    t0 = cert.t0
    t_end = t0 + default_t_end(cert) if t_end is None else float(t_end)
    X0 = np.array([r * d for r in radii for d in dirs])
    res = integrate_batch(system, synth, X0, (t0, t_end), dt, cert=cert)
    rows = []
    for k, (i, j) in enumerate((i, j) for i in range(len(radii)) for j in range(len(dirs))):
        rows.append(SweepRow(
            radius=radii[i],
            dir_index=j,
            converged=bool(res.converged[k]),
            max_norm=float(res.max_norm[k]),
            final_norm=float(res.final_norm[k]),
            certified=radii[i] <= cert.delta,
            envelope_violations=int(res.envelope_violations[k]),
            epsilon0_violations=int(res.epsilon0_violations[k]),
        ))
    result = SweepResult(rows, cert.delta, seed)
    if check and not result.certified_ok:
        bad = [r for r in result.certified_rows
               if not (r.converged and r.envelope_violations == 0 and r.epsilon0_violations == 0)]
        raise CertificateViolation(
            f"{len(bad)} certified run(s) violated the certificate, first at radius {bad[0].radius:.6g}"
        )
    return result
