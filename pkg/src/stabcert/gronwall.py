"""Sampled check of the three-function Gronwall-Bellman inequality.

If ``U(t) <= C + int_{t0}^t (U V + W)`` with ``U, V, W >= 0`` and ``C > 0``
then ``U(t) <= exp(int V) * (C + int W)``.  Both sides are evaluated on a
common grid with the composite trapezoid rule; the checker is a test oracle,
not a proof.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

SLACK_TOL = 1e-6


@dataclass(frozen=True)
class SampledFunction:
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.broadcast_to(np.asarray(self.values, dtype=float), grid.shape).copy()
        if grid.ndim != 1 or grid.size < 2:
            raise ValueError("grid must be a 1-d array with at least two samples")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("sampled values must be finite and nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    @classmethod
    def of(cls, fn, grid):
        grid = np.asarray(grid, dtype=float)
        return cls(grid, fn(grid))


@dataclass(frozen=True)
class GronwallCheck:
    hypothesis_holds: bool
    conclusion_holds: bool
    hypothesis_slack: float
    max_slack: float

    def __bool__(self):
        # The inequality is an implication.
        return (not self.hypothesis_holds) or self.conclusion_holds


def _relative_slack(bound, value):
    scale = np.maximum(np.abs(bound), np.finfo(float).tiny)
    return float(np.min((bound - value) / scale))


def gronwall_bound(U: SampledFunction, V: SampledFunction, W: SampledFunction,
                   C: float, tol: float = SLACK_TOL) -> GronwallCheck:
    """Check hypothesis and conclusion of the inequality on a common grid.

    ``hypothesis_slack`` and ``max_slack`` are the worst relative margins
    ``min_t (rhs - U) / rhs`` of the hypothesis and conclusion; negative
    values are violations and each side holds when its slack is ``>= -tol``.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    grid = U.grid
    for f in (V, W):
        if f.grid.shape != grid.shape or not np.array_equal(f.grid, grid):
            raise ValueError("U, V and W must share one grid")
    u, v, w = U.values, V.values, W.values

    hyp_rhs = C + cumulative_trapezoid(u * v + w, grid, initial=0.0)
    concl_rhs = np.exp(cumulative_trapezoid(v, grid, initial=0.0)) * (
        C + cumulative_trapezoid(w, grid, initial=0.0)
    )
    hyp = _relative_slack(hyp_rhs, u)
    concl = _relative_slack(concl_rhs, u)
    return GronwallCheck(hyp >= -tol, concl >= -tol, hyp, concl)
