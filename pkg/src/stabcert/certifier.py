"""Region-of-attraction certificates for the perturbed closed loop.

The chain is

1. bound the Taylor remainder, ``|R1(x, -Kx)| <= rho * |x|**p`` on ``|x| <= 1``;
2. pick the linear-growth coefficient ``Gamma0`` as large as the stability
   condition ``lambda_m < -eta * (Gamma0 * (1 + ||K||) + sigma)`` allows;
3. the ball on which ``|R1| <= Gamma0 * |x|`` holds has radius
   ``eps0 = (Gamma0 / rho) ** (1 / (p - 1))``;
4. solve ``eta * (delta + c / (lambda_m - gamma)) = eps0`` for ``delta``.

Trajectories starting in ``|x(t0)| <= delta`` then obey

    |x(t)| <= alpha1 * exp(alpha2 * (t - t0)) * (|x(t0)| + alpha3)

with ``alpha1 = eta``, ``alpha2 = eta * (Theta + sigma) + lambda_m`` and
``alpha3 = c / (lambda_m - gamma)``, ``Theta = Gamma0 * (1 + ||K||)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import (
    StabilityConditionError,
    DecayOrderError,
    DeltaInfeasibleError,
    SchemaError,
)
from .synthesis import GainSynthesis, synthesize
from .sysmodel import PolynomialVectorField, SystemDefinition


@dataclass(frozen=True)
class RemainderModel:
    """Claim ``|R1(x, -Kx)| <= rho * |x|**p`` for ``|x| <= 1``.

    ``rho == 0`` means the closed loop has no nonlinear terms.
    """

    rho: float
    p: float
    source: str = "manual"


@dataclass(frozen=True)
class Certificate:
    gamma0: float
    epsilon0: float
    theta: float
    sigma: float
    lambda_m: float
    eta: float
    k_norm: float
    c: float
    gamma: float
    t0: float
    delta: float
    alpha1: float
    alpha2: float
    alpha3: float
    margin: float
    gamma0_max: float
    model: RemainderModel
    synthesis: Optional[GainSynthesis] = None

    @property
    def limiting(self) -> bool:
        """True when Gamma0 sits on the boundary of the stability condition.

        In that case the containment ``|x(t)| <= eps0`` is still certified but
        the envelope does not decay (``alpha2 == 0``).
        """
        return self.margin == 0.0

    @property
    def stability_lhs(self) -> float:
        """``lambda_m + eta * (Theta + sigma)``; negative when the stability condition is strict."""
        return self.lambda_m + self.eta * (self.theta + self.sigma)

    def envelope(self, x0_norm, t):
        return envelope(self, x0_norm, t, self.t0)


def remainder_bound_manual(rho: float, p: float) -> RemainderModel:
    if not rho > 0:
        raise SchemaError("remainder coefficient rho must be positive")
    if not p >= 2:
        raise SchemaError("remainder growth order p must be at least 2")
    return RemainderModel(float(rho), float(p), "manual")


def closed_loop_remainder_terms(field: PolynomialVectorField, K):
    """Monomials of ``R1(x, -Kx)``: the degree >= 2 part of ``f(x, -Kx)``."""
    polys = field.closed_loop_polynomial(K)
    return [{e: c for e, c in poly.items() if sum(e) >= 2} for poly in polys]


def remainder_bound_auto(field: PolynomialVectorField, K) -> RemainderModel:
    """Per-monomial remainder bound for a polynomial field.

    Each monomial of degree d satisfies ``|x^a| <= |x|^d <= |x|^p_min`` on
    the unit ball; component bounds are summed in absolute value and
    aggregated with the Euclidean norm across components.
    """
    terms = closed_loop_remainder_terms(field, K)
    degrees = [sum(e) for comp in terms for e in comp]
    if not degrees:
        return RemainderModel(0.0, 2.0, "automatic-monomial")
    per_comp = [sum(abs(c) for c in comp.values()) for comp in terms]
    rho = math.sqrt(sum(v * v for v in per_comp))
    return RemainderModel(rho, float(min(degrees)), "automatic-monomial")


def gamma0_max(synth: GainSynthesis, sigma: float = 0.0) -> float:
    """Supremum of Gamma0 allowed by ``lambda_m < -eta * (Gamma0 * (1 + ||K||) + sigma)``."""
    lam, eta = synth.lambda_m, synth.eta
    if not lam < -eta * sigma:
        raise StabilityConditionError(
            f"stability condition fails: lambda_m = {lam:.6g} is not below "
            f"-eta*sigma = {-eta * sigma:.6g}, no positive Gamma0 exists",
            inequality="lambda_m < -eta*(Gamma0*(1+||K||) + sigma)",
            sigma_max=-lam / eta,
        )
    return (-lam / eta - sigma) / (1.0 + synth.k_norm)


def epsilon0_from_model(model: RemainderModel, gamma0: float) -> float:
    """Largest radius (capped at 1) where ``rho*|x|**p <= Gamma0*|x|``."""
    if not gamma0 > 0:
        raise StabilityConditionError("Gamma0 must be positive", inequality="Gamma0 > 0")
    if model.rho == 0.0:
        return 1.0
    return min(1.0, (gamma0 / model.rho) ** (1.0 / (model.p - 1.0)))


def solve_delta(epsilon0, eta, c, lambda_m, gamma) -> float:
    """Positive root of ``eta * (delta + c / (lambda_m - gamma)) = eps0``."""
    if not gamma < lambda_m:
        raise DecayOrderError(
            f"delta infeasible: gamma = {gamma:.6g} >= lambda_m = {lambda_m:.6g}; "
            "the perturbation must decay faster than the closed loop",
            inequality="gamma < lambda_m",
            gamma_max=lambda_m,
        )
    if c < 0:
        raise DeltaInfeasibleError("perturbation amplitude c must be nonnegative",
                                   inequality="c >= 0")
    delta = epsilon0 / eta - c / (lambda_m - gamma)
    if not delta > 0:
        c_max = epsilon0 * (lambda_m - gamma) / eta
        raise DeltaInfeasibleError(
            f"delta infeasible: delta = {delta:.6g} <= 0; the perturbation "
            f"amplitude c = {c:.6g} must be below {c_max:.6g}",
            inequality="delta > 0",
            c_max=c_max,
        )
    return delta


def envelope(cert: Certificate, x0_norm, t, t0=None):
    """``alpha1 * exp(alpha2 * (t - t0)) * (|x0| + alpha3)``; vectorised over t."""
    t0 = cert.t0 if t0 is None else t0
    t = np.asarray(t, dtype=float)
    out = cert.alpha1 * np.exp(cert.alpha2 * (t - t0)) * (x0_norm + cert.alpha3)
    return float(out) if out.ndim == 0 else out


def certify(
    system: SystemDefinition,
    model: Optional[RemainderModel] = None,
    margin: float = 0.0,
    synth: Optional[GainSynthesis] = None,
) -> Certificate:
    """Full certificate for a system definition.

    ``Gamma0 = (1 - margin) * gamma0_max``.  ``margin = 0`` reproduces the
    limiting constants (the supremum of certified radii); any positive margin
    makes the stability condition strict and the envelope decay.  ``model``
    defaults to the system's own remainder model, then to the automatic
    per-monomial bound.
    """
    if not 0.0 <= margin < 1.0:
        raise SchemaError("margin must lie in [0, 1)")
    if synth is None:
        synth = synthesize(system)
    if model is None:
        model = system.remainder or remainder_bound_auto(system.field, synth.K)
    pert = system.perturbation

    g_max = gamma0_max(synth, pert.sigma)
    if not g_max > 0:
        raise StabilityConditionError(
            "stability condition fails: sigma leaves no room for a positive Gamma0",
            inequality="lambda_m < -eta*(Gamma0*(1+||K||) + sigma)",
            sigma_max=-synth.lambda_m / synth.eta,
        )
    gamma0 = (1.0 - margin) * g_max
    eps0 = epsilon0_from_model(model, gamma0)
    delta = solve_delta(eps0, synth.eta, pert.c, synth.lambda_m, pert.gamma)

    theta = gamma0 * (1.0 + synth.k_norm)
    if margin == 0.0:
        alpha2 = 0.0
    else:
        alpha2 = synth.eta * (theta + pert.sigma) + synth.lambda_m
        if not alpha2 < 0:
            raise StabilityConditionError(
                f"decay exponent alpha2 = {alpha2:.3g} is not negative",
                inequality="eta*(Theta + sigma) + lambda_m < 0",
            )
    return Certificate(
        gamma0=gamma0,
        epsilon0=eps0,
        theta=theta,
        sigma=pert.sigma,
        lambda_m=synth.lambda_m,
        eta=synth.eta,
        k_norm=synth.k_norm,
        c=pert.c,
        gamma=pert.gamma,
        t0=pert.t0,
        delta=delta,
        alpha1=synth.eta,
        alpha2=alpha2,
        alpha3=pert.c / (synth.lambda_m - pert.gamma),
        margin=float(margin),
        gamma0_max=g_max,
        model=model,
        synthesis=synth,
    )
