"""Polynomial control systems with bounded time-varying perturbations.

A system is ``xdot = f(x, u) + w(x, t)`` with ``f`` a vector of polynomials
in the state ``x`` (length n) and input ``u`` (length m).  Restricting to
polynomials keeps the Jacobians at the origin and the Taylor remainder exact.

All evaluation routines accept a single vector of shape ``(n,)`` or a batch
of shape ``(N, n)`` and return an array of the same leading shape.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import DimensionError, SchemaError

if TYPE_CHECKING:  # pragma: no cover
    from .certifier import RemainderModel


@dataclass(frozen=True)
class PolynomialTerm:
    """One monomial ``coefficient * prod(x**x_exponents) * prod(u**u_exponents)``."""

    coefficient: float
    x_exponents: tuple
    u_exponents: tuple

    def __post_init__(self):
        xe = tuple(int(a) for a in self.x_exponents)
        ue = tuple(int(b) for b in self.u_exponents)
        if any(a < 0 for a in xe + ue):
            raise SchemaError("exponents must be nonnegative integers")
        if sum(xe) + sum(ue) < 1:
            raise SchemaError(
                "constant term rejected: the field must vanish at the origin"
            )
        object.__setattr__(self, "coefficient", float(self.coefficient))
        object.__setattr__(self, "x_exponents", xe)
        object.__setattr__(self, "u_exponents", ue)

    @property
    def degree(self) -> int:
        return sum(self.x_exponents) + sum(self.u_exponents)


class PolynomialVectorField:
    """Vector field ``f(x, u)`` whose components are sums of monomials.

    Parameters
    ----------
    n, m : int
        State and input dimensions.
    components : sequence of sequences of PolynomialTerm
        ``components[i]`` is the list of terms of ``f_i``.  An empty list is
        the zero polynomial.
    """

    def __init__(self, n: int, m: int, components):
        if int(n) < 1 or int(m) < 1:
            raise SchemaError("state and input dimensions must be positive")
        self.n = int(n)
        self.m = int(m)
        comps = tuple(tuple(c) for c in components)
        if len(comps) != self.n:
            raise SchemaError(f"expected {self.n} components, got {len(comps)}")
        for i, terms in enumerate(comps):
            for term in terms:
                if len(term.x_exponents) != self.n or len(term.u_exponents) != self.m:
                    raise SchemaError(
                        f"component {i}: exponent vector lengths must be "
                        f"n={self.n} and m={self.m}"
                    )
        self.components = comps

        # Flattened form used by the vectorised evaluator.
        exps, coefs, rows = [], [], []
        for i, terms in enumerate(comps):
            for term in terms:
                exps.append(term.x_exponents + term.u_exponents)
                coefs.append(term.coefficient)
                rows.append(i)
        self._exps = np.array(exps, dtype=np.int64).reshape(len(exps), self.n + self.m)
        self._coef_matrix = np.zeros((len(exps), self.n))
        self._coef_matrix[np.arange(len(exps)), rows] = coefs
        degrees = self._exps.sum(axis=1)
        self._nonlinear = degrees >= 2

    def __repr__(self):
        nterms = sum(len(c) for c in self.components)
        return f"PolynomialVectorField(n={self.n}, m={self.m}, terms={nterms})"

    @classmethod
    def from_terms(cls, n, m, terms):
        """Build from ``(component_index, coefficient, x_exponents, u_exponents)`` tuples."""
        comps = [[] for _ in range(n)]
        for idx, coef, xe, ue in terms:
            if not 0 <= idx < n:
                raise SchemaError(f"component_index {idx} out of range 0..{n - 1}")
            comps[idx].append(PolynomialTerm(coef, tuple(xe), tuple(ue)))
        return cls(n, m, comps)

    def _monomials(self, z, mask=None):
        # z: (N, n+m) -> (N, terms); powers by repeated multiplication.
        exps = self._exps if mask is None else self._exps[mask]
        if exps.shape[0] == 0:
            return np.zeros((z.shape[0], 0))
        table = [np.ones_like(z)]
        for _ in range(int(exps.max())):
            table.append(table[-1] * z)
        table = np.stack(table)
        out = table[exps[:, 0], :, 0]
        for col in range(1, z.shape[1]):
            out = out * table[exps[:, col], :, col]
        return out.T

    def _eval(self, x, u, mask=None):
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        single = x.ndim == 1
        x2 = np.atleast_2d(x)
        u2 = np.atleast_2d(u)
        if x2.shape[-1] != self.n or u2.shape[-1] != self.m:
            raise DimensionError(
                f"expected x of length {self.n} and u of length {self.m}, "
                f"got {x2.shape[-1]} and {u2.shape[-1]}"
            )
        if u2.shape[0] != x2.shape[0]:
            u2 = np.broadcast_to(u2, (x2.shape[0], self.m))
        z = np.concatenate([x2, u2], axis=1)
        coef = self._coef_matrix if mask is None else self._coef_matrix[mask]
        out = self._monomials(z, mask) @ coef
        return out[0] if single else out

    def __call__(self, x, u):
        return self._eval(x, u)

    def nonlinear_part(self, x, u):
        """Sum of the terms of total degree >= 2."""
        return self._eval(x, u, mask=self._nonlinear)

    def closed_loop_polynomial(self, K):
        """Expand ``f(x, -K x)`` into monomials of x.

        Returns a list with one dict per component mapping the exponent tuple
        of x to its coefficient.  Zero coefficients are dropped.
        """
        K = np.asarray(K, dtype=float).reshape(self.m, self.n)
        inputs = []
        for j in range(self.m):
            lin = {}
            for k in range(self.n):
                if K[j, k] != 0.0:
                    e = [0] * self.n
                    e[k] = 1
                    lin[tuple(e)] = -K[j, k]
            inputs.append(lin)
        out = []
        for terms in self.components:
            acc = {}
            for term in terms:
                p = {tuple(term.x_exponents): term.coefficient}
                for j, b in enumerate(term.u_exponents):
                    for _ in range(b):
                        p = _poly_mul(p, inputs[j])
                for e, c in p.items():
                    acc[e] = acc.get(e, 0.0) + c
            out.append({e: c for e, c in acc.items() if c != 0.0})
        return out


def _poly_mul(p, q):
    out = {}
    for e1, c1 in p.items():
        for e2, c2 in q.items():
            e = tuple(a + b for a, b in zip(e1, e2))
            out[e] = out.get(e, 0.0) + c1 * c2
    return out


PHASE_KINDS = ("zero", "constant", "cosine", "radial")


@dataclass(frozen=True)
class PerturbationSpec:
    """Admissible disturbance class and one concrete realisation.

    The class is ``|w(x, t)| <= sigma*|x| + c*exp(gamma*(t - t0))``.  The
    realisation is ``w(x, t) = (sigma*|x| + c*exp(gamma*(t - t0))) * phi(x, t)``
    where ``phi`` is drawn from a closed catalog with ``|phi| <= 1``:

    ``zero``
        ``phi = 0``.
    ``constant``
        ``phi = direction`` (``|direction| <= 1``).
    ``cosine``
        ``phi = direction * cos(weights . x + frequency * t + offset)``.
    ``radial``
        ``phi = x / |x|`` (zero at the origin); the worst case for the
        state-proportional part since it pushes straight outwards.
    """

    sigma: float = 0.0
    c: float = 0.0
    gamma: float = -1.0
    t0: float = 0.0
    phase: str = "zero"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.isfinite(self.gamma) or self.gamma >= 0:
            raise SchemaError("perturbation decay rate gamma must be negative")
        if self.sigma < 0 or self.c < 0:
            raise SchemaError("perturbation sigma and c must be nonnegative")
        if self.phase not in PHASE_KINDS:
            raise SchemaError(
                f"unknown perturbation phase {self.phase!r}; expected one of {PHASE_KINDS}"
            )
        allowed = {
            "zero": set(),
            "constant": {"direction"},
            "cosine": {"direction", "weights", "frequency", "offset"},
            "radial": set(),
        }[self.phase]
        extra = set(self.params) - allowed
        if extra:
            raise SchemaError(f"phase {self.phase!r}: unknown params {sorted(extra)}")
        if self.phase in ("constant", "cosine"):
            if "direction" not in self.params:
                raise SchemaError(f"phase {self.phase!r} requires a direction")
            d = np.asarray(self.params["direction"], dtype=float)
            if np.linalg.norm(d) > 1.0 + 1e-12:
                raise SchemaError("phase direction must have norm at most 1")
        direction = self.params.get("direction")
        weights = self.params.get("weights")
        object.__setattr__(self, "_direction",
                           None if direction is None else np.array(direction, dtype=float))
        object.__setattr__(self, "_weights",
                           None if weights is None else np.array(weights, dtype=float))

    @classmethod
    def none(cls):
        return cls()

    def _check_dims(self, n):
        for key in ("direction", "weights"):
            if key in self.params and len(self.params[key]) != n:
                raise DimensionError(f"phase {key} must have length {n}")

    def amplitude(self, x, t):
        """The envelope ``sigma*|x| + c*exp(gamma*(t - t0))``."""
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x, axis=-1)
        return self.sigma * r + self.c * np.exp(self.gamma * (t - self.t0))

    def phi(self, x, t):
        """Unit-bounded phase factor for a state or batch of states."""
        x = np.asarray(x, dtype=float)
        if self.phase == "zero":
            return np.zeros_like(x)
        if self.phase == "radial":
            r = np.linalg.norm(x, axis=-1, keepdims=True)
            return np.where(r > 0, x / np.where(r > 0, r, 1.0), 0.0)
        d = self._direction
        if d.shape[0] != x.shape[-1]:
            self._check_dims(x.shape[-1])
        if self.phase == "constant":
            return np.broadcast_to(d, x.shape).copy()
        w = self._weights if self._weights is not None else np.zeros_like(d)
        arg = x @ w + (float(self.params.get("frequency", 0.0)) * t
                       + float(self.params.get("offset", 0.0)))
        return np.cos(arg)[..., None] * d

    def __call__(self, x, t):
        """Realised disturbance ``w(x, t)``."""
        if self.phase == "zero" or (self.sigma == 0 and self.c == 0):
            return np.zeros_like(np.asarray(x, dtype=float))
        return self.amplitude(x, t)[..., None] * self.phi(x, t)


@dataclass(frozen=True)
class SystemDefinition:
    """Everything needed to certify one closed loop.

    ``desired_eigenvalues`` may be empty only when ``gain_override`` is
    given.  ``initial_state`` and ``remainder`` are optional extras used by
    the simulation and certification pipelines.
    """

    field: PolynomialVectorField
    perturbation: PerturbationSpec = field(default_factory=PerturbationSpec)
    desired_eigenvalues: tuple = ()
    gain_override: Optional[np.ndarray] = None
    initial_state: Optional[np.ndarray] = None
    remainder: Optional["RemainderModel"] = None
    name: str = ""

    def __post_init__(self):
        n, m = self.field.n, self.field.m
        eigs = tuple(complex(z) for z in self.desired_eigenvalues)
        object.__setattr__(self, "desired_eigenvalues", eigs)
        if self.gain_override is not None:
            K = np.array(self.gain_override, dtype=float)
            if K.size != m * n:
                raise SchemaError(f"gain_override must have {m}x{n} entries")
            K = K.reshape(m, n)
            K.setflags(write=False)
            object.__setattr__(self, "gain_override", K)
        elif not eigs:
            raise SchemaError("desired_eigenvalues are required without gain_override")
        if eigs:
            validate_desired_eigenvalues(eigs, n)
        if self.initial_state is not None:
            x0 = np.array(self.initial_state, dtype=float).ravel()
            if x0.shape != (n,):
                raise SchemaError(f"initial_state must have length {n}")
            x0.setflags(write=False)
            object.__setattr__(self, "initial_state", x0)
        self.perturbation._check_dims(n)


def validate_desired_eigenvalues(eigs, n, tol=1e-12):
    """Raise SchemaError unless ``eigs`` are n distinct, conjugate-closed, stable values."""
    eigs = [complex(z) for z in eigs]
    if len(eigs) != n:
        raise SchemaError(f"expected {n} desired eigenvalues, got {len(eigs)}")
    for z in eigs:
        if not z.real < 0:
            raise SchemaError(f"desired eigenvalue {z} must have negative real part")
    for i in range(n):
        for j in range(i + 1, n):
            if abs(eigs[i] - eigs[j]) <= tol:
                raise SchemaError("desired eigenvalues must be pairwise distinct")
    for z in eigs:
        if abs(z.imag) > tol and min(abs(z.conjugate() - y) for y in eigs) > tol:
            raise SchemaError(f"desired eigenvalue {z} has no conjugate partner")


def evaluate_field(field: PolynomialVectorField, x, u):
    """f(x, u) by exact monomial evaluation."""
    return field(x, u)


def evaluate_closed_loop(field: PolynomialVectorField, K, perturbation, t, x):
    """Right-hand side ``f(x, -Kx) + w(x, t)`` of the perturbed closed loop."""
    K = np.asarray(K, dtype=float)
    if K.shape != (field.m, field.n):
        raise DimensionError(f"K must be {field.m}x{field.n}, got {K.shape}")
    x = np.asarray(x, dtype=float)
    u = -(x @ K.T)
    out = field(x, u)
    if perturbation is not None:
        out = out + perturbation(x, t)
    return out


def jacobians_at_origin(field: PolynomialVectorField):
    """Exact ``A = f_x(0,0)`` and ``B = f_u(0,0)`` read off the linear terms."""
    A = np.zeros((field.n, field.n))
    B = np.zeros((field.n, field.m))
    for i, terms in enumerate(field.components):
        for term in terms:
            if term.degree != 1:
                continue
            if sum(term.x_exponents) == 1:
                A[i, term.x_exponents.index(1)] += term.coefficient
            else:
                B[i, term.u_exponents.index(1)] += term.coefficient
    return A, B


def remainder_evaluate(field: PolynomialVectorField, K, x):
    """Taylor remainder ``R1(x, -Kx)``: the degree >= 2 terms at ``u = -Kx``."""
    K = np.asarray(K, dtype=float)
    if K.shape != (field.m, field.n):
        raise DimensionError(f"K must be {field.m}x{field.n}, got {K.shape}")
    x = np.asarray(x, dtype=float)
    return field.nonlinear_part(x, -(x @ K.T))
