"""Controllability test and pole placement for the linearised closed loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificationUnsupported, StabCertError, UncontrollableError
from .linalg import EigenDecomposition, eigendecompose, eta_condition, numerical_rank, spectral_norm
from .sysmodel import SystemDefinition, jacobians_at_origin, validate_desired_eigenvalues

SPECTRUM_TOL = 1e-6


@dataclass(frozen=True)
class GainSynthesis:
    """Feedback gain together with the closed-loop quantities the certificate needs."""

    A: np.ndarray
    B: np.ndarray
    K: np.ndarray
    A_cl: np.ndarray
    spectrum: tuple
    lambda_m: float
    decomp: EigenDecomposition
    eta: float

    @property
    def k_norm(self) -> float:
        return spectral_norm(self.K)


def controllability_matrix(A, B) -> np.ndarray:
    """``[B, AB, A^2 B, ..., A^(n-1) B]``."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    n = A.shape[0]
    if B.ndim == 1:
        B = B.reshape(n, 1)
    if A.shape != (n, n) or B.shape[0] != n:
        raise ValueError(f"inconsistent shapes A{A.shape} B{B.shape}")
    blocks = [B]
    for _ in range(n - 1):
        blocks.append(A @ blocks[-1])
    return np.hstack(blocks)


def is_controllable(A, B, tol: float = 1e-10) -> bool:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return numerical_rank(controllability_matrix(A, B), tol) == A.shape[0]


def match_spectra(computed, requested):
    """Greedy nearest assignment; returns ``computed`` reordered to follow ``requested``."""
    computed = [complex(z) for z in computed]
    requested = [complex(z) for z in requested]
    if len(computed) != len(requested):
        raise ValueError("spectra have different sizes")
    pairs = sorted(
        (abs(c - r), i, j) for i, c in enumerate(computed) for j, r in enumerate(requested)
    )
    out = [None] * len(requested)
    taken = set()
    for _, i, j in pairs:
        if i in taken or out[j] is not None:
            continue
        out[j] = computed[i]
        taken.add(i)
    return out


def _sorted_spectrum(values):
    return sorted((complex(z) for z in values), key=lambda z: (z.real, z.imag))


def _populate(A, B, K):
    A_cl = A - B @ K
    decomp = eigendecompose(A_cl)
    lam_m = decomp.lambda_max_real
    if not lam_m < 0:
        raise CertificationUnsupported(
            f"closed loop is not exponentially stable: lambda_m = {lam_m:.6g} >= 0"
        )
    for arr in (A, B, K, A_cl):
        arr.setflags(write=False)
    return GainSynthesis(
        A=A,
        B=B,
        K=K,
        A_cl=A_cl,
        spectrum=tuple(_sorted_spectrum(decomp.eigenvalues)),
        lambda_m=float(lam_m),
        decomp=decomp,
        eta=eta_condition(decomp),
    )


def place_poles(A, B, desired) -> GainSynthesis:
    """Single-input pole placement by Ackermann's formula.

    ``K = e_n^T C^{-1} p(A)`` where ``C`` is the controllability matrix and
    ``p`` the monic polynomial with roots ``desired``.
    """
    A = np.array(np.atleast_2d(A), dtype=float)
    B = np.array(B, dtype=float)
    n = A.shape[0]
    if B.ndim == 1:
        B = B.reshape(n, 1)
    if B.shape[1] != 1:
        raise CertificationUnsupported(
            "automatic pole placement handles single-input systems only; "
            "supply gain_override for m > 1"
        )
    validate_desired_eigenvalues(desired, n)
    C = controllability_matrix(A, B)
    if numerical_rank(C, 1e-10) < n:
        raise UncontrollableError("the pair (A, B) is not controllable")

    coeffs = np.real(np.poly(np.asarray(desired, dtype=complex)))
    pA = np.zeros((n, n))
    for a in coeffs:
        pA = pA @ A + a * np.eye(n)
    e_n = np.zeros(n)
    e_n[-1] = 1.0
    row = np.linalg.solve(C.T, e_n)
    K = (row @ pA).reshape(1, n)

    synth = _populate(A, B, K)
    got = match_spectra(synth.spectrum, desired)
    err = max(abs(g - d) for g, d in zip(got, desired))
    if err > SPECTRUM_TOL * max(1.0, max(abs(complex(d)) for d in desired)):
        raise StabCertError(
            f"pole placement is numerically inaccurate (eigenvalue error {err:.3g})"
        )
    return synth


def adopt_gain(A, B, K_given) -> GainSynthesis:
    """Validate a user-supplied gain and build the closed-loop data from it."""
    A = np.array(np.atleast_2d(A), dtype=float)
    B = np.array(B, dtype=float)
    n = A.shape[0]
    if B.ndim == 1:
        B = B.reshape(n, 1)
    K = np.array(K_given, dtype=float).reshape(B.shape[1], n)
    return _populate(A, B, K)


def synthesize(system: SystemDefinition) -> GainSynthesis:
    """Gain for a system definition: the override if present, else pole placement."""
    A, B = jacobians_at_origin(system.field)
    if not is_controllable(A, B):
        raise UncontrollableError(
            "the linearisation (A, B) at the origin is not controllable"
        )
    if system.gain_override is not None:
        return adopt_gain(A, B, system.gain_override)
    if system.field.m != 1:
        raise CertificationUnsupported(
            "automatic pole placement handles single-input systems only; "
            "supply gain_override for m > 1"
        )
    return place_poles(A, B, system.desired_eigenvalues)
