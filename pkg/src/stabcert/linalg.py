"""Dense real linear algebra: induced 2-norm, modal bases, numerical rank.

Complex eigenvalues are realified into 2x2 blocks so every stored matrix is
real.  For an eigenpair ``a +/- ib`` with eigenvector ``p + iq`` the basis
holds the columns ``[p, q]`` and the block is ``[[a, b], [-b, a]]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CertificationUnsupported

# Relative threshold on the minimum eigenvalue gap.
DISTINCT_TOL = 1e-8


def spectral_norm(M) -> float:
    """Largest singular value of ``M`` (0 for empty or zero matrices)."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def numerical_rank(M, tol: float = 1e-10) -> int:
    """Number of singular values above ``tol`` times the largest one."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class EigenDecomposition:
    """Real modal decomposition ``M = T @ block_diagonal @ inv(T)``.

    ``eigenvalues[k]`` is listed in the order of the basis columns; for a
    complex pair both members appear consecutively, positive imaginary part
    first.  ``blocks`` is a tuple of ``(start_column, size)`` with size 1 or 2.
    """

    eigenvalues: tuple
    T: np.ndarray
    T_inv: np.ndarray
    blocks: tuple

    @property
    def block_diagonal(self) -> np.ndarray:
        n = self.T.shape[0]
        L = np.zeros((n, n))
        for start, size in self.blocks:
            lam = self.eigenvalues[start]
            if size == 1:
                L[start, start] = lam.real
            else:
                a, b = lam.real, lam.imag
                L[start:start + 2, start:start + 2] = [[a, b], [-b, a]]
        return L

    def reconstruct(self) -> np.ndarray:
        return self.T @ self.block_diagonal @ self.T_inv

    @property
    def lambda_max_real(self) -> float:
        return max(z.real for z in self.eigenvalues)


def eigendecompose(M) -> EigenDecomposition:
    """Modal basis of a real matrix with pairwise distinct eigenvalues.

    Each complex eigenvector (before realification) and each real one is
    scaled to unit Euclidean norm; the sign and phase follow LAPACK.

    Raises
    ------
    CertificationUnsupported
        If two eigenvalues are closer than ``1e-8 * ||M||`` or the basis is
        numerically singular.
    """
    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("matrix must be square")
    w, V = np.linalg.eig(M)
    scale = spectral_norm(M)
    for i in range(n):
        for j in range(i + 1, n):
            if abs(w[i] - w[j]) <= DISTINCT_TOL * scale:
                raise CertificationUnsupported(
                    f"repeated or clustered eigenvalues {w[i]:.6g} and {w[j]:.6g}: "
                    "the closed loop must be diagonalisable with distinct eigenvalues"
                )

    imag_tol = DISTINCT_TOL * scale
    cols, eigs, blocks = [], [], []
    used = np.zeros(n, dtype=bool)
    for i in range(n):
        if used[i]:
            continue
        lam = w[i]
        v = V[:, i] / np.linalg.norm(V[:, i])
        if abs(lam.imag) <= imag_tol:
            blocks.append((len(cols), 1))
            vr = v.real if np.linalg.norm(v.real) >= np.linalg.norm(v.imag) else v.imag
            cols.append(vr / np.linalg.norm(vr))
            eigs.append(complex(lam.real, 0.0))
            used[i] = True
            continue
        # Pair with the conjugate partner.
        partners = [j for j in range(n) if not used[j] and j != i]
        j = min(partners, key=lambda k: abs(w[k] - np.conj(lam)))
        used[i] = used[j] = True
        if lam.imag < 0:
            lam, v = np.conj(lam), np.conj(v)
        blocks.append((len(cols), 2))
        cols.extend([v.real, v.imag])
        eigs.extend([complex(lam), complex(np.conj(lam))])

    T = np.column_stack(cols)
    if not np.all(np.isfinite(T)) or np.linalg.cond(T) > 1e14:
        raise CertificationUnsupported("eigenvector basis is numerically singular")
    T_inv = np.linalg.inv(T)
    T.setflags(write=False)
    T_inv.setflags(write=False)
    return EigenDecomposition(tuple(eigs), T, T_inv, tuple(blocks))


def eta_condition(decomp: EigenDecomposition) -> float:
    """Condition number ``||T|| * ||T^-1||`` of the modal basis.

    The product is at least 1 by submultiplicativity; rounding below 1 (for
    orthogonal bases) is clamped.
    """
    return max(1.0, spectral_norm(decomp.T) * spectral_norm(decomp.T_inv))
