import numpy as np
import pytest

from stabcert.errors import CertificationUnsupported
from stabcert.linalg import eigendecompose, eta_condition, numerical_rank, spectral_norm

A_CL1 = np.array([[0.0, 1.0], [-0.375, -1.25]])


@pytest.mark.parametrize("n", [1, 2, 5])
def test_spectral_norm_identity(n):
    assert spectral_norm(np.eye(n)) == pytest.approx(1.0, rel=1e-15)


def test_spectral_norm_example1_gain():
    # sqrt(0.375^2 + 1.25^2) for a row vector
    assert spectral_norm([[0.375, 1.25]]) == pytest.approx(1.3050, abs=5e-5)
    assert spectral_norm([[0.375, 1.25]]) == pytest.approx(np.hypot(0.375, 1.25), rel=1e-14)


def test_spectral_norm_diagonal():
    assert spectral_norm(np.diag([2.0, -3.0])) == pytest.approx(3.0, rel=1e-15)


def test_spectral_norm_transpose_invariant():
    rng = np.random.default_rng(0)
    for _ in range(50):
        M = rng.normal(size=(rng.integers(1, 6), rng.integers(1, 6)))
        assert abs(spectral_norm(M) - spectral_norm(M.T)) <= 1e-10 * spectral_norm(M)


def test_spectral_norm_symmetric_is_max_abs_eigenvalue():
    rng = np.random.default_rng(1)
    for _ in range(50):
        S = rng.normal(size=(4, 4))
        S = S + S.T
        assert spectral_norm(S) == pytest.approx(np.abs(np.linalg.eigvalsh(S)).max(), abs=1e-9)


def test_spectral_norm_power_iteration_oracle():
    rng = np.random.default_rng(2)
    M = rng.normal(size=(5, 3))
    v = np.ones(3)
    for _ in range(2000):
        v = M.T @ (M @ v)
        v /= np.linalg.norm(v)
    assert spectral_norm(M) == pytest.approx(np.linalg.norm(M @ v), rel=1e-10)


def test_eigendecompose_diagonal():
    d = eigendecompose(np.diag([-1.0, -2.0]))
    assert sorted(z.real for z in d.eigenvalues) == [-2.0, -1.0]
    # identity up to column sign and order
    assert np.allclose(np.abs(d.T), np.eye(2)) or np.allclose(np.abs(d.T), np.eye(2)[::-1])
    assert eta_condition(d) == 1.0


def test_eigendecompose_example1_closed_loop():
    d = eigendecompose(A_CL1)
    # s^2 + 1.25 s + 0.375 = (s + 0.5)(s + 0.75)
    assert sorted(z.real for z in d.eigenvalues) == pytest.approx([-0.75, -0.5], abs=1e-12)
    assert all(z.imag == 0 for z in d.eigenvalues)
    np.testing.assert_allclose(np.linalg.norm(d.T, axis=0), 1.0, rtol=1e-14)
    np.testing.assert_allclose(d.reconstruct(), A_CL1, atol=1e-12)


def test_eta_example1():
    # Unit eigenvectors (1, -1/2)/|.| and (1, -3/4)/|.| by hand.
    v1 = np.array([1.0, -0.5]) / np.hypot(1, 0.5)
    v2 = np.array([1.0, -0.75]) / np.hypot(1, 0.75)
    T = np.column_stack([v1, v2])
    s = np.linalg.svd(T, compute_uv=False)
    eta_hand = s[0] / s[-1]
    assert eta_condition(eigendecompose(A_CL1)) == pytest.approx(eta_hand, rel=1e-12)
    assert eta_condition(eigendecompose(A_CL1)) == pytest.approx(11.0902, abs=2e-2)


def test_eigendecompose_rotation_block():
    d = eigendecompose(np.array([[0.0, -1.0], [1.0, 0.0]]))
    assert sorted((z.imag for z in d.eigenvalues)) == pytest.approx([-1.0, 1.0])
    assert d.blocks == ((0, 2),)
    assert np.isrealobj(d.T)
    np.testing.assert_allclose(d.T_inv @ np.array([[0.0, -1.0], [1.0, 0.0]]) @ d.T,
                               d.block_diagonal, atol=1e-12)


def test_eigendecompose_complex_pair_unit_norm_before_realification():
    M = np.array([[-1.0, 2.0, 0.0], [-2.0, -1.0, 0.0], [0.0, 0.0, -3.0]])
    d = eigendecompose(M)
    for start, size in d.blocks:
        if size == 2:
            p, q = d.T[:, start], d.T[:, start + 1]
            assert np.linalg.norm(p + 1j * q) == pytest.approx(1.0, rel=1e-14)
    np.testing.assert_allclose(d.reconstruct(), M, atol=1e-12)


def test_eta_orthogonal_basis_is_one():
    rng = np.random.default_rng(3)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    M = Q @ np.diag([-1.0, -2.0, -3.0, -4.0]) @ Q.T
    assert eta_condition(eigendecompose(M)) == pytest.approx(1.0, abs=1e-12)


def test_repeated_eigenvalues_rejected():
    with pytest.raises(CertificationUnsupported):
        eigendecompose(np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(CertificationUnsupported):
        eigendecompose(-np.eye(3))


def test_round_trip_random_stable_matrices():
    rng = np.random.default_rng(4)
    done = 0
    while done < 100:
        n = int(rng.integers(2, 7))
        M = rng.normal(size=(n, n))
        M = M - (np.max(np.linalg.eigvals(M).real) + rng.uniform(0.1, 1.0)) * np.eye(n)
        w = np.linalg.eigvals(M)
        gaps = [abs(a - b) for i, a in enumerate(w) for b in w[i + 1:]]
        if min(gaps) < 1e-3:
            continue
        d = eigendecompose(M)
        nrm = spectral_norm(M)
        assert spectral_norm(d.reconstruct() - M) <= 1e-8 * nrm
        assert np.max(np.abs(d.T_inv @ M @ d.T - d.block_diagonal)) <= 1e-8 * max(1.0, nrm)
        assert eta_condition(d) >= 1.0
        done += 1


def test_numerical_rank_examples():
    assert numerical_rank(np.zeros((3, 3))) == 0
    assert numerical_rank(np.array([[0.0, 1.0], [1.0, 0.0]])) == 2
    rng = np.random.default_rng(5)
    assert numerical_rank(np.outer(rng.normal(size=4), rng.normal(size=3))) == 1


def test_numerical_rank_tolerance():
    M = np.diag([1.0, 1e-6])
    assert numerical_rank(M, 1e-10) == 2
    assert numerical_rank(M, 1e-3) == 1
    with pytest.raises(ValueError):
        numerical_rank(M, 0.0)
