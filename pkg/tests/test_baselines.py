"""SOMP and AMP baselines on constructed instances."""

import numpy as np
import pytest

from leojadce.baselines import (AmpConfig, SompConfig, amp_mmv,
                                default_max_support, somp)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def unit_columns(rng, L, K):
    A = crandn(rng, L, K)
    return A / np.linalg.norm(A, axis=0, keepdims=True)


def test_somp_single_active_noise_free():
    rng = np.random.default_rng(0)
    L, K, M = 16, 10, 3
    A = unit_columns(rng, L, K)
    x = crandn(rng, M, 1)
    Y = A[:, [4]] @ x.conj().T
    res = somp(Y, A, SompConfig(max_support=5, residual_tol=1e-10))
    assert res.support == [4]
    np.testing.assert_allclose(res.X_hat[:, 4], x[:, 0], atol=1e-10)
    assert not res.rank_deficient


def test_somp_zero_signal_empty_support():
    rng = np.random.default_rng(1)
    A = unit_columns(rng, 8, 5)
    res = somp(np.zeros((8, 2), dtype=complex), A, SompConfig(max_support=3))
    assert res.support == []
    assert np.count_nonzero(res.X_hat) == 0


def test_somp_orthonormal_dictionary_exact_recovery():
    rng = np.random.default_rng(2)
    L, K, M, s = 20, 12, 4, 5
    Q, _ = np.linalg.qr(crandn(rng, L, K))
    A = Q[:, :K]
    X = np.zeros((M, K), dtype=complex)
    active = rng.choice(K, size=s, replace=False)
    X[:, active] = crandn(rng, M, s)
    Y = A @ X.conj().T
    res = somp(Y, A, SompConfig(max_support=s, residual_tol=0.0))
    assert sorted(res.support) == sorted(active.tolist())
    assert len(res.residual_norms) == s + 1  # support found in s iterations
    np.testing.assert_allclose(res.X_hat, X, atol=1e-10)


def test_somp_residual_non_increasing():
    rng = np.random.default_rng(3)
    L, K, M = 24, 40, 3
    A = unit_columns(rng, L, K)
    Y = crandn(rng, L, M)
    res = somp(Y, A, SompConfig(max_support=15, residual_tol=0.0))
    diffs = np.diff(res.residual_norms)
    assert np.all(diffs <= 1e-10)


def test_somp_rank_deficient_support_flags_and_stops():
    rng = np.random.default_rng(4)
    L, M = 10, 2
    col = crandn(rng, L, 1)
    col /= np.linalg.norm(col)
    A = np.hstack([col, col, unit_columns(rng, L, 2)])  # duplicated atom
    Y = col @ crandn(rng, M, 1).conj().T
    res = somp(Y, A, SompConfig(max_support=3, residual_tol=-1.0))
    assert res.rank_deficient
    assert len(res.support) >= 1


def test_somp_rejects_oversized_support():
    rng = np.random.default_rng(5)
    A = unit_columns(rng, 8, 4)
    with pytest.raises(ValueError):
        somp(np.zeros((8, 2), dtype=complex), A, SompConfig(max_support=5))


def test_default_max_support():
    assert default_max_support(0.1, 500) == 75
    assert default_max_support(0.9, 10) == 10  # capped at K
    assert default_max_support(0.0, 10) == 1


def test_amp_zero_input():
    rng = np.random.default_rng(6)
    A = unit_columns(rng, 10, 6)
    res = amp_mmv(np.zeros((10, 2), dtype=complex), A, 0.01, 0.2)
    assert np.count_nonzero(res.X_hat) == 0
    assert not res.diverged


def test_amp_one_sparse_recovery():
    rng = np.random.default_rng(7)
    L, K, M = 32, 8, 4
    A = unit_columns(rng, L, K)
    X = np.zeros((M, K), dtype=complex)
    X[:, 3] = 3.0 * crandn(rng, M)
    Y = A @ X.conj().T
    res = amp_mmv(Y, A, 1e-6, 1.0 / K, AmpConfig(max_iters=200, tol=1e-6))
    assert not res.diverged
    energies = np.sum(np.abs(res.X_hat) ** 2, axis=0)
    assert np.argmax(energies) == 3
    assert energies[3] > 10 * np.sort(energies)[-2] if K > 1 else True


def test_amp_iterates_bounded_on_random_instance():
    rng = np.random.default_rng(8)
    L, K, M = 40, 60, 4
    A = unit_columns(rng, L, K)
    Y = crandn(rng, L, M)
    res = amp_mmv(Y, A, 0.1, 0.1, AmpConfig(max_iters=100))
    assert not res.diverged
    assert np.all(np.isfinite(res.X_hat))
