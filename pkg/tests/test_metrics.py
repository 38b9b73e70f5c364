import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from slr.metrics import (
    appendix_cost_matrices, matching_accuracy, nmse, nmse_db, optimality_gap,
    permutation_error_rate, reconstruction_mse, score_trial,
)
from slr.model import Permutation, apply_permutation, generate_dense_problem
from slr.spectral import SpectralBasis, build_measurement_basis, build_signal_basis

perm_pairs = st.integers(1, 12).flatmap(
    lambda m: st.tuples(st.permutations(list(range(m))), st.permutations(list(range(m)))))


def basis(V, k=None):
    k = V.shape[1] if k is None else k
    return SpectralBasis(np.arange(V.shape[1], 0, -1.0), V, tuple(range(k)), 1.0)


def test_error_rate_examples():
    p = Permutation([0, 1, 2, 3])
    assert permutation_error_rate(p, p) == 0.0
    assert permutation_error_rate(Permutation([1, 0, 2, 3]), p) == 0.5
    assert permutation_error_rate(Permutation([2, 1, 0]), Permutation.identity(3)) == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        permutation_error_rate(Permutation.identity(2), Permutation.identity(3))


@given(perm_pairs)
def test_error_rate_symmetric(pair):
    a, b = Permutation(pair[0]), Permutation(pair[1])
    assert permutation_error_rate(a, b) == permutation_error_rate(b, a)
    assert permutation_error_rate(a, a) == 0.0
    assert (permutation_error_rate(a, b) == 0) == (a == b)
    assert matching_accuracy(a, b) == 1 - permutation_error_rate(a, b)


def test_nmse_examples():
    X = np.random.default_rng(0).standard_normal((2, 3))
    assert nmse(X, X) == 0.0
    assert nmse(X + 1, X) == pytest.approx(1.0)
    assert nmse_db(X + 1, X) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        nmse(np.zeros((2, 3)), np.zeros((3, 2)))


def test_nmse_naive_loop():
    rng = np.random.default_rng(1)
    A, B = rng.standard_normal((4, 7)), rng.standard_normal((4, 7))
    acc = 0.0
    for i in range(4):
        for j in range(7):
            acc += (A[i, j] - B[i, j]) ** 2
    assert abs(nmse(A, B) - acc / 28) < 1e-12


def test_gap_examples():
    V = np.eye(4)
    truth = Permutation.identity(4)
    assert optimality_gap(truth, truth, basis(V)) == 0.0
    assert optimality_gap(Permutation([1, 0, 2, 3]), truth, basis(V)) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        optimality_gap(Permutation.identity(3), Permutation.identity(3), basis(V))


def test_gap_matches_trace_formula():
    rng = np.random.default_rng(2)
    V, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    b = basis(V, 3)
    est, truth = Permutation(rng.permutation(6)), Permutation(rng.permutation(6))
    Va = V[:, :3]
    direct = 1 - np.trace(est.to_matrix().T @ truth.to_matrix() @ Va @ Va.T) / 3
    assert optimality_gap(est, truth, b) == pytest.approx(direct, abs=1e-12)


@given(perm_pairs, st.integers(0, 1000))
def test_gap_bounds(pair, seed):
    m = len(pair[0])
    V, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((m, m)))
    k = 1 + seed % m
    g = optimality_gap(Permutation(pair[0]), Permutation(pair[1]), basis(V, k))
    # Cauchy-Schwarz: |<Pi_hat V, Pi* V>| <= k
    assert -1e-12 <= g <= 2 + 1e-12
    if pair[0] == pair[1]:
        assert g == 0.0


def test_gap_can_exceed_one_for_sign_mixed_vectors():
    V = np.array([[1.0, 1.0], [-1.0, 1.0]]) / np.sqrt(2)
    g = optimality_gap(Permutation([1, 0]), Permutation.identity(2), basis(V, 1))
    assert g == pytest.approx(2.0)


def test_gap_within_unit_interval_for_nonnegative_vectors():
    rng = np.random.default_rng(9)
    V = np.abs(rng.standard_normal((8, 3)))
    V /= np.linalg.norm(V, axis=0)
    for _ in range(200):
        g = optimality_gap(Permutation(rng.permutation(8)), Permutation(rng.permutation(8)), basis(V))
        assert -1e-12 <= g <= 1 + 1e-12


def test_reconstruction_examples():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((5, 2))
    X = rng.standard_normal((2, 4))
    p = Permutation(rng.permutation(5))
    assert reconstruction_mse(p, X, p, X, A) == 0.0
    X2 = X + rng.standard_normal(X.shape)
    assert reconstruction_mse(p, X2, p, X, A) == pytest.approx(
        np.linalg.norm(A @ (X2 - X)) ** 2 / 20)
    q = Permutation(rng.permutation(5))
    naive = 0.0
    E = q.to_matrix() @ A @ X2 - p.to_matrix() @ A @ X
    for v in E.ravel():
        naive += v * v
    assert reconstruction_mse(q, X2, p, X, A) == pytest.approx(naive / 20, rel=1e-12)


def test_appendix_matrices():
    rng = np.random.default_rng(4)
    V, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    truth = Permutation(rng.permutation(6))
    s = basis(V, 3)
    u = basis(apply_permutation(truth, V), 3)
    D, _ = appendix_cost_matrices(s, u, truth)
    assert np.trace(D @ truth.to_matrix()) == pytest.approx(3.0, abs=1e-8)
    # with the full basis every row has unit norm, so each row maximum sits on Pi*
    _, D_hat = appendix_cost_matrices(basis(V), basis(apply_permutation(truth, V)), truth)
    inv = truth.inverse().map
    for i in range(6):
        assert np.argmax(D_hat[i]) == inv[i]


def test_appendix_bound_on_noisy_instances():
    for seed in range(10):
        problem, truth = generate_dense_problem(20, 6, 300, 10, 0.5, seed=seed)
        s = build_signal_basis(problem.A, np.eye(6))
        u = build_measurement_basis(problem, s.selected)
        D, D_hat = appendix_cost_matrices(s, u, truth.perm)
        PV = apply_permutation(truth.perm, s.selected_vectors)
        U = u.selected_vectors
        # sign fixing per column as in the abs-value construction
        D_abs = np.abs(s.selected_vectors) @ np.abs(PV).T
        bound = np.linalg.norm(np.abs(PV) - np.abs(U))
        assert np.max(np.abs(D_abs - D_hat)) <= bound + 1e-12


def test_gap_zero_when_error_zero():
    problem, truth = generate_dense_problem(20, 6, 300, 10, 0.5, seed=0)
    s = build_signal_basis(problem.A, np.eye(6))
    m = score_trial(truth.perm, truth.X, truth, problem.A, s)
    assert m.perm_error_rate == 0 and m.optimality_gap == 0 and m.nmse_x == 0
    assert m.nmse_x_db == -np.inf
