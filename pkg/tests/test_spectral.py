import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slr.model import Permutation, SlrProblem, SolverConfig, apply_permutation, generate_dense_problem
from slr.spectral import (
    EmptySelection, build_measurement_basis, build_signal_basis, eigendecompose_descending,
    eligible_components, sample_covariance, select_components,
)


def naive_covariance(Y, C_N):
    m, t = Y.shape
    S = np.zeros((m, m))
    for i in range(m):
        for j in range(m):
            S[i, j] = sum(Y[i, k] * Y[j, k] for k in range(t)) / t
    return S - C_N


def test_zero_covariance():
    assert np.array_equal(sample_covariance(np.zeros((3, 5)), np.zeros((3, 3))), np.zeros((3, 3)))


def test_single_column_outer_product():
    S = sample_covariance(np.array([[1.0], [2.0]]), np.zeros((2, 2)))
    assert np.array_equal(S, [[1.0, 2.0], [2.0, 4.0]])


def test_matches_naive_accumulation():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((4, 50))
    C_N = 0.1 * np.eye(4)
    assert np.allclose(sample_covariance(Y, C_N), naive_covariance(Y, C_N), atol=1e-10, rtol=0)


def test_block_accumulation_is_symmetric():
    rng = np.random.default_rng(1)
    Y = rng.standard_normal((6, 1000))
    S = sample_covariance(Y, np.zeros((6, 6)), block=64)
    assert np.array_equal(S, S.T)
    assert np.allclose(S, Y @ Y.T / 1000)


def test_empty_samples_rejected():
    with pytest.raises(ValueError):
        sample_covariance(np.zeros((3, 0)), np.zeros((3, 3)))


def test_eig_diagonal():
    lam, V = eigendecompose_descending(np.diag([1.0, 3.0, 2.0]))
    assert np.allclose(lam, [3, 2, 1])
    assert np.allclose(np.abs(V), np.eye(3)[:, [1, 2, 0]])


def test_eig_identity():
    lam, _ = eigendecompose_descending(np.eye(5))
    assert np.allclose(lam, 1.0)


def test_eig_reconstruction():
    rng = np.random.default_rng(2)
    B = rng.standard_normal((6, 6))
    M = B + B.T
    lam, V = eigendecompose_descending(M)
    assert np.max(np.abs(V @ np.diag(lam) @ V.T - M)) < 1e-8
    assert np.all(np.diff(lam) <= 0)
    assert np.max(np.abs(V.T @ V - np.eye(6))) < 1e-8


def test_eig_rejects_bad_input():
    with pytest.raises(ValueError):
        eigendecompose_descending(np.array([[1.0, np.nan], [np.nan, 1.0]]))
    with pytest.raises(ValueError):
        eigendecompose_descending(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_select_all_distinct():
    sel, delta = select_components([5.0, 3.0, 1.0], 1e-3)
    assert sel == (0, 1, 2) and delta == 1.0


def test_select_excludes_ties_and_zero():
    sel, delta = select_components([3.0, 2.0, 2.0, 0.0], 1e-3)
    assert sel == (0,) and delta == 1.0


def test_select_empty():
    with pytest.raises(EmptySelection):
        select_components([0.0, 0.0, 0.0], 1e-3)


def test_select_caps_components():
    sel, delta = select_components([9.0, 6.0, 4.0, 1.0], 1e-3, max_components=2)
    assert sel == (0, 1) and delta == 2.0


@given(st.lists(st.floats(0, 10), min_size=1, max_size=12), st.floats(1e-4, 1.0))
def test_selection_soundness(values, thr):
    lam = np.sort(np.array(values))[::-1]
    mask = eligible_components(lam, thr)
    ext = np.concatenate(([np.inf], lam, [0.0]))
    for i in np.flatnonzero(mask):
        assert ext[i + 1] - ext[i + 2] >= thr
        assert ext[i] - ext[i + 1] >= thr
        assert lam[i] > thr
    if mask.any():
        sel, delta = select_components(lam, thr)
        assert delta >= thr


def test_signal_basis_identity_cov():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 4))
    b = build_signal_basis(A, np.eye(4))
    lam = np.sort(np.linalg.eigvalsh(A @ A.T))[::-1]
    assert np.allclose(b.eigenvalues, lam)
    assert b.k == 4


def test_signal_basis_diagonal():
    b = build_signal_basis(np.eye(2), np.diag([4.0, 1.0]))
    assert np.allclose(b.eigenvalues, [4, 1])
    assert np.allclose(np.abs(b.vectors), np.eye(2))


def test_signal_basis_rank_bound():
    rng = np.random.default_rng(4)
    A = rng.standard_normal((5, 2))
    b = build_signal_basis(A, np.eye(2))
    assert np.sum(b.eigenvalues > 1e-9) <= 2
    assert b.k <= 2


def test_basis_orthogonality():
    problem, _ = generate_dense_problem(30, 10, 500, 20, 0.5, seed=0)
    s = build_signal_basis(problem.A, np.eye(10))
    u = build_measurement_basis(problem, s.selected)
    for b in (s, u):
        assert np.max(np.abs(b.vectors.T @ b.vectors - np.eye(30))) < 1e-8
    assert u.selected == s.selected


def test_measurement_equals_signal_when_covariance_exact():
    rng = np.random.default_rng(5)
    m, n = 6, 3
    A = rng.standard_normal((m, n))
    # X X^T / t = I exactly
    t = 3
    X = np.sqrt(t) * np.eye(n)
    problem = SlrProblem(A @ X, A, np.zeros((m, m)))
    s = build_signal_basis(A, np.eye(n))
    u = build_measurement_basis(problem, s.selected)
    assert np.allclose(np.abs(u.selected_vectors), np.abs(s.selected_vectors), atol=1e-10)


def test_measurement_basis_noise_equal_to_cov_is_empty():
    rng = np.random.default_rng(6)
    Y = rng.standard_normal((4, 20))
    problem = SlrProblem(Y, np.ones((4, 1)), Y @ Y.T / 20)
    with pytest.raises(EmptySelection):
        build_measurement_basis(problem, (0,))
    with pytest.raises(EmptySelection):
        build_measurement_basis(problem)


def test_eigenvector_error_shrinks_with_t():
    errs = []
    for t in (100, 1000, 10_000):
        vals = []
        for seed in range(5):
            problem, truth = generate_dense_problem(20, 5, t, 20, 0.5, seed=seed)
            s = build_signal_basis(problem.A, np.eye(5))
            u = build_measurement_basis(problem, s.selected)
            PV = apply_permutation(truth.perm, s.selected_vectors)
            vals.append(np.linalg.norm(np.abs(u.selected_vectors) - np.abs(PV)))
        errs.append(np.median(vals))
    assert errs[0] > errs[1] > errs[2]


def test_permutation_equivariance():
    rng = np.random.default_rng(7)
    m = 7
    Y = rng.standard_normal((m, 300)) * np.arange(1, m + 1)[:, None]
    C_N = np.diag(rng.random(m) * 0.1)
    perm = Permutation(rng.permutation(m))
    S1 = sample_covariance(Y, C_N)
    P = perm.to_matrix()
    S2 = sample_covariance(apply_permutation(perm, Y), P @ C_N @ P.T)
    l1, V1 = eigendecompose_descending(S1)
    l2, V2 = eigendecompose_descending(S2)
    assert np.allclose(l1, l2, atol=1e-8)
    assert np.allclose(np.abs(apply_permutation(perm, V1)), np.abs(V2), atol=1e-8)


@pytest.mark.slow
def test_covariance_consistency_trend():
    rng = np.random.default_rng(8)
    m, n = 10, 4
    A = rng.standard_normal((m, n))
    perm = Permutation(rng.permutation(m))
    C_Y = apply_permutation(perm, apply_permutation(perm, A @ A.T).T).T + 0.01 * np.eye(m)
    meds = []
    for t in (250, 1000, 4000):
        errs = []
        for _ in range(20):
            X = rng.standard_normal((n, t))
            Y = apply_permutation(perm, A @ X) + 0.1 * rng.standard_normal((m, t))
            errs.append(np.linalg.norm(sample_covariance(Y, np.zeros((m, m))) - C_Y, 2))
        meds.append(np.median(errs))
    assert meds[0] > meds[1] > meds[2]
