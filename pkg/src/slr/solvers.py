"""Shuffled least squares and shuffled LASSO via spectral permutation estimates."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from .assignment import spectral_match
from .model import GroundTruth, Permutation, SlrProblem, apply_transpose
from .spectral import build_measurement_basis, build_signal_basis


class RankDeficient(ValueError):
    pass


class MaxItersExceeded(RuntimeError):
    """Raised by callers that demand convergence; carries the unconverged columns."""

    def __init__(self, message, columns=()):
        super().__init__(message)
        self.columns = tuple(columns)


@dataclass
class SlrSolution:
    perm: Permutation
    X_hat: np.ndarray
    k: int = 0
    delta: float = float("nan")
    elapsed: float = 0.0
    method: str = "spectral_ls"
    unconverged: tuple = field(default=())


@dataclass
class LassoState:
    coefficients: np.ndarray
    residual: np.ndarray
    iterations: int
    converged: bool


def estimate_permutation(problem: SlrProblem, C_X):
    """Spectral permutation estimate; returns ``(AssignmentResult, signal, measurement)``."""
    signal = build_signal_basis(problem.A, C_X, problem.config)
    measurement = build_measurement_basis(problem, signal.selected)
    return spectral_match(signal, measurement), signal, measurement


def _check_full_column_rank(A):
    s = np.linalg.svd(A, compute_uv=False)
    if A.shape[0] < A.shape[1] or s[-1] <= 1e-10 * s[0]:
        raise RankDeficient(f"A ({A.shape[0]}x{A.shape[1]}) does not have full column rank")


def least_squares(A, B):
    """``pinv(A) @ B`` through a thin QR of ``A``."""
    A = np.asarray(A, dtype=float)
    _check_full_column_rank(A)
    Q, R = np.linalg.qr(A, mode="reduced")
    return scipy.linalg.solve_triangular(R, Q.T @ B)


def solve_shuffled_ls(problem: SlrProblem, C_X) -> SlrSolution:
    t0 = time.perf_counter()
    _check_full_column_rank(problem.A)
    result, signal, _ = estimate_permutation(problem, C_X)
    X_hat = least_squares(problem.A, apply_transpose(result.perm, problem.Y))
    return SlrSolution(result.perm, X_hat, signal.k, signal.delta,
                       time.perf_counter() - t0, "spectral_ls")


def lasso_objective(A, B, X, rho) -> float:
    R = np.asarray(B) - A @ X
    return float(np.sum(R * R) + rho * np.abs(X).sum())


def soft_threshold(x, level):
    return np.sign(x) * np.maximum(np.abs(x) - level, 0.0)


def lasso_coordinate_descent(A, B, rho, tol=1e-8, max_iters=10_000, X0=None):
    """Cyclic coordinate descent on ``||B - A X||_F^2 + rho ||X||_1``, all columns at once.

    Every column is an independent LASSO problem; sweeping coordinate ``j``
    across all columns together is the same update as running each column on
    its own.  Returns ``(X, R, sweeps_per_column, converged_per_column)``.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    m, n = A.shape
    if B.shape[0] != m:
        raise ValueError("row count of B does not match A")
    sq = np.einsum("ij,ij->j", A, A)
    if np.any(sq == 0):
        raise ValueError("A has an all-zero column")
    t = B.shape[1]
    X = np.zeros((n, t)) if X0 is None else np.array(X0, dtype=float)
    half = 0.5 * rho
    converged = np.zeros(t, dtype=bool)
    sweeps = np.zeros(t, dtype=int)
    # columns leave the working set after their first sweep with max change < tol,
    # exactly where a column-by-column solver would stop
    active = np.arange(t)
    Xa = X.copy()
    Ra = B - A @ Xa
    for sweep in range(1, max_iters + 1):
        change = np.zeros(active.size)
        for j in range(n):
            a = A[:, j]
            old = Xa[j]
            z = a @ Ra + sq[j] * old
            new = soft_threshold(z, half) / sq[j]
            d = new - old
            if np.any(d):
                Ra -= np.outer(a, d)
                Xa[j] = new
                np.maximum(change, np.abs(d), out=change)
        sweeps[active] = sweep
        done = change < tol
        if done.any():
            X[:, active[done]] = Xa[:, done]
            converged[active[done]] = True
            keep = ~done
            active, Xa, Ra = active[keep], Xa[:, keep], Ra[:, keep]
        if active.size == 0:
            break
    if active.size:
        X[:, active] = Xa
    R = B - A @ X
    return X, R, sweeps, converged


def solve_lasso_column(A, b, rho=1.0, tol=1e-8, max_iters=10_000) -> LassoState:
    """Single-column LASSO; a non-converged run returns the last iterate with ``converged=False``."""
    b = np.asarray(b, dtype=float).ravel()
    X, R, sweeps, conv = lasso_coordinate_descent(A, b[:, None], rho, tol, max_iters)
    return LassoState(X[:, 0], R[:, 0], int(sweeps[0]), bool(conv[0]))


def kkt_violation(A, b, x, rho) -> float:
    """Largest deviation from the LASSO stationarity conditions."""
    g = 2.0 * A.T @ (A @ x - b)
    zero = x == 0
    v_zero = np.maximum(np.abs(g[zero]) - rho, 0.0)
    v_active = np.abs(g[~zero] + rho * np.sign(x[~zero]))
    return float(max(v_zero.max(initial=0.0), v_active.max(initial=0.0)))


def lasso_features(problem: SlrProblem, perm: Permutation):
    cfg = problem.config
    B = apply_transpose(perm, problem.Y)
    X, _, _, conv = lasso_coordinate_descent(problem.A, B, cfg.rho, cfg.lasso_tol, cfg.lasso_max_iters)
    return X, tuple(int(i) for i in np.flatnonzero(~conv))


def solve_shuffled_lasso(problem: SlrProblem, C_X) -> SlrSolution:
    t0 = time.perf_counter()
    result, signal, _ = estimate_permutation(problem, C_X)
    X_hat, bad = lasso_features(problem, result.perm)
    return SlrSolution(result.perm, X_hat, signal.k, signal.delta,
                       time.perf_counter() - t0, "spectral_lasso", bad)


def solve_with_permutation(problem: SlrProblem, perm: Permutation, sparse: bool,
                           method: str) -> SlrSolution:
    t0 = time.perf_counter()
    if sparse:
        X_hat, bad = lasso_features(problem, perm)
    else:
        X_hat, bad = least_squares(problem.A, apply_transpose(perm, problem.Y)), ()
    return SlrSolution(perm, X_hat, 0, float("nan"), time.perf_counter() - t0, method, bad)


def oracle_solution(problem: SlrProblem, truth: GroundTruth, sparse: bool = False) -> SlrSolution:
    if truth.perm.size != problem.m:
        raise ValueError("ground-truth permutation does not match the problem size")
    return solve_with_permutation(problem, truth.perm, sparse,
                                  "oracle_lasso" if sparse else "oracle_ls")


def require_converged(solution: SlrSolution) -> SlrSolution:
    if solution.unconverged:
        raise MaxItersExceeded(f"{len(solution.unconverged)} LASSO columns did not converge",
                               solution.unconverged)
    return solution
