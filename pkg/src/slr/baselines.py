"""Comparison permutation estimators: spatial correlation, leverage scores, thresholding."""
from __future__ import annotations

import numpy as np

from .assignment import max_trace_assignment
from .model import Permutation, SlrProblem


def spatial_cost(A, Y) -> np.ndarray:
    # tr(Pi A A^T Y Y^T) = tr((A A^T Y Y^T) Pi)
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return (A @ (A.T @ Y)) @ Y.T


def spatial_match(problem: SlrProblem) -> Permutation:
    """Maximize the correlation between ``A A^T`` and ``Y Y^T`` under a row permutation."""
    return max_trace_assignment(spatial_cost(problem.A, problem.Y)).perm


def leverage_scores(M, tol: float = 1e-10) -> np.ndarray:
    """Squared row norms of the reduced left singular matrix of ``M``."""
    M = np.asarray(M, dtype=float)
    U, s, _ = np.linalg.svd(M, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return np.zeros(M.shape[0])
    r = int(np.sum(s > tol * s[0]))
    return np.einsum("ij,ij->i", U[:, :r], U[:, :r])


def sorted_match(target, source) -> Permutation:
    """Permutation minimizing ``||target - Pi source||^2``: equal ranks are paired."""
    target = np.asarray(target, dtype=float)
    source = np.asarray(source, dtype=float)
    if target.shape != source.shape:
        raise ValueError("score vectors must have equal length")
    mapping = np.empty(target.size, dtype=np.intp)
    mapping[np.argsort(target, kind="stable")] = np.argsort(source, kind="stable")
    return Permutation(mapping)


def leverage_match(problem: SlrProblem) -> Permutation:
    return sorted_match(leverage_scores(problem.Y), leverage_scores(problem.A))


def thres(M) -> np.ndarray:
    """Keep only the largest-magnitude entry of each column (lowest row wins ties)."""
    M = np.asarray(M, dtype=float)
    out = np.zeros_like(M)
    if M.size == 0:
        return out
    rows = np.argmax(np.abs(M), axis=0)
    cols = np.arange(M.shape[1])
    out[rows, cols] = M[rows, cols]
    return out


def threshold_cost(A, Y) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    return A @ thres(A.T @ Y) @ Y.T


def threshold_match(problem: SlrProblem) -> Permutation:
    return max_trace_assignment(threshold_cost(problem.A, problem.Y)).perm
