"""Exact linear assignment (Hungarian method) and eigenvector matching."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Permutation
from .spectral import SpectralBasis


@dataclass(frozen=True)
class AssignmentResult:
    perm: Permutation
    objective: float


def hungarian_min(cost) -> np.ndarray:
    """Minimum-cost perfect matching of a square cost matrix.

    Shortest-augmenting-path form of the Hungarian method with row and
    column potentials, O(m^3).  Returns ``col`` with row ``i`` assigned to
    column ``col[i]``.  Rows are inserted in index order and ties in the
    column scan resolve to the lowest column index.
    """
    C = np.asarray(cost, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {C.shape}")
    if not np.all(np.isfinite(C)):
        raise ValueError("cost matrix has non-finite entries")
    n = C.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.intp)
    # index 0 of the column arrays is a virtual column holding the row being inserted
    u = np.zeros(n + 1)
    v = np.zeros(n + 1)
    p = np.zeros(n + 1, dtype=np.intp)
    way = np.zeros(n + 1, dtype=np.intp)
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(n + 1, np.inf)
        used = np.zeros(n + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            free = ~used[1:]
            cur = C[i0 - 1] - u[i0] - v[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            cand = np.where(free, minv[1:], np.inf)
            j1 = int(np.argmin(cand)) + 1
            delta = cand[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[~used] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col = np.empty(n, dtype=np.intp)
    col[p[1:] - 1] = np.arange(n)
    return col


def trace_objective(D, perm: Permutation) -> float:
    """``tr(D @ Pi)`` evaluated as ``sum_k D[map[k], k]``."""
    D = np.asarray(D, dtype=float)
    return float(D[perm.map, np.arange(perm.size)].sum())


def max_trace_assignment(D) -> AssignmentResult:
    """Permutation maximizing ``tr(D @ Pi)`` over all permutation matrices."""
    D = np.asarray(D, dtype=float)
    if D.ndim != 2 or D.shape[0] != D.shape[1]:
        raise ValueError(f"cost matrix must be square, got shape {D.shape}")
    if not np.all(np.isfinite(D)):
        raise ValueError("cost matrix has non-finite entries")
    if D.size == 0:
        return AssignmentResult(Permutation([]), 0.0)
    # tr(D Pi) = sum_k D[map[k], k]: row k of D.T picks column map[k]
    cost = D.max() - D.T
    perm = Permutation(hungarian_min(cost))
    return AssignmentResult(perm, trace_objective(D, perm))


def matching_cost(signal: SpectralBasis, measurement: SpectralBasis) -> np.ndarray:
    """``abs(V_A) @ abs(U_A).T``; insensitive to per-column eigenvector signs."""
    if signal.selected != measurement.selected:
        raise ValueError(
            f"bases select different components (k={signal.k} vs k={measurement.k})"
        )
    if signal.m != measurement.m:
        raise ValueError("bases have different dimensions")
    return np.abs(signal.selected_vectors) @ np.abs(measurement.selected_vectors).T


def spectral_match(signal: SpectralBasis, measurement: SpectralBasis) -> AssignmentResult:
    return max_trace_assignment(matching_cost(signal, measurement))
