"""Covariance eigenbases and principal-component selection."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from .model import SlrProblem, SolverConfig


class EmptySelection(ValueError):
    """No eigenvalue is both non-zero and separated from its neighbours."""


@dataclass(frozen=True)
class SpectralBasis:
    eigenvalues: np.ndarray
    vectors: np.ndarray
    selected: tuple
    delta: float

    @property
    def k(self) -> int:
        return len(self.selected)

    @property
    def m(self) -> int:
        return self.eigenvalues.size

    @property
    def selected_vectors(self) -> np.ndarray:
        return self.vectors[:, list(self.selected)]


def sample_covariance(Y, C_N, block: int = 65536) -> np.ndarray:
    """``(1/t) sum_i y_i y_i^T - C_N``, symmetrized.

    Columns are accumulated in fixed-size blocks so the reduction order does
    not depend on anything but ``t``.
    """
    Y = np.asarray(Y, dtype=float)
    C_N = np.asarray(C_N, dtype=float)
    if Y.ndim != 2:
        raise ValueError("Y must be a matrix")
    m, t = Y.shape
    if t == 0:
        raise ValueError("sample covariance needs at least one column")
    if C_N.shape != (m, m):
        raise ValueError(f"C_N must be {m}x{m}, got {C_N.shape}")
    S = np.zeros((m, m))
    for start in range(0, t, block):
        Yb = Y[:, start:start + block]
        S += Yb @ Yb.T
    S /= t
    S -= C_N
    return 0.5 * (S + S.T)


def eigendecompose_descending(M):
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    scale = max(1.0, np.max(np.abs(M), initial=0.0))
    if np.max(np.abs(M - M.T), initial=0.0) > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    w, V = np.linalg.eigh(0.5 * (M + M.T))
    return w[::-1].copy(), V[:, ::-1].copy()


def eligible_components(eigenvalues, gap_threshold: float) -> np.ndarray:
    """Boolean mask of indices that are positive and separated on both sides."""
    lam = np.asarray(eigenvalues, dtype=float)
    upper = np.concatenate(([np.inf], lam[:-1]))
    lower = np.concatenate((lam[1:], [0.0]))
    return (lam > gap_threshold) & (lam - lower >= gap_threshold) & (upper - lam >= gap_threshold)


def min_gap(eigenvalues, selected) -> float:
    lam = np.asarray(eigenvalues, dtype=float)
    lower = np.concatenate((lam[1:], [0.0]))
    idx = np.asarray(selected, dtype=int)
    return float(np.min(lam[idx] - lower[idx]))


def select_components(eigenvalues, gap_threshold: float = 1e-3,
                      max_components: Union[int, str] = "all"):
    """Return ``(selected, delta)`` with ``selected`` as a tuple of 0-based indices."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size > 1 and np.any(np.diff(lam) > 1e-12 * max(1.0, np.abs(lam).max())):
        raise ValueError("eigenvalues must be sorted in descending order")
    idx = np.flatnonzero(eligible_components(lam, gap_threshold))
    if max_components != "all":
        idx = idx[:int(max_components)]
    if idx.size == 0:
        raise EmptySelection("no eigenvalue passes the gap threshold; spectrum is unidentifiable")
    return tuple(int(i) for i in idx), min_gap(lam, idx)


def basis_from_matrix(M, config: SolverConfig,
                      selected: Optional[Sequence[int]] = None) -> SpectralBasis:
    lam, V = eigendecompose_descending(M)
    return _make_basis(lam, V, config, selected)


def _make_basis(lam, V, config, selected):
    if selected is None:
        sel, delta = select_components(lam, config.gap_threshold, config.max_components)
    else:
        sel = tuple(int(i) for i in selected)
        if not sel:
            raise EmptySelection("empty component set")
        if max(sel) >= lam.size:
            raise ValueError("selected index out of range")
        delta = min_gap(lam, sel)
    return SpectralBasis(lam, V, sel, delta)


def build_signal_basis(A, C_X, config: Optional[SolverConfig] = None) -> SpectralBasis:
    """Eigenbasis of ``A C_X A^T`` with components chosen by the gap rule."""
    A = np.asarray(A, dtype=float)
    C_X = np.asarray(C_X, dtype=float)
    if C_X.shape != (A.shape[1], A.shape[1]):
        raise ValueError(f"C_X must be {A.shape[1]}x{A.shape[1]}")
    M = A @ C_X @ A.T
    return basis_from_matrix(0.5 * (M + M.T), config or SolverConfig())


def build_measurement_basis(problem: SlrProblem, selected: Optional[Sequence[int]] = None,
                            config: Optional[SolverConfig] = None) -> SpectralBasis:
    """Eigenbasis of the noise-corrected sample covariance of ``Y``.

    Pass the signal basis' ``selected`` so both sides use the same indices;
    when omitted the gap rule is applied to the sample spectrum itself.
    """
    config = config or problem.config
    C = sample_covariance(problem.Y, problem.C_N)
    lam, V = eigendecompose_descending(C)
    if selected is not None:
        # an all-zero covariance carries no information whatever indices are asked for
        if np.max(np.abs(lam), initial=0.0) <= config.gap_threshold:
            raise EmptySelection("measurement covariance vanishes after noise removal")
    return _make_basis(lam, V, config, selected)
