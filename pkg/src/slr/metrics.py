"""Scores for permutation and feature estimates."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .model import GroundTruth, Permutation, apply_permutation
from .spectral import SpectralBasis


@dataclass
class TrialMetrics:
    perm_error_rate: float = float("nan")
    nmse_x: float = float("nan")
    nmse_x_db: float = float("nan")
    optimality_gap: float = float("nan")
    reconstruction_mse: float = float("nan")
    elapsed: float = 0.0

    def as_dict(self):
        return asdict(self)


def _check_perms(est: Permutation, truth: Permutation):
    if est.size != truth.size:
        raise ValueError(f"permutation sizes differ: {est.size} vs {truth.size}")


def permutation_error_rate(est: Permutation, truth: Permutation) -> float:
    """Fraction of rows whose estimated mapping differs from the true one."""
    _check_perms(est, truth)
    if est.size == 0:
        return 0.0
    return float(np.mean(est.map != truth.map))


def nmse(X_hat, X_true) -> float:
    X_hat = np.asarray(X_hat, dtype=float)
    X_true = np.asarray(X_true, dtype=float)
    if X_hat.shape != X_true.shape:
        raise ValueError(f"shape mismatch: {X_hat.shape} vs {X_true.shape}")
    D = X_true - X_hat
    return float(np.sum(D * D) / D.size)


def to_db(value: float) -> float:
    with np.errstate(divide="ignore"):
        return float(10.0 * np.log10(value))


def nmse_db(X_hat, X_true) -> float:
    return to_db(nmse(X_hat, X_true))


def optimality_gap(est: Permutation, truth: Permutation, signal_basis: SpectralBasis) -> float:
    """``1 - tr(Pi_hat^T Pi* V_A V_A^T) / k``, measured on the signal eigenbasis."""
    _check_perms(est, truth)
    V = signal_basis.selected_vectors
    if V.shape[0] != est.size:
        raise ValueError("basis dimension does not match the permutation size")
    if est == truth:
        return 0.0
    # tr(Pi_hat^T Pi* V V^T) = <Pi_hat V, Pi* V>_F
    return float(1.0 - np.sum(V[est.map] * V[truth.map]) / V.shape[1])


def reconstruction_mse(perm_hat: Permutation, X_hat, perm_true: Permutation, X_true, A) -> float:
    A = np.asarray(A, dtype=float)
    est = apply_permutation(perm_hat, A @ np.asarray(X_hat, dtype=float))
    ref = apply_permutation(perm_true, A @ np.asarray(X_true, dtype=float))
    D = est - ref
    return float(np.sum(D * D) / D.size)


def appendix_cost_matrices(signal_basis: SpectralBasis, measurement_basis: SpectralBasis,
                           truth: Permutation):
    """Noiseless cost ``V_A (Pi* V_A)^T`` and its sample counterpart ``abs(V_A) abs(U_A)^T``."""
    if signal_basis.selected != measurement_basis.selected:
        raise ValueError("bases must share the selected components")
    if truth.size != signal_basis.m or measurement_basis.m != signal_basis.m:
        raise ValueError("dimension mismatch")
    V = signal_basis.selected_vectors
    U = measurement_basis.selected_vectors
    D = V @ apply_permutation(truth, V).T
    D_hat = np.abs(V) @ np.abs(U).T
    return D, D_hat


def matching_accuracy(est: Permutation, truth: Permutation) -> float:
    return 1.0 - permutation_error_rate(est, truth)


def score_trial(perm_hat: Permutation, X_hat, truth: GroundTruth, A,
                signal_basis: SpectralBasis = None, elapsed: float = 0.0) -> TrialMetrics:
    value = nmse(X_hat, truth.X)
    gap = float("nan") if signal_basis is None else optimality_gap(perm_hat, truth.perm, signal_basis)
    return TrialMetrics(
        perm_error_rate=permutation_error_rate(perm_hat, truth.perm),
        nmse_x=value,
        nmse_x_db=to_db(value),
        optimality_gap=gap,
        reconstruction_mse=reconstruction_mse(perm_hat, X_hat, truth.perm, truth.X, A),
        elapsed=elapsed,
    )
