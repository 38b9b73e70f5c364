"""Joint pose and correspondence estimation for 3D point sets.

Model: ``P = Pi Q R + 1 t^T`` with ``R`` in SO(3).  Centering removes ``t``;
the centered Gram matrices are then related by ``Pi`` alone, since
``P~ P~^T = Pi Q~ R R^T Q~^T Pi^T = Pi Q~ Q~^T Pi^T``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.spatial.transform import Rotation

from .assignment import spectral_match
from .metrics import matching_accuracy
from .model import Permutation, PointCloud, SolverConfig, apply_permutation, apply_transpose
from .spectral import SpectralBasis, _make_basis, select_components


class RotationDegenerate(ValueError):
    pass


@dataclass(frozen=True)
class RegistrationScene:
    P: PointCloud
    Q: PointCloud

    def __post_init__(self):
        if len(self.P) != len(self.Q):
            raise ValueError(f"point counts differ: {len(self.P)} vs {len(self.Q)}")


@dataclass(frozen=True)
class SceneTruth:
    perm: Permutation
    rotation: np.ndarray
    translation: np.ndarray
    Q_clean: PointCloud


@dataclass
class RegistrationResult:
    perm: Permutation
    rotation: np.ndarray
    translation: np.ndarray
    matching_accuracy: float = float("nan")


def _points(cloud) -> np.ndarray:
    return cloud.points if isinstance(cloud, PointCloud) else PointCloud(cloud).points


def center(points):
    X = _points(points)
    if X.shape[0] == 0:
        raise ValueError("cannot center an empty point cloud")
    mean = X.mean(axis=0)
    return PointCloud(X - mean), mean


def _gram_basis(X, config, selected=None) -> SpectralBasis:
    # eigenvectors of X X^T from the thin SVD of X; the rest of the spectrum is zero
    m = X.shape[0]
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    lam = np.zeros(m)
    lam[:s.size] = s ** 2
    vectors = np.zeros((m, m))
    vectors[:, :U.shape[1]] = U
    if selected is None:
        selected, _ = select_components(lam, config.gap_threshold, min(3, m) if config.max_components == "all"
                                        else config.max_components)
    return _make_basis(lam, vectors, config, selected)


def correspondence_bases(scene: RegistrationScene, config: Optional[SolverConfig] = None):
    config = config or SolverConfig()
    if len(scene.P) < 3:
        raise ValueError("registration needs at least three points")
    Qc, _ = center(scene.Q)
    Pc, _ = center(scene.P)
    signal = _gram_basis(Qc.points, config)
    measurement = _gram_basis(Pc.points, config, signal.selected)
    return signal, measurement


def estimate_correspondence(scene: RegistrationScene, config: Optional[SolverConfig] = None) -> Permutation:
    """Match eigenvectors of the centered Gram matrices of ``Q`` and ``P``.

    Raises ``EmptySelection`` when the top-3 spectrum has no well separated
    eigenvalue (e.g. isotropic or highly symmetric shapes).
    """
    signal, measurement = correspondence_bases(scene, config)
    return spectral_match(signal, measurement).perm


def estimate_rotation(P_centered, Q_centered, perm: Permutation) -> np.ndarray:
    """Rotation maximizing ``tr(P~^T Pi Q~ R)``, with the determinant forced to +1."""
    P = _points(P_centered)
    Qp = apply_permutation(perm, _points(Q_centered))
    H = P.T @ Qp
    U, s, Vt = np.linalg.svd(H)
    if s[0] == 0 or s[1] <= 1e-12 * s[0]:
        raise RotationDegenerate("cross-covariance has rank below 2; rotation is not identifiable")
    V = Vt.T
    d = np.sign(np.linalg.det(V @ U.T))
    return V @ np.diag([1.0, 1.0, d if d != 0 else 1.0]) @ U.T


def estimate_translation(P, Q, R_hat, perm: Optional[Permutation] = None) -> np.ndarray:
    P = _points(P)
    Q = _points(Q)
    if P.shape != Q.shape:
        raise ValueError("point sets differ in shape")
    # the mean is invariant under the row permutation, so perm is optional
    QR = Q @ R_hat if perm is None else apply_permutation(perm, Q) @ R_hat
    return (P - QR).mean(axis=0)


def register(scene: RegistrationScene, truth: Optional[SceneTruth] = None,
             config: Optional[SolverConfig] = None) -> RegistrationResult:
    Pc, _ = center(scene.P)
    Qc, _ = center(scene.Q)
    perm = estimate_correspondence(scene, config)
    R = estimate_rotation(Pc, Qc, perm)
    t = estimate_translation(scene.P, scene.Q, R, perm)
    acc = float("nan") if truth is None else matching_accuracy(perm, truth.perm)
    return RegistrationResult(perm, R, t, acc)


def register_with_correspondence(scene: RegistrationScene, perm: Permutation) -> RegistrationResult:
    """Pose only, given the correspondence (the known-correspondence oracle)."""
    Pc, _ = center(scene.P)
    Qc, _ = center(scene.Q)
    R = estimate_rotation(Pc, Qc, perm)
    return RegistrationResult(perm, R, estimate_translation(scene.P, scene.Q, R, perm), 1.0)


def reconstruct_model(scene: RegistrationScene, result: RegistrationResult) -> np.ndarray:
    """Map ``P`` back into model coordinates: ``Pi^T (P - 1 t^T) R^T``."""
    P = _points(scene.P)
    return apply_transpose(result.perm, (P - result.translation) @ result.rotation.T)


def reconstruction_error(scene: RegistrationScene, result: RegistrationResult) -> float:
    return float(np.linalg.norm(reconstruct_model(scene, result) - _points(scene.Q)))


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    return Rotation.random(random_state=rng).as_matrix()


def normalize_unit_cube(points) -> np.ndarray:
    X = _points(points)
    lo = X.min(axis=0)
    span = X.max(axis=0) - lo
    span[span == 0] = 1.0
    return (X - lo) / span


def generate_scene(model, m: int, sigma2: float, seed, translation=(10.0, 10.0, 0.0)):
    """Sample ``m`` model points and build an observed set ``P = Pi Q R + 1 t^T``.

    ``Pi`` orders the transformed points lexicographically (the way an image
    would be read out row by row), and ``Q`` is returned with i.i.d.
    ``N(0, sigma2)`` coordinate noise.
    """
    X = _points(model)
    if m > X.shape[0]:
        raise ValueError(f"model has {X.shape[0]} points, cannot sample {m}")
    if m < 1:
        raise ValueError("m must be positive")
    if sigma2 < 0:
        raise ValueError("sigma2 must be non-negative")
    rng = np.random.default_rng(seed)
    Q = normalize_unit_cube(X[rng.choice(X.shape[0], size=m, replace=False)])
    R = random_rotation(rng)
    t = np.asarray(translation, dtype=float)
    moved = Q @ R + t
    perm = Permutation(np.lexsort(moved.T[::-1]))
    P = apply_permutation(perm, Q @ R) + t
    Q_noisy = Q + np.sqrt(sigma2) * rng.standard_normal(Q.shape)
    scene = RegistrationScene(PointCloud(P), PointCloud(Q_noisy))
    return scene, SceneTruth(perm, R, t, PointCloud(Q))


_BLOB_PARTS = (
    # center, semi-axes, share of points
    ((0.0, 0.0, 0.0), (1.0, 0.7, 0.6), 0.55),
    ((0.9, 0.0, 0.5), (0.45, 0.35, 0.35), 0.20),
    ((1.1, 0.12, 1.0), (0.1, 0.06, 0.4), 0.10),
    ((1.0, -0.15, 0.95), (0.1, 0.06, 0.35), 0.08),
    ((-1.0, 0.0, 0.1), (0.2, 0.2, 0.2), 0.07),
)


def synthetic_model(num_points: int = 20000, seed=0) -> PointCloud:
    """Surface samples from a union of ellipsoids: body, head, two ears, tail.

    Stand-in for a scanned model when none is supplied; its top-3 spectrum is
    well separated, so registration is identifiable.
    """
    rng = np.random.default_rng(seed)
    parts = []
    for c, axes, share in _BLOB_PARTS:
        k = int(round(num_points * share))
        v = rng.standard_normal((k, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        parts.append(np.asarray(c) + v * np.asarray(axes))
    return PointCloud(np.vstack(parts))
