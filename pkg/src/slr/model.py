"""Observation model ``Y = Pi A X + N`` and synthetic problem generators.

All generators draw from ``numpy.random.default_rng(seed)`` (PCG64), so a
given seed reproduces an instance exactly.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np


class Permutation:
    """Bijective index map; ``map[k] = l`` means the matrix has a one at (k, l).

    Applied to a matrix ``M`` this is the row gather ``M[map]``, i.e. ``Pi @ M``.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping):
        arr = np.asarray(mapping)
        if arr.ndim != 1:
            raise ValueError("permutation map must be one-dimensional")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(arr == np.round(arr)):
                raise ValueError("permutation map must contain integers")
        arr = arr.astype(np.intp)
        m = arr.size
        seen = np.zeros(m, dtype=bool)
        if m and (arr.min() < 0 or arr.max() >= m):
            raise ValueError("permutation entries must lie in [0, m)")
        seen[arr] = True
        if not seen.all():
            raise ValueError("permutation map is not a bijection")
        arr.setflags(write=False)
        self._map = arr

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(np.arange(m))

    @classmethod
    def from_matrix(cls, P) -> "Permutation":
        P = np.asarray(P)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError("permutation matrix must be square")
        if not np.all((P == 0) | (P == 1)) or not np.all(P.sum(0) == 1) or not np.all(P.sum(1) == 1):
            raise ValueError("not a permutation matrix")
        return cls(np.argmax(P, axis=1))

    @property
    def map(self) -> np.ndarray:
        return self._map

    @property
    def size(self) -> int:
        return self._map.size

    def __len__(self):
        return self._map.size

    def inverse(self) -> "Permutation":
        inv = np.empty_like(self._map)
        inv[self._map] = np.arange(self._map.size)
        return Permutation(inv)

    def compose(self, other: "Permutation") -> "Permutation":
        """Matrix product ``self @ other``."""
        if other.size != self.size:
            raise ValueError("size mismatch")
        return Permutation(other.map[self._map])

    def to_matrix(self) -> np.ndarray:
        m = self.size
        P = np.zeros((m, m))
        P[np.arange(m), self._map] = 1.0
        return P

    def is_identity(self) -> bool:
        return bool(np.all(self._map == np.arange(self.size)))

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.size == other.size and bool(np.all(self._map == other._map))

    def __hash__(self):
        return hash(self._map.tobytes())

    def __repr__(self):
        if self.size <= 12:
            return f"Permutation({self._map.tolist()})"
        return f"Permutation(size={self.size})"


def invert(perm: Permutation) -> Permutation:
    return perm.inverse()


def apply_permutation(perm: Permutation, M) -> np.ndarray:
    """Return ``Pi @ M`` without materializing ``Pi``."""
    M = np.asarray(M)
    if M.ndim == 0 or M.shape[0] != perm.size:
        raise ValueError(
            f"permutation of size {perm.size} cannot act on {M.shape[0] if M.ndim else 0} rows"
        )
    return M[perm.map]


def apply_transpose(perm: Permutation, M) -> np.ndarray:
    """Return ``Pi.T @ M``."""
    return apply_permutation(perm.inverse(), M)


@dataclass(frozen=True)
class SolverConfig:
    gap_threshold: float = 1e-3
    max_components: Union[int, str] = "all"
    rho: float = 1.0
    lasso_tol: float = 1e-8
    lasso_max_iters: int = 10_000

    def __post_init__(self):
        if not self.gap_threshold > 0:
            raise ValueError("gap_threshold must be positive")
        if self.max_components != "all":
            if not isinstance(self.max_components, (int, np.integer)) or self.max_components < 1:
                raise ValueError("max_components must be a positive integer or 'all'")
        if not self.rho >= 0:
            raise ValueError("rho must be non-negative")
        if not self.lasso_tol > 0:
            raise ValueError("lasso_tol must be positive")
        if self.lasso_max_iters < 1:
            raise ValueError("lasso_max_iters must be at least 1")


@dataclass(frozen=True)
class SlrProblem:
    Y: np.ndarray
    A: np.ndarray
    C_N: np.ndarray
    config: SolverConfig = field(default_factory=SolverConfig)

    def __post_init__(self):
        Y = np.atleast_2d(np.asarray(self.Y, dtype=float))
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        C_N = np.asarray(self.C_N, dtype=float)
        if Y.ndim != 2 or A.ndim != 2:
            raise ValueError("Y and A must be matrices")
        m, t = Y.shape
        if m < 1 or t < 1 or A.shape[1] < 1:
            raise ValueError("m, n and t must all be at least 1")
        if A.shape[0] != m:
            raise ValueError(f"A has {A.shape[0]} rows but Y has {m}")
        if C_N.shape != (m, m):
            raise ValueError(f"C_N must be {m}x{m}, got {C_N.shape}")
        if not np.all(np.isfinite(Y)):
            raise ValueError("Y contains non-finite entries")
        if not np.all(np.isfinite(A)) or not np.all(np.isfinite(C_N)):
            raise ValueError("A and C_N must be finite")
        if np.max(np.abs(C_N - C_N.T), initial=0.0) > 1e-10:
            raise ValueError("C_N is not symmetric")
        for name, arr in (("Y", Y), ("A", A), ("C_N", C_N)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def m(self) -> int:
        return self.Y.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def t(self) -> int:
        return self.Y.shape[1]

    def with_config(self, config: SolverConfig) -> "SlrProblem":
        return SlrProblem(self.Y, self.A, self.C_N, config)


@dataclass(frozen=True)
class GroundTruth:
    perm: Permutation
    X: np.ndarray
    sigma2: float
    C_X: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be non-negative")
        X = np.atleast_2d(np.asarray(self.X, dtype=float))
        X.setflags(write=False)
        object.__setattr__(self, "X", X)


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"point cloud must be m x 3, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point cloud contains non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return self.points.shape[0]


def snr_to_sigma2(snr_db: float) -> float:
    # SNR is 1 / sigma^2 in power terms
    if not np.isfinite(snr_db):
        raise ValueError("snr_db must be finite")
    return float(10.0 ** (-snr_db / 10.0))


def column_normalized_gaussian(m: int, n: int, rng: np.random.Generator) -> np.ndarray:
    A = rng.standard_normal((m, n))
    return A / np.linalg.norm(A, axis=0, keepdims=True)


def partial_shuffle(m: int, p_e: float, rng: np.random.Generator) -> Permutation:
    """Shuffle ``floor(p_e * m)`` randomly chosen rows among themselves.

    The subset is permuted uniformly, so a few selected rows can land back
    in place.
    """
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must lie in [0, 1]")
    mapping = np.arange(m)
    count = int(np.floor(p_e * m))
    if count > 1:
        rows = rng.choice(m, size=count, replace=False)
        mapping[rows] = rows[rng.permutation(count)]
    return Permutation(mapping)


def _noise_variance(snr_db, sigma2):
    # an explicit variance (0 for noiseless runs) takes precedence over the SNR
    if sigma2 is None:
        return snr_to_sigma2(snr_db)
    if not (np.isfinite(sigma2) and sigma2 >= 0):
        raise ValueError("sigma2 must be finite and non-negative")
    return float(sigma2)


def _check_dims(m, n, t):
    for name, v in (("m", m), ("n", n), ("t", t)):
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer")


def _assemble(A, X, noise, perm, sigma2, config, C_X):
    m = A.shape[0]
    # noise is drawn in the unshuffled frame; i.i.d. entries make Pi N equal in law to N,
    # and instances sharing a seed then differ only through the permutation
    Y = apply_permutation(perm, A @ X + noise)
    problem = SlrProblem(Y, A, sigma2 * np.eye(m), config)
    return problem, GroundTruth(perm, X, sigma2, C_X)


def generate_dense_problem(m, n, t, snr_db, p_e, seed, config: Optional[SolverConfig] = None,
                           sigma2: Optional[float] = None):
    """Gaussian features, column-normalized Gaussian ``A``, partial shuffle."""
    _check_dims(m, n, t)
    sigma2 = _noise_variance(snr_db, sigma2)
    if not 0.0 <= p_e <= 1.0:
        raise ValueError("p_e must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    A = column_normalized_gaussian(m, n, rng)
    X = rng.standard_normal((n, t))
    noise = np.sqrt(sigma2) * rng.standard_normal((m, t))
    perm = partial_shuffle(m, p_e, rng)
    return _assemble(A, X, noise, perm, sigma2, config or SolverConfig(), np.eye(n))


def bernoulli_gaussian(n, t, s, rng):
    mask = rng.random((n, t)) < s / n
    return np.where(mask, rng.standard_normal((n, t)), 0.0)


def generate_sparse_problem(m, n, t, snr_db, s, seed, config: Optional[SolverConfig] = None,
                            sigma2: Optional[float] = None):
    """Bernoulli-Gaussian features with ``E||x_i||_0 = s`` and a uniform permutation."""
    _check_dims(m, n, t)
    if not 0 < s <= n:
        raise ValueError(f"sparsity s must satisfy 0 < s <= n, got s={s}, n={n}")
    sigma2 = _noise_variance(snr_db, sigma2)
    rng = np.random.default_rng(seed)
    A = column_normalized_gaussian(m, n, rng)
    X = bernoulli_gaussian(n, t, s, rng)
    noise = np.sqrt(sigma2) * rng.standard_normal((m, t))
    perm = Permutation(rng.permutation(m))
    return _assemble(A, X, noise, perm, sigma2, config or SolverConfig(), (s / n) * np.eye(n))
