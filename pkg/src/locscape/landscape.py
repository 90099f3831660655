"""Landscape functions ``k -> log ||A^alpha e_k||`` and their variants.

All power iterations renormalize every step and accumulate the logarithm
of the scale factor, so no iterate ever leaves the O(1) range.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from .errors import DenseLimitError, DimensionError, NotSymmetricError, ZeroIterateError
from .geometry import GridGeometry
from .operators import LinearOperator

DENSE_LIMIT = 4096
_CHUNK = 256


@dataclass
class Landscape:
    values: np.ndarray
    alpha: float
    geometry: GridGeometry
    mode: str = "exact"
    m: int | None = None
    seed: int | None = None
    t: float | None = None
    iterates: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.geometry.n,):
            raise DimensionError(
                f"landscape has {self.values.size} values but geometry has {self.geometry.n} sites"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("landscape values must be finite")

    def __len__(self):
        return self.values.size

    def __getitem__(self, k):
        return self.values[k]

    def shifted(self, c: float) -> "Landscape":
        return Landscape(self.values + c, self.alpha, self.geometry, self.mode, self.m, self.seed, self.t)


@dataclass
class RandomSketch:
    """``n x m`` block of i.i.d. standard normals drawn from ``default_rng(seed)``."""

    columns: np.ndarray
    seed: int
    m: int

    @classmethod
    def generate(cls, n: int, m: int, seed: int) -> "RandomSketch":
        if m < 1:
            raise ValueError("sketch needs at least one column")
        rng = np.random.default_rng(seed)
        return cls(rng.standard_normal((n, m)), int(seed), int(m))


def _check_geometry(A: LinearOperator, geometry: GridGeometry | None) -> GridGeometry:
    if geometry is None:
        geometry = getattr(A, "geometry", None) or GridGeometry.chain(A.dim)
    if geometry.n != A.dim:
        raise DimensionError(f"geometry has {geometry.n} sites but operator has dimension {A.dim}")
    return geometry


def _column_power(A: LinearOperator, V: np.ndarray, alpha: int, threads: int, offset: int):
    logs = np.zeros(V.shape[1])
    for step in range(1, alpha + 1):
        W = A.apply_block(V, threads=threads)
        norms = np.sqrt(np.einsum("ij,ij->j", W, W))
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            k = int(zero[0]) + offset
            raise ZeroIterateError(f"A^{step} e_{k} vanished exactly", column=k, step=step)
        logs += np.log(norms)
        V = W / norms
    return logs, V


def landscape_exact(
    A: LinearOperator,
    alpha: int,
    geometry: GridGeometry | None = None,
    threads: int = 1,
    keep_iterates: bool = False,
) -> Landscape:
    """``values[k] = log ||A^alpha e_k||_2`` by renormalized power iteration.

    With ``keep_iterates=True`` the normalized iterates ``A^alpha e_k /
    ||A^alpha e_k||`` are kept as the columns of ``Landscape.iterates``.
    """
    alpha = int(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    geometry = _check_geometry(A, geometry)
    n = A.dim
    values = np.empty(n)
    iterates = np.empty((n, n)) if keep_iterates else None
    for start in range(0, n, _CHUNK):
        stop = min(start + _CHUNK, n)
        V = np.zeros((n, stop - start))
        V[np.arange(start, stop), np.arange(stop - start)] = 1.0
        logs, V = _column_power(A, V, alpha, threads, start)
        values[start:stop] = logs
        if keep_iterates:
            iterates[:, start:stop] = V
    return Landscape(values, alpha, geometry, "exact", iterates=iterates)


def landscape_randomized(
    A: LinearOperator,
    alpha: int,
    sketch: RandomSketch | np.ndarray,
    geometry: GridGeometry | None = None,
    threads: int = 1,
) -> Landscape:
    """``values[k] = log ||e_k^T A^alpha R||_2`` for symmetric ``A``.

    Uses ``alpha`` block applications to ``R``; after each one the block is
    divided by its largest column norm.
    """
    alpha = int(alpha)
    if alpha < 0:
        raise ValueError("alpha must be nonnegative")
    if not A.symmetric:
        raise NotSymmetricError("the randomized landscape is only defined here for symmetric operators")
    geometry = _check_geometry(A, geometry)
    if isinstance(sketch, RandomSketch):
        R, seed, m = sketch.columns, sketch.seed, sketch.m
    else:
        R = np.asarray(sketch, dtype=float)
        seed, m = None, R.shape[1] if R.ndim == 2 else 0
    if R.ndim != 2 or R.shape[0] != A.dim:
        raise DimensionError(f"sketch must have {A.dim} rows, got shape {R.shape}")
    V = np.array(R, dtype=float)
    log_scale = 0.0
    for step in range(1, alpha + 1):
        W = A.apply_block(V, threads=threads)
        scale = float(np.sqrt(np.einsum("ij,ij->j", W, W)).max())
        if scale == 0.0:
            raise ZeroIterateError(f"sketch block collapsed to zero at step {step}", step=step)
        log_scale += np.log(scale)
        V = W / scale
    rows = np.sqrt(np.einsum("ij,ij->i", V, V))
    zero = np.flatnonzero(rows == 0.0)
    if zero.size:
        raise ZeroIterateError(f"row {int(zero[0])} of A^alpha R vanished", column=int(zero[0]))
    return Landscape(log_scale + np.log(rows), alpha, geometry, "randomized", m=m, seed=seed)


def landscape_semigroup(
    A: LinearOperator,
    t: float,
    geometry: GridGeometry | None = None,
    dense_limit: int = DENSE_LIMIT,
    spectrum=None,
) -> Landscape:
    """``values[k] = log ||exp(-tA) e_k||_2`` from a full eigendecomposition."""
    from .verify import eig_symmetric

    if t < 0:
        raise ValueError("t must be nonnegative")
    if not A.symmetric:
        raise NotSymmetricError("semigroup landscape requires a symmetric operator")
    if A.dim > dense_limit:
        raise DenseLimitError(f"dimension {A.dim} exceeds dense limit {dense_limit}")
    geometry = _check_geometry(A, geometry)
    if t == 0:
        return Landscape(np.zeros(A.dim), 0.0, geometry, "semigroup", t=0.0)
    S = spectrum if spectrum is not None else eig_symmetric(A, dense_limit=dense_limit)
    # ||e^{-tA} e_k||^2 = sum_i exp(-2 t lam_i) phi_i(k)^2
    logs = logsumexp(-2.0 * t * S.eigenvalues[None, :], b=S.eigenvectors**2, axis=1)
    return Landscape(0.5 * logs, 0.0, geometry, "semigroup", t=float(t))
