"""Matrix-free square linear operators.

Every operator exposes ``apply`` (one vector) and ``apply_block`` (an
``n x m`` block).  Serial block application is bitwise identical to applying
each column on its own; with ``threads > 1`` columns are split across a
thread pool and agree with the serial result to rounding.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import (
    DimensionError,
    ImaginaryResidueError,
    NonFiniteError,
    NormFallbackWarning,
    NotSymmetricError,
)
from .geometry import GridGeometry

IMAG_TOL = 1e-10


class LinearOperator:
    """Base class; subclasses implement ``_matmat`` on an ``(n, m)`` block."""

    kind = "abstract"
    # True when `_matmat` performs the same floating point operations on each
    # column as it would on that column alone.
    columnwise_exact = False

    def __init__(self, dim: int, symmetric: bool):
        if dim < 1:
            raise DimensionError("operator dimension must be positive")
        self.dim = int(dim)
        self.symmetric = bool(symmetric)

    @property
    def shape(self):
        return (self.dim, self.dim)

    def _matmat(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _matvec(self, v: np.ndarray) -> np.ndarray:
        return self._matmat(v[:, None])[:, 0]

    def apply(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        if v.ndim != 1 or v.shape[0] != self.dim:
            raise DimensionError(f"expected a vector of length {self.dim}, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise NonFiniteError("input vector has non-finite entries")
        return self._matvec(np.ascontiguousarray(v))

    def apply_block(self, B, threads: int = 1) -> np.ndarray:
        B = np.asarray(B, dtype=float)
        if B.ndim != 2 or B.shape[0] != self.dim:
            raise DimensionError(f"expected a block with {self.dim} rows, got shape {B.shape}")
        if not np.all(np.isfinite(B)):
            raise NonFiniteError("input block has non-finite entries")
        m = B.shape[1]
        if threads <= 1 or m < 2:
            if self.columnwise_exact:
                return self._matmat(B)
            out = np.empty_like(B)
            for j in range(m):
                out[:, j] = self._matvec(np.ascontiguousarray(B[:, j]))
            return out
        chunks = np.array_split(np.arange(m), min(threads, m))
        out = np.empty_like(B)

        def work(cols):
            out[:, cols] = self._matmat(np.ascontiguousarray(B[:, cols]))

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, chunks))
        return out

    def to_dense(self) -> np.ndarray:
        return self.apply_block(np.eye(self.dim))

    def gershgorin_bound(self) -> float:
        """Largest absolute row sum, an upper bound on every |eigenvalue|."""
        return float(np.abs(self.to_dense()).sum(axis=1).max())

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, symmetric={self.symmetric})"


class DenseOperator(LinearOperator):
    kind = "dense"

    def __init__(self, matrix, symmetric: bool | None = None):
        matrix = np.array(matrix, dtype=float)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise DimensionError(f"dense operator needs a square matrix, got {matrix.shape}")
        if not np.all(np.isfinite(matrix)):
            raise NonFiniteError("matrix has non-finite entries")
        exact_sym = bool(np.array_equal(matrix, matrix.T))
        if symmetric is None:
            symmetric = exact_sym
        elif symmetric and not exact_sym:
            raise NotSymmetricError("matrix flagged symmetric but A[i, j] != A[j, i]")
        super().__init__(matrix.shape[0], symmetric)
        matrix.setflags(write=False)
        self.matrix = matrix

    def _matvec(self, v):
        return self.matrix @ v

    def _matmat(self, X):
        return self.matrix @ X

    def to_dense(self):
        return self.matrix.copy()

    def gershgorin_bound(self):
        return float(np.abs(self.matrix).sum(axis=1).max())


class BandedOperator(LinearOperator):
    """Band matrix stored as ``2b + 1`` diagonals.

    ``diagonals[b + o, i]`` holds ``A[i, i + o]`` for offset ``o`` in
    ``[-b, b]``; slots that fall outside the matrix are ignored and kept zero.
    """

    kind = "banded"
    columnwise_exact = True

    def __init__(self, diagonals, symmetric: bool | None = None):
        diagonals = np.array(diagonals, dtype=float)
        if diagonals.ndim != 2 or diagonals.shape[0] % 2 != 1:
            raise DimensionError("diagonals must have shape (2b+1, n)")
        if not np.all(np.isfinite(diagonals)):
            raise NonFiniteError("band has non-finite entries")
        b = diagonals.shape[0] // 2
        n = diagonals.shape[1]
        if b >= n and n > 0:
            raise DimensionError(f"bandwidth {b} must be smaller than n = {n}")
        for o in range(-b, b + 1):
            row = diagonals[b + o]
            if o > 0:
                row[n - o:] = 0.0
            elif o < 0:
                row[:-o] = 0.0
        self.bandwidth = b
        exact_sym = all(
            np.array_equal(diagonals[b + o, : n - o], diagonals[b - o, o:]) for o in range(1, b + 1)
        )
        if symmetric is None:
            symmetric = exact_sym
        elif symmetric and not exact_sym:
            raise NotSymmetricError("band flagged symmetric but A[i, j] != A[j, i]")
        super().__init__(n, symmetric)
        diagonals.setflags(write=False)
        self.diagonals = diagonals

    @classmethod
    def from_dense(cls, matrix, bandwidth: int | None = None, symmetric: bool | None = None):
        matrix = np.asarray(matrix, dtype=float)
        n = matrix.shape[0]
        if bandwidth is None:
            i, j = np.nonzero(matrix)
            bandwidth = int(np.abs(i - j).max()) if i.size else 0
        diags = np.zeros((2 * bandwidth + 1, n))
        for o in range(-bandwidth, bandwidth + 1):
            d = np.diagonal(matrix, o)
            if o >= 0:
                diags[bandwidth + o, : n - o] = d
            else:
                diags[bandwidth + o, -o:] = d
        out = cls(diags, symmetric=symmetric)
        if not np.array_equal(out.to_dense(), matrix):
            raise DimensionError(f"matrix has entries outside bandwidth {bandwidth}")
        return out

    def _matmat(self, X):
        n, b = self.dim, self.bandwidth
        out = self.diagonals[b][:, None] * X
        for o in range(1, b + 1):
            out[: n - o] += self.diagonals[b + o, : n - o, None] * X[o:]
            out[o:] += self.diagonals[b - o, o:, None] * X[: n - o]
        return out

    def to_dense(self):
        n, b = self.dim, self.bandwidth
        A = np.zeros((n, n))
        for o in range(-b, b + 1):
            if o >= 0:
                A[np.arange(n - o), np.arange(o, n)] = self.diagonals[b + o, : n - o]
            else:
                A[np.arange(-o, n), np.arange(n + o)] = self.diagonals[b + o, -o:]
        return A

    def gershgorin_bound(self):
        return float(np.abs(self.diagonals).sum(axis=0).max())


def fourier_modes(side: int) -> np.ndarray:
    """Integer modes in ``[-side/2, side/2)`` in FFT storage order."""
    return np.fft.fftfreq(side, 1.0 / side)


class SpectralComposite(LinearOperator):
    """``F^{-1} diag(multiplier) F + diag(potential)`` on a periodic square grid.

    ``multiplier[j1, j2]`` scales the Fourier mode stored at FFT index
    ``(j1, j2)``; it must be real, nonnegative and even under ``k -> -k``.
    """

    kind = "spectral"
    columnwise_exact = True

    def __init__(self, multiplier, potential, exponent: float | None = None):
        multiplier = np.array(multiplier, dtype=float)
        potential = np.array(potential, dtype=float)
        if multiplier.ndim != 2 or multiplier.shape[0] != multiplier.shape[1]:
            raise DimensionError("multiplier must be a square grid array")
        if potential.shape != multiplier.shape:
            raise DimensionError(f"potential shape {potential.shape} != multiplier shape {multiplier.shape}")
        if not (np.all(np.isfinite(multiplier)) and np.all(np.isfinite(potential))):
            raise NonFiniteError("multiplier and potential must be finite")
        if np.any(multiplier < 0):
            raise ValueError("multiplier values must be nonnegative")
        side = multiplier.shape[0]
        self.geometry = GridGeometry.torus(side)
        self.side = side
        self.exponent = exponent
        multiplier.setflags(write=False)
        potential.setflags(write=False)
        self.multiplier = multiplier
        self.potential = potential
        super().__init__(side * side, True)

    @classmethod
    def fractional_laplacian(cls, potential, exponent: float = 1.0):
        """``(-Delta)^exponent + V`` on ``[0, 1]^2`` with periodic boundary."""
        potential = np.asarray(potential, dtype=float)
        if potential.ndim != 2 or potential.shape[0] != potential.shape[1]:
            raise DimensionError(f"potential grid must be square, got shape {potential.shape}")
        if exponent <= 0:
            raise ValueError("exponent must be positive")
        k = fourier_modes(potential.shape[0])
        symbol = (2 * np.pi) ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)
        return cls(symbol**exponent, potential, exponent=float(exponent))

    def _matmat(self, X):
        s, m = self.side, X.shape[1]
        grids = X.T.reshape(m, s, s)
        spec = np.fft.ifft2(np.fft.fft2(grids) * self.multiplier)
        residue = np.abs(spec.imag).max() if spec.size else 0.0
        if residue > IMAG_TOL:
            raise ImaginaryResidueError(
                f"imaginary residue {residue:.3e} after inverse transform; multiplier is not even in k"
            )
        out = spec.real + self.potential * grids
        return np.ascontiguousarray(out.reshape(m, s * s).T)

    def gershgorin_bound(self):
        # ||F^-1 D F||_2 = max multiplier, so this bounds the spectrum as well
        return float(self.multiplier.max() + np.abs(self.potential).max())

    def to_dict(self) -> dict:
        if self.exponent is None:
            raise ValueError("only operators built from an exponent can be serialized")
        return {
            "grid_side": self.side,
            "exponent": self.exponent,
            "potential": self.potential.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralComposite":
        side = int(d["grid_side"])
        pot = np.asarray(d["potential"], dtype=float)
        if pot.size != side * side:
            raise DimensionError(f"potential has {pot.size} values, expected {side * side}")
        return cls.fractional_laplacian(pot.reshape(side, side), float(d["exponent"]))


class FlippedOperator(LinearOperator):
    """``v - A v / norm``; eigenvalues map ``lam -> 1 - lam / norm``."""

    kind = "flipped"

    def __init__(self, inner: LinearOperator, norm: float):
        if not norm > 0:
            raise ValueError("flip norm must be positive")
        super().__init__(inner.dim, inner.symmetric)
        self.inner = inner
        self.norm = float(norm)
        self.columnwise_exact = inner.columnwise_exact
        self.geometry = getattr(inner, "geometry", None)

    def _matvec(self, v):
        return v - self.inner._matvec(v) / self.norm

    def _matmat(self, X):
        return X - self.inner._matmat(X) / self.norm

    def gershgorin_bound(self):
        return 1.0 + self.inner.gershgorin_bound() / self.norm


def estimate_norm(A: LinearOperator, tol: float = 1e-6, max_iter: int = 1000, seed: int = 0) -> float:
    """Largest |eigenvalue| of symmetric ``A`` by power iteration.

    Iterates ``v <- A v / ||A v||`` from a seeded normal start; ``||A v||``
    increases monotonically to ``max |lambda|``.  Stops once the relative
    change, scaled by the observed contraction rate, falls below ``tol``.
    Falls back to the Gershgorin bound (with a ``NormFallbackWarning``) when
    ``max_iter`` is exhausted.
    """
    if not A.symmetric:
        raise NotSymmetricError("norm estimation requires a symmetric operator")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(A.dim)
    v /= np.linalg.norm(v)
    rho = 0.0
    prev_delta = None
    for _ in range(max_iter):
        w = A.apply(v)
        new = float(np.linalg.norm(w))
        if new == 0.0:
            return 0.0
        delta = abs(new - rho)
        rho = new
        v = w / new
        if prev_delta is not None and prev_delta > 0:
            rate = min(delta / prev_delta, 0.999)
            # geometric tail: remaining error is about delta * rate / (1 - rate)
            if delta * max(rate, 1e-3) / (1.0 - rate) <= 1e-2 * tol * rho:
                return rho
        elif delta == 0.0:
            return rho
        prev_delta = delta
    warnings.warn(
        f"power iteration did not converge in {max_iter} steps; using Gershgorin bound",
        NormFallbackWarning,
        stacklevel=2,
    )
    return max(A.gershgorin_bound(), rho)


def flip_spectrum(A: LinearOperator, norm: float | None = None) -> FlippedOperator:
    """Map low-lying eigenvalues of a positive semidefinite ``A`` to the spectral edge."""
    if not A.symmetric:
        raise NotSymmetricError("spectral flip requires a symmetric operator")
    if norm is None:
        norm = estimate_norm(A)
    if not norm > 0:
        raise ValueError("flip norm must be positive")
    return FlippedOperator(A, norm)


def identity(n: int) -> DenseOperator:
    return DenseOperator(np.eye(n), symmetric=True)


def diagonal(d) -> BandedOperator:
    d = np.asarray(d, dtype=float)
    return BandedOperator(d[None, :], symmetric=True)
