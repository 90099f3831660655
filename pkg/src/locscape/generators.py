"""Seeded constructors for the test operators.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so a
given seed reproduces its output bitwise.
"""

from __future__ import annotations

import warnings
from dataclasses import asdict, dataclass

import numpy as np

from .errors import DegeneratePotentialWarning, DimensionError
from .operators import BandedOperator, DenseOperator, SpectralComposite


def random_band_matrix(n: int, bandwidth: int, seed: int) -> BandedOperator:
    """``A = B + B^T`` with ``B`` uniform on ``[-1, 1]`` inside the band.

    Entries of ``B`` are drawn diagonal by diagonal, offsets ``-b..b`` in
    increasing order.
    """
    if bandwidth < 0:
        raise ValueError("bandwidth must be nonnegative")
    if bandwidth >= n:
        raise DimensionError(f"bandwidth {bandwidth} must be smaller than n = {n}")
    if n < 2 * bandwidth + 1:
        raise DimensionError(f"n must be at least 2 * bandwidth + 1 = {2 * bandwidth + 1}")
    rng = np.random.default_rng(seed)
    b = bandwidth
    B = np.zeros((2 * b + 1, n))
    for o in range(-b, b + 1):
        vals = rng.uniform(-1.0, 1.0, n - abs(o))
        if o >= 0:
            B[b + o, : n - o] = vals
        else:
            B[b + o, -o:] = vals
    # (B^T)[i, i+o] = B[i+o, i], stored at slot b - o of row i + o
    A = B.copy()
    for o in range(-b, b + 1):
        if o >= 0:
            A[b + o, : n - o] += B[b - o, o:]
        else:
            A[b + o, -o:] += B[b - o, : n + o]
    return BandedOperator(A, symmetric=True)


@dataclass
class PotentialSpec:
    """Band-limited random periodic potential.

    Default values are our choice; the only target is visibly localized
    low-lying states of ``-Delta + V`` on a 48 x 48 grid.
    """

    grid_side: int = 48
    cutoff: int = 8
    decay_sigma: float = 3.0
    amplitude: float = 1e4
    seed: int = 0


def random_potential(spec: PotentialSpec) -> np.ndarray:
    """Smooth random field on the ``s x s`` grid, rescaled to ``[0, amplitude]``.

    ``V(x) = Re sum_{|k|_inf <= K} c_k exp(2 pi i k.x)`` with complex normal
    ``c_k`` of standard deviation ``exp(-|k|^2 / (2 sigma^2))`` and
    ``c_{-k} = conj(c_k)``.
    """
    s, K = spec.grid_side, spec.cutoff
    if K < 0:
        raise ValueError("cutoff must be nonnegative")
    if 2 * K >= s:
        raise ValueError(f"cutoff {K} aliases on a grid of side {s}; need K < s/2")
    rng = np.random.default_rng(spec.seed)
    ks = np.arange(-K, K + 1)
    sd = np.exp(-(ks[:, None] ** 2 + ks[None, :] ** 2) / (2.0 * spec.decay_sigma**2))
    z = (rng.standard_normal(sd.shape) + 1j * rng.standard_normal(sd.shape)) * (sd / np.sqrt(2.0))
    # index (K + a, K + b) holds mode (a, b); reversing both axes maps k -> -k
    coef = (z + np.conj(z[::-1, ::-1])) / np.sqrt(2.0)
    x = np.arange(s) / s
    E = np.exp(2j * np.pi * np.outer(x, ks))
    field = E @ coef @ E.T
    residue = np.abs(field.imag).max()
    if residue > 1e-12 * max(1.0, np.abs(field.real).max()):
        raise ArithmeticError(f"synthesized potential has imaginary part {residue:.3e}")
    V = field.real
    lo, hi = V.min(), V.max()
    if K == 0 or hi - lo <= 1e-12 * max(1.0, abs(hi)):
        warnings.warn("potential is constant; returning zeros", DegeneratePotentialWarning, stacklevel=2)
        return np.zeros((s, s))
    return (V - lo) * (spec.amplitude / (hi - lo))


def schrodinger_operator(V, s_exponent: float = 1.0) -> SpectralComposite:
    """Pseudo-spectral ``(-Delta)^s + V`` on the periodic unit square."""
    return SpectralComposite.fractional_laplacian(V, s_exponent)


def _orthonormal_completion(first: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Orthonormal basis whose first column is ``first``; the rest is random."""
    b = first.size
    M = rng.standard_normal((b, b))
    M[:, 0] = first
    Q, R = np.linalg.qr(M)
    Q *= np.sign(np.diag(R))
    return Q


@dataclass
class TheoremSpec:
    """Block-diagonal test matrix with one prescribed edge eigenvalue per block.

    ``blocks`` is a list of ``(size, edge_eigenvalue)``.  The edge eigenvector
    of a block is a spike at the block centre when ``decay`` is None, or
    ``exp(-decay |j - centre|)`` across the block otherwise.  The remaining
    eigenvalues of each block are uniform on ``[-bulk, bulk]`` with random
    eigenvectors.  ``coupling`` scales symmetric Gaussian noise added to
    the full matrix.
    """

    blocks: list
    coupling: float = 0.0
    seed: int = 0
    bulk: float = 1.0
    decay: float | None = None
    allow_degenerate: bool = False

    def to_dict(self) -> dict:
        d = asdict(self)
        d["blocks"] = [[int(s), float(e)] for s, e in self.blocks]
        return d


def theorem_test_matrix(spec: TheoremSpec) -> DenseOperator:
    if spec.coupling < 0:
        raise ValueError("coupling must be nonnegative")
    if not spec.blocks:
        raise ValueError("need at least one block")
    edges = [abs(float(e)) for _, e in spec.blocks]
    if spec.coupling == 0 and not spec.allow_degenerate and len(set(edges)) < len(edges):
        raise ValueError("duplicate edge eigenvalues; pass allow_degenerate=True to request a degenerate gap")
    rng = np.random.default_rng(spec.seed)
    n = sum(int(size) for size, _ in spec.blocks)
    A = np.zeros((n, n))
    start = 0
    for size, edge in spec.blocks:
        size = int(size)
        if size < 1:
            raise ValueError("block sizes must be positive")
        centre = size // 2
        bulk = rng.uniform(-spec.bulk, spec.bulk, size - 1)
        if spec.decay is None:
            # exact spike: the bulk lives on the other sites of the block
            block = np.zeros((size, size))
            block[centre, centre] = float(edge)
            rest = np.array([j for j in range(size) if j != centre], dtype=int)
            if rest.size:
                Qr, Rr = np.linalg.qr(rng.standard_normal((rest.size, rest.size)))
                Qr *= np.sign(np.diag(Rr))
                block[np.ix_(rest, rest)] = (Qr * bulk) @ Qr.T
        else:
            first = np.exp(-spec.decay * np.abs(np.arange(size) - centre))
            Q = _orthonormal_completion(first / np.linalg.norm(first), rng)
            block = (Q * np.concatenate(([float(edge)], bulk))) @ Q.T
        block = 0.5 * (block + block.T)
        A[start:start + size, start:start + size] = block
        start += size
    if spec.coupling > 0:
        G = rng.standard_normal((n, n))
        A += spec.coupling * (G + G.T) / np.sqrt(2.0)
    return DenseOperator(A, symmetric=True)
