"""Projections of a Dirac mass onto low frequencies of the circle.

``project_dirac(n, 0, y)`` is the Dirichlet kernel centred at ``y``;
``t > 0`` damps mode ``k`` by ``exp(-k^2 t)``, a truncated Jacobi theta
function with much faster decay away from ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ZeroIterateError
from .operators import LinearOperator


@dataclass
class TorusProjection:
    n: int
    t: float
    y: float
    x: np.ndarray
    samples: np.ndarray

    @property
    def coefficients(self) -> np.ndarray:
        """Weights of modes ``-n..n``."""
        k = np.arange(-self.n, self.n + 1)
        return np.exp(-(k**2) * self.t)


def _offsets(x: np.ndarray, y: float) -> np.ndarray:
    """Signed offset ``x - y`` wrapped into ``[-pi, pi)``."""
    return (x - y + np.pi) % (2 * np.pi) - np.pi


def project_dirac(n: int, t: float, y: float = 0.0, M: int | None = None) -> TorusProjection:
    """``sum_{|k| <= n} exp(-k^2 t) cos(k (x_j - y))`` on ``x_j = 2 pi j / M``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if t < 0:
        raise ValueError("t must be nonnegative")
    if M is None:
        M = 16 * (2 * n + 1)
    if M <= 2 * n + 1:
        raise ValueError(f"M = {M} aliases the top mode; need M > {2 * n + 1}")
    x = 2 * np.pi * np.arange(M) / M
    u = _offsets(x, y)
    k = np.arange(1, n + 1)
    weights = np.exp(-(k**2) * t)
    samples = 1.0 + 2.0 * (np.cos(np.outer(u, k)) @ weights) if n else np.ones(M)
    return TorusProjection(n, float(t), float(y), x, samples)


def dirichlet_kernel(n: int, u) -> np.ndarray:
    """``sin((n + 1/2) u) / sin(u / 2)``, equal to ``2n + 1`` at ``u = 0``."""
    u = np.asarray(u, dtype=float)
    den = np.sin(u / 2)
    out = np.full(u.shape, 2.0 * n + 1)
    nz = np.abs(den) > 1e-300
    out[nz] = np.sin((n + 0.5) * u[nz]) / den[nz]
    return out


def theta_truncation_error(n: int, t: float) -> float:
    """``2 sum_{k > n} exp(-k^2 t)``, summed until terms drop below 1e-300.

    Bounds the sup-norm gap between the order-``n`` projection and the full
    theta function.
    """
    if t <= 0:
        raise ValueError("t must be positive; the tail diverges at t = 0")
    total = 0.0
    k = n + 1
    block = 4096
    while True:
        ks = np.arange(k, k + block, dtype=float)
        terms = np.exp(-(ks**2) * t)
        total += float(terms.sum())
        if terms[-1] < 1e-300:
            break
        k += block
    return 2.0 * total


def decay_metrics(P: TorusProjection, radius: float) -> dict:
    """Share of squared mass within arc ``radius`` of ``y`` and the sup outside it."""
    if not 0 < radius < np.pi:
        raise ValueError("radius must lie in (0, pi)")
    inside = np.abs(_offsets(P.x, P.y)) <= radius
    sq = P.samples**2
    core = float(sq[inside].sum() / sq.sum())
    tail = float(np.abs(P.samples[~inside]).max()) if np.any(~inside) else 0.0
    return {"core_mass": core, "tail_sup": tail}


def tradeoff_curve(n: int, ts, radius: float, y: float = 0.0, M: int | None = None) -> list[dict]:
    """``decay_metrics`` across diffusion times, for inspecting the localization/decay tradeoff."""
    rows = []
    for t in ts:
        m = decay_metrics(project_dirac(n, t, y, M), radius)
        rows.append({"t": float(t), **m})
    return rows


def dirac_iterate(A: LinearOperator, k: int, alpha: int) -> np.ndarray:
    """Normalized ``A^alpha e_k``: the matrix analogue of diffusing a point mass.

    Same iteration as one column of ``landscape_exact(..., keep_iterates=True)``.
    """
    v = np.zeros(A.dim)
    v[k] = 1.0
    for step in range(1, int(alpha) + 1):
        v = A.apply(v)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            raise ZeroIterateError(f"A^{step} e_{k} vanished exactly", column=k, step=step)
        v /= nrm
    return v
