"""Dense eigensolver oracle and checkers for the localization guarantees.

Everything here works from a full eigendecomposition, so it is meant for
verification at desk scale (``n`` up to a few thousand).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .detect import Region, superlevel_regions
from .errors import ConvergenceError, DenseLimitError, NotSymmetricError
from .geometry import GridGeometry
from .landscape import DENSE_LIMIT, Landscape, landscape_exact
from .operators import LinearOperator

BETA_CAP = 700.0
JACOBI_MAX_DIM = 128
MAX_SWEEPS = 30


@dataclass
class Spectrum:
    """Eigenpairs sorted by descending ``|lambda|`` (columns of ``eigenvectors``)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int | None = None

    @property
    def n(self) -> int:
        return self.eigenvalues.size


def _jacobi(A: np.ndarray, max_sweeps: int = MAX_SWEEPS):
    """Cyclic Jacobi with round-robin ordering.

    Each round rotates ``n/2`` disjoint index pairs at once; ``n - 1`` rounds
    visit every pair once per sweep.  Pairs whose off-diagonal entry is
    negligible are left untouched, so exact zeros survive.
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    V = np.eye(n)
    thresh = 1e-12 * np.linalg.norm(A)
    if n == 1:
        return A.diagonal().copy(), V, 0
    size = n + (n % 2)
    order = np.arange(size)
    half = size // 2
    skip = thresh / n
    for sweep in range(max_sweeps + 1):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= thresh:
            return A.diagonal().copy(), V, sweep
        if sweep == max_sweeps:
            break
        for _ in range(size - 1):
            p = order[:half]
            q = order[size - 1:half - 1:-1]
            valid = (p < n) & (q < n)
            p, q = p[valid], q[valid]
            lo, hi = np.minimum(p, q), np.maximum(p, q)
            apq = A[lo, hi]
            active = np.abs(apq) > skip
            if np.any(active):
                lo, hi, apq = lo[active], hi[active], apq[active]
                theta = (A[hi, hi] - A[lo, lo]) / (2.0 * apq)
                t = np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t[theta == 0] = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                Ap, Aq = A[lo, :], A[hi, :]
                A[lo, :] = c[:, None] * Ap - s[:, None] * Aq
                A[hi, :] = s[:, None] * Ap + c[:, None] * Aq
                Ap, Aq = A[:, lo], A[:, hi]
                A[:, lo] = c * Ap - s * Aq
                A[:, hi] = s * Ap + c * Aq
                A[lo, hi] = 0.0
                A[hi, lo] = 0.0
                Vp, Vq = V[:, lo], V[:, hi]
                V[:, lo] = c * Vp - s * Vq
                V[:, hi] = s * Vp + c * Vq
            order[1:] = np.roll(order[1:], 1)
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps (off-norm {off:.3e})", residual=off)


def _sort_and_sign(lam: np.ndarray, vecs: np.ndarray):
    order = np.lexsort((-lam, -np.abs(lam)))
    lam = lam[order]
    vecs = vecs[:, order].copy()
    mags = np.abs(vecs)
    for i in range(vecs.shape[1]):
        # first entry within rounding of the largest magnitude decides the sign
        j = int(np.argmax(mags[:, i] >= mags[:, i].max() * (1 - 1e-12)))
        if vecs[j, i] < 0:
            vecs[:, i] = -vecs[:, i]
    return lam, vecs


def eig_symmetric(
    A: LinearOperator | np.ndarray,
    dense_limit: int = DENSE_LIMIT,
    method: str = "auto",
) -> Spectrum:
    """Full eigendecomposition of a symmetric operator.

    ``method="jacobi"`` runs cyclic Jacobi rotations to an off-diagonal norm
    of ``1e-12 ||A||_F``; ``"lapack"`` calls ``numpy.linalg.eigh``; ``"auto"``
    uses Jacobi up to ``JACOBI_MAX_DIM`` and LAPACK above.  Eigenvectors are
    signed so that their largest-magnitude entry is positive.
    """
    if isinstance(A, LinearOperator):
        if not A.symmetric:
            raise NotSymmetricError("eig_symmetric requires a symmetric operator")
        if A.dim > dense_limit:
            raise DenseLimitError(f"dimension {A.dim} exceeds dense limit {dense_limit}")
        M = A.to_dense()
        # matrix-free assembly may leave rounding-level asymmetry
        M = 0.5 * (M + M.T)
    else:
        M = np.asarray(A, dtype=float)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError("expected a square matrix")
        if M.shape[0] > dense_limit:
            raise DenseLimitError(f"dimension {M.shape[0]} exceeds dense limit {dense_limit}")
        scale = max(np.abs(M).max(), 1.0)
        if np.abs(M - M.T).max() > 1e-12 * scale:
            raise NotSymmetricError("eig_symmetric requires a symmetric matrix")
        M = 0.5 * (M + M.T)
    n = M.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "lapack"
    if method == "jacobi":
        lam, vecs, sweeps = _jacobi(M)
        # renormalize against accumulated rotation rounding
        vecs /= np.linalg.norm(vecs, axis=0)
    elif method == "lapack":
        lam, vecs = np.linalg.eigh(M)
        sweeps = None
    else:
        raise ValueError(f"unknown method {method!r}")
    lam, vecs = _sort_and_sign(lam, vecs)
    return Spectrum(lam, vecs, sweeps)


@dataclass
class LocalizationProfile:
    half_mass_regions: list
    centers: list
    J_max: int
    beta: float
    k: int

    def union(self) -> np.ndarray:
        return np.unique(np.concatenate(self.half_mass_regions))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "J_max": self.J_max,
            "beta": self.beta,
            "centers": [int(c) for c in self.centers],
            "half_mass_regions": [[int(i) for i in J] for J in self.half_mass_regions],
        }


def fit_profile(S: Spectrum, k: int, geometry: GridGeometry, beta_cap: float = BETA_CAP) -> LocalizationProfile:
    """Half-mass balls around each eigenvector's peak and the tightest decay rate.

    ``J_i`` is the smallest geometry ball centred at ``argmax |phi_i|`` that
    carries half the squared mass.  ``beta`` is the largest exponent with
    ``|phi_i(m)| <= exp(-beta dist(m, J_i))`` for all ``m`` and ``i <= k``,
    clamped to ``[0, beta_cap]``.
    """
    n = S.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n = {n}")
    if geometry.n != n:
        raise ValueError("geometry size does not match the spectrum")
    regions, centers = [], []
    beta = np.inf
    for i in range(k):
        phi = S.eigenvectors[:, i]
        mag = np.abs(phi)
        c = int(np.argmax(mag >= mag.max() * (1 - 1e-12)))
        d = geometry.distances_from(c)
        mass = np.cumsum(np.bincount(d, weights=phi * phi))
        r = int(np.argmax(mass >= 0.5 - 1e-12))
        J = np.flatnonzero(d <= r)
        regions.append(J)
        centers.append(c)
        dist = geometry.distance_to_set(J)
        outside = (dist > 0) & (mag > 0)
        if np.any(outside):
            rates = -np.log(mag[outside]) / dist[outside]
            beta = min(beta, float(rates.min()))
    beta = float(np.clip(beta, 0.0, beta_cap))
    J_max = max(len(J) for J in regions)
    return LocalizationProfile(regions, centers, J_max, beta, k)


@dataclass
class LocalizationReport:
    profile: LocalizationProfile
    alpha: int
    k: int
    n: int
    eigenvalues: np.ndarray
    gap_ratio: float
    alpha_condition_met: bool
    threshold_y: float
    min_peak_over_regions: float
    max_violation_distance: int
    theorem_bound_distance: float
    conclusion1_holds: bool
    conclusion2_holds: bool
    regions: list = field(default_factory=list)
    geometry: GridGeometry | None = None

    @property
    def hypotheses_met(self) -> bool:
        return self.alpha_condition_met and self.profile.beta > 0

    def to_dict(self) -> dict:
        bound = self.theorem_bound_distance
        return {
            "n": self.n,
            "k": self.k,
            "alpha": self.alpha,
            "edge_eigenvalues": [float(x) for x in self.eigenvalues],
            "profile": self.profile.to_dict(),
            "gap_ratio": self.gap_ratio,
            "alpha_condition_met": self.alpha_condition_met,
            "hypotheses_met": self.hypotheses_met,
            "threshold_y": self.threshold_y,
            "min_peak_over_regions": self.min_peak_over_regions,
            "max_violation_distance": self.max_violation_distance,
            "theorem_bound_distance": bound if np.isfinite(bound) else None,
            "conclusion1_holds": self.conclusion1_holds,
            "conclusion2_holds": self.conclusion2_holds,
            "regions": [r.to_dict(self.geometry) for r in self.regions],
        }


def check_theorem(
    A: LinearOperator,
    k: int,
    alpha: int,
    geometry: GridGeometry | None = None,
    spectrum: Spectrum | None = None,
    landscape: Landscape | None = None,
    tol: float = 1e-9,
) -> LocalizationReport:
    """Evaluate the gap hypothesis and both localization conclusions.

    The conclusions are computed whether or not the hypothesis holds; only
    when ``hypotheses_met`` are they guaranteed.  ``tol`` is an absolute
    slack on log-scale comparisons.
    """
    if not A.symmetric:
        raise NotSymmetricError("check_theorem requires a symmetric operator")
    if geometry is None:
        geometry = getattr(A, "geometry", None) or GridGeometry.chain(A.dim)
    S = spectrum if spectrum is not None else eig_symmetric(A)
    n = S.n
    if not 1 <= k < n:
        raise ValueError(f"k must satisfy 1 <= k < n = {n}")
    lam = np.abs(S.eigenvalues)
    if lam[k] == 0.0:
        raise ZeroDivisionError(f"|lambda_{k + 1}| = 0, gap ratio undefined")
    P = fit_profile(S, k, geometry)
    L = landscape if landscape is not None else landscape_exact(A, alpha, geometry)

    log_gap = np.log(lam[k - 1]) - np.log(lam[k])
    condition = alpha * log_gap >= np.log(16.0) + 0.5 * np.log(P.J_max * n)
    y = alpha * np.log(lam[k - 1]) - np.log(2.0 * np.sqrt(P.J_max))
    min_peak = min(float(L.values[J].max()) for J in P.half_mass_regions)

    dist = geometry.distance_to_set(P.union())
    high = L.values >= y - 1.0 - tol
    worst = int(dist[high].max()) if np.any(high) else 0
    if P.beta > 0:
        bound = (np.log(16.0 * np.sqrt(k) * np.sqrt(P.J_max)) + alpha * (np.log(lam[0]) - np.log(lam[k - 1]))) / P.beta
    else:
        bound = np.inf

    return LocalizationReport(
        profile=P,
        alpha=int(alpha),
        k=int(k),
        n=n,
        eigenvalues=S.eigenvalues[: k + 1].copy(),
        gap_ratio=float(lam[k - 1] / lam[k]),
        alpha_condition_met=bool(condition),
        threshold_y=float(y),
        min_peak_over_regions=min_peak,
        max_violation_distance=worst,
        theorem_bound_distance=float(bound),
        conclusion1_holds=bool(min_peak >= y - tol),
        conclusion2_holds=bool(worst <= bound + 1e-9),
        regions=superlevel_regions(L, y),
        geometry=geometry,
    )


@dataclass
class InequalityResult:
    name: str
    passed: bool
    worst_margin: float
    details: dict = field(default_factory=dict)


def check_proof_inequalities(
    S: Spectrum, P: LocalizationProfile, alpha: int, L: Landscape, tol: float = 1e-9
) -> list[InequalityResult]:
    """Check the three pointwise estimates behind the localization guarantee.

    (a) some ``x`` in ``J_i`` has ``|phi_i(x)| >= 1 / (2 sqrt(J))``;
    (b) ``L[x] >= alpha log|lam_i| - log(2 sqrt(J))`` at that ``x``;
    (c) ``L[m] <= log(exp(-beta d) sqrt(k) |lam_1|^alpha + sqrt(n) |lam_{k+1}|^alpha)``
        for every ``m``, with ``d = dist(m, union J_i)``.

    Margins are ``rhs - lhs`` (log scale for b and c); negative means failure.
    """
    n, k = S.n, P.k
    lam = np.abs(S.eigenvalues)
    log_lam = np.log(lam, out=np.full(n, -np.inf), where=lam > 0)
    floor = 1.0 / (2.0 * np.sqrt(P.J_max))
    a_margins, b_margins, witnesses = [], [], []
    for i, J in enumerate(P.half_mass_regions):
        mag = np.abs(S.eigenvectors[J, i])
        x = int(J[np.argmax(mag)])
        witnesses.append(x)
        a_margins.append(float(mag.max() - floor))
        b_margins.append(float(L.values[x] - (alpha * log_lam[i] + np.log(floor))))

    d = L.geometry.distance_to_set(P.union())
    near = -P.beta * d + 0.5 * np.log(k) + alpha * log_lam[0]
    far = 0.5 * np.log(n) + alpha * log_lam[k] if k < n else -np.inf
    c_margins = np.logaddexp(near, far) - L.values
    worst_c = int(np.argmin(c_margins))

    return [
        InequalityResult("a", bool(min(a_margins) >= 0), min(a_margins), {"witnesses": witnesses}),
        InequalityResult("b", bool(min(b_margins) >= -tol), min(b_margins), {"witnesses": witnesses}),
        InequalityResult("c", bool(c_margins.min() >= -tol), float(c_margins.min()), {"worst_index": worst_c}),
    ]


@dataclass
class LemmaTable:
    n: int
    samples: int
    deltas: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    failure_empirical: float | None = None
    failure_bound: float | None = None

    def rows(self):
        for d, p, s in zip(self.deltas, self.empirical, self.stderr):
            yield {"delta": float(d), "empirical_p": float(p), "samples": self.samples, "stderr": float(s)}


def lemma_montecarlo(
    n: int,
    deltas,
    samples: int = 100_000,
    seed: int = 0,
    spectrum: Spectrum | None = None,
    alpha: int | None = None,
    chunk: int = 10_000,
) -> LemmaTable:
    """Empirical ``P(|<e_1, r>| <= delta / sqrt(n))`` for ``r`` uniform on the sphere.

    Draws are split into chunks, each with its own spawned seed, so results
    do not depend on how the work is scheduled.  With ``spectrum`` and
    ``alpha`` given, also estimates how often the top component of
    ``A^alpha r`` fails to dominate the rest, next to
    ``sqrt(n) (|lam_2| / |lam_1|)^alpha``.
    """
    deltas = np.asarray(deltas, dtype=float)
    if n < 2:
        raise ValueError("n must be at least 2")
    if np.any((deltas <= 0) | (deltas > 1)):
        raise ValueError("each delta must lie in (0, 1]")
    if samples < 10_000:
        raise ValueError("use at least 10^4 samples")
    if spectrum is not None:
        if spectrum.n != n:
            raise ValueError("spectrum dimension does not match n")
        if alpha is None:
            raise ValueError("failure estimate needs alpha")
        lam = np.abs(spectrum.eigenvalues)
        weights = (lam[1:] / lam[0]) ** (2 * alpha)

    counts = np.zeros(deltas.size, dtype=np.int64)
    failures = 0
    sizes = [chunk] * (samples // chunk) + ([samples % chunk] if samples % chunk else [])
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    cut = deltas / np.sqrt(n)
    for size, ss in zip(sizes, streams):
        g = np.random.default_rng(ss).standard_normal((size, n))
        r = g / np.linalg.norm(g, axis=1, keepdims=True)
        counts += (np.abs(r[:, :1]) <= cut[None, :]).sum(axis=0)
        if spectrum is not None:
            coef = r @ spectrum.eigenvectors
            rest = np.sqrt((coef[:, 1:] ** 2) @ weights)
            failures += int(np.count_nonzero(np.abs(coef[:, 0]) <= rest))
    p = counts / samples
    table = LemmaTable(n, samples, deltas, p, np.sqrt(p * (1 - p) / samples))
    if spectrum is not None:
        table.failure_empirical = failures / samples
        table.failure_bound = float(np.sqrt(n) * (lam[1] / lam[0]) ** alpha)
    return table
