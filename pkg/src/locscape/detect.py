"""Read localization predictions off a landscape.

A site is a local maximum when its value is at least every value within
``window`` (geometry distance).  Superlevel regions are connected components
of ``{k : L[k] >= y}`` under unit-distance adjacency.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import ThresholdWarning
from .geometry import GridGeometry
from .landscape import Landscape


@dataclass
class Region:
    indices: np.ndarray
    peak_index: int
    peak_value: float

    def to_dict(self, geometry: GridGeometry) -> dict:
        coords = geometry.coords(self.peak_index)
        return {
            "peak_index": int(self.peak_index),
            "peak_coords": np.atleast_1d(coords).tolist(),
            "peak_value": float(self.peak_value),
            "member_indices": [int(i) for i in self.indices],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Region":
        return cls(np.asarray(d["member_indices"], dtype=np.int64), int(d["peak_index"]), float(d["peak_value"]))


def default_window(geometry: GridGeometry) -> int:
    return max(1, round(geometry.n ** (1.0 / geometry.ndim) / 30))


def _window_max(values: np.ndarray, geometry: GridGeometry, window: int) -> np.ndarray:
    grid = values.reshape(geometry.shape)
    if geometry.kind == "chain":
        # 'nearest' repeats edge values, which already lie in every boundary window
        out = maximum_filter(grid, size=2 * window + 1, mode="nearest")
    else:
        size = min(2 * window + 1, geometry.size)
        out = maximum_filter(grid, size=size, mode="wrap")
    return out.ravel()


def local_maxima(L: Landscape, window: int | None = None) -> list[Region]:
    """Window-dominant sites, sorted by descending peak value.

    Ties inside one window collapse to a single region anchored at the
    smallest index.  Each region's members are the window ball around its peak.
    """
    geometry = L.geometry
    if window is None:
        window = default_window(geometry)
    if window < 1:
        raise ValueError("window must be at least 1")
    values = L.values
    candidates = np.flatnonzero(values >= _window_max(values, geometry, window))

    # plateau rule: equal-valued candidates within one window share a region
    keep = []
    by_value: dict[float, list[int]] = {}
    for c in candidates:
        by_value.setdefault(float(values[c]), []).append(int(c))
    for group in by_value.values():
        if len(group) == 1:
            keep.append(group[0])
            continue
        g = np.asarray(group)
        close = geometry.distance(g[:, None], g[None, :]) <= window
        _, labels = connected_components(coo_matrix(close), directed=False)
        for lab in np.unique(labels):
            keep.append(int(g[labels == lab].min()))

    keep.sort(key=lambda i: (-values[i], i))
    return [Region(geometry.ball(i, window), i, float(values[i])) for i in keep]


def _components(mask: np.ndarray, geometry: GridGeometry) -> list[np.ndarray]:
    sites = np.flatnonzero(mask)
    if sites.size == 0:
        return []
    src, dst = geometry.neighbor_pairs()
    sel = mask[src] & mask[dst]
    n = geometry.n
    graph = coo_matrix((np.ones(int(sel.sum())), (src[sel], dst[sel])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    labels = labels[sites]
    return [sites[labels == lab] for lab in np.unique(labels)]


def superlevel_regions(L: Landscape, y: float) -> list[Region]:
    """Connected components of ``{k : L[k] >= y}``, sorted by descending peak."""
    values = L.values
    regions = []
    for members in _components(values >= y, L.geometry):
        peak = int(members[np.argmax(values[members])])
        regions.append(Region(members, peak, float(values[peak])))
    regions.sort(key=lambda r: (-r.peak_value, r.peak_index))
    return regions


def predict_threshold(
    L: Landscape,
    k: int,
    window: int | None = None,
    eigenvalues=None,
    J_max: int | None = None,
) -> float:
    """Candidate level ``y`` whose superlevel set should meet the first ``k`` supports.

    Without oracle data this is the ``k``-th largest local-maximum value.
    Given the oracle ``eigenvalues`` (sorted by descending magnitude) and the
    half-mass region size ``J_max``, it is ``alpha log|lam_k| - log(2 sqrt(J_max))``.
    """
    if not 1 <= k <= len(L):
        raise ValueError(f"k must lie in [1, {len(L)}]")
    if eigenvalues is not None:
        if J_max is None:
            raise ValueError("oracle threshold needs J_max")
        lam_k = abs(float(np.asarray(eigenvalues)[k - 1]))
        return L.alpha * np.log(lam_k) - np.log(2.0 * np.sqrt(J_max))
    peaks = local_maxima(L, window)
    if len(peaks) < k:
        warnings.warn(
            f"only {len(peaks)} local maxima for k = {k}; returning the smallest peak",
            ThresholdWarning,
            stacklevel=2,
        )
        return peaks[-1].peak_value
    return peaks[k - 1].peak_value
