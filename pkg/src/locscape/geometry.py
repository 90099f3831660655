"""Index geometries: open 1D chains and periodic 2D tori."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class GridGeometry:
    """Spatial layout of the index set ``0..n-1``.

    ``kind`` is ``"chain"`` (distance ``|i - j|``) or ``"torus"`` (a
    ``side x side`` periodic grid, row-major, Chebyshev distance with wrap).
    """

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in ("chain", "torus"):
            raise ValueError(f"unknown geometry kind {self.kind!r}")
        if self.size < 1:
            raise ValueError("geometry size must be positive")

    @classmethod
    def chain(cls, n: int) -> "GridGeometry":
        return cls("chain", int(n))

    @classmethod
    def torus(cls, side: int) -> "GridGeometry":
        return cls("torus", int(side))

    @property
    def n(self) -> int:
        return self.size if self.kind == "chain" else self.size * self.size

    @property
    def ndim(self) -> int:
        return 1 if self.kind == "chain" else 2

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.size,) if self.kind == "chain" else (self.size, self.size)

    def coords(self, index):
        """Grid coordinates of flat ``index`` (scalar or array)."""
        index = np.asarray(index)
        if self.kind == "chain":
            return index
        return np.stack(np.divmod(index, self.size), axis=-1)

    def index(self, *coords) -> int:
        if self.kind == "chain":
            return int(coords[0])
        r, c = coords
        return int((r % self.size) * self.size + (c % self.size))

    def distance(self, i, j):
        """Distance between flat indices; broadcasts over arrays."""
        i = np.asarray(i)
        j = np.asarray(j)
        if self.kind == "chain":
            return np.abs(i - j)
        s = self.size
        ri, ci = np.divmod(i, s)
        rj, cj = np.divmod(j, s)
        dr = np.abs(ri - rj)
        dc = np.abs(ci - cj)
        dr = np.minimum(dr, s - dr)
        dc = np.minimum(dc, s - dc)
        return np.maximum(dr, dc)

    def distances_from(self, i: int) -> np.ndarray:
        return self.distance(np.arange(self.n), i)

    def distance_to_set(self, members) -> np.ndarray:
        """For every index ``m``, the distance from ``m`` to the set ``members``."""
        members = np.unique(np.asarray(members, dtype=np.int64))
        if members.size == 0:
            raise ValueError("distance to an empty set is undefined")
        out = np.full(self.n, np.iinfo(np.int64).max, dtype=np.int64)
        everything = np.arange(self.n)
        for start in range(0, members.size, 256):
            chunk = members[start:start + 256]
            d = self.distance(everything[:, None], chunk[None, :])
            np.minimum(out, d.min(axis=1), out=out)
        return out

    def ball(self, center: int, radius: int) -> np.ndarray:
        """Sorted flat indices within ``radius`` of ``center``."""
        return np.flatnonzero(self.distances_from(center) <= radius)

    def neighbor_pairs(self) -> tuple[np.ndarray, np.ndarray]:
        """All unordered pairs at distance exactly one (8-neighborhood on the torus)."""
        if self.kind == "chain":
            i = np.arange(self.n - 1)
            return i, i + 1
        s = self.size
        r, c = np.divmod(np.arange(self.n), s)
        src, dst = [], []
        for dr, dc in ((0, 1), (1, -1), (1, 0), (1, 1)):
            j = ((r + dr) % s) * s + (c + dc) % s
            src.append(np.arange(self.n))
            dst.append(j)
        src = np.concatenate(src)
        dst = np.concatenate(dst)
        keep = src != dst
        return src[keep], dst[keep]

    def to_dict(self) -> dict:
        return {"kind": self.kind, "size": self.size}

    @classmethod
    def from_dict(cls, d: dict) -> "GridGeometry":
        return cls(d["kind"], int(d["size"]))

    @classmethod
    def parse(cls, text: str) -> "GridGeometry":
        """Parse ``chain:N`` or ``torus:S``."""
        kind, _, size = text.partition(":")
        if not size:
            raise ValueError(f"geometry descriptor {text!r} must look like 'chain:N' or 'torus:S'")
        return cls(kind, int(size))
