"""Plain-text artifact formats.

* Matrix Market coordinate files for dense and banded operators.
* JSON descriptors for spectral composites.
* CSV for landscapes, lemma tables and torus projections; ``#`` header
  lines carry metadata and the producing run configuration.

Floats are written with ``repr`` so every value round-trips exactly.
"""

from __future__ import annotations

import csv
import io as _io
import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import FormatError
from .geometry import GridGeometry
from .landscape import Landscape
from .operators import BandedOperator, DenseOperator, LinearOperator, SpectralComposite

_TAG = "locscape"


def dumps_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=False) + "\n"


def write_matrix_market(path, A: LinearOperator, config: dict | None = None) -> None:
    if isinstance(A, BandedOperator):
        header = f"{_TAG} kind=banded bandwidth={A.bandwidth}"
    elif isinstance(A, DenseOperator):
        header = f"{_TAG} kind=dense"
    else:
        raise FormatError(f"Matrix Market output supports dense and banded operators, not {A.kind}")
    lines = [header]
    if config is not None:
        lines.append("config " + json.dumps(config, sort_keys=True))
    M = sp.coo_matrix(A.to_dense())
    buf = _io.BytesIO()
    scipy.io.mmwrite(buf, M, comment="\n".join(lines), symmetry="symmetric" if A.symmetric else "general")
    Path(path).write_bytes(buf.getvalue())


def _mm_header(raw: bytes) -> dict:
    meta = {}
    for line in raw.decode("ascii", errors="replace").splitlines()[1:]:
        if not line.startswith("%"):
            break
        body = line.lstrip("%").strip()
        if body.startswith(_TAG):
            for part in body.split()[1:]:
                key, _, val = part.partition("=")
                meta[key] = val
        elif body.startswith("config "):
            meta["config"] = json.loads(body[len("config "):])
    return meta


def read_matrix_market(path, kind: str = "auto") -> LinearOperator:
    """Read a square real coordinate file as a dense or banded operator.

    With ``kind="auto"`` the header tag written by ``write_matrix_market``
    decides; untagged files become banded when at most a quarter of the
    diagonals are occupied.
    """
    raw = Path(path).read_bytes()
    if not raw.startswith(b"%%MatrixMarket"):
        raise FormatError(f"{path}: not a Matrix Market file")
    try:
        M = scipy.io.mmread(_io.BytesIO(raw))
    except Exception as exc:  # scipy raises a mix of ValueError/OSError
        raise FormatError(f"{path}: {exc}") from exc
    if M.shape[0] != M.shape[1]:
        raise FormatError(f"{path}: matrix is {M.shape[0]} x {M.shape[1]}, need square")
    M = sp.coo_matrix(M)
    if np.iscomplexobj(M.data):
        raise FormatError(f"{path}: only real matrices are supported")
    dense = M.toarray().astype(float)
    meta = _mm_header(raw)
    if kind == "auto":
        kind = meta.get("kind")
        if kind is None:
            n = dense.shape[0]
            bw = int(np.abs(M.row - M.col).max()) if M.nnz else 0
            kind = "banded" if 2 * bw + 1 <= max(1, n // 4) else "dense"
    if kind == "banded":
        bw = int(meta["bandwidth"]) if "bandwidth" in meta else None
        return BandedOperator.from_dense(dense, bandwidth=bw)
    if kind == "dense":
        return DenseOperator(dense)
    raise FormatError(f"unknown operator kind {kind!r}")


def write_spectral_json(path, A: SpectralComposite, config: dict | None = None) -> None:
    d = A.to_dict()
    if config is not None:
        d["config"] = config
    Path(path).write_text(dumps_json(d))


def read_spectral_json(path) -> SpectralComposite:
    try:
        d = json.loads(Path(path).read_text())
        return SpectralComposite.from_dict(d)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad spectral descriptor ({exc})") from exc


def read_operator(path) -> LinearOperator:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    if path.suffix == ".json":
        return read_spectral_json(path)
    return read_matrix_market(path)


def _meta_lines(meta: dict) -> list[str]:
    return [f"# {key}: {json.dumps(meta[key], sort_keys=True)}\n" for key in sorted(meta)]


def _read_meta(lines) -> tuple[dict, list[str]]:
    meta, body = {}, []
    for line in lines:
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(": ")
            meta[key] = json.loads(val)
        else:
            body.append(line)
    return meta, body


def landscape_to_csv(L: Landscape, config: dict | None = None) -> str:
    meta = {
        "alpha": L.alpha,
        "geometry": L.geometry.to_dict(),
        "m": L.m,
        "mode": L.mode,
        "seed": L.seed,
        "t": L.t,
    }
    if config is not None:
        meta["config"] = config
    out = _io.StringIO()
    out.writelines(_meta_lines(meta))
    torus = L.geometry.kind == "torus"
    out.write("index,row,col,value\n" if torus else "index,value\n")
    for k, v in enumerate(L.values):
        if torus:
            r, c = divmod(k, L.geometry.size)
            out.write(f"{k},{r},{c},{float(v)!r}\n")
        else:
            out.write(f"{k},{float(v)!r}\n")
    return out.getvalue()


def write_landscape_csv(path, L: Landscape, config: dict | None = None) -> None:
    Path(path).write_text(landscape_to_csv(L, config))


def read_landscape_csv(path) -> Landscape:
    try:
        meta, body = _read_meta(Path(path).read_text().splitlines(keepends=True))
        rows = list(csv.DictReader(body))
        geometry = GridGeometry.from_dict(meta["geometry"])
        values = np.array([float(r["value"]) for r in rows])
        idx = np.array([int(r["index"]) for r in rows])
    except (KeyError, ValueError, json.JSONDecodeError) as exc:
        raise FormatError(f"{path}: bad landscape CSV ({exc})") from exc
    if not np.array_equal(idx, np.arange(idx.size)):
        raise FormatError(f"{path}: indices must run 0..n-1 in order")
    return Landscape(values, meta["alpha"], geometry, meta["mode"], meta.get("m"), meta.get("seed"), meta.get("t"))


def lemma_to_csv(table, config: dict | None = None) -> str:
    meta = {"n": table.n}
    if table.failure_bound is not None:
        meta["failure_bound"] = table.failure_bound
        meta["failure_empirical"] = table.failure_empirical
    if config is not None:
        meta["config"] = config
    out = _io.StringIO()
    out.writelines(_meta_lines(meta))
    out.write("delta,empirical_p,samples,stderr\n")
    for row in table.rows():
        out.write(f"{row['delta']!r},{row['empirical_p']!r},{row['samples']},{row['stderr']!r}\n")
    return out.getvalue()


def projection_to_csv(P, config: dict | None = None) -> str:
    meta = {"n": P.n, "t": P.t, "y": P.y}
    if config is not None:
        meta["config"] = config
    out = _io.StringIO()
    out.writelines(_meta_lines(meta))
    out.write("x,value\n")
    for x, v in zip(P.x, P.samples):
        out.write(f"{float(x)!r},{float(v)!r}\n")
    return out.getvalue()
