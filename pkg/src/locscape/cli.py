"""Command-line pipeline: generate operators, compute landscapes, detect, verify.

Every artifact embeds the ``RunConfig`` that produced it; feeding that
config back through ``--from-config`` reproduces the artifact byte for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from . import io as lio
from .detect import default_window, local_maxima, predict_threshold, superlevel_regions
from .errors import (
    DimensionError,
    FormatError,
    LocscapeError,
    NotSymmetricError,
)
from .generators import (
    PotentialSpec,
    TheoremSpec,
    random_band_matrix,
    random_potential,
    schrodinger_operator,
    theorem_test_matrix,
)
from .geometry import GridGeometry
from .landscape import RandomSketch, landscape_exact, landscape_randomized
from .operators import flip_spectrum
from .verify import check_proof_inequalities, check_theorem, eig_symmetric, lemma_montecarlo
from .wannier import decay_metrics, project_dirac

log = logging.getLogger("locscape")

THREADS_ENV = "LOCSCAPE_THREADS"

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_DIMENSION = 4
EXIT_UNSUPPORTED = 5
EXIT_NUMERICAL = 6


class UsageError(Exception):
    pass


class UnsupportedError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    output: str
    input: str | None = None
    generator: str | None = None
    generator_spec: dict = field(default_factory=dict)
    alpha: int = 0
    m: int = 0
    seed: int = 0
    window: int | None = None
    k: int | None = None
    y: float | None = None
    flip: bool = False
    geometry: str | None = None
    lemma: bool = False
    threads: int = 1

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise UsageError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


def _geometry_for(op, descriptor: str | None) -> GridGeometry:
    if descriptor:
        geometry = GridGeometry.parse(descriptor)
    else:
        geometry = getattr(op, "geometry", None) or GridGeometry.chain(op.dim)
    if geometry.n != op.dim:
        raise DimensionError(f"geometry {descriptor} has {geometry.n} sites, operator has {op.dim}")
    return geometry


def _load_operator(cfg: RunConfig):
    if not cfg.input:
        raise UsageError("--input is required")
    op = lio.read_operator(cfg.input)
    if cfg.flip:
        op = flip_spectrum(op)
    return op


def _gen(cfg: RunConfig) -> None:
    spec = dict(cfg.generator_spec)
    out = Path(cfg.output)
    if cfg.generator == "band":
        A = random_band_matrix(int(spec["n"]), int(spec["bandwidth"]), int(spec["seed"]))
        lio.write_matrix_market(out, A, cfg.to_dict())
    elif cfg.generator == "schrodinger":
        exponent = float(spec.pop("exponent", 1.0))
        V = random_potential(PotentialSpec(**spec))
        lio.write_spectral_json(out, schrodinger_operator(V, exponent), cfg.to_dict())
    elif cfg.generator == "theorem-test":
        spec["blocks"] = [tuple(b) for b in spec["blocks"]]
        A = theorem_test_matrix(TheoremSpec(**spec))
        lio.write_matrix_market(out, A, cfg.to_dict())
    else:
        raise UsageError(f"unknown generator {cfg.generator!r}")


def _landscape(cfg: RunConfig) -> None:
    op = _load_operator(cfg)
    geometry = _geometry_for(op, cfg.geometry)
    if cfg.m > 0:
        if not op.symmetric:
            raise UnsupportedError("randomized landscape needs a symmetric operator")
        sketch = RandomSketch.generate(op.dim, cfg.m, cfg.seed)
        L = landscape_randomized(op, cfg.alpha, sketch, geometry, threads=cfg.threads)
    else:
        L = landscape_exact(op, cfg.alpha, geometry, threads=cfg.threads)
    lio.write_landscape_csv(cfg.output, L, cfg.to_dict())


def _detect(cfg: RunConfig) -> None:
    if not cfg.input:
        raise UsageError("--input is required")
    L = lio.read_landscape_csv(cfg.input)
    window = cfg.window or default_window(L.geometry)
    peaks = local_maxima(L, window)
    result = {"config": cfg.to_dict(), "window": window, "local_maxima": [r.to_dict(L.geometry) for r in peaks]}
    y = cfg.y
    if y is None and cfg.k is not None:
        y = predict_threshold(L, cfg.k, window)
    if y is not None:
        result["threshold_y"] = float(y)
        result["regions"] = [r.to_dict(L.geometry) for r in superlevel_regions(L, y)]
    Path(cfg.output).write_text(lio.dumps_json(result))


def _verify(cfg: RunConfig) -> None:
    if cfg.lemma:
        spec = cfg.generator_spec
        table = lemma_montecarlo(
            int(spec["n"]), spec.get("deltas", [0.01, 0.1, 0.5, 1.0]), int(spec.get("samples", 100_000)), cfg.seed
        )
        Path(cfg.output).write_text(lio.lemma_to_csv(table, cfg.to_dict()))
        return
    if cfg.k is None:
        raise UsageError("verify needs --k")
    op = _load_operator(cfg)
    if not op.symmetric:
        raise UnsupportedError("verification needs a symmetric operator")
    geometry = _geometry_for(op, cfg.geometry)
    S = eig_symmetric(op)
    L = landscape_exact(op, cfg.alpha, geometry, threads=cfg.threads)
    report = check_theorem(op, cfg.k, cfg.alpha, geometry, spectrum=S, landscape=L)
    proof = check_proof_inequalities(S, report.profile, cfg.alpha, L)
    doc = report.to_dict()
    doc["config"] = cfg.to_dict()
    doc["proof_inequalities"] = {
        r.name: {"passed": r.passed, "worst_margin": r.worst_margin, **{k: v for k, v in r.details.items()}}
        for r in proof
    }
    Path(cfg.output).write_text(lio.dumps_json(doc))


def _wannier(cfg: RunConfig) -> None:
    spec = cfg.generator_spec
    P = project_dirac(int(spec["n"]), float(spec.get("t", 0.0)), float(spec.get("y", 0.0)), spec.get("M"))
    meta = cfg.to_dict()
    text = lio.projection_to_csv(P, meta)
    if spec.get("radius") is not None:
        m = decay_metrics(P, float(spec["radius"]))
        text = f"# metrics: {json.dumps(m, sort_keys=True)}\n" + text
    Path(cfg.output).write_text(text)


_COMMANDS = {"gen": _gen, "landscape": _landscape, "detect": _detect, "verify": _verify, "wannier": _wannier}


def run(cfg: RunConfig) -> None:
    """Execute one pipeline stage; raises on failure."""
    if cfg.command not in _COMMANDS:
        raise UsageError(f"unknown command {cfg.command!r}")
    if cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    log.info("%s -> %s", cfg.command, cfg.output)
    _COMMANDS[cfg.command](cfg)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_blocks(text: str) -> list:
    blocks = []
    for part in text.split(","):
        size, _, edge = part.partition(":")
        blocks.append([int(size), float(edge)])
    return blocks


def build_parser() -> argparse.ArgumentParser:
    default_threads = int(os.environ.get(THREADS_ENV, "1"))
    p = _Parser(prog="locscape", description=__doc__.splitlines()[0])
    p.add_argument("--from-config", metavar="PATH", help="rerun the RunConfig stored in a JSON file or artifact")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command")

    def common(sp, needs_input=True):
        sp.add_argument("--output", required=True)
        if needs_input:
            sp.add_argument("--input", required=True)
        sp.add_argument("--threads", type=int, default=default_threads)

    gen = sub.add_parser("gen")
    gsub = gen.add_subparsers(dest="generator", required=True)
    band = gsub.add_parser("band")
    band.add_argument("--n", type=int, required=True)
    band.add_argument("--bandwidth", type=int, required=True)
    band.add_argument("--seed", type=int, default=0)
    common(band, needs_input=False)
    sch = gsub.add_parser("schrodinger")
    ps = PotentialSpec()
    sch.add_argument("--side", type=int, default=ps.grid_side)
    sch.add_argument("--exponent", type=float, default=1.0)
    sch.add_argument("--cutoff", type=int, default=ps.cutoff)
    sch.add_argument("--sigma", type=float, default=ps.decay_sigma)
    sch.add_argument("--amplitude", type=float, default=ps.amplitude)
    sch.add_argument("--seed", type=int, default=ps.seed)
    common(sch, needs_input=False)
    thm = gsub.add_parser("theorem-test")
    thm.add_argument("--blocks", help="comma-separated size:edge pairs, e.g. 9:5,9:4,30:1")
    thm.add_argument("--coupling", type=float, default=0.0)
    thm.add_argument("--bulk", type=float, default=1.0)
    thm.add_argument("--decay", type=float, default=None)
    thm.add_argument("--seed", type=int, default=0)
    thm.add_argument("--spec", help="JSON file with a theorem-test spec (overrides flags)")
    common(thm, needs_input=False)

    land = sub.add_parser("landscape")
    land.add_argument("--alpha", type=int, required=True)
    land.add_argument("--m", type=int, default=0, help="sketch columns; 0 means exact")
    land.add_argument("--seed", type=int, default=0)
    land.add_argument("--flip", action="store_true", help="use Id - A/||A|| instead of A")
    land.add_argument("--geometry", help="chain:N or torus:S")
    common(land)

    det = sub.add_parser("detect")
    det.add_argument("--window", type=int)
    det.add_argument("--k", type=int)
    det.add_argument("--y", type=float)
    common(det)

    ver = sub.add_parser("verify")
    ver.add_argument("--input")
    ver.add_argument("--k", type=int)
    ver.add_argument("--alpha", type=int, default=0)
    ver.add_argument("--flip", action="store_true")
    ver.add_argument("--geometry")
    ver.add_argument("--lemma", action="store_true", help="run the sphere-projection Monte Carlo instead")
    ver.add_argument("--n", type=int)
    ver.add_argument("--samples", type=int, default=100_000)
    ver.add_argument("--deltas", type=lambda s: [float(x) for x in s.split(",")], default=[0.01, 0.1, 0.5, 1.0])
    ver.add_argument("--seed", type=int, default=0)
    common(ver, needs_input=False)

    wan = sub.add_parser("wannier")
    wan.add_argument("--n", type=int, required=True)
    wan.add_argument("--t", type=float, default=0.0)
    wan.add_argument("--y", type=float, default=0.0)
    wan.add_argument("--M", type=int)
    wan.add_argument("--radius", type=float)
    common(wan, needs_input=False)
    return p


def config_from_args(args) -> RunConfig:
    c = args.command
    base = {"command": c, "output": args.output, "threads": args.threads}
    if c == "gen":
        g = args.generator
        if g == "band":
            spec = {"n": args.n, "bandwidth": args.bandwidth, "seed": args.seed}
        elif g == "schrodinger":
            spec = {
                "grid_side": args.side,
                "exponent": args.exponent,
                "cutoff": args.cutoff,
                "decay_sigma": args.sigma,
                "amplitude": args.amplitude,
                "seed": args.seed,
            }
        else:
            if args.spec:
                spec = json.loads(Path(args.spec).read_text())
            elif args.blocks:
                spec = {
                    "blocks": _parse_blocks(args.blocks),
                    "coupling": args.coupling,
                    "bulk": args.bulk,
                    "decay": args.decay,
                    "seed": args.seed,
                }
            else:
                raise UsageError("theorem-test needs --blocks or --spec")
        return RunConfig(generator=g, generator_spec=spec, **base)
    if c == "landscape":
        return RunConfig(
            input=args.input, alpha=args.alpha, m=args.m, seed=args.seed, flip=args.flip, geometry=args.geometry, **base
        )
    if c == "detect":
        if args.k is not None and args.y is not None:
            raise UsageError("give at most one of --k and --y")
        return RunConfig(input=args.input, window=args.window, k=args.k, y=args.y, **base)
    if c == "verify":
        if args.lemma:
            if args.n is None:
                raise UsageError("verify --lemma needs --n")
            spec = {"n": args.n, "samples": args.samples, "deltas": args.deltas}
            return RunConfig(lemma=True, generator_spec=spec, seed=args.seed, **base)
        if args.input is None:
            raise UsageError("verify needs --input (or --lemma)")
        return RunConfig(
            input=args.input, k=args.k, alpha=args.alpha, flip=args.flip, geometry=args.geometry, **base
        )
    if c == "wannier":
        spec = {"n": args.n, "t": args.t, "y": args.y, "M": args.M, "radius": args.radius}
        return RunConfig(generator_spec=spec, **base)
    raise UsageError("a command is required")


def load_config(path) -> RunConfig:
    """Extract a RunConfig from a JSON config, a JSON artifact, or a CSV/MTX header."""
    text = Path(path).read_text()
    try:
        d = json.loads(text)
        return RunConfig.from_dict(d.get("config", d))
    except json.JSONDecodeError:
        pass
    for line in text.splitlines():
        body = line.lstrip("%#").strip()
        if body.startswith("config"):
            body = body[len("config"):].lstrip(": ")
            return RunConfig.from_dict(json.loads(body))
    raise FormatError(f"{path}: no run configuration found")


def _exit_code(exc: BaseException) -> tuple[int, str]:
    if isinstance(exc, UsageError):
        return EXIT_USAGE, "usage"
    if isinstance(exc, (FormatError, FileNotFoundError, json.JSONDecodeError, KeyError)):
        return EXIT_INPUT, "parse_failure"
    if isinstance(exc, DimensionError):
        return EXIT_DIMENSION, "dimension_mismatch"
    if isinstance(exc, (UnsupportedError, NotSymmetricError)):
        return EXIT_UNSUPPORTED, "unsupported"
    if isinstance(exc, (LocscapeError, ArithmeticError)):
        return EXIT_NUMERICAL, getattr(exc, "code", "numerical")
    return EXIT_OTHER, "error"


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
        cfg = load_config(args.from_config) if args.from_config else config_from_args(args)
        run(cfg)
    except Exception as exc:
        code, name = _exit_code(exc)
        record = {"error": name, "exit_code": code, "message": str(exc), "type": type(exc).__name__}
        sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
        return code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
