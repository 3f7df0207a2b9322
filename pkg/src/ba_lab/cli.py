"""Batch front end for classification, truncated constants, orbit gaps,
orbit traces, slice scans, and dimension reports.

Exit codes: 0 success, 1 unparseable configuration, 2 parameter error
(including exactness violations), 3 enumeration budget exceeded.

Identical configurations produce byte-identical artifacts: floats are
always formatted with 17 significant digits, exact rationals as
"num/den" strings, scan rows are assembled in fixed row-major order
regardless of the thread count, and JSON keys keep a fixed order.
Progress notes go to stderr; stdout and output files carry data only.
"""

from __future__ import annotations

import argparse
import math
import os
import sys as _sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import (
    DEFAULT_ENUM_BUDGET,
    AffineSystem,
    BudgetError,
    ExactnessError,
    IntegerCandidate,
    ParameterError,
    format_scalar,
    parse_scalar,
)
from .forms import SystemKind, classify, truncated_constant
from .flows import FlowSpec, affine_orbit_gap, homogeneous_orbit_gap, orbit_trace
from .fractal import (
    GridIndicator,
    TreeLevelData,
    ba_slice_scan,
    box_dim_estimate,
    tessellation_counts,
    tree_dim_lower_bound,
)
from .shells import annulus_size

__all__ = ["RunConfig", "parse_args", "run", "main"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_PARAMETER = 2
EXIT_BUDGET = 3


class ConfigError(Exception):
    """Configuration that argparse cannot see (env vars, files)."""


# ---------------------------------------------------------------------------
# deterministic serialization

def _json_str(s: str) -> str:
    out = ['"']
    for ch in s:
        if ch in '"\\':
            out.append("\\" + ch)
        elif ord(ch) < 0x20:
            out.append("\\u%04x" % ord(ch))
        else:
            out.append(ch)
    out.append('"')
    return "".join(out)


def _json(value) -> str:
    """Fixed-format JSON: insertion-ordered keys, %.17g floats, exact
    rationals as num/den strings, nan as null."""
    if value is None:
        return "null"
    if value is True:
        return "true"
    if value is False:
        return "false"
    if isinstance(value, Fraction):
        return _json_str(format_scalar(value))
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return "null" if math.isnan(value) else "%.17g" % value
    if isinstance(value, str):
        return _json_str(value)
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_json(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(
            f"{_json_str(k)}: {_json(v)}" for k, v in value.items()) + "}"
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _witness_json(witness):
    if witness is None:
        return None
    if isinstance(witness, IntegerCandidate):
        return {"p": [int(x) for x in witness.p],
                "q": [int(x) for x in witness.q]}
    return {"u": [int(x) for x in witness]}


def _report(kind, witness, value, n_lo, q_hi, exact) -> dict:
    return {"kind": kind, "witness": witness, "value": value,
            "N": n_lo, "Q": q_hi, "exact": bool(exact)}


def _centers_csv(grid: GridIndicator, names=("a", "b")) -> str:
    lines = [",".join(names)]
    for row in grid.centers():
        lines.append(",".join("%.17g" % x for x in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# configuration

@dataclass(frozen=True)
class RunConfig:
    """One fully parsed batch invocation."""

    command: str
    m: int = 1
    n: int = 1
    a_entries: tuple = ()
    b_entries: tuple = ()
    force_float: bool = False
    q_min: Optional[int] = None
    q_max: Optional[int] = None
    threshold: Optional[float] = None
    resolution: Optional[int] = None
    t_grid: tuple = ()
    t_text: Optional[str] = None
    expansion_text: Optional[str] = None
    cube_scale_text: str = "1"
    scale_texts: tuple = ()
    pgm_path: Optional[str] = None
    k: Optional[int] = None
    delta_texts: tuple = ()
    diam_ratio_texts: tuple = ()
    levels: Optional[int] = None
    budget: Optional[int] = None
    threads: Optional[int] = None
    out: Optional[str] = None


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative: {text}")
    return value


def _scalar_text(text: str) -> str:
    try:
        parse_scalar(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a scalar (num/den or decimal): {text!r}")
    return text


def _finite_float(text: str) -> float:
    try:
        value = float(parse_scalar(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite: {text}")
    return value


class _Parser(argparse.ArgumentParser):
    """argparse maps its own failures to exit 2; this CLI reserves 2 for
    parameter errors and uses 1 for unparseable configuration."""

    def error(self, message):
        self.print_usage(_sys.stderr)
        _sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _add_system_args(p, offset: bool):
    p.add_argument("--m", type=_positive_int, required=True,
                   help="number of forms (rows)")
    p.add_argument("--n", type=_positive_int, required=True,
                   help="number of variables (columns)")
    p.add_argument("--A", dest="a_entries", type=_scalar_text, nargs="+",
                   required=True, metavar="ENTRY",
                   help="m*n row-major coefficients, num/den or decimal")
    if offset:
        p.add_argument("--b", dest="b_entries", type=_scalar_text, nargs="+",
                       required=True, metavar="ENTRY", help="m offsets")
    p.add_argument("--float", dest="force_float", action="store_true",
                   help="force binary floating point parsing of entries")


def _add_budget_arg(p):
    p.add_argument("--budget", type=_positive_int, default=None,
                   help="candidate enumeration budget "
                        "(default: BA_LAB_BUDGET or %d)" % DEFAULT_ENUM_BUDGET)


def _build_parser() -> _Parser:
    parser = _Parser(prog="ba-lab",
                     description="badly approximable affine forms laboratory")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                            parser_class=_Parser)

    p = sub.add_parser("classify",
                       help="exact rational/Kronecker classification")
    _add_system_args(p, offset=True)
    p.add_argument("--out", default=None, help="write JSON here instead of stdout")

    p = sub.add_parser("ctrunc",
                       help="truncated approximation constant over N <= |q| <= Q")
    _add_system_args(p, offset=True)
    p.add_argument("--N", dest="q_min", type=_positive_int, required=True)
    p.add_argument("--Q", dest="q_max", type=_positive_int, required=True)
    _add_budget_arg(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("epsilon",
                       help="uniform orbit gap of the affine system up to depth Q")
    _add_system_args(p, offset=True)
    p.add_argument("--Q", dest="q_max", type=_nonneg_int, required=True)
    _add_budget_arg(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("homeps",
                       help="homogeneous orbit gap of the matrix alone")
    _add_system_args(p, offset=False)
    p.add_argument("--Q", dest="q_max", type=_positive_int, required=True)
    _add_budget_arg(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("orbit",
                       help="CSV trace of lambda1 and the affine minimum along the flow")
    _add_system_args(p, offset=True)
    p.add_argument("--t-grid", dest="t_grid", type=_finite_float, nargs="+",
                   required=True, metavar="T", help="strictly increasing times >= 0")
    _add_budget_arg(p)
    p.add_argument("--out", default=None)

    p = sub.add_parser("scan",
                       help="rasterize the thresholded gap over the (a, b) unit square")
    p.add_argument("--c", dest="threshold", type=_finite_float, required=True,
                   help="gap threshold, cells with gap >= c are marked")
    p.add_argument("--resolution", type=_positive_int, required=True)
    p.add_argument("--Q", dest="q_max", type=_positive_int, required=True)
    p.add_argument("--threads", type=_positive_int, default=None,
                   help="worker threads (default: available parallelism)")
    _add_budget_arg(p)
    p.add_argument("--out", required=True,
                   help="path prefix; writes PREFIX.pgm/.csv and PREFIX-2q.pgm/.csv")

    p = sub.add_parser("boxdim",
                       help="box counting slope of a PGM occupancy grid")
    p.add_argument("--pgm", dest="pgm_path", required=True,
                   help="binary PGM produced by scan")
    p.add_argument("--scales", dest="scale_texts", type=_scalar_text, nargs="+",
                   required=True, metavar="R",
                   help="at least 3 relative box sizes, each dividing the grid")
    p.add_argument("--out", default=None)

    p = sub.add_parser("treebound",
                       help="dimension lower bound of a tree-like construction")
    p.add_argument("--k", type=_positive_int, required=True,
                   help="ambient dimension")
    p.add_argument("--delta", dest="delta_texts", type=_scalar_text, nargs="+",
                   required=True, metavar="D",
                   help="retained child fraction per level")
    p.add_argument("--diam-ratio", dest="diam_ratio_texts", type=_scalar_text,
                   nargs="+", required=True, metavar="R",
                   help="per-level diameter shrink factor")
    p.add_argument("--levels", type=_positive_int, default=None,
                   help="replicate a single delta/diam-ratio pair this many levels")
    p.add_argument("--out", default=None)

    p = sub.add_parser("tesscount",
                       help="translate counts of the flowed cube")
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--r", dest="cube_scale_text", type=_scalar_text, default="1",
                   help="cube scale in (0, 1], counts do not depend on it")
    p.add_argument("--t", dest="t_text", type=_scalar_text, default=None,
                   help="flow time (floating point scales)")
    p.add_argument("--expansion", dest="expansion_text", type=_scalar_text,
                   default=None, help="e^t as an exact scalar (exact counts)")
    _add_budget_arg(p)
    p.add_argument("--out", default=None)

    return parser


def parse_args(argv: Sequence[str]) -> RunConfig:
    ns = _build_parser().parse_args(list(argv))
    fields = {f: getattr(ns, f) for f in RunConfig.__dataclass_fields__
              if hasattr(ns, f)}
    for name in ("a_entries", "b_entries", "t_grid", "scale_texts",
                 "delta_texts", "diam_ratio_texts"):
        if name in fields and fields[name] is not None:
            fields[name] = tuple(fields[name])
    return RunConfig(**fields)


# ---------------------------------------------------------------------------
# dispatch

def _resolve_budget(explicit: Optional[int]) -> Optional[int]:
    if explicit is not None:
        return explicit
    env = os.environ.get("BA_LAB_BUDGET")
    if env is None:
        return None
    try:
        value = int(env)
    except ValueError:
        raise ConfigError(f"BA_LAB_BUDGET is not an integer: {env!r}")
    if value < 1:
        raise ConfigError(f"BA_LAB_BUDGET must be positive: {env}")
    return value


def _system(cfg: RunConfig) -> AffineSystem:
    return AffineSystem.parse(cfg.m, cfg.n, cfg.a_entries, cfg.b_entries,
                              force_float=cfg.force_float)


def _cmd_classify(cfg: RunConfig):
    if cfg.force_float:
        raise ExactnessError("classification needs exact entries; drop --float")
    sysm = _system(cfg)
    result = classify(sysm)
    value = "inf" if result.kind is SystemKind.KRONECKER_INFINITE else None
    print(f"note: {result.note}", file=_sys.stderr)
    return _report(result.kind.value, _witness_json(result.witness), value,
                   None, None, True)


def _cmd_ctrunc(cfg: RunConfig):
    sysm = _system(cfg)
    limit = _resolve_budget(cfg.budget)
    limit = DEFAULT_ENUM_BUDGET if limit is None else limit
    required = annulus_size(sysm.n, cfg.q_min, cfg.q_max)
    if required > limit:
        raise BudgetError(required, limit)
    tc = truncated_constant(sysm, cfg.q_min, cfg.q_max)
    return _report("TruncatedConstant", _witness_json(tc.witness), tc.value,
                   tc.q_min, tc.q_max, tc.exact)


def _cmd_epsilon(cfg: RunConfig):
    sysm = _system(cfg)
    rep = affine_orbit_gap(FlowSpec(sysm.m, sysm.n), sysm, cfg.q_max,
                           budget=_resolve_budget(cfg.budget))
    return _report("UniformGap", _witness_json(rep.witness), rep.value,
                   None, rep.q_max, rep.exact)


def _cmd_homeps(cfg: RunConfig):
    m, n = cfg.m, cfg.n
    if len(cfg.a_entries) != m * n:
        raise ParameterError(f"expected {m * n} coefficient entries, "
                             f"got {len(cfg.a_entries)}")
    rows = tuple(
        tuple(parse_scalar(t, cfg.force_float) for t in cfg.a_entries[i * n:(i + 1) * n])
        for i in range(m))
    rep = homogeneous_orbit_gap(FlowSpec(m, n), rows, cfg.q_max,
                                budget=_resolve_budget(cfg.budget))
    return _report("HomogeneousGap", _witness_json(rep.witness), rep.value,
                   None, rep.q_max, rep.exact)


def _cmd_orbit(cfg: RunConfig):
    sysm = _system(cfg)
    diag = orbit_trace(FlowSpec(sysm.m, sysm.n), sysm, cfg.t_grid,
                       budget=_resolve_budget(cfg.budget))
    return diag.to_csv()


def _cmd_scan(cfg: RunConfig):
    threads = cfg.threads if cfg.threads is not None else (os.cpu_count() or 1)
    result = ba_slice_scan(cfg.threshold, cfg.resolution, cfg.q_max,
                           budget=_resolve_budget(cfg.budget), threads=threads)
    outputs = (
        (cfg.out + ".pgm", result.grid.to_pgm()),
        (cfg.out + ".csv", _centers_csv(result.grid).encode("utf-8")),
        (cfg.out + "-2q.pgm", result.grid_refined.to_pgm()),
        (cfg.out + "-2q.csv", _centers_csv(result.grid_refined).encode("utf-8")),
    )
    for path, blob in outputs:
        with open(path, "wb") as fh:
            fh.write(blob)
        print(f"wrote {path}", file=_sys.stderr)
    marked = int(result.grid.bitmap.sum())
    refined = int(result.grid_refined.bitmap.sum())
    print(f"marked {marked} cells at Q={cfg.q_max}, {refined} at Q={2 * cfg.q_max}",
          file=_sys.stderr)
    return None


def _cmd_boxdim(cfg: RunConfig):
    try:
        with open(cfg.pgm_path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {cfg.pgm_path}: {exc}")
    ind = GridIndicator.from_pgm(data)
    scales = [parse_scalar(t) for t in cfg.scale_texts]
    est = box_dim_estimate(ind, scales)
    if est.degenerate:
        print("note: empty grid, slope is degenerate", file=_sys.stderr)
    return {"slope": est.slope,
            "counts": [[float(r), int(c)] for r, c in est.counts]}


def _cmd_treebound(cfg: RunConfig):
    deltas = [parse_scalar(t) for t in cfg.delta_texts]
    ratios = [parse_scalar(t) for t in cfg.diam_ratio_texts]
    if cfg.levels is not None:
        if len(deltas) != 1 or len(ratios) != 1:
            raise ParameterError("--levels replicates a single delta and "
                                 "diam-ratio; give one of each")
        deltas = deltas * cfg.levels
        ratios = ratios * cfg.levels
    diams = []
    acc = None
    for ratio in ratios:
        acc = ratio if acc is None else acc * ratio
        diams.append(acc)
    bound = tree_dim_lower_bound(TreeLevelData(cfg.k, tuple(deltas), tuple(diams)))
    return {"value": bound.value, "ratios": list(bound.ratios)}


def _cmd_tesscount(cfg: RunConfig):
    fs = FlowSpec(cfg.m, cfg.n)
    r = parse_scalar(cfg.cube_scale_text)
    t = float(parse_scalar(cfg.t_text)) if cfg.t_text is not None else None
    expansion = (parse_scalar(cfg.expansion_text)
                 if cfg.expansion_text is not None else None)
    limit = _resolve_budget(cfg.budget)
    counts = tessellation_counts(fs, r, t=t, expansion=expansion, budget=limit)
    return {"interior": counts.interior, "boundary": counts.boundary,
            "volume_ratio": counts.volume_ratio}


_COMMANDS = {
    "classify": _cmd_classify,
    "ctrunc": _cmd_ctrunc,
    "epsilon": _cmd_epsilon,
    "homeps": _cmd_homeps,
    "orbit": _cmd_orbit,
    "scan": _cmd_scan,
    "boxdim": _cmd_boxdim,
    "treebound": _cmd_treebound,
    "tesscount": _cmd_tesscount,
}


def run(config: RunConfig) -> int:
    """Execute one configuration; raises on failure, writes artifacts."""
    payload = _COMMANDS[config.command](config)
    if payload is None:
        return EXIT_OK
    text = payload if isinstance(payload, str) else _json(payload) + "\n"
    if config.out is None:
        _sys.stdout.write(text)
    else:
        with open(config.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"wrote {config.out}", file=_sys.stderr)
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = list(_sys.argv[1:]) if argv is None else list(argv)
    try:
        config = parse_args(args)
        return run(config)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else EXIT_CONFIG
    except BudgetError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_BUDGET
    except ParameterError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_PARAMETER
    except ConfigError as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    raise SystemExit(main())
