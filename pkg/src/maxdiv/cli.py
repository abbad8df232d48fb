"""Command-line interface: ``maxdiv <command> FILE [options]``.

Exit codes: 0 success, 1 verification mismatch, 2 invalid input or usage,
3 a component too large for exhaustive search.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, TextIO

import numpy as np

from maxdiv.core import (
    Distribution,
    SimilarityMatrix,
    from_distance_matrix,
    parse_order,
    validate_similarity,
    VALIDATION_TOL,
)
from maxdiv.errors import ComponentTooLarge, EntryOutOfRange, ValidationError
from maxdiv.maximizer import MaximizeOptions, connected_components, maximize
from maxdiv.means import diversity_profile
from maxdiv.weighting import (
    is_positive_definite,
    is_scattered,
    is_ultrametric,
    solve_weighting,
)

COMMANDS = ("check", "convert", "profile", "magnitude", "maximize", "verify")
DEFAULT_QS = "0,1,2,inf"


@dataclass
class RunConfig:
    command: str
    input_path: str
    format: Optional[str] = None
    kind: Optional[str] = None
    q_list: list = field(default_factory=lambda: [0.0, 1.0, 2.0, math.inf])
    p: Optional[list] = None
    tol: float = VALIDATION_TOL
    all_solutions: bool = False
    no_fast_paths: bool = False
    jobs: int = 1
    seed: int = 0
    restarts: int = 50
    resolution: int = 200
    output: str = "text"
    out_path: Optional[str] = None


def _num(x: float):
    """12 significant digits; infinity as the string "inf"."""
    if math.isinf(x):
        return "inf"
    return float(f"{x:.12g}")


def _fmt(x: float) -> str:
    return "inf" if math.isinf(x) else f"{x:.12g}"


def read_matrix(path: str, fmt: Optional[str] = None) -> tuple[np.ndarray, str]:
    """Read a square matrix from CSV or JSON.  Returns ``(array, kind)`` with
    kind ``"similarity"`` or ``"distance"`` (JSON ``"kind"`` field; CSV files
    carry no kind and read as similarity)."""
    p = Path(path)
    fmt = fmt or ("json" if p.suffix.lower() == ".json" else "csv")
    text = p.read_text()
    if fmt == "json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise ValidationError(f"{path}: invalid JSON: {e}") from None
        if not isinstance(doc, dict) or "entries" not in doc:
            raise ValidationError(f"{path}: JSON must be an object with 'entries'")
        kind = doc.get("kind", "similarity")
        if kind not in ("similarity", "distance"):
            raise ValidationError(f"{path}: unknown kind {kind!r}")
        try:
            a = np.array(doc["entries"], dtype=float)
        except (TypeError, ValueError):
            raise ValidationError(f"{path}: entries must be a list of numeric rows") from None
        if "n" in doc and (a.ndim != 2 or doc["n"] != a.shape[0]):
            raise ValidationError(f"{path}: 'n' = {doc['n']} does not match the entries")
        return a, kind
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    try:
        a = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as e:
        raise ValidationError(f"{path}: {e}") from None
    if a.ndim != 2:
        raise ValidationError(f"{path}: rows have different lengths")
    return a, "similarity"


def write_matrix(a: np.ndarray, out: TextIO, fmt: str, kind: str = "similarity") -> None:
    if fmt == "json":
        doc = {"n": int(a.shape[0]), "kind": kind, "entries": [[_num(x) for x in r] for r in a]}
        out.write(json.dumps(doc) + "\n")
    else:
        for r in a:
            out.write(",".join(_fmt(x) for x in r) + "\n")


def load_similarity(cfg: RunConfig) -> SimilarityMatrix:
    a, kind = read_matrix(cfg.input_path, cfg.format)
    kind = cfg.kind or kind
    if kind == "distance":
        return from_distance_matrix(a, cfg.tol)
    return validate_similarity(a, cfg.tol)


def _emit(cfg: RunConfig, out: TextIO, doc: dict, lines: list[str]) -> None:
    if cfg.output == "json":
        out.write(json.dumps(doc) + "\n")
    else:
        out.write("\n".join(lines) + "\n")


def _profile_doc(Z, p, qs) -> list[dict]:
    return [
        {"q": _num(pt.q), "diversity": _num(pt.diversity),
         "entropy": None if pt.entropy is None else _num(pt.entropy)}
        for pt in diversity_profile(Z, p, qs)
    ]


def cmd_check(cfg, out):
    Z = load_similarity(cfg)
    comps = connected_components(Z)
    doc = {
        "n": Z.n,
        "valid": True,
        "components": [c.one_based() for c in comps],
        "positive_definite": is_positive_definite(Z),
        "ultrametric": is_ultrametric(Z),
        "scattered": is_scattered(Z),
    }
    lines = [f"valid similarity matrix, n = {Z.n}"]
    lines += [f"{k.replace('_', ' ')}: {v}" for k, v in doc.items() if k not in ("n", "valid")]
    _emit(cfg, out, doc, lines)


def cmd_convert(cfg, out):
    a, _ = read_matrix(cfg.input_path, cfg.format)
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise EntryOutOfRange(f"distance ({i + 1},{j + 1}) = {float(a[i, j])!r} is negative")
    Z = from_distance_matrix(a, cfg.tol)
    if cfg.out_path:
        fmt = "json" if cfg.out_path.lower().endswith(".json") else "csv"
        with open(cfg.out_path, "w") as f:
            write_matrix(Z.entries, f, fmt)
    else:
        write_matrix(Z.entries, out, "json" if cfg.output == "json" else "csv")


def cmd_profile(cfg, out):
    Z = load_similarity(cfg)
    if cfg.p is None:
        p = Distribution.uniform(Z.n)
    else:
        if len(cfg.p) != Z.n:
            raise ValidationError(f"--p has {len(cfg.p)} entries, matrix is {Z.n}x{Z.n}")
        p = Distribution(np.array(cfg.p, dtype=float), cfg.tol)
    prof = _profile_doc(Z, p, cfg.q_list)
    lines = ["q\tdiversity\tentropy"] + [
        f"{_fmt(pt.q)}\t{_fmt(pt.diversity)}\t{'-' if pt.entropy is None else _fmt(pt.entropy)}"
        for pt in diversity_profile(Z, p, cfg.q_list)
    ]
    _emit(cfg, out, {"profile": prof}, lines)


def cmd_magnitude(cfg, out):
    Z = load_similarity(cfg)
    res = solve_weighting(Z)
    doc = {
        "status": res.status.value,
        "magnitude": None if res.magnitude is None else _num(res.magnitude),
        "weighting": None if res.representative is None
        else [_num(x) for x in res.representative],
        "nonneg": res.nonneg,
    }
    lines = [f"status: {res.status.value}"]
    if res.magnitude is not None:
        lines += [
            f"magnitude: {_fmt(res.magnitude)}",
            "weighting: " + " ".join(_fmt(x) for x in res.representative),
        ]
    _emit(cfg, out, doc, lines)


def _maximize(cfg, Z):
    opts = MaximizeOptions(
        fast_paths=not cfg.no_fast_paths,
        jobs=cfg.jobs,
        entropy_orders=tuple(q for q in cfg.q_list if not math.isinf(q)),
        vertex_enum_max=Z.n if cfg.all_solutions else MaximizeOptions.vertex_enum_max,
    )
    return maximize(Z, opts)


def cmd_maximize(cfg, out):
    Z = load_similarity(cfg)
    rep = _maximize(cfg, Z)
    doc = {
        "dmax": _num(rep.dmax),
        "maximizing": [[_num(x) for x in d.p] for d in rep.maximizing_distributions],
        "subsets": [g.mask.one_based() for g in rep.maximal_subsets],
        "magnitudes": [_num(g.magnitude) for g in rep.maximal_subsets],
        "method": rep.method.value,
        "components": [
            {"members": c.mask.one_based(), "dmax": _num(c.dmax), "method": c.method.value}
            for c in rep.components
        ],
        "profile": _profile_doc(Z, rep.maximizing_distributions[0], cfg.q_list),
        "sup_entropy": {_fmt(q): _num(h) for q, h in rep.sup_entropies.items()},
    }
    lines = [
        f"maximum diversity: {_fmt(rep.dmax)}",
        f"method: {rep.method.value}",
        "maximal subsets: " + "  ".join("{" + ",".join(map(str, s)) + "}" for s in doc["subsets"]),
        "maximizing distributions:",
    ]
    lines += ["  " + " ".join(_fmt(x) for x in d.p) for d in rep.maximizing_distributions]
    lines += [f"sup entropy (q={k}): {_fmt(v)}" for k, v in doc["sup_entropy"].items()]
    _emit(cfg, out, doc, lines)


def cmd_verify(cfg, out) -> int:
    from maxdiv import oracle

    Z = load_similarity(cfg)
    rep = _maximize(cfg, Z)
    checks = []
    o2 = oracle.oracle_max_d2(Z, restarts=cfg.restarts, seed=cfg.seed)
    checks.append(("d2_projected_gradient", o2.value, 1e-5))
    if Z.n <= oracle.GRID_MAX_N:
        res = cfg.resolution if Z.n <= 3 else min(cfg.resolution, 60)
        o0 = oracle.oracle_max_d0_grid(Z, res)
        # the grid maximum may fall short of dmax, never exceed it
        checks.append(("d0_grid_upper_bound", o0.value, None))
    if np.all((Z.entries == 0) | (Z.entries == 1)) and Z.n <= oracle.GRAPH_MAX_N:
        checks.append(("independence_number", float(oracle.independence_number(Z)), 1e-9))
    results = []
    ok_all = True
    for name, value, tol in checks:
        ok = value <= rep.dmax + 1e-9 if tol is None else abs(value - rep.dmax) <= tol
        ok_all &= ok
        results.append({"oracle": name, "value": _num(value), "ok": bool(ok)})
    doc = {"dmax": _num(rep.dmax), "checks": results, "ok": bool(ok_all)}
    lines = [f"dmax: {_fmt(rep.dmax)}"] + [
        f"{'PASS' if r['ok'] else 'FAIL'} {r['oracle']}: {_fmt(r['value'])}" for r in results
    ]
    _emit(cfg, out, doc, lines)
    return 0 if ok_all else 1


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _q_list(text: str) -> list[float]:
    try:
        return [parse_order(x) for x in text.split(",")]
    except ValidationError as e:
        raise argparse.ArgumentTypeError(str(e))


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maxdiv",
        description="Similarity-sensitive diversity and its exact maximum.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("input_path", metavar="FILE", help="matrix file (.csv or .json)")
    parser.add_argument("--format", choices=("csv", "json"), help="override extension")
    parser.add_argument("--kind", choices=("similarity", "distance"),
                        help="interpret the file as a similarity or distance matrix")
    parser.add_argument("--q", dest="q_list", type=_q_list, default=_q_list(DEFAULT_QS),
                        help="orders, e.g. 0,1,2,inf (default %(default)s)")
    parser.add_argument("--p", type=_float_list, help="distribution for 'profile'")
    parser.add_argument("--tol", type=float, default=VALIDATION_TOL)
    parser.add_argument("--all-solutions", action="store_true",
                        help="enumerate every vertex of singular maximal blocks")
    parser.add_argument("--no-fast-paths", action="store_true")
    parser.add_argument("--jobs", type=_positive_int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--restarts", type=_positive_int, default=50)
    parser.add_argument("--resolution", type=_positive_int, default=200)
    parser.add_argument("--output", choices=("text", "json"), default="text")
    parser.add_argument("-o", "--out", dest="out_path", help="output file for 'convert'")
    return parser


def run(cfg: RunConfig, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    handlers = {
        "check": cmd_check, "convert": cmd_convert, "profile": cmd_profile,
        "magnitude": cmd_magnitude, "maximize": cmd_maximize, "verify": cmd_verify,
    }
    try:
        code = handlers[cfg.command](cfg, stdout)
    except ValidationError as e:
        stderr.write(f"error: {type(e).__name__}: {e}\n")
        return 2
    except OSError as e:
        stderr.write(f"error: {e}\n")
        return 2
    except ComponentTooLarge as e:
        stderr.write(f"error: ComponentTooLarge: {e}\n")
        return 3
    return code or 0


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    cfg = RunConfig(**vars(ns))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
