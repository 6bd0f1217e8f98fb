"""Command-line front end: ``fourier-l1 <subcommand> [options]``.

Exit status is 0 on success, 1 on usage or operational errors and 2 when a
``--check`` gate fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import analysis, conditions, families, identities, kernels
from .analysis import format_number
from .grid import CoefficientGrid, GridParseError, load_grid
from .kernels import VPParams

DEFAULT_LAMBDAS = (2.0, 1.5, 1.25)
DEFAULT_N_RANGE = (4, 8, 16, 32, 64)
DEFAULT_MN = ((4, 4), (8, 8), (16, 16), (32, 32), (64, 64))
DEFAULT_QUAD_TOL = 1e-7
DEFAULT_RESIDUAL_TOL = 1e-9
DEFAULT_MAX_N = 32768
DEFAULT_EK_MAX = 512


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- argument types ----------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative: {text!r}")
    return value


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None


def _lambda(text: str) -> float:
    value = _real(text)
    if not value > 1:
        raise argparse.ArgumentTypeError(f"lambda must exceed 1, got {text}")
    return value


def _lambda_list(text: str) -> list[float]:
    return [_lambda(part) for part in text.split(",") if part.strip()]


def _int_list(text: str) -> list[int]:
    return [_positive_int(part) for part in text.split(",") if part.strip()]


def _mn_list(text: str) -> list[tuple[int, int]]:
    """``4,8,16`` (square) or ``4x6,8x12``."""
    out = []
    for part in filter(None, (p.strip() for p in text.split(","))):
        if "x" in part:
            m, _, n = part.partition("x")
            out.append((_positive_int(m), _positive_int(n)))
        else:
            v = _positive_int(part)
            out.append((v, v))
    if not out:
        raise argparse.ArgumentTypeError("empty (m, n) list")
    return out


def _tolerance(text: str) -> float:
    value = _real(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"tolerance must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fourier-l1", description="Identity checks, condition reports and "
                     "L1 convergence experiments for double Fourier series.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, needs_source=True):
        if needs_source:
            src = p.add_mutually_exclusive_group(required=True)
            src.add_argument("--family", help="family shorthand (geometric:0.7,0.3, finite:..., random:...) "
                             "or a JSON spec file")
            src.add_argument("--grid-file", type=Path, help="coefficient file with 'j k re im' lines")
        p.add_argument("--output", type=Path, help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default="json")
        p.add_argument("--check", action="store_true", help="exit 2 if the gate for this command fails")

    p = sub.add_parser("identities", help="pointwise residuals of the four representation identities "
                       "and of the V - S decomposition")
    common(p)
    p.add_argument("--m", type=_positive_int, required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--lambda", dest="lam", type=_lambda, default=2.0)
    p.add_argument("--quad-n", type=_positive_int, help="samples per axis (default 2*lambda_m+3)")
    p.add_argument("--tol", type=_tolerance, default=DEFAULT_RESIDUAL_TOL, help="relative residual gate")

    p = sub.add_parser("conditions", help="condition profiles and trend verdicts")
    common(p)
    p.add_argument("--lambdas", type=_lambda_list, default=list(DEFAULT_LAMBDAS))
    p.add_argument("--n-range", type=_int_list, default=list(DEFAULT_N_RANGE))
    p.add_argument("--truncation", type=_positive_int)
    p.add_argument("--p", type=_real, default=2.0, help="exponent for the single-variable condition")

    p = sub.add_parser("ek-norms", help="L1 norms of the one-sided exponential kernels")
    common(p, needs_source=False)
    p.add_argument("--max-k", type=_positive_int, default=DEFAULT_EK_MAX)
    p.add_argument("--quad-n", type=_positive_int)
    p.add_argument("--tol", type=_tolerance, default=0.05,
                   help="allowed relative change of the ratio between max_k/2 and max_k")

    for name, helptext in (("decompose", "L1 norms of the six components of V - S"),
                           ("converge", "L1 distances of S, sigma and V to f")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--m", type=_positive_int)
        p.add_argument("--n", type=_positive_int)
        p.add_argument("--mn-list", type=_mn_list)
        p.add_argument("--lambda", dest="lam", type=_lambda, default=1.5)
        p.add_argument("--tol", type=_tolerance, default=DEFAULT_QUAD_TOL, help="absolute quadrature tolerance")
        p.add_argument("--max-n", type=_positive_int, default=DEFAULT_MAX_N)
        if name == "decompose":
            p.add_argument("--residual-tol", type=_tolerance, default=DEFAULT_RESIDUAL_TOL)
    return parser


def parse(argv: list[str]) -> argparse.Namespace:
    args = build_parser().parse_args(argv)
    if args.command in ("decompose", "converge"):
        if args.mn_list is not None and (args.m is not None or args.n is not None):
            raise UsageError("--mn-list conflicts with --m/--n")
        if (args.m is None) != (args.n is None):
            raise UsageError("--m and --n must be given together")
        if args.mn_list is None:
            args.mn_list = [(args.m, args.n)] if args.m is not None else list(DEFAULT_MN)
        for m, n in args.mn_list:
            VPParams(args.lam, m, n)
    if args.command == "identities":
        VPParams(args.lam, args.m, args.n)
    if args.command == "ek-norms" and args.max_k < 2:
        raise UsageError("--max-k must be at least 2")
    if args.command == "conditions":
        if not 1 < args.p <= 2:
            raise UsageError("--p must lie in (1, 2]")
        if not args.n_range or min(args.n_range) < 1:
            raise UsageError("--n-range needs positive integers")
    return args


# -- coefficient sources -------------------------------------------------------

def _family(args) -> families.FamilySpec:
    if args.family is not None:
        return families.parse_family(args.family)
    grid = load_grid(args.grid_file.read_text(encoding="utf-8"))
    entries = [(int(j), int(k), complex(v)) for (j, k), v in _nonzero(grid)]
    return families.FamilySpec.finite(entries)


def _nonzero(grid: CoefficientGrid):
    for a, j in enumerate(grid.j_range()):
        for b, k in enumerate(grid.k_range()):
            v = grid.values[a, b]
            if v != 0:
                yield (j, k), v


def _source_label(args) -> str:
    return args.family if args.family is not None else str(args.grid_file)


def _grid_for(spec: families.FamilySpec, bound_j: int, bound_k: int, eps: float = 1e-12) -> CoefficientGrid:
    try:
        tj, tk = families.reference_truncation(spec, eps)
    except families.Unavailable:
        tj, tk = 1, 1
    return families.build_default(spec, max(bound_j, tj, 1), max(bound_k, tk, 1))


# -- commands -------------------------------------------------------------------

def cmd_identities(args):
    spec = _family(args)
    params = VPParams(args.lam, args.m, args.n)
    grid = _grid_for(spec, params.lambda_m + 1, params.lambda_n + 1)
    nx, ny = identities.default_resolution(params)
    if args.quad_n is not None:
        if args.quad_n < max(nx, ny):
            raise ValueError(f"--quad-n must be at least {max(nx, ny)} to avoid aliasing")
        nx = ny = args.quad_n
    rows = [r.to_dict() for r in identities.all_identity_residuals(grid, params, nx, ny)]
    rows.append(identities.decompose_v_minus_s(grid, params, nx, ny).residual.to_dict())
    ok = all(row["relativeResidual"] <= args.tol for row in rows)
    meta = {"lambda": args.lam, "m": args.m, "n": args.n, "nx": nx, "ny": ny, "tol": args.tol,
            "bound_j": grid.bound_j, "bound_k": grid.bound_k}
    return meta, rows, ok


def cmd_conditions(args):
    spec = _family(args)
    params = conditions.ConditionParams(lambdas=args.lambdas, n_range=args.n_range,
                                        truncation=args.truncation, p=args.p)
    reach = int(max(params.lambdas) * max(params.n_range)) + 2
    grid = _grid_for(spec, reach, reach)
    if args.truncation is not None and args.truncation > min(grid.bound_j, grid.bound_k):
        grid = grid.resized(max(grid.bound_j, args.truncation), max(grid.bound_k, args.truncation))
    reports = conditions.full_report(grid, params)
    rows = []
    for report in reports:
        for entry in report.profile:
            row = {"conditionId": report.condition_id, "lambda": entry.get("lambda", ""),
                   "n": entry.get("n", entry.get("k", entry.get("j", entry.get("t", "")))),
                   "path": entry.get("path", ""), "truncation": report.truncation if report.truncation is not None else "",
                   "value": entry["value"]}
            rows.append(row)
    verdicts = {r.condition_id: r.verdict for r in reports}
    ok = all(v == conditions.VANISHING for v in verdicts.values())
    meta = {"lambdas": params.lambdas, "n_range": params.n_range, "p": params.p,
            "truncation": args.truncation, "bound_j": grid.bound_j, "bound_k": grid.bound_k,
            "verdicts": verdicts}
    return meta, rows, ok


def cmd_ek_norms(args):
    report = kernels.e_norm_profile(args.max_k, args.quad_n)
    norms = dict(report.norms)
    rows = [{"k": k, "norm": norms[k], "ratio": ratio} for k, ratio in report.ratios]
    ratios = dict(report.ratios)
    half = max(2, args.max_k // 2)
    spread = abs(ratios[args.max_k] - ratios[half]) / ratios[half]
    ok = all(0 < r < float("inf") for r in ratios.values()) and spread < args.tol
    meta = {"max_k": args.max_k, "quadrature_points": report.quadrature_points,
            "estimated_c": report.estimated_c, "ratio_spread": spread, "tol": args.tol}
    return meta, rows, ok


def _strictly_decreasing(values) -> bool:
    return all(a > b for a, b in zip(values, values[1:]))


def _nonincreasing(values) -> bool:
    return all(a >= b for a, b in zip(values, values[1:]))


def cmd_decompose(args):
    spec = _family(args)
    rows = analysis.decomposition_norm_run(spec, args.mn_list, args.lam, args.tol, args.max_n)
    ok = all(row["relative_residual"] <= args.residual_tol for row in rows)
    ok = ok and all(_nonincreasing([row[name] for row in rows]) for name in identities.COMPONENTS)
    meta = {"lambda": args.lam, "tol": args.tol, "max_n": args.max_n, "residual_tol": args.residual_tol}
    return meta, rows, ok


def cmd_converge(args):
    spec = _family(args)
    records = analysis.convergence_run(spec, args.mn_list, args.lam, args.tol, args.max_n)
    rows = analysis.record_dicts(records)
    ok = _strictly_decreasing([r.norm_s_f for r in records]) and _strictly_decreasing([r.norm_v_s for r in records])
    meta = {"lambda": args.lam, "tol": args.tol, "max_n": args.max_n,
            "start_n": "max(64, 2*max_frequency+3)"}
    return meta, rows, ok


COMMANDS = {
    "identities": cmd_identities,
    "conditions": cmd_conditions,
    "ek-norms": cmd_ek_norms,
    "decompose": cmd_decompose,
    "converge": cmd_converge,
}


# -- output ----------------------------------------------------------------------

def _plain(value):
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if hasattr(value, "item"):
        return value.item()
    return value


def render(command: str, meta: dict, rows: list[dict], fmt: str, ok: bool | None) -> str:
    meta = dict(meta)
    meta["defaults"] = {"lambdas": list(DEFAULT_LAMBDAS), "quad_tol": DEFAULT_QUAD_TOL,
                        "residual_tol": DEFAULT_RESIDUAL_TOL, "max_n": DEFAULT_MAX_N,
                        "start_n": "max(64, 2*max_frequency+3)"}
    if ok is not None:
        meta["check"] = "pass" if ok else "fail"
    if fmt == "json":
        doc = {"command": command, "metadata": _plain(meta), "rows": _plain(rows)}
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# command={command}\n")
    for key, value in meta.items():
        buf.write(f"# {key}={json.dumps(_plain(value), sort_keys=False)}\n")
    if rows:
        header = list(rows[0].keys())
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row.get(h, "")) for h in header])
    return buf.getvalue()


def _cell(value) -> str:
    if isinstance(value, str) or value is None:
        return "" if value is None else value
    return format_number(value)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse(argv)
        meta, rows, ok = COMMANDS[args.command](args)
        meta = {"source": _source_label(args)} | meta if hasattr(args, "family") else meta
        text = render(args.command, meta, rows, args.format, ok if args.check else None)
        if args.output is not None:
            args.output.write_text(text, encoding="utf-8")
        else:
            sys.stdout.write(text)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, RuntimeError, OSError, GridParseError, families.Unavailable) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.check and not ok:
        print(f"check failed for {args.command}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
