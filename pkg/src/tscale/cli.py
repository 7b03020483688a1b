"""Command-line front end.

Exit status: 0 success / all inequalities satisfied, 1 a violation was found,
2 usage, parse or evaluation error.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import hashlib
import io
import json
import math
import sys

from .calculus import (
    QuadratureConfig,
    check_alpha,
    default_tol,
    delta_derivative,
    diamond_derivative,
    ftc_defect,
    integral_parts,
    nabla_derivative,
)
from .errors import InvalidBase, SpecError, TimeScaleError
from .fuzz import PROPERTIES, FuzzConfig, FuzzOutcome, run_property_suite
from .functions import ScaleFunction, TableFunction, as_function
from .inequalities import (
    JENSEN_CATALOG,
    BoundsBox,
    InequalityReport,
    check_gruss,
    check_jensen,
    check_mean_square_bound,
    discrete_gruss,
    quantum_gruss,
)
from .timescale import TimeScale, canonicalize

REPORT_KEYS = ("inequality", "alpha", "lhs", "rhs", "slack", "satisfied", "error_budget",
               "bounds", "scale", "window", "config_digest")


# ------------------------------------------------------------- scale specs

def _range(text, kind=float):
    try:
        lo, hi = text.split("..")
        return kind(lo), kind(hi)
    except ValueError:
        raise SpecError(f"expected a range 'lo..hi', got {text!r}") from None


def parse_scale_spec(text: str) -> TimeScale:
    """Parse a JSON scale object or one of the shorthands

    ``reals:a..b``, ``integers:a..b``, ``uniform:a..b:h``, ``quantum:q:m..n``.
    """
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid scale JSON: {exc}") from None
        unknown = set(obj) - {"intervals", "points"}
        if unknown:
            raise SpecError(f"unknown scale keys {sorted(unknown)}")
        raw = [tuple(seg) for seg in obj.get("intervals", [])]
        if any(len(seg) != 2 for seg in raw):
            raise SpecError("each interval must be a [lo, hi] pair")
        raw += [(p, p) for p in obj.get("points", [])]
        return canonicalize(raw)

    kind, _, rest = text.partition(":")
    if kind == "reals":
        lo, hi = _range(rest)
        return canonicalize([(lo, hi)])
    if kind == "integers":
        lo, hi = _range(rest, int)
        if lo > hi:
            raise SpecError(f"empty integer range {rest!r}")
        return TimeScale.from_points(range(lo, hi + 1))
    if kind == "uniform":
        span, _, step = rest.rpartition(":")
        lo, hi = _range(span)
        try:
            h = float(step)
        except ValueError:
            raise SpecError(f"bad step {step!r}") from None
        if not h > 0 or lo > hi:
            raise SpecError("uniform scale needs lo <= hi and a positive step")
        n = math.floor((hi - lo) / h + 1e-9)
        return TimeScale.from_points(lo + k * h for k in range(n + 1))
    if kind == "quantum":
        base, _, span = rest.partition(":")
        try:
            q = float(base)
        except ValueError:
            raise SpecError(f"bad quantum base {base!r}") from None
        if not q > 1.0:
            raise InvalidBase(f"quantum base must exceed 1, got {q!r}")
        m, n = _range(span, int)
        if m > n:
            raise SpecError(f"empty exponent range {span!r}")
        return TimeScale.from_points(q ** i for i in range(m, n + 1))
    raise SpecError(f"unknown scale spec {text!r}")


def parse_function(text: str) -> ScaleFunction:
    """Expression text, or a JSON table ``{"table": [[t, v], ...], "pieces": [[lo, hi, "expr"], ...]}``."""
    text = text.strip()
    if text.startswith("{"):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError(f"invalid function JSON: {exc}") from None
        table = obj.get("table", [])
        pairs = table.items() if isinstance(table, dict) else table
        values = {float(k): float(v) for k, v in pairs}
        return TableFunction(values, [tuple(p) for p in obj.get("pieces", [])])
    return as_function(text)


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise SpecError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _alphas(text):
    try:
        return [check_alpha(a) for a in _floats(text)]
    except (SpecError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _bounds(text):
    if text is None:
        return None
    vals = _floats(text)
    if len(vals) != 2:
        raise SpecError(f"bounds must be 'lo,hi', got {text!r}")
    return BoundsBox(vals[0], vals[1], "user")


# --------------------------------------------------------------- documents

def _num(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite number {x!r}")
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def dumps(obj) -> str:
    """JSON with every float written to 17 significant digits."""
    if isinstance(obj, bool) or obj is None or isinstance(obj, (str, int)):
        return json.dumps(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def config_digest(cfg: QuadratureConfig, **extra) -> str:
    payload = {"abs_tol": cfg.abs_tol, "max_depth": cfg.max_depth, "fd_step_init": cfg.fd_step_init, **extra}
    return hashlib.sha256(dumps(payload).encode()).hexdigest()[:16]


def report_document(report: InequalityReport, scale: TimeScale | None, cfg: QuadratureConfig) -> dict:
    return {
        "inequality": report.name,
        "alpha": report.alpha,
        "lhs": report.lhs,
        "rhs": report.rhs,
        "slack": report.slack,
        "satisfied": report.satisfied,
        "error_budget": report.error_budget,
        "bounds": [b.to_dict() for b in report.bounds_used],
        "scale": scale.to_spec() if scale is not None else None,
        "window": list(report.window),
        "config_digest": config_digest(cfg),
    }


def report_from_document(doc: dict) -> InequalityReport:
    return InequalityReport(
        name=doc["inequality"],
        alpha=doc["alpha"],
        lhs=doc["lhs"],
        rhs=doc["rhs"],
        slack=doc["slack"],
        satisfied=doc["satisfied"],
        error_budget=doc["error_budget"],
        bounds_used=tuple(BoundsBox(b["lower"], b["upper"], b["provenance"]) for b in doc["bounds"]),
        window=tuple(doc["window"]),
    )


def fuzz_document(outcome: FuzzOutcome, cfg: FuzzConfig) -> dict:
    return {
        "property": outcome.property,
        "trials_run": outcome.trials_run,
        "satisfied": outcome.ok,
        "violations": [
            {
                "trial_index": v.trial_index,
                "digest": v.digest,
                "alpha": v.trial.alpha,
                "lhs": v.report.lhs,
                "rhs": v.report.rhs,
                "scale": v.trial.scale.to_spec(),
                "window": [v.trial.a, v.trial.b],
            }
            for v in outcome.violations
        ],
        "worst_slack": outcome.worst_slack,
        "elapsed": outcome.elapsed,
        "digest": outcome.digest,
        "config_digest": config_digest(cfg.quad, seed=cfg.seed, trials=cfg.trials),
    }


def _flatten(doc, prefix=""):
    flat = {}
    for k, v in doc.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        elif isinstance(v, (list, tuple)):
            flat[key] = dumps(v)
        elif isinstance(v, float):
            flat[key] = _num(v)
        else:
            flat[key] = "" if v is None else v
    return flat


def emit(docs: list[dict], fmt: str, out) -> None:
    if fmt == "csv":
        rows = [_flatten(d) for d in docs]
        fields = list(dict.fromkeys(k for r in rows for k in r))
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        out.write(buf.getvalue())
    else:
        for d in docs:
            out.write(dumps(d) + "\n")


# ----------------------------------------------------------------- commands

def _window(args, ts):
    a = ts.min if args.a is None else args.a
    b = ts.max if args.b is None else args.b
    return a, b


def _require(args, *names):
    for name in names:
        if getattr(args, name) is None:
            raise SpecError(f"--{name.replace('_', '-')} is required for {args.command}")


def _cmd_integrate(args, cfg):
    _require(args, "scale", "f")
    ts, f = parse_scale_spec(args.scale), parse_function(args.f)
    a, b = _window(args, ts)
    parts = integral_parts(f, ts, a, b, cfg)
    a, b = ts.window(a, b)
    docs = [
        {"operation": "integrate", "alpha": al, "value": parts.diamond(al), "delta": parts.delta,
         "nabla": parts.nabla, "error_budget": parts.tolerance, "scale": ts.to_spec(), "window": [a, b],
         "config_digest": config_digest(cfg)}
        for al in args.alpha
    ]
    return docs, True


def _cmd_derive(args, cfg):
    _require(args, "scale", "f", "t")
    ts, f = parse_scale_spec(args.scale), parse_function(args.f)
    docs = []
    for al in args.alpha:
        doc = {"operation": "derive", "alpha": al, "t": ts.snap(args.t),
               "value": diamond_derivative(f, ts, args.t, al, cfg)}
        doc["delta"] = delta_derivative(f, ts, args.t, cfg)
        doc["nabla"] = nabla_derivative(f, ts, args.t, cfg)
        doc.update(scale=ts.to_spec(), config_digest=config_digest(cfg))
        docs.append(doc)
    return docs, True


def _cmd_ftc(args, cfg):
    _require(args, "scale", "f", "t")
    ts, h = parse_scale_spec(args.scale), parse_function(args.f)
    docs = [{"operation": "ftc-defect", "alpha": al, "t": ts.snap(args.t),
             "value": ftc_defect(h, ts, args.t, al, cfg), "scale": ts.to_spec(),
             "config_digest": config_digest(cfg)} for al in args.alpha]
    return docs, True


def _reports(reports, ts, cfg):
    return [report_document(r, ts, cfg) for r in reports], all(r.satisfied for r in reports)


def _cmd_gruss(args, cfg):
    _require(args, "scale", "f", "g")
    ts, f, g = parse_scale_spec(args.scale), parse_function(args.f), parse_function(args.g)
    a, b = _window(args, ts)
    bf, bg = _bounds(args.bounds_f), _bounds(args.bounds_g)
    return _reports([check_gruss(f, g, ts, a, b, al, bf, bg, cfg) for al in args.alpha], ts, cfg)


def _cmd_jensen(args, cfg):
    _require(args, "scale", "f")
    ts, u = parse_scale_spec(args.scale), parse_function(args.f)
    a, b = _window(args, ts)
    return _reports([check_jensen(u, args.h, ts, a, b, al, cfg) for al in args.alpha], ts, cfg)


def _cmd_meansq(args, cfg):
    _require(args, "scale", "f")
    ts, f = parse_scale_spec(args.scale), parse_function(args.f)
    a, b = _window(args, ts)
    bf = _bounds(args.bounds_f)
    return _reports([check_mean_square_bound(f, ts, a, b, al, bf, cfg) for al in args.alpha], ts, cfg)


def _cmd_discrete(args, cfg):
    _require(args, "x", "y")
    rep = discrete_gruss(_floats(args.x), _floats(args.y), _bounds(args.bounds_f), _bounds(args.bounds_g))
    return _reports([rep], None, cfg)


def _cmd_quantum(args, cfg):
    _require(args, "q", "m", "n", "f", "g")
    rep = quantum_gruss(parse_function(args.f), parse_function(args.g), args.q, args.m, args.n,
                        _bounds(args.bounds_f), _bounds(args.bounds_g))
    ts = TimeScale.from_points(args.q ** i for i in range(args.m, args.n + 1))
    return _reports([rep], ts, cfg)


def _cmd_fuzz(args, cfg):
    fcfg = FuzzConfig(seed=args.seed, trials=args.trials, max_segments=args.max_segments,
                      quad=cfg, rhs_factor=args.rhs_factor)
    outcome = run_property_suite(args.property, fcfg)
    return [fuzz_document(outcome, fcfg)], outcome.ok


COMMANDS = {
    "integrate": _cmd_integrate,
    "derive": _cmd_derive,
    "gruss": _cmd_gruss,
    "jensen": _cmd_jensen,
    "meansq": _cmd_meansq,
    "discrete-gruss": _cmd_discrete,
    "quantum-gruss": _cmd_quantum,
    "fuzz": _cmd_fuzz,
    "ftc-defect": _cmd_ftc,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scale", help="scale spec: JSON object or reals:a..b, integers:a..b, uniform:a..b:h, quantum:q:m..n")
    common.add_argument("--f", help="function: expression in t, or JSON table")
    common.add_argument("--g", help="second function")
    common.add_argument("--alpha", type=_alphas, default=[1.0], help="alpha value or comma list (default 1)")
    common.add_argument("--a", type=float, help="window start (default: scale minimum)")
    common.add_argument("--b", type=float, help="window end (default: scale maximum)")
    common.add_argument("--t", type=float, help="evaluation point for derive / ftc-defect")
    common.add_argument("--tol", type=float, help="absolute quadrature tolerance (default TSCALE_TOL or 1e-10)")
    common.add_argument("--bounds-f", dest="bounds_f", help="lo,hi envelope of f (or x)")
    common.add_argument("--bounds-g", dest="bounds_g", help="lo,hi envelope of g (or y)")
    fmt = common.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="format", action="store_const", const="json", help="JSON lines output (default)")
    fmt.add_argument("--csv", dest="format", action="store_const", const="csv", help="CSV header + rows")
    common.set_defaults(format="json")

    parser = argparse.ArgumentParser(prog="tscale", description="Calculus and inequality checks on time scales.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("integrate", "derive", "gruss", "meansq", "ftc-defect"):
        sub.add_parser(name, parents=[common])
    jensen = sub.add_parser("jensen", parents=[common])
    jensen.add_argument("--h", choices=JENSEN_CATALOG, default="square", help="convex function")
    disc = sub.add_parser("discrete-gruss", parents=[common])
    disc.add_argument("--x", help="comma list")
    disc.add_argument("--y", help="comma list")
    quantum = sub.add_parser("quantum-gruss", parents=[common])
    quantum.add_argument("--q", type=float)
    quantum.add_argument("--m", type=int)
    quantum.add_argument("--n", type=int)
    fuzz = sub.add_parser("fuzz", parents=[common])
    fuzz.add_argument("--property", choices=PROPERTIES, default="gruss")
    fuzz.add_argument("--trials", type=int, default=1000)
    fuzz.add_argument("--seed", type=int, default=0)
    fuzz.add_argument("--max-segments", dest="max_segments", type=int, default=6)
    fuzz.add_argument("--rhs-factor", dest="rhs_factor", type=float, default=1.0, help="fault injection: scale every right-hand side")
    return parser


def run_command(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stderr(err), contextlib.redirect_stdout(out):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        cfg = QuadratureConfig(abs_tol=args.tol if args.tol is not None else default_tol())
        docs, ok = COMMANDS[args.command](args, cfg)
        emit(docs, args.format, out)
    except (TimeScaleError, ValueError, KeyError, TypeError) as exc:
        err.write(f"tscale {args.command}: error: {exc}\n")
        return 2
    except Exception as exc:  # keep the exit contract even for unexpected failures
        err.write(f"tscale {args.command}: internal error: {exc!r}\n")
        return 2
    return 0 if ok else 1


def main(argv=None):
    sys.exit(run_command(argv))


if __name__ == "__main__":
    main()
