"""Command-line entry point ``sbrjuno``.

Exit codes: 0 success or certified, 1 refuted or error, 2 inconclusive,
64 usage error (bad flags or a malformed continued-fraction spec).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from mpmath import mp, mpf

from . import __version__
from ._precision import GUARD_DIGITS, MIN_DIGITS, resolve_digits
from .errors import BrjunoError, RationalInputError, SpecError

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 64

GRAPH_COLUMNS = ["x_repr", "sigma", "lo", "hi", "depth"]
BOUNDS_COLUMNS = ["x", "g", "cylinder", "g_k"]
PHASE_COLUMNS = ["sigma", "argmin_spec", "min_lo", "min_hi", "transition_flag"]
SIGMA_STAR_COLUMNS = ["n", "sigma_star", "asymptote", "residual"]
SCALING_COLUMNS = ["k", "x_k", "delta_k", "E_lo", "E_hi", "lambda_k"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass(frozen=True)
class RunConfig:
    precision: int
    depth: int | None
    output: Path | None
    fmt: str
    threads: int

    @classmethod
    def from_args(cls, args) -> RunConfig:
        try:
            precision = resolve_digits(args.precision)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        threads = getattr(args, "threads", 1) or 1
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        out = Path(args.out) if getattr(args, "out", None) else None
        return cls(precision, getattr(args, "depth", None), out, args.format, threads)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text, encoding="utf-8")


def _common(p: argparse.ArgumentParser, formats=("csv", "json"), default="csv"):
    p.add_argument("--precision", type=int, default=None, help=f"significant digits (>= {MIN_DIGITS}; default from BRJUNO_PRECISION or 50)")
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=formats, default=default)
    p.add_argument("--threads", type=int, default=1, help="worker processes (only phase fans out; output is identical for any value)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sbrjuno", description="sigma-Brjuno functions: evaluation, bounds, minimisers, scaling.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate B_sigma at a point", description="Print lo, hi, method and depth of B_sigma(point).")
    p.add_argument("--sigma", required=True)
    p.add_argument("--point", required=True, help='"[0; a1, ..., (b1, ...)]" or a decimal seed')
    p.add_argument("--depth", type=int, default=None, help="partial-sum depth K (forces the enclosure path)")
    p.add_argument("--max-quotient", type=int, default=None, help="bound M on tail quotients for an upper enclosure")
    _common(p, ("text", "json"), "text")

    p = sub.add_parser("graph", help="sample B_sigma on a grid", description=f"CSV columns: {','.join(GRAPH_COLUMNS)}")
    p.add_argument("--sigma", required=True)
    p.add_argument("--grid", type=int, default=1000)
    p.add_argument("--depth", type=int, default=40)
    _common(p, ("csv", "svg"))

    p = sub.add_parser("bounds", help="g and the cylinder bounds g_k", description=f"CSV columns: {','.join(BOUNDS_COLUMNS)}")
    p.add_argument("--sigma", required=True)
    p.add_argument("--grid", type=int, default=400)
    _common(p, ("csv", "svg"))

    p = sub.add_parser("phase", help="minimiser across sigma", description=f"CSV columns: {','.join(PHASE_COLUMNS)}")
    p.add_argument("--sigma-lo", default="0.5")
    p.add_argument("--sigma-hi", default="8.5")
    p.add_argument("--steps", type=int, default=81)
    p.add_argument("--max-quotient", type=int, default=30)
    p.add_argument("--max-period", type=int, default=2)
    p.add_argument("--net-points", type=int, default=10**4)
    _common(p, ("csv", "json", "svg"))

    p = sub.add_parser("sigma-star", help="transition value sigma*_n", description=f"CSV columns: {','.join(SIGMA_STAR_COLUMNS)}")
    p.add_argument("--n", type=int, required=True)
    _common(p)

    p = sub.add_parser("localize", help="certificate that the minimiser lies below 1/(n+1)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--sigma", required=True)
    _common(p, ("json",), "json")

    p = sub.add_parser("verify", help="certified computations")
    vsub = p.add_subparsers(dest="target", required=True, parser_class=_Parser)
    q = vsub.add_parser("contraction", help="F' <= 1/2 and F(J) in J on J = [0, 1/10]")
    q.add_argument("--subdivision-limit", type=int, default=256)
    _common(q, ("json",), "json")
    q = vsub.add_parser("w-positive", help="certify g(xi_n) > B_n(eta_{n+1})")
    q.add_argument("--n-lo", type=int, default=2)
    q.add_argument("--n-hi", type=int, default=800)
    _common(q, ("json",), "json")

    p = sub.add_parser("scaling", help="cusp scaling at eta_{n+1}", description=f"CSV columns: {','.join(SCALING_COLUMNS)}; summary JSON keys: tau_hat, c_hat, window")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=12)
    p.add_argument("--mode", choices=("quadratic", "rational"), default="quadratic")
    p.add_argument("--summary", default=None, help="path for the fitted summary JSON (default: stderr)")
    _common(p)
    return parser


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def _sigma(text) -> mpf:
    try:
        value = mpf(text)
    except (ValueError, TypeError):
        raise UsageError(f"invalid sigma {text!r}") from None
    if not value > 0:
        raise UsageError(f"sigma must be > 0, got {text}")
    return value


def cmd_eval(args, cfg: RunConfig) -> int:
    from .brjuno import evaluate
    from .cf import parse_cfspec

    try:
        spec = parse_cfspec(args.point)
    except RationalInputError:
        spec = args.point.strip()  # a rational: evaluate reports [inf, inf]
    except SpecError as exc:
        raise UsageError(f"malformed point: {exc}") from None
    with mp.workdps(cfg.precision + GUARD_DIGITS):
        rep = evaluate(spec, _sigma(args.sigma), cfg.depth, args.max_quotient, cfg.precision)
    f = lambda v: _num(v, cfg)  # noqa: E731
    if cfg.fmt == "json":
        from .output import json_text

        _emit(cfg, json_text({"point": str(spec), "lo": f(rep.value.lo), "hi": f(rep.value.hi), "method": rep.method, "depth": rep.depth_used}))
    else:
        _emit(cfg, f"lo={f(rep.value.lo)}\nhi={f(rep.value.hi)}\nmethod={rep.method}\ndepth={rep.depth_used}\n")
    return EXIT_OK


def _num(v, cfg: RunConfig) -> str:
    from .output import fmt_num

    return fmt_num(v, cfg.precision)


def cmd_graph(args, cfg: RunConfig) -> int:
    from .brjuno import graph_rows
    from .output import csv_text, svg_text

    if args.grid < 1:
        raise UsageError("--grid must be >= 1")
    rows = graph_rows(_sigma(args.sigma), args.grid, args.depth, cfg.precision)
    if cfg.fmt == "svg":
        pts = [((i + 0.5) / args.grid, float(r[2])) for i, r in enumerate(rows)]
        _emit(cfg, svg_text({"lower enclosure": pts}, title=f"B_sigma, sigma={args.sigma}"))
    else:
        _emit(cfg, csv_text(GRAPH_COLUMNS, rows, cfg.precision))
    return EXIT_OK


def cmd_bounds(args, cfg: RunConfig) -> int:
    from .bounds import BoundContext, g, g_k
    from .output import csv_text, svg_text

    ctx = BoundContext.make(_sigma(args.sigma), cfg.precision)
    rows = []
    with mp.workdps(ctx.work_dps):
        for i in range(args.grid):
            x = (mpf(i) + mpf(1) / 2) / args.grid
            k = int(mp.floor(1 / x))
            rows.append((x, g(x, ctx), k, g_k(x, k, ctx)))
    if cfg.fmt == "svg":
        _emit(cfg, svg_text({"g": [(float(r[0]), float(r[1])) for r in rows], "g_k": [(float(r[0]), float(r[3])) for r in rows]}, title="g and g_k"))
    else:
        _emit(cfg, csv_text(BOUNDS_COLUMNS, rows, cfg.precision))
    return EXIT_OK


def cmd_phase(args, cfg: RunConfig) -> int:
    from .minima import CandidateFamily, phase_scan, transitions
    from .output import csv_text, json_text, svg_text

    fam = CandidateFamily(args.max_quotient, args.max_period)
    rows = phase_scan(
        _sigma(args.sigma_lo), _sigma(args.sigma_hi), args.steps, fam, args.net_points, workers=cfg.threads, digits=cfg.precision
    )
    if cfg.fmt == "svg":
        _emit(cfg, svg_text({"min B_sigma": [(float(r.sigma), float(r.min_value.lo)) for r in rows]}, title="minimum value"))
    elif cfg.fmt == "json":
        payload = {
            "family": fam.describe(),
            "rows": [
                {
                    "sigma": _num(r.sigma, cfg),
                    "argmin_spec": str(r.argmin_spec),
                    "min_lo": _num(r.min_value.lo, cfg),
                    "min_hi": _num(r.min_value.hi, cfg),
                    "transition_flag": r.transition,
                    "net_flag": r.flagged,
                }
                for r in rows
            ],
            "transitions": [
                {"from": str(t.left.argmin_spec), "to": str(t.right.argmin_spec), "bracket": [_num(t.bracket[0], cfg), _num(t.bracket[1], cfg)], "refined": t.refined}
                for t in transitions(rows, digits=cfg.precision)
            ],
        }
        _emit(cfg, json_text(payload))
    else:
        table = [(r.sigma, str(r.argmin_spec), r.min_value.lo, r.min_value.hi, int(r.transition)) for r in rows]
        _emit(cfg, csv_text(PHASE_COLUMNS, table, cfg.precision))
    return EXIT_OK


def cmd_sigma_star(args, cfg: RunConfig) -> int:
    from .minima import asymptote, fixed_point_gap, sigma_star
    from .output import csv_text, json_text

    if args.n < 1:
        raise UsageError("--n must be >= 1")
    with mp.workdps(cfg.precision + GUARD_DIGITS):
        s = sigma_star(args.n, cfg.precision)
        residual = abs(fixed_point_gap(args.n, s, cfg.precision))
        row = (args.n, s, asymptote(args.n), residual)
    if cfg.fmt == "json":
        _emit(cfg, json_text(dict(zip(SIGMA_STAR_COLUMNS, [row[0]] + [_num(v, cfg) for v in row[1:]]))))
    else:
        _emit(cfg, csv_text(SIGMA_STAR_COLUMNS, [row], cfg.precision))
    return EXIT_OK


def cmd_localize(args, cfg: RunConfig) -> int:
    from .minima import localize
    from .output import json_text

    cert = localize(args.n, _sigma(args.sigma), cfg.precision)
    _emit(cfg, json_text(cert.to_dict()))
    return EXIT_OK if cert.passed else EXIT_FAIL


def cmd_verify(args, cfg: RunConfig) -> int:
    from .certified.lemma import check_w_positive, verify_contraction
    from .output import json_text

    if args.target == "contraction":
        if args.subdivision_limit < 1:
            raise UsageError("--subdivision-limit must be >= 1")
        cert = verify_contraction(args.subdivision_limit)
    else:
        if not 2 <= args.n_lo <= args.n_hi:
            raise UsageError("need 2 <= --n-lo <= --n-hi")
        cert = check_w_positive(args.n_lo, args.n_hi)
    _emit(cfg, json_text(cert.to_dict()))
    return cert.exit_code


def cmd_scaling(args, cfg: RunConfig) -> int:
    from .output import csv_text, json_text
    from .scaling import estimate_exponent, run_orbit

    if args.n < 2 or args.steps < 6 or args.steps % 2:
        raise UsageError("need --n >= 2 and an even --steps >= 6")
    run = run_orbit(args.n, steps=args.steps, digits=cfg.precision, mode=args.mode)
    rows = []
    for k in range(1, run.steps + 1):
        # lambda_j = x_{2j+2} x_{2j+1} sits on row k = 2j + 2.
        j = (k - 2) // 2
        lam = run.lambdas[j - 1] if k % 2 == 0 and 1 <= j <= len(run.lambdas) else ""
        rows.append((k, run.x(k), run.d(k), run.E(k).lo, run.E(k).hi, lam))
    text = csv_text(SCALING_COLUMNS, rows, cfg.precision)
    try:
        fit = estimate_exponent(args.n, args.steps, cfg.precision, args.mode, run=run)
        summary = {"tau_hat": fit.tau_hat, "c_hat": fit.c_hat, "window": fit.window, "c_star_product": fit.c_star_product, "c_star_literal": fit.c_star_literal, "one_sided": fit.one_sided}
        code = EXIT_OK
    except BrjunoError as exc:
        summary = {"tau_hat": None, "c_hat": None, "window": [], "error": str(exc), "one_sided": run.one_sided}
        code = EXIT_INCONCLUSIVE
    if cfg.fmt == "json":
        _emit(cfg, json_text({"rows": [dict(zip(SCALING_COLUMNS, [r[0]] + [_num(v, cfg) if v != "" else "" for v in r[1:]])) for r in rows], "summary": summary}))
    else:
        _emit(cfg, text)
        if args.summary:
            Path(args.summary).write_text(json_text(summary), encoding="utf-8")
        else:
            sys.stderr.write(json_text(summary))
    return code


COMMANDS = {
    "eval": cmd_eval,
    "graph": cmd_graph,
    "bounds": cmd_bounds,
    "phase": cmd_phase,
    "sigma-star": cmd_sigma_star,
    "localize": cmd_localize,
    "verify": cmd_verify,
    "scaling": cmd_scaling,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        return COMMANDS[args.command](args, cfg)
    except UsageError as exc:
        sys.stderr.write(f"sbrjuno: usage error: {exc}\n")
        return EXIT_USAGE
    except (BrjunoError, ValueError) as exc:
        sys.stderr.write(f"sbrjuno: error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
