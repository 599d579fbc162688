"""Command-line front end.

    sandrenyi compute divergence --rho R.json --sigma S.json --alpha 2 [--bits]
    sandrenyi compute conditional-entropy --rho R.json --alpha 2 --restarts 8
    sandrenyi verify positivity --trials 100 --dims 2,3 --seed 42 --out report.json
    sandrenyi verify all --seed 42
    sandrenyi scan-alpha --rho R.json --sigma S.json --grid 0.5:10:20 --format csv

Results go to stdout (or ``--out``), progress to stderr.  Exit status is 0 on
success, 1 when a verification finds failures, 2 on bad input.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import math
import sys
from pathlib import Path

import numpy as np

from . import harness
from .divergences import ONE, check_alpha, nats_to_bits, renyi_entropy, sandwiched_renyi, umegaki
from .io import FormatError, density_to_json, dumps, load_channel, load_density, matrix_to_json
from .linalg import NotPSDError
from .optimize import (
    OptimizerConfig,
    conditional_renyi_entropy,
    holevo_alpha,
    mutual_info_dual,
    mutual_info_primal,
)


class UsageError(Exception):
    def __init__(self, code: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.detail = detail


# -- argument types -------------------------------------------------------------

def _alpha(token: str):
    try:
        return check_alpha(token)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _alpha_list(text: str) -> tuple[float, ...]:
    out = []
    for tok in text.split(","):
        a = _alpha(tok)
        if a == ONE:
            raise argparse.ArgumentTypeError("order 1 is not allowed in --alphas")
        out.append(a)
    return tuple(out)


def _dims(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(t) for t in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}") from None
    if not dims or any(d < 1 for d in dims):
        raise argparse.ArgumentTypeError(f"bad dimension list {text!r}")
    return dims


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _tol_override(text: str) -> tuple[str, float]:
    label, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return label, float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LABEL=VALUE, got {text!r}") from None


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:count``, log-spaced, inclusive of both ends."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be start:stop:count")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}") from None
    if not (0 < start < math.inf and 0 < stop < math.inf) or count < 1:
        raise argparse.ArgumentTypeError("grid needs 0 < start, stop < inf and count >= 1")
    if count == 1:
        return np.array([start])
    return np.geomspace(start, stop, count)


# -- output helpers -------------------------------------------------------------

def _scale(value: float, bits: bool) -> float:
    return nats_to_bits(value) if bits else value


def _alpha_out(a):
    return "one" if a == ONE else a


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _config(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(restarts=args.restarts, max_iters=args.max_iters, tol=args.tol,
                               seed=args.seed)
    except ValueError as exc:
        raise UsageError("bad_config", str(exc)) from None


def _result_json(res, alpha, bits) -> dict:
    return {
        "alpha": _alpha_out(alpha),
        "value": _scale(res.value, bits),
        "converged": res.converged,
        "boundary": res.boundary,
        "iterations": res.iterations,
        "best_restart": res.best_restart,
        "argopt": density_to_json(res.argopt),
        "diagnostics": res.diagnostics,
    }


# -- commands -------------------------------------------------------------------

def cmd_divergence(args) -> int:
    rho, sigma = load_density(args.rho), load_density(args.sigma)
    r = sandwiched_renyi(rho, sigma, args.alpha)
    _emit(dumps({"alpha": _alpha_out(args.alpha), "value": _scale(r.value, args.bits),
                 "support_violated": r.support_violated}), args.out)
    return 0


def cmd_entropy(args) -> int:
    rho = load_density(args.rho)
    v = renyi_entropy(rho, args.alpha)
    _emit(dumps({"alpha": _alpha_out(args.alpha), "value": _scale(v, args.bits)}), args.out)
    return 0


def _bipartite_input(args):
    rho = load_density(args.rho)
    if args.dims is not None:
        return rho.with_dims(args.dims)
    if len(rho.dims) != 2:
        raise UsageError("missing_dims", "state needs two subsystems; pass --dims dA,dB")
    return rho


def cmd_conditional_entropy(args) -> int:
    rho = _bipartite_input(args)
    res = conditional_renyi_entropy(rho, args.alpha, _config(args))
    _emit(dumps(_result_json(res, args.alpha, args.bits)), args.out)
    return 0


def cmd_mutual_info(args) -> int:
    rho = _bipartite_input(args)
    fn = mutual_info_dual if args.method == "dual" else mutual_info_primal
    res = fn(rho, args.alpha, _config(args))
    payload = _result_json(res, args.alpha, args.bits)
    payload["method"] = args.method
    _emit(dumps(payload), args.out)
    return 0


def cmd_holevo(args) -> int:
    channel = load_channel(args.channel)
    res = holevo_alpha(channel, args.k, args.alpha, _config(args))
    _emit(dumps({
        "alpha": _alpha_out(args.alpha),
        "value": _scale(res.value, args.bits),
        "lower_bound": True,
        "converged": res.converged,
        "iterations": res.iterations,
        "best_restart": res.best_restart,
        "probabilities": [float(p) for p in res.ensemble.probabilities],
        "vectors": matrix_to_json(res.ensemble.vectors),
        "argopt": density_to_json(res.sigma),
        "diagnostics": res.diagnostics,
    }), args.out)
    return 0


def _plan(args) -> harness.TrialPlan:
    try:
        return harness.TrialPlan(dims=args.dims, alphas=args.alphas, trials=args.trials,
                                 seed=args.seed, tolerances=dict(args.tol_override or ()),
                                 workers=args.workers, failure_dir=args.failure_dir)
    except ValueError as exc:
        raise UsageError("bad_plan", str(exc)) from None


def _progress(report):
    print(f"{report.check}: {report.trials} trials, {report.failures} failures, "
          f"{report.inconclusive} inconclusive, worst margin {report.worst_margin:.3g}, "
          f"{report.elapsed_s:.1f}s", file=sys.stderr)


def cmd_verify(args) -> int:
    if args.replay:
        return _replay(args)
    plan = _plan(args)
    names = list(harness.CHECKS) if args.check == "all" else [args.check]
    try:
        for n in names:
            harness.resolve(n, plan)
    except (KeyError, ValueError) as exc:
        raise UsageError("bad_plan", str(exc.args[0])) from None
    reports = harness.verify_all(plan, names, on_report=_progress)
    timing = not args.reproducible
    if args.check == "all":
        payload = harness.aggregate(reports, plan.seed, timing)
    else:
        payload = reports[0].to_dict(timing)
    _emit(dumps(payload), args.out)
    return 0 if sum(r.failures for r in reports) == 0 else 1


def _replay(args) -> int:
    try:
        outcome, ctx = harness.replay(args.replay)
    except (OSError, ValueError, KeyError) as exc:
        raise UsageError("bad_instance", f"cannot replay {args.replay}: {exc}") from None
    if args.check not in ("all", ctx.check):
        raise UsageError("bad_instance", f"instance belongs to check {ctx.check!r}")
    _emit(dumps({
        "check": ctx.check,
        "failed": outcome.failed,
        "inconclusive": outcome.inconclusive,
        "worst_margin": outcome.worst,
        "slacks": [list(s) for s in outcome.slacks],
    }), args.out)
    return 1 if outcome.failed else 0


MONOTONE_TOL = 1e-9


def cmd_scan_alpha(args) -> int:
    rho, sigma = load_density(args.rho), load_density(args.sigma)
    rows = []
    for a in args.grid:
        a = float(a)
        if abs(a - 1.0) <= 1e-6:
            r = umegaki(rho, sigma)
            rows.append((a, r.value, r.support_violated, "umegaki"))
        else:
            r = sandwiched_renyi(rho, sigma, a)
            rows.append((a, r.value, r.support_violated, ""))
    violations = [
        (p[0], q[0]) for p, q in zip(rows, rows[1:])
        if p[0] > 1 and q[0] > p[0] and q[1] < p[1] - MONOTONE_TOL
    ]
    rows = [(a, _scale(v, args.bits), s, note) for a, v, s, note in rows]
    if args.format == "json":
        _emit(dumps({
            "rows": [{"alpha": a, "value": v, "support_violated": s, "note": note}
                     for a, v, s, note in rows],
            "monotone_above_one": not violations,
            "violations": [list(v) for v in violations],
        }), args.out)
        return 0
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["alpha", "value", "support_violated", "note"])
    for a, v, s, note in rows:
        w.writerow([repr(a), repr(v) if math.isfinite(v) else ("inf" if v > 0 else "-inf"),
                    str(s).lower(), note])
    if violations:
        buf.write("# monotonicity violated for alpha>1 at: "
                  + "; ".join(f"{a!r}->{b!r}" for a, b in violations) + "\n")
    else:
        buf.write("# monotone for alpha>1: yes\n")
    _emit(buf.getvalue().rstrip("\n"), args.out)
    return 0


# -- parser ---------------------------------------------------------------------

def _common(p, fmt=False):
    p.add_argument("--seed", type=int, default=42, help="master seed (default 42)")
    p.add_argument("--bits", action="store_true", help="report values in bits instead of nats")
    p.add_argument("--out", help="write the result here instead of stdout")
    p.add_argument("--format", choices=("json", "csv"), default="csv" if fmt else "json")


def _optimizer_flags(p):
    p.add_argument("--restarts", type=_positive_int, default=8)
    p.add_argument("--max-iters", type=_positive_int, default=2000)
    p.add_argument("--tol", type=float, default=1e-9)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sandrenyi", description="Sandwiched Rényi divergence toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    compute = sub.add_parser("compute", help="evaluate one quantity")
    csub = compute.add_subparsers(dest="quantity", required=True)

    p = csub.add_parser("divergence", help="sandwiched Rényi divergence D_alpha(rho||sigma)")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    _common(p)
    p.set_defaults(func=cmd_divergence)

    p = csub.add_parser("entropy", help="Rényi entropy of a state")
    p.add_argument("--rho", required=True)
    p.add_argument("--alpha", type=_alpha, required=True)
    _common(p)
    p.set_defaults(func=cmd_entropy)

    for name, func, extra in (("conditional-entropy", cmd_conditional_entropy, False),
                              ("mutual-info", cmd_mutual_info, True)):
        p = csub.add_parser(name)
        p.add_argument("--rho", required=True)
        p.add_argument("--dims", type=_dims, help="subsystem dimensions dA,dB")
        p.add_argument("--alpha", type=_alpha, required=True)
        if extra:
            p.add_argument("--method", choices=("primal", "dual"), default="primal")
        _optimizer_flags(p)
        _common(p)
        p.set_defaults(func=func)

    p = csub.add_parser("holevo", help="lower bound on the alpha-Holevo information of a channel")
    p.add_argument("--channel", required=True)
    p.add_argument("--k", type=_positive_int, default=2, help="ensemble size")
    p.add_argument("--alpha", type=_alpha, required=True)
    _optimizer_flags(p)
    _common(p)
    p.set_defaults(func=cmd_holevo)

    p = sub.add_parser("verify", help="run randomized verification suites")
    p.add_argument("check", choices=["all", *harness.CHECKS])
    p.add_argument("--trials", type=_positive_int)
    p.add_argument("--dims", type=_dims)
    p.add_argument("--alphas", type=_alpha_list)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--failure-dir", help="serialize failing instances into this directory")
    p.add_argument("--tol-override", type=_tol_override, action="append", metavar="LABEL=VALUE")
    p.add_argument("--reproducible", action="store_true",
                   help="zero the elapsed_s fields so repeated runs are byte-identical")
    p.add_argument("--replay", metavar="FILE", help="re-run one serialized failure instance")
    _common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("scan-alpha", help="tabulate D_alpha over a log-spaced grid")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--grid", type=parse_grid, required=True, help="start:stop:count")
    _common(p, fmt=True)
    p.set_defaults(func=cmd_scan_alpha)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        err = {"error": exc.code, "detail": exc.detail}
    except FormatError as exc:
        err = {"error": "bad_input", "detail": str(exc)}
    except NotPSDError as exc:
        err = {"error": "not_psd", "detail": str(exc)}
    except ValueError as exc:
        err = {"error": "precondition", "detail": str(exc)}
    sys.stdout.write(dumps(err) + "\n")
    return 2


if __name__ == "__main__":
    sys.exit(main())
