"""Command-line front end: ``chernoff-lab {bound,exact,simulate,verify}``.

Every subcommand accepts ``--json`` and ``--config FILE``, a flat JSON object
whose keys mirror the long flags. Flags given on the command line win.
Exit status: 0 success, 1 verification failure, 2 usage or domain error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from fractions import Fraction

from . import bounds as B
from . import montecarlo as mc
from . import oracle as O
from . import verify as V
from .adversary import GameConfig, default_horizon, make_strategy, play
from .errors import LabError
from .prob import Prob2, Prob2Interval, to_fraction

DEFAULT_SEED = 0
DEFAULT_TRIALS = 100_000

_DEFAULTS = {
    "bound": {},
    "exact": {"mode": "auto", "method": "reflection"},
    "simulate": {"trials": DEFAULT_TRIALS, "seed": DEFAULT_SEED, "level": mc.DEFAULT_LEVEL, "budget_mode": "at-most"},
    "verify": {"suite": "all", "scale": "quick", "seed": DEFAULT_SEED},
}


class UsageError(Exception):
    pass


def _rational(s: str) -> Fraction:
    try:
        return to_fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {s!r}") from exc


def _seed(s: str) -> int:
    value = int(s, 0)
    if not 0 <= value < 1 << 64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(prog="chernoff-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    subs = {}

    def common(p):
        p.add_argument("--json", action="store_true", default=None, help="machine-readable output")
        p.add_argument("--config", help="flat JSON file of default flag values")

    p = subs["bound"] = sub.add_parser("bound", help="evaluate a bound from the catalog")
    p.add_argument("--family", choices=B.FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=_rational)
    p.add_argument("--k", type=_rational)
    p.add_argument("--r", type=_rational)
    p.add_argument("--v", type=_rational)
    p.add_argument("--means", help="comma-separated means for the hoeffding families")
    common(p)

    p = subs["exact"] = sub.add_parser("exact", help="exact ground-truth values")
    p.add_argument("--kind", choices=("binom", "walk", "prefix-max", "hitting", "compositions", "geo-sum"))
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=_rational)
    p.add_argument("--t", type=int, help="threshold")
    p.add_argument("--m", type=int, help="prefix-max level")
    p.add_argument("--r", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--total", type=int)
    p.add_argument("--parts", type=int)
    p.add_argument("--tail-cap", type=int)
    p.add_argument("--method", choices=("reflection", "dp"))
    p.add_argument("--mode", choices=("auto", "exact", "float"))
    common(p)

    p = subs["simulate"] = sub.add_parser("simulate", help="Monte Carlo tail estimate")
    p.add_argument("--strategy", help='"rademacher", "grouped-lower:k", "burst:r" or "stop:tau:inner"')
    p.add_argument("--iid", choices=("fair-walk", "bernoulli"), help="independent steps instead of a strategy")
    p.add_argument("--v", type=_rational)
    p.add_argument("--n", type=int)
    p.add_argument("--p", type=_rational)
    p.add_argument("--threshold", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=_seed)
    p.add_argument("--level", type=float)
    p.add_argument("--budget-mode", choices=("at-most", "exactly"))
    p.add_argument("--workers", type=int)
    p.add_argument("--dump-trajectory", help="write trial 0 of the strategy game as CSV")
    common(p)

    p = subs["verify"] = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=V.SUITES + ("all",))
    p.add_argument("--scale", choices=("quick", "full"))
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", help="report path (.json for JSON, CSV otherwise)")
    p.add_argument("--workers", type=int)
    common(p)
    return parser, subs


def _merge_config(sub: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    values = dict(_DEFAULTS[args.command])
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(doc, dict):
            raise UsageError("config file must hold a flat JSON object")
        known = {a.dest: a for a in sub._actions if a.dest not in ("help", "config")}
        for key, raw in doc.items():
            dest = key.replace("-", "_")
            if dest not in known:
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            action = known[dest]
            if isinstance(raw, (dict, list)):
                raise UsageError(f"config key {key!r} must be a scalar")
            if action.type is not None and raw is not None and not isinstance(raw, bool):
                try:
                    raw = action.type(str(raw))
                except (argparse.ArgumentTypeError, ValueError) as exc:
                    raise UsageError(f"bad value for {key!r}: {exc}") from exc
            if action.choices is not None and raw not in action.choices:
                raise UsageError(f"bad value for {key!r}: {raw!r}")
            values[dest] = raw
    for dest, val in vars(args).items():
        if val is not None:
            values[dest] = val
    merged = argparse.Namespace(**{d: None for d in vars(args)})
    for dest, val in values.items():
        setattr(merged, dest, val)
    return merged


# ---------------------------------------------------------------------------
# rendering


def _num(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.12g}")
    return x


def _prob_doc(p: Prob2) -> dict:
    return {"log2": _num(p.log2p), "value": f"{p.value:.12e}", "exact": None if p.exact is None else str(p.exact)}


def _emit(doc: dict, as_json: bool, out) -> None:
    if as_json:
        out.write(json.dumps(doc, indent=2) + "\n")
        return
    for key, val in doc.items():
        if isinstance(val, dict):
            inner = " ".join(f"{k}={'' if v is None else v}" for k, v in val.items())
            out.write(f"{key}: {inner}\n")
        elif isinstance(val, bool):
            out.write(f"{key}: {'true' if val else 'false'}\n")
        elif isinstance(val, (list, tuple)):
            out.write(f"{key}: {', '.join(str(v) for v in val)}\n")
        else:
            out.write(f"{key}: {'' if val is None else val}\n")


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError(f"{args.command} --kind {getattr(args, 'kind', '')} needs " + ", ".join("--" + m.replace("_", "-") for m in missing))


# ---------------------------------------------------------------------------
# subcommands


def _cmd_bound(args, out) -> int:
    if args.family is None:
        raise UsageError("bound needs --family")
    means = None
    if args.means:
        means = [to_fraction(m) for m in args.means.split(",")]
    res = B.bound_for(args.family, n=args.n, p=args.p, k=args.k, r=args.r, v=args.v, means=means)
    doc = {
        "family": res.family,
        "direction": res.direction,
        "threshold": _num(res.threshold),
        "log2_bound": _num(res.log2_bound),
        "value": f"{res.value:.12e}",
        "valid": res.valid,
        "vacuous": res.vacuous,
        "violated": list(res.violated),
        "certificate": None if res.certificate is None else str(res.certificate),
        "citation": res.citation,
    }
    _emit(doc, args.json, out)
    return 0


def _cmd_exact(args, out) -> int:
    kind = args.kind
    if kind is None:
        raise UsageError("exact needs --kind")
    doc: dict = {"kind": kind}
    if kind == "binom":
        _need(args, "n", "p", "t")
        doc["probability"] = _prob_doc(O.binom_tail(args.n, args.p, args.t, args.mode))
    elif kind == "walk":
        _need(args, "n", "t")
        doc["probability"] = _prob_doc(O.walk_tail(args.n, args.t, args.mode))
    elif kind == "prefix-max":
        _need(args, "n", "m")
        doc["probability"] = _prob_doc(O.prefix_max_tail(args.n, args.m, args.method, args.mode))
    elif kind == "hitting":
        _need(args, "r")
        value = O.hitting_time_mean(O.HittingQuery(args.r, args.horizon))
        doc["value"] = str(value)
    elif kind == "compositions":
        _need(args, "total", "parts")
        doc["value"] = O.compositions_count(args.total, args.parts)
    elif kind == "geo-sum":
        _need(args, "n", "p", "t")
        iv: Prob2Interval = O.geometric_sum_tail(args.n, args.p, args.t, args.tail_cap)
        doc["lower"] = _prob_doc(iv.lower)
        doc["upper"] = _prob_doc(iv.upper)
    if not args.json and set(doc) == {"kind", "value"}:
        out.write(f"{doc['value']}\n")
        return 0
    _emit(doc, args.json, out)
    return 0


def _cmd_simulate(args, out) -> int:
    if (args.strategy is None) == (args.iid is None):
        raise UsageError("simulate needs exactly one of --strategy or --iid")
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    if args.strategy is not None:
        if args.v is None:
            raise UsageError("--strategy needs --v")
        if args.p is not None:
            raise UsageError("--p applies only to --iid bernoulli")
        strategy = make_strategy(args.strategy, args.v)
        n = args.n if args.n is not None else default_horizon(strategy, args.v)
        cfg = GameConfig(n, args.v, args.budget_mode, args.seed)
        if args.threshold is None:
            raise UsageError("--strategy needs --threshold")
        if args.dump_trajectory:
            with open(args.dump_trajectory, "w", encoding="utf-8", newline="") as fh:
                fh.write(play(cfg, strategy).to_csv())
        subject = mc.StrategySubject(args.strategy, cfg)
        rep = mc.estimate_tail(subject, args.threshold, args.trials, args.seed, args.level, args.workers)
    else:
        if args.v is not None or args.dump_trajectory:
            raise UsageError("--v and --dump-trajectory apply only to --strategy")
        if args.n is None:
            raise UsageError("--iid needs --n")
        threshold = args.threshold
        if args.iid == "bernoulli" and args.p is None:
            raise UsageError("--iid bernoulli needs --p")
        t = 0 if threshold is None else math.ceil(threshold)
        q = O.TailQuery(args.n, args.iid, t, args.p)
        rep = mc.estimate_tail(q, threshold, args.trials, args.seed, args.level, args.workers)
    doc = {
        "subject": rep.subject,
        "trials": rep.trials,
        "successes": rep.successes,
        "estimate": _num(rep.estimate),
        "ci_low": _num(rep.ci_low),
        "ci_high": _num(rep.ci_high),
        "ci_method": rep.ci_method,
        "ci_level": rep.ci_level,
        "seed": rep.seed,
    }
    _emit(doc, args.json, out)
    return 0


def _cmd_verify(args, out) -> int:
    report = V.run_suite(args.suite, args.scale, args.seed, args.workers)
    if args.out:
        report.write(args.out)
        out.write(report.summary() + "\n")
    else:
        out.write(report.to_json() if args.json else report.to_csv())
        sys.stderr.write(report.summary() + "\n")
    return 0 if report.overall_pass else 1


_COMMANDS = {"bound": _cmd_bound, "exact": _cmd_exact, "simulate": _cmd_simulate, "verify": _cmd_verify}


def main(argv: list[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser, subs = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args = _merge_config(subs[args.command], args)
        return _COMMANDS[args.command](args, out)
    except (UsageError, LabError, ValueError, ZeroDivisionError) as exc:
        sys.stderr.write(f"chernoff-lab {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
