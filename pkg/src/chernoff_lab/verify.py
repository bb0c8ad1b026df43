"""Parameter sweeps pairing each bound with exact or sampled ground truth.

A suite is an ordered list of :class:`CaseSpec` entries. Each spec is tagged
with an anchor (the inequality it exercises) and produces one or more
:class:`VerificationCase` rows when run. Rows are serialized to CSV or JSON
with a fixed column order and 12 significant digits, so equal inputs give
byte-identical reports.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Literal, Sequence

import numpy as np

from . import bounds as B
from . import montecarlo as mc
from .adversary import (
    Burst,
    GameConfig,
    GroupedLower,
    Rademacher,
    StopAtThreshold,
    default_horizon,
    make_strategy,
    play,
)
from .errors import ContractError, UnknownSuiteError
from .oracle import (
    binom_tail,
    compositions_count,
    enumerate_witnesses,
    geometric_sum_tail,
    hitting_time_mean,
    prefix_max_dp_table,
    prefix_max_tail,
    walk_tail,
    witness_decode,
    witness_encode,
)
from .prob import NEG_INF, Prob2, Prob2Interval, log2_fraction

Scale = Literal["quick", "full"]

SUITES = ("fair", "geo", "large", "bennett", "appendix")
COLUMNS = (
    "suite", "case_id", "n", "p_num", "p_den", "k", "r", "v", "threshold", "truth_kind",
    "log2_truth", "ci_low", "ci_high", "log2_bound", "direction", "pass",
)
LOG2_SLACK = 1e-6
# below this a bound is never adjudicated by sampling
MC_FLOOR = 1e-5

# every inequality the sweeps must touch
ANCHORS = (
    "extended-chebyshev",
    "prefix-max-mc",
    "poor-mans-bound",
    "fair-sandwich",
    "dp-reflection",
    "checkpoint-ladder",
    "geo-sum-bound",
    "geo-sum-integer",
    "geo-sum-adaptive",
    "witness-count",
    "large-deviation",
    "hoeffding",
    "bennett-poor",
    "bennett-small",
    "bennett-large",
    "grouped-lower",
    "grouped-joint",
    "prefix-max-adaptive",
    "martingale",
    "variance-additivity",
    "greedy-partition",
    "diminishing-growth",
    "quarter-sqrt",
    "hitting-time-mean",
    "hitting-time-mc",
)


@dataclass(frozen=True)
class ScaleConfig:
    max_n: int
    trials: int
    moment_trials: int


SCALES = {
    "quick": ScaleConfig(max_n=256, trials=10**5, moment_trials=10**5),
    "full": ScaleConfig(max_n=4096, trials=10**6, moment_trials=10**5),
}


@dataclass(frozen=True)
class VerificationCase:
    suite: str
    case_id: str
    truth_kind: str  # exact | empirical | skipped | oracle-only
    direction: str  # truth<=bound | truth>=bound | truth==bound
    passed: bool
    log2_truth: float = math.nan
    log2_bound: float = math.nan
    ci_low: float | None = None
    ci_high: float | None = None
    threshold: float | None = None
    n: int | None = None
    p: Fraction | None = None
    k: object = None
    r: object = None
    v: object = None

    def fields(self) -> dict:
        return {
            "suite": self.suite,
            "case_id": self.case_id,
            "n": self.n,
            "p_num": None if self.p is None else self.p.numerator,
            "p_den": None if self.p is None else self.p.denominator,
            "k": self.k,
            "r": self.r,
            "v": self.v,
            "threshold": self.threshold,
            "truth_kind": self.truth_kind,
            "log2_truth": self.log2_truth,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "log2_bound": self.log2_bound,
            "direction": self.direction,
            "pass": self.passed,
        }


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, Fraction)):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _json_value(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return int(x) if x.denominator == 1 else str(x)
    x = float(x)
    if not math.isfinite(x):
        return _fmt(x)
    return float(f"{x:.12g}")


def _parse_float(s: str) -> float | None:
    return None if s == "" else float(s)


def recompute_pass(row: dict) -> bool:
    """Re-derive ``pass`` from the serialized fields of one row."""
    kind, direction = row["truth_kind"], row["direction"]
    if kind in ("skipped", "oracle-only"):
        return True
    bound = _parse_float(_fmt(row["log2_bound"]))
    if kind == "exact":
        truth = _parse_float(_fmt(row["log2_truth"]))
        if direction == "truth<=bound":
            return truth <= bound + LOG2_SLACK
        if direction == "truth>=bound":
            return truth >= bound - LOG2_SLACK
        if truth == bound:
            return True
        return abs(truth - bound) <= LOG2_SLACK
    lo = _parse_float(_fmt(row["ci_low"]))
    hi = _parse_float(_fmt(row["ci_high"]))
    target = 2.0**bound if bound < 1024 else math.inf
    if direction == "truth<=bound":
        return lo <= target
    if direction == "truth>=bound":
        return hi >= target
    return lo <= target <= hi


# ---------------------------------------------------------------------------
# comparison


_DIRECTIONS = {"upper": "truth<=bound", "lower": "truth>=bound"}


def compare(
    truth: Prob2 | Prob2Interval | mc.SimulationReport,
    bound: B.BoundResult,
    *,
    suite: str = "",
    case_id: str = "",
    direction: str | None = None,
    **params,
) -> VerificationCase:
    """Judge one truth value against one bound.

    Exact truths are compared in rationals when both sides allow it, else in
    log2 space with a small slack. Sampled truths pass when the confidence
    interval reaches the bound's side. Invalid bounds yield skipped rows.
    """
    want = _DIRECTIONS[bound.direction]
    if direction is not None and direction != want:
        raise ContractError(f"direction {direction!r} does not match a {bound.direction} bound")
    upper = bound.direction == "upper"
    base = dict(suite=suite, case_id=case_id, direction=want, log2_bound=bound.log2_bound, threshold=bound.threshold)
    base.update(params)
    if isinstance(truth, Prob2Interval):
        # the conservative bracket for the claim being tested
        truth = truth.upper if upper else truth.lower

    if isinstance(truth, mc.SimulationReport):
        log2_est = math.log2(truth.estimate) if truth.estimate > 0 else NEG_INF
        ci = dict(ci_low=truth.ci_low, ci_high=truth.ci_high, log2_truth=log2_est)
        if not bound.valid:
            return VerificationCase(truth_kind="skipped", passed=True, **ci, **base)
        target = bound.value
        ok = truth.ci_low <= target if upper else truth.ci_high >= target
        return VerificationCase(truth_kind="empirical", passed=ok, **ci, **base)

    if not isinstance(truth, Prob2):
        raise ContractError(f"cannot compare {type(truth).__name__} with a bound")
    if not bound.valid:
        return VerificationCase(truth_kind="skipped", passed=True, log2_truth=truth.log2p, **base)
    ok = None
    cert = bound.certificate
    if truth.exact is not None and cert is not None:
        rational = truth.exact <= cert if upper else truth.exact >= cert
        if rational or bound.exact is not None:
            ok = rational
    if ok is None:
        if upper:
            ok = truth.log2p <= bound.log2_bound + LOG2_SLACK
        else:
            ok = truth.log2p >= bound.log2_bound - LOG2_SLACK
    return VerificationCase(truth_kind="exact", passed=ok, log2_truth=truth.log2p, **base)


def _identity(suite: str, case_id: str, truth: Fraction, target: Fraction, **params) -> VerificationCase:
    """Exact equality of two non-negative rationals."""
    return VerificationCase(
        suite=suite,
        case_id=case_id,
        truth_kind="exact",
        direction="truth==bound",
        passed=truth == target,
        log2_truth=log2_fraction(Fraction(truth)),
        log2_bound=log2_fraction(Fraction(target)),
        **params,
    )


def _covers(suite: str, case_id: str, lo: float, hi: float, target: float, log2_truth=math.nan, **params) -> VerificationCase:
    """Sampled interval [lo, hi] must contain a non-negative target."""
    return VerificationCase(
        suite=suite,
        case_id=case_id,
        truth_kind="empirical",
        direction="truth==bound",
        passed=lo <= target <= hi,
        log2_truth=log2_truth,
        log2_bound=math.log2(target) if target > 0 else NEG_INF,
        ci_low=lo,
        ci_high=hi,
        **params,
    )


def _oracle_only(suite: str, case_id: str, bound: B.BoundResult, **params) -> VerificationCase:
    return VerificationCase(
        suite=suite,
        case_id=case_id,
        truth_kind="oracle-only",
        direction=_DIRECTIONS[bound.direction],
        passed=True,
        log2_bound=bound.log2_bound,
        threshold=bound.threshold,
        **params,
    )


# ---------------------------------------------------------------------------
# exact routing for the built-in strategies


def _ceil(x: float) -> int:
    return math.ceil(x - 1e-9)


def _walk_tail_clamped(n: int, t: int) -> Prob2:
    if t > n:
        return Prob2.zero()
    if t < -n:
        return Prob2.one()
    return walk_tail(n, t, mode="exact")


def strategy_exact_tail(strategy, v, threshold: float) -> Prob2 | None:
    """Exact Pr[X >= threshold] for a built-in strategy, or None if not covered."""
    v = Fraction(v)
    if isinstance(strategy, (Rademacher, GroupedLower)):
        if v.denominator != 1:
            return None
        return _walk_tail_clamped(int(v), _ceil(threshold))
    if isinstance(strategy, Burst):
        # X = H (1 + 1/r) - v with H ~ Bin(rv, 1/(r+1))
        r = strategy.r
        m = strategy.count
        h = math.ceil((Fraction(threshold) + v) * r / (r + 1))
        if h > m:
            return Prob2.zero()
        return binom_tail(m, 1 / (r + 1), max(h, 0), mode="exact")
    if isinstance(strategy, StopAtThreshold) and isinstance(strategy.inner, Rademacher):
        if v.denominator != 1 or strategy.tau <= 0:
            return None
        n = int(v)
        m = math.ceil(strategy.tau)
        t = _ceil(threshold)
        if m > n:
            return _walk_tail_clamped(n, t)
        if t <= -n:
            return Prob2.one()
        masses, absorbed = prefix_max_dp_table(n, m)
        total = absorbed if m >= t else Fraction(0)
        total += sum(masses[max(t, -n) + n :], Fraction(0))
        return Prob2.from_fraction(total)
    return None


def strategy_exact_prefix_max(strategy, v, level: float) -> Prob2 | None:
    """Exact Pr[Y_max >= level] where the prefix sums follow a fair walk."""
    v = Fraction(v)
    if v.denominator != 1:
        return None
    n = int(v)
    m = _ceil(level)
    if isinstance(strategy, StopAtThreshold) and isinstance(strategy.inner, Rademacher):
        if m > math.ceil(strategy.tau):
            return Prob2.zero()
    elif not isinstance(strategy, (Rademacher, GroupedLower)):
        return None
    if m <= 0:
        return Prob2.one()
    if m > n:
        return Prob2.zero()
    return prefix_max_tail(n, m, mode="exact")


def greedy_partition(variances: Sequence, quota) -> list[tuple[int, int, Fraction, bool]]:
    """Split a variance stream into consecutive groups.

    A group closes the first time its running sum reaches ``quota``. Returns
    (start, end, total, closed) per group; only the last may be open.
    """
    quota = Fraction(quota)
    out = []
    start, acc = 0, Fraction(0)
    for i, x in enumerate(variances):
        acc += Fraction(x)
        if acc >= quota:
            out.append((start, i + 1, acc, True))
            start, acc = i + 1, Fraction(0)
    if start < len(variances):
        out.append((start, len(variances), acc, False))
    return out


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class CaseSpec:
    suite: str
    anchors: tuple[str, ...]
    key: str
    run: Callable[[int], list[VerificationCase]]


def _subseed(seed: int, key: str) -> int:
    digest = hashlib.sha256(f"{seed}/{key}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def _isqrt_exact(n: int) -> int | None:
    s = math.isqrt(n)
    return s if s * s == n else None


def _fair_specs(sc: ScaleConfig) -> list[CaseSpec]:
    S = "fair"
    specs = []

    for n in (16, 64, 256):
        if n > sc.max_n:
            continue
        root = math.isqrt(n)

        def run(seed, n=n, root=root):
            rows = []
            for k in range(1, root + 1):
                m = k * root
                truth = prefix_max_tail(n, m, mode="exact")
                rows.append(compare(truth, B.chebyshev_max_bound(n, k), suite=S,
                                    case_id=f"extended-chebyshev/n={n}/k={k}", n=n, k=k))
            return rows

        specs.append(CaseSpec(S, ("extended-chebyshev",), f"extended-chebyshev/n={n}", run))

    for n, m in ((2, 1), (4, 2), (16, 4), (64, 16)):
        def run(seed, n=n, m=m):
            rep = mc.estimate_prefix_max_tail(n, m, sc.trials, seed)
            exact = prefix_max_tail(n, m, mode="exact").exact
            return [_covers(S, f"prefix-max-mc/n={n}/m={m}", rep.ci_low, rep.ci_high, float(exact),
                            log2_truth=math.log2(rep.estimate) if rep.estimate else NEG_INF,
                            n=n, threshold=m)]

        specs.append(CaseSpec(S, ("prefix-max-mc",), f"prefix-max-mc/n={n}/m={m}", run))

    for n in (64, 256, 1024):
        if n > sc.max_n:
            continue
        root = math.isqrt(n)

        def run(seed, n=n, root=root):
            rows = []
            for k in range(2, root + 1, 2):
                truth = walk_tail(n, k * root, mode="exact")
                rows.append(compare(truth, B.poor_fair_bound(n, k), suite=S,
                                    case_id=f"poor-mans-bound/n={n}/k={k}", n=n, k=k))
            return rows

        specs.append(CaseSpec(S, ("poor-mans-bound",), f"poor-mans-bound/n={n}", run))

    for n in (256, 1024):
        if n > sc.max_n:
            continue
        root = math.isqrt(n)

        def run(seed, n=n, root=root):
            rows = []
            for k in range(2, root // 4 + 1):
                truth = walk_tail(n, k * root, mode="exact")
                lower, upper = B.fair_sandwich(n, k)
                for side, b in (("lower", lower), ("upper", upper)):
                    rows.append(compare(truth, b, suite=S, case_id=f"fair-sandwich/n={n}/k={k}/{side}", n=n, k=k))
            for k in range(1, root // 16 + 1):
                truth = _walk_tail_clamped(n, 16 * k * root)
                rows.append(compare(truth, B.fair_upper_bound(n, k), suite=S,
                                    case_id=f"fair-sandwich/n={n}/k={k}/unscaled", n=n, k=k))
            return rows

        specs.append(CaseSpec(S, ("fair-sandwich",), f"fair-sandwich/n={n}", run))

    ns = list(range(1, 65)) if sc.max_n >= 4096 else list(range(1, 17)) + [32, 64]

    def run_dp(seed):
        rows = []
        for n in ns:
            for m in range(1, n + 1):
                dp = prefix_max_tail(n, m, method="dp", mode="exact").exact
                refl = prefix_max_tail(n, m, method="reflection", mode="exact").exact
                rows.append(_identity(S, f"dp-reflection/n={n}/m={m}", dp, refl, n=n, threshold=m))
        return rows

    specs.append(CaseSpec(S, ("dp-reflection",), "dp-reflection", run_dp))

    for n in (16, 64, 256):
        if n > sc.max_n:
            continue

        def run(seed, n=n):
            spacing = 2 * math.sqrt(n) + 1
            tops = mc.prefix_max_sample(n, sc.trials, seed)
            rows = []
            s = 1
            while s * spacing <= n:
                b = B.checkpoint_bound(n, s, spacing)
                m = math.ceil(s * spacing)
                cid = f"checkpoint-ladder/n={n}/s={s}"
                rows.append(compare(prefix_max_tail(n, m, mode="exact"), b, suite=S, case_id=cid + "/exact", n=n, k=s))
                rep = mc.make_report(int(np.count_nonzero(tops >= s * spacing)), sc.trials, seed, cid)
                rows.append(compare(rep, b, suite=S, case_id=cid + "/mc", n=n, k=s))
                s += 1
            return rows

        specs.append(CaseSpec(S, ("checkpoint-ladder",), f"checkpoint-ladder/n={n}", run))
    return specs


def _geo_specs(sc: ScaleConfig) -> list[CaseSpec]:
    S = "geo"
    specs = []
    ps = (Fraction(1, 8), Fraction(1, 16))

    def run_bound(seed):
        rows = []
        for p in ps:
            for n in range(1, 7):
                rows.append(compare(geometric_sum_tail(n, p, 2 * n), B.geo_sum_bound(n, p), suite=S,
                                    case_id=f"geo-sum-bound/n={n}/p={p}", n=n, p=p))
        return rows

    def run_int(seed):
        rows = []
        for p in ps:
            for n in range(1, 7):
                rows.append(compare(geometric_sum_tail(n, p, n), B.geo_sum_bound(n, p, integer_variant=True),
                                    suite=S, case_id=f"geo-sum-integer/n={n}/p={p}", n=n, p=p))
        return rows

    specs.append(CaseSpec(S, ("geo-sum-bound",), "geo-sum-bound", run_bound))
    specs.append(CaseSpec(S, ("geo-sum-integer",), "geo-sum-integer", run_int))

    for p in ps:
        for n in (2, 4, 6):
            def run(seed, n=n, p=p):
                sums = mc.adaptive_geometric_sums(n, p, sc.trials, seed)
                rows = []
                for t, b, tag in ((2 * n, B.geo_sum_bound(n, p), "2n"),
                                  (n, B.geo_sum_bound(n, p, integer_variant=True), "n")):
                    cid = f"geo-sum-adaptive/n={n}/p={p}/t={tag}"
                    rep = mc.make_report(int(np.count_nonzero(sums >= t)), sc.trials, seed, cid)
                    rows.append(compare(rep, b, suite=S, case_id=cid, n=n, p=p))
                return rows

            specs.append(CaseSpec(S, ("geo-sum-adaptive",), f"geo-sum-adaptive/n={n}/p={p}", run))

    def run_witness(seed):
        rows = []
        for parts in range(1, 9):
            for total in range(0, 9):
                good = 0
                for w in enumerate_witnesses(total, parts):
                    bits = witness_encode(w)
                    if witness_decode(bits) == w and len(bits) == total + parts:
                        good += 1
                rows.append(_identity(S, f"witness-count/total={total}/parts={parts}",
                                      Fraction(good), Fraction(compositions_count(total, parts)), n=parts))
        return rows

    specs.append(CaseSpec(S, ("witness-count",), "witness-count", run_witness))
    return specs


def _large_specs(sc: ScaleConfig) -> list[CaseSpec]:
    S = "large"
    specs = []
    for n in (16, 64, 256, 1024):
        if n > sc.max_n:
            continue

        def run(seed, n=n):
            rows = []
            for p in (Fraction(1, 2), Fraction(1, 4), Fraction(1, 8), Fraction(1, 16)):
                for r in (2, 4, 8):
                    rmu = r * n * p
                    if rmu > n or rmu.denominator != 1:
                        continue
                    truth = binom_tail(n, p, int(rmu), mode="exact")
                    upper, lower = B.large_dev_bounds(n, p, r)
                    for side, b in (("upper", upper), ("lower", lower)):
                        rows.append(compare(truth, b, suite=S, case_id=f"large-deviation/n={n}/p={p}/r={r}/{side}",
                                            n=n, p=p, r=r))
            return rows

        specs.append(CaseSpec(S, ("large-deviation",), f"large-deviation/n={n}", run))

    for n in (64, 256, 1024):
        if n > sc.max_n:
            continue

        def run(seed, n=n):
            rows = []
            for p in (Fraction(1, 2), Fraction(1, 16)):
                means = [p] * n
                for k, r in ((1, 2), (2, 4)):
                    small, large = B.hoeffding_bounds(means, k, r)
                    for tag, b, kk, rr in (("small", small, k, None), ("large", large, None, r)):
                        t = _ceil(b.threshold)
                        truth = Prob2.zero() if t > n else binom_tail(n, p, max(t, 0), mode="exact")
                        rows.append(compare(truth, b, suite=S, case_id=f"hoeffding/n={n}/p={p}/{tag}/{k if rr is None else r}",
                                            n=n, p=p, k=kk, r=rr))
            return rows

        specs.append(CaseSpec(S, ("hoeffding",), f"hoeffding/n={n}", run))
    return specs


def bennett_strategies(v: int) -> list[str]:
    tau = 2 * math.isqrt(v) if _isqrt_exact(v) else 2
    return ["rademacher", f"grouped-lower:{1 if v < 4 else 2}", "burst:4", "burst:8", f"stop:{tau}:rademacher"]


def _bennett_specs(sc: ScaleConfig) -> list[CaseSpec]:
    S = "bennett"
    specs = []
    for v in (1, 4, 64):
        for sid in bennett_strategies(v):
            if default_horizon(make_strategy(sid, v), v) > sc.max_n:
                continue
            specs.append(CaseSpec(S, ("bennett-poor", "bennett-small", "bennett-large", "prefix-max-adaptive"), f"bennett/{sid}/v={v}", _strategy_runner(S, sid, v, sc)))
            specs.append(CaseSpec(S, ("martingale", "variance-additivity"), f"moments/{sid}/v={v}", _moment_runner(S, sid, v, sc)))
            specs.append(CaseSpec(S, ("greedy-partition",), f"greedy-partition/{sid}/v={v}", _partition_runner(S, sid, v)))

    for v, k in ((4, 2), (16, 2), (64, 2), (64, 4)):
        def run(seed, v=v, k=k):
            g = GroupedLower(v, k)
            b = B.constructive_lower_bound(v, k)
            cid = f"grouped-lower/v={v}/k={k}"
            rows = [
                compare(strategy_exact_tail(g, v, b.threshold), b, suite=S, case_id=cid + "/exact", v=v, k=k),
                compare(Prob2.from_fraction(g.predicted_joint_success()), b, suite=S, case_id=cid + "/joint-exact", v=v, k=k),
            ]
            rep = mc.estimate_group_success(g, sc.trials, seed)
            if b.value >= MC_FLOOR:
                rows.append(compare(rep, b, suite=S, case_id=cid + "/joint-mc", v=v, k=k))
            else:
                rows.append(_oracle_only(S, cid + "/joint-mc", b, v=v, k=k))
            pred = float(g.predicted_joint_success())
            rows.append(_covers(S, f"grouped-joint/v={v}/k={k}", rep.ci_low, rep.ci_high, pred,
                                log2_truth=math.log2(rep.estimate) if rep.estimate else NEG_INF,
                                v=v, k=k, threshold=b.threshold))
            return rows

        specs.append(CaseSpec(S, ("grouped-lower", "grouped-joint"), f"grouped-lower/v={v}/k={k}", run))

    def run_growth(seed):
        n = 256
        tops = mc.prefix_max_sample(n, sc.trials, seed)
        rows = []
        for alpha, beta_ in ((4, 4), (8, 4), (8, 8)):
            given = tops >= beta_
            m = int(np.count_nonzero(given))
            cond = mc.make_report(int(np.count_nonzero(tops[given] >= beta_ + alpha + 1)), m, seed, "cond")
            base = mc.make_report(int(np.count_nonzero(tops >= alpha)), sc.trials, seed, "base")
            target = min(1.0, base.estimate + 3 * base.ci_width)
            rows.append(VerificationCase(
                suite=S, case_id=f"diminishing-growth/n={n}/alpha={alpha}/beta={beta_}",
                truth_kind="empirical", direction="truth<=bound",
                passed=cond.ci_low <= target,
                log2_truth=math.log2(cond.estimate) if cond.estimate else NEG_INF,
                log2_bound=math.log2(target), ci_low=cond.ci_low, ci_high=cond.ci_high,
                threshold=beta_ + alpha + 1, n=n, k=alpha,
            ))
        return rows

    specs.append(CaseSpec(S, ("diminishing-growth",), "diminishing-growth", run_growth))
    return specs


def _strategy_runner(S: str, sid: str, v: int, sc: ScaleConfig):
    def run(seed):
        strategy = make_strategy(sid, v)
        n = default_horizon(strategy, v)
        subject = mc.StrategySubject(sid, GameConfig(n, v, "at-most", seed))

        def stat(x):
            z = np.cumsum(x, axis=1)
            return np.stack([z[:, -1], np.maximum(z.max(axis=1), 0.0)], axis=1)

        sample = mc.sample_statistic(subject, sc.trials, seed, stat).reshape(sc.trials, 2)
        finals, tops = sample[:, 0], sample[:, 1]
        checks = []
        for k in range(1, 5):
            checks.append(("bennett-poor", f"k={k}", B.bennett_poor_bound(v, k), finals, dict(k=k)))
        for k in range(1, math.isqrt(v) + 1):
            checks.append(("bennett-small", f"k={k}", B.bennett_small_bound(v, k), finals, dict(k=k)))
        for r in (4, 8):
            checks.append(("bennett-large", f"r={r}", B.bennett_large_bound(v, r), finals, dict(r=r)))
        for ell in (2, 4, 8):
            checks.append(("prefix-max-adaptive", f"ell={ell}", B.prefix_max_chebyshev_bound(v, ell), tops, dict(k=ell)))
        rows = []
        for anchor, tag, b, values, extra in checks:
            cid = f"{anchor}/{sid}/v={v}/{tag}"
            params = dict(suite=S, n=n, v=v, **extra)
            if anchor == "prefix-max-adaptive":
                truth = strategy_exact_prefix_max(strategy, v, b.threshold)
            else:
                truth = strategy_exact_tail(strategy, v, b.threshold)
            if truth is not None:
                rows.append(compare(truth, b, case_id=cid + "/exact", **params))
            if b.valid and b.value < MC_FLOOR:
                rows.append(_oracle_only(S, cid + "/mc", b, n=n, v=v, **extra))
            else:
                rep = mc.make_report(int(np.count_nonzero(values >= b.threshold)), sc.trials, seed, cid)
                rows.append(compare(rep, b, case_id=cid + "/mc", **params))
        return rows

    return run


def _moment_runner(S: str, sid: str, v: int, sc: ScaleConfig):
    def run(seed):
        strategy = make_strategy(sid, v)
        n = default_horizon(strategy, v)
        rep = mc.moment_check(mc.StrategySubject(sid, GameConfig(n, v, "at-most", seed)), sc.moment_trials, seed)
        z = rep._half(1.0)
        rows = []
        for anchor, mean, se in (("martingale", rep.mean_x, rep.se_x), ("variance-additivity", rep.mean_gap, rep.se_gap)):
            rows.append(_covers(S, f"{anchor}/{sid}/v={v}", mean - z * se, mean + z * se, 0.0, n=n, v=v))
        return rows

    return run


def _partition_runner(S: str, sid: str, v: int):
    def run(seed):
        strategy = make_strategy(sid, v)
        n = default_horizon(strategy, v)
        k = 1 if v < 4 else 2
        quota = Fraction(v, k * k)
        traj = play(GameConfig(n, v, "at-most", seed), strategy)
        groups = greedy_partition(traj.v_spent, quota)
        closed = [g for g in groups if g[3]]
        # every closed group reaches the quota and overshoots by less than one step
        sound = all(quota <= tot < quota + 1 for _, _, tot, _ in closed)
        count = Fraction(len(closed)) if sound else Fraction(k * k + 1)
        return [VerificationCase(
            suite=S, case_id=f"greedy-partition/{sid}/v={v}", truth_kind="exact", direction="truth<=bound",
            passed=count <= k * k, log2_truth=log2_fraction(count), log2_bound=math.log2(k * k),
            n=n, v=v, k=k,
        )]

    return run


def _appendix_specs(sc: ScaleConfig) -> list[CaseSpec]:
    S = "appendix"
    specs = []

    def run_quarter(seed):
        rows = []
        j = 4
        while j * j <= min(sc.max_n, 4096):
            n = j * j
            b = B.quarter_sqrt_lower_bound(n)
            rows.append(compare(walk_tail(n, _ceil(j / 4), mode="exact"), b, suite=S, case_id=f"quarter-sqrt/n={n}", n=n))
            j += 1
        return rows

    specs.append(CaseSpec(S, ("quarter-sqrt",), "quarter-sqrt", run_quarter))

    def run_hit(seed):
        return [_identity(S, f"hitting-time-mean/r={r}", hitting_time_mean(r), Fraction(r * r), r=r)
                for r in range(1, 33)]

    specs.append(CaseSpec(S, ("hitting-time-mean",), "hitting-time-mean", run_hit))

    for r in (2, 4, 8):
        def run(seed, r=r):
            horizon = max(1024, 64 * r * r)
            rep = mc.estimate_hitting_time(r, horizon, 10**5, seed)
            lo, hi = rep.mean - 3 * rep.std_error, rep.mean + 3 * rep.std_error
            cid = f"hitting-time-mc/r={r}"
            cap = 1e-3 if r <= 2 else 1e-2
            return [
                _covers(S, cid, lo, hi, float(r * r), log2_truth=math.log2(rep.mean), r=r, n=horizon),
                VerificationCase(
                    suite=S, case_id=cid + "/truncated", truth_kind="empirical", direction="truth<=bound",
                    passed=rep.truncated_fraction <= cap, log2_truth=math.log2(rep.truncated_fraction) if rep.truncated_fraction else NEG_INF,
                    log2_bound=math.log2(cap), ci_low=rep.truncated_fraction, ci_high=rep.truncated_fraction,
                    r=r, n=horizon,
                ),
            ]

        specs.append(CaseSpec(S, ("hitting-time-mc",), f"hitting-time-mc/r={r}", run))
    return specs


_BUILDERS = {
    "fair": _fair_specs,
    "geo": _geo_specs,
    "large": _large_specs,
    "bennett": _bennett_specs,
    "appendix": _appendix_specs,
}


def registry(name: str, scale: Scale = "quick") -> list[CaseSpec]:
    if scale not in SCALES:
        raise ValueError(f"unknown scale {scale!r}")
    if name == "all":
        names = SUITES
    elif name in _BUILDERS:
        names = (name,)
    else:
        raise UnknownSuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITES + ('all',))}")
    sc = SCALES[scale]
    return [spec for s in names for spec in _BUILDERS[s](sc)]


def uncovered_anchors(scale: Scale = "quick") -> list[str]:
    covered = {a for spec in registry("all", scale) for a in spec.anchors}
    return [a for a in ANCHORS if a not in covered]


def audit_coverage(scale: Scale = "quick") -> None:
    """Raise if any anchor has no case in the registry."""
    missing = uncovered_anchors(scale)
    if missing:
        raise AssertionError(f"anchors without cases: {', '.join(missing)}")


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    scale: str
    seed: int
    config_digest: str
    cases: tuple[VerificationCase, ...]

    @property
    def overall_pass(self) -> bool:
        return all(c.passed for c in self.cases)

    @property
    def failures(self) -> list[VerificationCase]:
        return [c for c in self.cases if not c.passed]

    def counts(self) -> dict[str, int]:
        out = {"total": len(self.cases), "failed": len(self.failures)}
        for c in self.cases:
            out[c.truth_kind] = out.get(c.truth_kind, 0) + 1
        return out

    def summary(self) -> str:
        c = self.counts()
        kinds = " ".join(f"{k}={c.get(k, 0)}" for k in ("exact", "empirical", "skipped", "oracle-only"))
        status = "PASS" if self.overall_pass else "FAIL"
        return (f"{status} suite={self.suite} scale={self.scale} seed={self.seed} "
                f"cases={c['total']} failed={c['failed']} {kinds} digest={self.config_digest}")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for case in self.cases:
            f = case.fields()
            w.writerow([_fmt(f[c]) for c in COLUMNS])
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "suite": self.suite,
            "scale": self.scale,
            "seed": self.seed,
            "config_digest": self.config_digest,
            "overall_pass": self.overall_pass,
            "cases": [{c: _json_value(v) for c, v in case.fields().items()} for case in self.cases],
        }
        return json.dumps(doc, indent=2) + "\n"

    def write(self, path: str) -> None:
        text = self.to_json() if str(path).endswith(".json") else self.to_csv()
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def config_digest(name: str, scale: str, seed: int, specs: Sequence[CaseSpec]) -> str:
    payload = json.dumps({"suite": name, "scale": scale, "seed": seed, "cases": [s.key for s in specs]}, sort_keys=True)
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def run_suite(name: str, scale: Scale = "quick", seed: int = 0, workers: int | None = None) -> VerificationReport:
    """Run every case of a suite; rows come back in registry order."""
    specs = registry(name, scale)

    def run(spec: CaseSpec) -> list[VerificationCase]:
        return spec.run(_subseed(seed, spec.key))

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            groups = list(pool.map(run, specs))
    else:
        groups = [run(s) for s in specs]
    cases = tuple(c for g in groups for c in g)
    return VerificationReport(name, scale, seed, config_digest(name, scale, seed, specs), cases)


def read_csv(text: str) -> list[dict]:
    return list(csv.DictReader(io.StringIO(text)))
