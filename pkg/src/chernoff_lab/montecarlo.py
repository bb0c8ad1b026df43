"""Seeded Monte Carlo estimation.

Every trial reads its uniforms from the counter-based generator at
(seed, trial, step), so results do not depend on chunking or on the number of
worker threads.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence, Union

import numpy as np
from scipy.stats import beta, norm

from .adversary import (
    GameConfig,
    GroupedLower,
    Plan,
    Strategy,
    make_strategy,
    play,
)
from .errors import DomainError, ProtocolViolation, RangeError
from .oracle import TailQuery
from .prob import to_fraction
from .rng import uniforms

DEFAULT_LEVEL = 0.99
# uniforms per chunk; bounds peak memory at a few hundred MB
_CHUNK_CELLS = 1 << 21


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    successes: int
    estimate: float
    ci_low: float
    ci_high: float
    ci_method: str
    ci_level: float
    seed: int
    subject: str

    @property
    def ci_width(self) -> float:
        return self.ci_high - self.ci_low


@dataclass(frozen=True)
class StrategySubject:
    strategy: str
    config: GameConfig

    def describe(self) -> str:
        c = self.config
        return f"strategy={self.strategy} n={c.n} v={c.v} mode={c.budget_mode}"


Subject = Union[TailQuery, StrategySubject]


def clopper_pearson(successes: int, trials: int, level: float = DEFAULT_LEVEL) -> tuple[float, float]:
    if trials < 1:
        raise DomainError("need at least one trial")
    if not 0 <= successes <= trials:
        raise DomainError("successes must lie in [0, trials]")
    alpha = 1 - level
    est = successes / trials
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return min(lo, est), max(hi, est)


def make_report(successes: int, trials: int, seed: int, subject: str, level: float = DEFAULT_LEVEL) -> SimulationReport:
    lo, hi = clopper_pearson(successes, trials, level)
    return SimulationReport(
        trials=trials,
        successes=int(successes),
        estimate=successes / trials,
        ci_low=lo,
        ci_high=hi,
        ci_method="clopper-pearson",
        ci_level=level,
        seed=seed,
        subject=subject,
    )


# ---------------------------------------------------------------------------
# path generation


def _chunks(trials: int, n: int) -> list[tuple[int, int]]:
    size = max(1, _CHUNK_CELLS // max(n, 1))
    return [(a, min(a + size, trials)) for a in range(0, trials, size)]


def _map_chunks(fn: Callable[[int, int], np.ndarray], trials: int, n: int, workers: int | None) -> np.ndarray:
    spans = _chunks(trials, n)
    if workers and workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda s: fn(*s), spans))
    else:
        parts = [fn(a, b) for a, b in spans]
    return np.concatenate(parts) if parts else np.empty(0)


def iid_steps(q: TailQuery, seed: int, start: int, stop: int) -> np.ndarray:
    """Steps of trials start..stop-1: +-1 for the fair walk, 0/1 for Bernoulli(p)."""
    u = uniforms(seed, np.arange(start, stop), 0, q.n)
    if q.law == "fair-walk":
        return np.where(u < 0.5, 1.0, -1.0)
    return (u < float(q.p)).astype(np.float64)


class _PlanRunner:
    """Vectorised replay of a history-independent strategy plan."""

    def __init__(self, plan: Plan, config: GameConfig):
        n = config.n
        steps = plan.steps[:n]
        self.n = n
        self.stop_at = plan.stop_at
        self.length = len(steps)
        self.a = np.zeros(n)
        self.b = np.zeros(n)
        self.pp = np.zeros(n)
        for i, s in enumerate(steps):
            if not s.degenerate:
                self.a[i], self.b[i], self.pp[i] = float(s.a), float(s.b), float(s.p_plus)
        spent = [Fraction(0)]
        for s in steps:
            spent.append(spent[-1] + s.variance)
        spent += [spent[-1]] * (n - self.length)
        self.spent = spent
        over = next((i for i in range(1, len(spent)) if spent[i] > config.v), None)
        self.over_step = None if over is None else over - 1
        self.config = config

    def steps(self, start: int, stop: int) -> tuple[np.ndarray, np.ndarray]:
        """Step matrix and the number of non-stopped steps per trial."""
        u = uniforms(self.config.seed, np.arange(start, stop), 0, self.n)
        x = np.where(u < self.pp, self.b, -self.a) + 0.0
        played = np.full(stop - start, self.length, dtype=np.int64)
        if self.stop_at is not None:
            z = np.zeros(stop - start)
            active = np.ones(stop - start, dtype=bool)
            for i in range(self.length):
                active &= z < self.stop_at
                x[:, i] = np.where(active, x[:, i], 0.0)
                z += x[:, i]
                played -= ~active
            x[:, self.length :] = 0.0
        return x, played

    def referee(self, played: np.ndarray) -> None:
        if played.size == 0:
            return
        top = int(played.max())
        if self.over_step is not None and top > self.over_step:
            raise ProtocolViolation(
                f"step {self.over_step}: plan exceeds the variance budget {self.config.v}",
                step=self.over_step,
            )
        if self.config.budget_mode == "exactly":
            low = int(played.min())
            if self.spent[low] != self.config.v:
                raise ProtocolViolation(f"game ended with unspent budget {self.config.v - self.spent[low]}")


def _resolve(subject: StrategySubject) -> Strategy:
    return make_strategy(subject.strategy, subject.config.v)


def sample_statistic(
    subject: Subject,
    trials: int,
    seed: int,
    stat: Callable[[np.ndarray], np.ndarray],
    workers: int | None = None,
) -> np.ndarray:
    """Apply ``stat`` to the step matrix of every trial and concatenate.

    For strategy subjects the config's own seed is replaced by ``seed``.
    """
    if trials < 1:
        raise DomainError("trials must be at least 1")
    if isinstance(subject, TailQuery):
        return _map_chunks(lambda a, b: stat(iid_steps(subject, seed, a, b)), trials, subject.n, workers)
    if not isinstance(subject, StrategySubject):
        raise TypeError(f"unsupported subject {subject!r}")
    cfg = subject.config
    cfg = GameConfig(cfg.n, cfg.v, cfg.budget_mode, seed)
    strategy = _resolve(subject)
    plan = strategy.plan(cfg.v, cfg.n)
    if plan is None:
        # history-dependent strategy: play games one by one
        def run(a, b):
            rows = [play(cfg, strategy, t).x for t in range(a, b)]
            return stat(np.array(rows, dtype=np.float64))

        return _map_chunks(run, trials, cfg.n, workers)
    runner = _PlanRunner(plan, cfg)

    def run(a, b):
        x, played = runner.steps(a, b)
        runner.referee(played)
        return stat(x)

    return _map_chunks(run, trials, cfg.n, workers)


def _finals(x: np.ndarray) -> np.ndarray:
    # sequential accumulation, matching the scalar game
    return np.cumsum(x, axis=1)[:, -1] if x.shape[1] else np.zeros(x.shape[0])


def _prefix_max(x: np.ndarray) -> np.ndarray:
    if not x.shape[1]:
        return np.zeros(x.shape[0])
    return np.maximum(np.cumsum(x, axis=1).max(axis=1), 0.0)


def describe(subject: Subject) -> str:
    if isinstance(subject, TailQuery):
        if subject.law == "fair-walk":
            return f"fair-walk n={subject.n}"
        return f"bernoulli n={subject.n} p={subject.p}"
    return subject.describe()


def estimate_tail(
    subject: Subject,
    threshold: float | None = None,
    trials: int = 10**5,
    seed: int = 0,
    level: float = DEFAULT_LEVEL,
    workers: int | None = None,
) -> SimulationReport:
    """Empirical Pr[X >= threshold]; a TailQuery supplies its own threshold by default."""
    if threshold is None:
        if not isinstance(subject, TailQuery):
            raise DomainError("threshold required for strategy subjects")
        threshold = subject.threshold
    return estimate_tails(subject, [threshold], trials, seed, level, workers)[0]


def estimate_tails(
    subject: Subject,
    thresholds: Sequence[float],
    trials: int,
    seed: int = 0,
    level: float = DEFAULT_LEVEL,
    workers: int | None = None,
) -> list[SimulationReport]:
    """Several thresholds from one shared sample."""
    finals = sample_statistic(subject, trials, seed, _finals, workers)
    name = describe(subject)
    return [
        make_report(int(np.count_nonzero(finals >= float(t))), trials, seed, f"Pr[X >= {float(t):g}] {name}", level)
        for t in thresholds
    ]


def estimate_prefix_max_tail(
    n: int, m: int, trials: int, seed: int = 0, level: float = DEFAULT_LEVEL, workers: int | None = None
) -> SimulationReport:
    if not 1 <= m <= n:
        raise RangeError(f"prefix-max threshold {m} outside [1, {n}]")
    tops = sample_statistic(TailQuery(n, "fair-walk", 0), trials, seed, _prefix_max, workers)
    return make_report(int(np.count_nonzero(tops >= m)), trials, seed, f"Pr[Y_max >= {m}] fair-walk n={n}", level)


def prefix_max_sample(n: int, trials: int, seed: int = 0, workers: int | None = None) -> np.ndarray:
    return sample_statistic(TailQuery(n, "fair-walk", 0), trials, seed, _prefix_max, workers)


def estimate_conditional_growth(
    n: int, alpha: float, beta_: float, trials: int, seed: int = 0, level: float = DEFAULT_LEVEL
) -> tuple[SimulationReport, SimulationReport]:
    """(Pr[Y_max >= beta+alpha+1 | Y_max >= beta], Pr[Y_max >= alpha]) for the fair walk.

    The conditional estimate counts only trials with Y_max >= beta.
    """
    tops = prefix_max_sample(n, trials, seed)
    given = tops >= beta_
    m = int(np.count_nonzero(given))
    if m == 0:
        raise DomainError("conditioning event never occurred")
    hits = int(np.count_nonzero(tops[given] >= beta_ + alpha + 1))
    cond = make_report(hits, m, seed, f"Pr[Y_max >= {beta_ + alpha + 1:g} | Y_max >= {beta_:g}] n={n}", level)
    base = make_report(int(np.count_nonzero(tops >= alpha)), trials, seed, f"Pr[Y_max >= {alpha:g}] n={n}", level)
    return cond, base


def estimate_group_success(
    strategy: GroupedLower, trials: int, seed: int = 0, level: float = DEFAULT_LEVEL, workers: int | None = None
) -> SimulationReport:
    """Empirical probability that every group of a grouped strategy hits its target."""
    bounds = strategy.group_bounds()
    starts = np.array([a for a, _ in bounds])
    targets = np.array(strategy.targets, dtype=np.float64)

    def stat(x):
        sums = np.add.reduceat(x, starts, axis=1)
        return np.all(sums >= targets, axis=1)

    subject = StrategySubject(strategy.name, GameConfig(strategy.v, strategy.v, "exactly", seed))
    ok = sample_statistic(subject, trials, seed, stat, workers)
    return make_report(int(np.count_nonzero(ok)), trials, seed, f"all groups succeed {strategy.name} v={strategy.v}", level)


@dataclass(frozen=True)
class MomentReport:
    """Sample means of X and of X^2 - sum(v_i), with standard errors."""

    trials: int
    mean_x: float
    se_x: float
    mean_gap: float
    se_gap: float
    mean_variance: float
    level: float

    def _half(self, se: float) -> float:
        return float(norm.ppf(0.5 + self.level / 2)) * se

    @property
    def martingale_ok(self) -> bool:
        return abs(self.mean_x) <= self._half(self.se_x)

    @property
    def variance_ok(self) -> bool:
        return abs(self.mean_gap) <= self._half(self.se_gap)


def moment_check(
    subject: StrategySubject, trials: int, seed: int = 0, level: float = DEFAULT_LEVEL, workers: int | None = None
) -> MomentReport:
    """Paired check of E[X] = 0 and E[X^2] = E[sum v_i] over seeded games."""
    cfg = subject.config
    strategy = _resolve(subject)
    plan = strategy.plan(cfg.v, cfg.n)
    variances = np.zeros(cfg.n)
    if plan is not None:
        for i, s in enumerate(plan.steps[: cfg.n]):
            variances[i] = float(s.variance)

    if plan is None:
        raise DomainError("moment check needs a planned strategy")

    def stat(x):
        finals = _finals(x)
        if plan.stop_at is not None:
            spent = _played_mask(x, plan) @ variances
        else:
            spent = np.full(x.shape[0], variances.sum())
        return np.stack([finals, finals**2 - spent, spent], axis=1)

    rows = sample_statistic(subject, trials, seed, stat, workers).reshape(trials, 3)
    sd = rows.std(axis=0, ddof=1) if trials > 1 else np.zeros(3)
    root = math.sqrt(trials)
    return MomentReport(
        trials=trials,
        mean_x=float(rows[:, 0].mean()),
        se_x=float(sd[0] / root),
        mean_gap=float(rows[:, 1].mean()),
        se_gap=float(sd[1] / root),
        mean_variance=float(rows[:, 2].mean()),
        level=level,
    )


def _played_mask(x: np.ndarray, plan: Plan) -> np.ndarray:
    """1.0 where the step was played, 0.0 once the stop rule fired."""
    z = np.cumsum(x, axis=1)
    before = np.concatenate([np.zeros((x.shape[0], 1)), z[:, :-1]], axis=1)
    reached = np.maximum.accumulate(before >= plan.stop_at, axis=1)
    mask = (~reached).astype(np.float64)
    mask[:, len(plan.steps) :] = 0.0
    return mask


@dataclass(frozen=True)
class HittingReport:
    r: int
    horizon: int
    trials: int
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    truncated_fraction: float
    level: float
    seed: int


def estimate_hitting_time(
    r: int, horizon: int, trials: int, seed: int = 0, level: float = DEFAULT_LEVEL, block: int = 256
) -> HittingReport:
    """Mean of min(t_r, horizon) for the fair walk, t_r the first time |S| = r."""
    if r < 1:
        raise DomainError("r must be a positive integer")
    if horizon < r:
        raise DomainError(f"horizon {horizon} is below r = {r}")
    if trials < 1:
        raise DomainError("trials must be at least 1")
    times = np.full(trials, horizon, dtype=np.int64)
    hit_any = np.zeros(trials, dtype=bool)
    pos = np.zeros(trials, dtype=np.int64)
    alive = np.arange(trials)
    t = 0
    while t < horizon and alive.size:
        blk = min(block, horizon - t)
        u = uniforms(seed, alive, t, blk)
        path = pos[alive, None] + np.cumsum(np.where(u < 0.5, 1, -1), axis=1)
        hit = np.abs(path) >= r
        got = hit.any(axis=1)
        first = hit.argmax(axis=1)
        idx = alive[got]
        times[idx] = t + first[got] + 1
        hit_any[idx] = True
        pos[alive] = path[:, -1]
        alive = alive[~got]
        t += blk
    mean = float(times.mean())
    se = float(times.std(ddof=1) / math.sqrt(trials)) if trials > 1 else 0.0
    half = float(norm.ppf(0.5 + level / 2)) * se
    return HittingReport(
        r=r,
        horizon=horizon,
        trials=trials,
        mean=mean,
        std_error=se,
        ci_low=mean - half,
        ci_high=mean + half,
        truncated_fraction=float(1 - hit_any.mean()),
        level=level,
        seed=seed,
    )


def adaptive_geometric_sums(n: int, p, trials: int, seed: int = 0) -> np.ndarray:
    """Sums of n integer geometrics whose parameters adapt to the history.

    Y_i satisfies Pr[Y_i >= j] = q_i^j with q_i = p after a zero (or at the
    start) and q_i = p/2 otherwise, so every q_i <= p.
    """
    p = float(to_fraction(p))
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    u = uniforms(seed, np.arange(trials), 0, n)
    log_tail = np.log1p(-u)
    total = np.zeros(trials, dtype=np.int64)
    prev = np.zeros(trials, dtype=np.int64)
    for i in range(n):
        q = np.where(prev == 0, p, p / 2)
        y = np.floor(log_tail[:, i] / np.log(q)).astype(np.int64)
        total += y
        prev = y
    return total
