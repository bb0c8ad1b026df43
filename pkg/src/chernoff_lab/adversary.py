"""The adaptive martingale game.

At each step a strategy picks a mean-zero two-point law {-a, +b} (variance
a*b) after seeing the outcomes so far. A referee samples the step, tracks the
spent variance in exact rationals and rejects any overspend.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Literal, Protocol, Sequence

from .errors import DomainError, ProtocolViolation, UnknownStrategyError
from .oracle import walk_tail
from .prob import to_fraction
from .rng import trial_uniforms

BudgetMode = Literal["at-most", "exactly"]


@dataclass(frozen=True)
class StepDistribution:
    """Two-point law on {-a, +b} with Pr[+b] = a/(a+b); a = b = 0 is the point mass at 0."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        a, b = to_fraction(self.a), to_fraction(self.b)
        if not (0 <= a <= 1 and 0 <= b <= 1):
            raise DomainError(f"support points must lie in [-1, 1], got a={a}, b={b}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def p_plus(self) -> Fraction:
        s = self.a + self.b
        return self.a / s if s else Fraction(0)

    @property
    def variance(self) -> Fraction:
        return self.a * self.b

    @property
    def mean(self) -> Fraction:
        return self.p_plus * self.b - (1 - self.p_plus) * self.a

    @property
    def degenerate(self) -> bool:
        return self.variance == 0

    def sample(self, u: float) -> float:
        """Map a uniform on [0, 1) to an outcome."""
        if self.degenerate:
            return 0.0
        return float(self.b) if u < float(self.p_plus) else -float(self.a)

    def support(self) -> tuple[float, float]:
        return (-float(self.a), float(self.b))


POINT_MASS = StepDistribution(Fraction(0), Fraction(0))
RADEMACHER = StepDistribution(Fraction(1), Fraction(1))


@dataclass(frozen=True)
class GameConfig:
    n: int
    v: Fraction
    budget_mode: BudgetMode = "at-most"
    seed: int = 0

    def __post_init__(self):
        v = to_fraction(self.v)
        object.__setattr__(self, "v", v)
        if v <= 0:
            raise DomainError("variance budget must be positive")
        if self.n < 1:
            raise DomainError("need at least one step")
        if self.budget_mode not in ("at-most", "exactly"):
            raise DomainError(f"unknown budget mode {self.budget_mode!r}")


@dataclass
class Trajectory:
    x: list[float]
    z: list[float]
    v_spent: list[Fraction]
    laws: list[StepDistribution]
    stopped_at: int | None = None
    seed: int = 0
    trial: int = 0

    @property
    def final(self) -> float:
        return self.z[-1] if self.z else 0.0

    @property
    def y_max(self) -> float:
        # the empty prefix counts, so y_max >= 0
        return max([0.0, *self.z])

    @property
    def total_variance(self) -> Fraction:
        return sum(self.v_spent, Fraction(0))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["step", "x", "z", "v_spent"])
        for i, (x, z, v) in enumerate(zip(self.x, self.z, self.v_spent), start=1):
            w.writerow([i, repr(x), repr(z), str(v)])
        return buf.getvalue()


@dataclass(frozen=True)
class Plan:
    """A history-independent schedule: fixed step laws, plus an optional stop rule
    (stop once the running sum reaches ``stop_at``). Used for batched simulation."""

    steps: tuple[StepDistribution, ...]
    stop_at: float | None = None


class Strategy(Protocol):
    name: str

    def decide(
        self, history: Sequence[float], remaining_budget: Fraction, remaining_steps: int
    ) -> StepDistribution | None: ...

    def plan(self, v: Fraction, n: int) -> Plan | None: ...


def _plan_from_decisions(strategy, v: Fraction, n: int) -> tuple[StepDistribution, ...]:
    # only valid for strategies whose decisions ignore the history
    steps = []
    remaining = v
    for i in range(n):
        d = strategy.decide((), remaining, n - i)
        if d is None:
            break
        steps.append(d)
        remaining -= d.variance
    return tuple(steps)


class Rademacher:
    """Fair +-1 steps while a unit of budget remains; a final fractional
    remainder rem is spent as {-rem, +1}."""

    name = "rademacher"

    def decide(self, history, remaining_budget, remaining_steps):
        if remaining_budget >= 1:
            return RADEMACHER
        if remaining_budget > 0:
            return StepDistribution(remaining_budget, Fraction(1))
        return None

    def plan(self, v, n):
        return Plan(_plan_from_decisions(self, to_fraction(v), n))


def _quarter_sqrt_ceil(s: int) -> int:
    """Least integer t with 4t >= sqrt(s), i.e. 16 t^2 >= s."""
    t = math.isqrt(s // 16)
    while 16 * t * t < s:
        t += 1
    return t


class GroupedLower:
    """v fair unit steps split into k^2 consecutive groups.

    Success means every group sum reaches ceil(sqrt(size)/4). When k^2 does not
    divide v the last group absorbs the remainder (``uneven`` is set).
    """

    def __init__(self, v, k: int):
        v = to_fraction(v)
        if v.denominator != 1 or v < 1:
            raise DomainError("grouped-lower needs a positive integer budget")
        if k < 1:
            raise DomainError("grouped-lower needs k >= 1")
        v = int(v)
        if v < k * k:
            raise DomainError(f"budget {v} is smaller than k^2 = {k * k}")
        self.v, self.k = v, k
        self.name = f"grouped-lower:{k}"
        g = k * k
        base = v // g
        self.sizes = tuple([base] * (g - 1) + [v - base * (g - 1)])
        self.uneven = v % g != 0
        self.targets = tuple(_quarter_sqrt_ceil(s) for s in self.sizes)

    @property
    def threshold(self) -> float:
        return self.k * math.sqrt(self.v) / 4

    def decide(self, history, remaining_budget, remaining_steps):
        return RADEMACHER if remaining_budget >= 1 else None

    def plan(self, v, n):
        return Plan(_plan_from_decisions(self, to_fraction(v), n))

    def group_success_probability(self, j: int) -> Fraction:
        return walk_tail(self.sizes[j], self.targets[j], mode="exact").exact

    def predicted_joint_success(self) -> Fraction:
        out = Fraction(1)
        for j in range(len(self.sizes)):
            out *= self.group_success_probability(j)
        return out

    def group_bounds(self) -> list[tuple[int, int]]:
        out, start = [], 0
        for s in self.sizes:
            out.append((start, start + s))
            start += s
        return out

    def joint_success(self, traj: Trajectory) -> bool:
        return all(sum(traj.x[a:b]) >= t for (a, b), t in zip(self.group_bounds(), self.targets))


class Burst:
    """r*v steps of {-1/r, +1}: variance 1/r each, exactly v in total.
    Each step hits +1 with probability 1/(r+1)."""

    def __init__(self, v, r):
        v, r = to_fraction(v), to_fraction(r)
        if r < 2:
            raise DomainError("burst needs r >= 2")
        rv = r * v
        if v <= 0 or rv.denominator != 1:
            raise DomainError(f"r*v = {rv} is not a positive integer")
        self.v, self.r = v, r
        self.count = int(rv)
        self.law = StepDistribution(1 / r, Fraction(1))
        self.name = f"burst:{r}"

    def decide(self, history, remaining_budget, remaining_steps):
        return self.law if remaining_budget >= self.law.variance else None

    def plan(self, v, n):
        return Plan(_plan_from_decisions(self, to_fraction(v), n))


class StopAtThreshold:
    """Follow ``inner`` until the running sum reaches tau, then stop."""

    def __init__(self, tau, inner):
        self.tau = to_fraction(tau)
        self.inner = inner
        self.name = f"stop:{self.tau}:{inner.name}"

    def decide(self, history, remaining_budget, remaining_steps):
        if sum(history) >= self.tau:
            return None
        return self.inner.decide(history, remaining_budget, remaining_steps)

    def plan(self, v, n):
        p = self.inner.plan(v, n)
        if p is None:
            return None
        tau = float(self.tau)
        stop = tau if p.stop_at is None else min(tau, p.stop_at)
        return Plan(p.steps, stop)


def grouped_lower_strategy(v, k: int) -> GroupedLower:
    return GroupedLower(v, k)


def burst_strategy(v, r) -> Burst:
    return Burst(v, r)


def make_strategy(identifier: str, v) -> Strategy:
    """Resolve "rademacher", "grouped-lower:k", "burst:r" or "stop:tau:inner"."""
    head, _, rest = identifier.partition(":")
    try:
        if head == "rademacher" and not rest:
            return Rademacher()
        if head == "grouped-lower" and rest:
            return GroupedLower(v, int(rest))
        if head == "burst" and rest:
            return Burst(v, to_fraction(rest))
        if head == "stop" and ":" in rest:
            tau, _, inner = rest.partition(":")
            return StopAtThreshold(to_fraction(tau), make_strategy(inner, v))
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, DomainError):
            raise
        raise UnknownStrategyError(f"bad strategy parameters in {identifier!r}") from exc
    raise UnknownStrategyError(f"unknown strategy {identifier!r}")


def default_horizon(strategy: Strategy, v) -> int:
    """Enough steps for the strategy to spend its whole budget."""
    inner = strategy.inner if isinstance(strategy, StopAtThreshold) else strategy
    if isinstance(inner, Burst):
        return inner.count
    return max(1, math.ceil(to_fraction(v)))


def play(config: GameConfig, strategy: Strategy, trial: int = 0) -> Trajectory:
    """Run one game. Step i consumes the uniform for (seed, trial, i)."""
    n = config.n
    u = trial_uniforms(config.seed, trial, n)
    remaining = config.v
    history: list[float] = []
    z_list: list[float] = []
    spent: list[Fraction] = []
    laws: list[StepDistribution] = []
    z = 0.0
    stopped = None
    for i in range(n):
        law = None
        if stopped is None:
            law = strategy.decide(tuple(history), remaining, n - i)
            if law is None:
                stopped = i
        if law is None:
            law = POINT_MASS
        if not isinstance(law, StepDistribution):
            raise ProtocolViolation(f"step {i}: strategy returned {law!r}", step=i)
        if law.variance > remaining:
            raise ProtocolViolation(
                f"step {i}: variance {law.variance} exceeds remaining budget {remaining}", step=i
            )
        remaining -= law.variance
        x = law.sample(u[i])
        z += x
        history.append(x)
        z_list.append(z)
        spent.append(law.variance)
        laws.append(law)
    if config.budget_mode == "exactly" and remaining != 0:
        raise ProtocolViolation(f"game ended with unspent budget {remaining}")
    return Trajectory(history, z_list, spent, laws, stopped, config.seed, trial)


def checkpoints(traj: Trajectory, spacing) -> list[int]:
    """1-based first times the running sum reaches spacing, 2*spacing, ...

    A single step crossing several levels yields repeated times; this cannot
    happen when spacing is at least the largest step.
    """
    spacing = float(spacing)
    if spacing <= 0:
        raise DomainError("spacing must be positive")
    out = []
    level = 1
    for i, z in enumerate(traj.z, start=1):
        while z >= level * spacing:
            out.append(i)
            level += 1
    return out
