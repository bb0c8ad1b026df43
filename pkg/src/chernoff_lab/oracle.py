"""Exact ground-truth tail probabilities and the combinatorics behind them.

Every routine here is a pure function. ``mode="exact"`` works with Python
integers and :class:`fractions.Fraction`; ``mode="float"`` works term-wise in
base-2 log space so that values far below the double range (``4**-k**2``
and friends) stay representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Literal

import numpy as np

from .errors import CapacityError, DomainError, RangeError
from .prob import NEG_INF, Prob2, Prob2Interval, log2_sum, to_fraction

EXACT_CAP = 4096
GEO_DEFAULT_PAD = 64

Mode = Literal["exact", "float", "auto"]

_MODE_ALIASES = {
    "exact": "exact",
    "exact-rational": "exact",
    "rational": "exact",
    "float": "float",
    "float-log": "float",
    "log": "float",
    "auto": "auto",
}


def _resolve_mode(mode: str, n: int) -> str:
    try:
        resolved = _MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}") from None
    if resolved == "auto":
        return "exact" if n <= EXACT_CAP else "float"
    if resolved == "exact" and n > EXACT_CAP:
        raise CapacityError(f"exact mode is capped at n <= {EXACT_CAP} (got n={n})")
    return resolved


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class TailQuery:
    """Pr[X >= threshold] for a fair +-1 walk or a Bernoulli(p) sum of n steps."""

    n: int
    law: Literal["fair-walk", "bernoulli"]
    threshold: int
    p: Fraction | None = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("n must be a positive integer")
        if self.law == "fair-walk":
            if self.p is not None:
                raise DomainError("fair-walk takes no p")
            if not -self.n <= self.threshold <= self.n:
                raise RangeError(f"fair-walk threshold must lie in [-n, n], got {self.threshold}")
        elif self.law == "bernoulli":
            if self.p is None:
                raise DomainError("bernoulli needs p")
            p = to_fraction(self.p)
            object.__setattr__(self, "p", p)
            if not 0 <= p <= Fraction(1, 2):
                raise DomainError("bernoulli p must lie in [0, 1/2]")
            if not 0 <= self.threshold <= self.n:
                raise RangeError(f"bernoulli threshold must lie in [0, n], got {self.threshold}")
        else:
            raise DomainError(f"unknown law {self.law!r}")

    @property
    def mean(self) -> Fraction:
        return Fraction(0) if self.law == "fair-walk" else self.n * self.p


@dataclass(frozen=True)
class WitnessSequence:
    q: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "q", tuple(int(x) for x in self.q))
        if not self.q:
            raise DomainError("a witness sequence needs at least one part")
        if any(x < 0 for x in self.q):
            raise DomainError("witness entries must be non-negative")

    @property
    def parts(self) -> int:
        return len(self.q)

    @property
    def total(self) -> int:
        return sum(self.q)


@dataclass(frozen=True)
class HittingQuery:
    """First time a fair walk reaches +-r, optionally truncated at ``horizon``."""

    r: int
    horizon: int | None = None

    def __post_init__(self):
        if self.r < 1:
            raise DomainError("r must be >= 1")
        if self.horizon is not None and self.horizon < self.r:
            raise DomainError("horizon must be >= r")


# ---------------------------------------------------------------------------
# binomial and walk tails


def _binom_log2_terms(n: int, p: Fraction, lo: int, hi: int) -> np.ndarray:
    """log2 Pr[Bin(n, p) = j] for j in [lo, hi]; requires 0 < p < 1."""
    j = np.arange(lo, hi + 1, dtype=float)
    lg = np.vectorize(math.lgamma, otypes=[float])
    logc = (math.lgamma(n + 1) - lg(j + 1) - lg(n - j + 1)) / math.log(2)
    return logc + j * math.log2(p) + (n - j) * math.log2(1 - p)


def _exact_binom_sum(n: int, p: Fraction, lo: int, hi: int) -> Fraction:
    """Exact sum of Pr[Bin(n, p) = j] over lo <= j <= hi."""
    if lo > hi:
        return Fraction(0)
    a, b = p.numerator, p.denominator
    c = b - a
    if a == 0:
        return Fraction(1 if lo == 0 else 0)
    if c == 0:
        return Fraction(1 if hi == n else 0)
    coeff = math.comb(n, lo)
    pa = a**lo
    pc = c ** (n - lo)
    total = 0
    for j in range(lo, hi + 1):
        total += coeff * pa * pc
        if j < hi:
            coeff = coeff * (n - j) // (j + 1)
            pa *= a
            pc //= c
    return Fraction(total, b**n)


def binom_tail(n: int, p, t: int, mode: Mode = "auto") -> Prob2:
    """Pr[Bin(n, p) >= t]."""
    p = to_fraction(p)
    if n < 0:
        raise DomainError("n must be non-negative")
    if not 0 <= p <= 1:
        raise DomainError("p must lie in [0, 1]")
    if not 0 <= t <= n:
        raise RangeError(f"threshold {t} outside [0, {n}]")
    mode = _resolve_mode(mode, n)
    if t == 0:
        return Prob2.one()
    if mode == "exact":
        return Prob2.from_fraction(_exact_binom_sum(n, p, t, n))
    if p == 0:
        return Prob2.zero()
    if p == 1:
        return Prob2.one()
    return Prob2.from_log2(log2_sum(_binom_log2_terms(n, p, t, n).tolist()))


def binom_point(n: int, p, j: int, mode: Mode = "auto") -> Prob2:
    """Pr[Bin(n, p) = j] (zero outside the support)."""
    p = to_fraction(p)
    mode = _resolve_mode(mode, n)
    if not 0 <= j <= n:
        return Prob2.zero() if mode == "exact" else Prob2.from_log2(NEG_INF)
    if mode == "exact":
        return Prob2.from_fraction(_exact_binom_sum(n, p, j, j))
    if p in (0, 1):
        hit = (p == 0 and j == 0) or (p == 1 and j == n)
        return Prob2.from_log2(0.0 if hit else NEG_INF)
    return Prob2.from_log2(float(_binom_log2_terms(n, p, j, j)[0]))


def binom_pmf(n: int, p, mode: Mode = "auto") -> list[Fraction] | np.ndarray:
    """Full pmf table: Fractions in exact mode, log2 values in float mode."""
    p = to_fraction(p)
    mode = _resolve_mode(mode, n)
    if mode == "exact":
        a, b = p.numerator, p.denominator
        den = b**n
        return [Fraction(math.comb(n, j) * a**j * (b - a) ** (n - j), den) for j in range(n + 1)]
    if p in (0, 1):
        out = np.full(n + 1, NEG_INF)
        out[0 if p == 0 else n] = 0.0
        return out
    return _binom_log2_terms(n, p, 0, n)


def _walk_heads_threshold(n: int, t: int) -> int:
    # S = 2H - n >= t  <=>  H >= ceil((n + t) / 2)
    return max(0, -((-(n + t)) // 2))


def walk_tail(n: int, t: int, mode: Mode = "auto") -> Prob2:
    """Pr[S_n >= t] for the fair +-1 walk; parity is handled by rounding t up."""
    if n < 1:
        raise DomainError("n must be a positive integer")
    if abs(t) > n:
        raise RangeError(f"|t| must be <= n, got t={t}, n={n}")
    return binom_tail(n, Fraction(1, 2), _walk_heads_threshold(n, t), mode)


def walk_point(n: int, s: int, mode: Mode = "auto") -> Prob2:
    """Pr[S_n = s] for the fair walk."""
    if (n + s) % 2:
        return binom_point(n, Fraction(1, 2), -1, mode)
    return binom_point(n, Fraction(1, 2), (n + s) // 2, mode)


def walk_pmf(n: int) -> dict[int, Fraction]:
    """Exact law of S_n built by step-by-step convolution (no binomial formulas)."""
    counts = [1]
    for _ in range(n):
        counts = [a + b for a, b in zip([0] + counts, counts + [0])]
    den = 1 << n
    return {2 * h - n: Fraction(c, den) for h, c in enumerate(counts)}


# ---------------------------------------------------------------------------
# prefix maximum


def _prefix_max_dp_float(n: int, m: int) -> float:
    width = n + m
    cur = np.full(width, NEG_INF)
    cur[n] = 0.0
    hits = []
    pad = np.array([NEG_INF])
    for _ in range(n):
        hits.append(cur[-1] - 1.0)
        cur = np.logaddexp2(np.concatenate([pad, cur[:-1]]), np.concatenate([cur[1:], pad])) - 1.0
    return log2_sum(hits)


def prefix_max_dp_table(n: int, m: int) -> tuple[list[Fraction], Fraction]:
    """Exact absorbing-DP state after n steps: (mass on -n..m-1, absorbed mass)."""
    width = n + m
    cur = [0] * width
    cur[n] = 1
    absorbed = 0
    for step in range(n):
        absorbed += cur[-1] << (n - step - 1)
        cur = [a + b for a, b in zip([0] + cur[:-1], cur[1:] + [0])]
    den = 1 << n
    return [Fraction(c, den) for c in cur], Fraction(absorbed, den)


def prefix_max_tail(
    n: int,
    m: int,
    method: Literal["dp", "reflection"] = "reflection",
    mode: Mode = "auto",
) -> Prob2:
    """Pr[max_{j<=n} S_j >= m] for the fair walk."""
    if not 1 <= m <= n:
        raise RangeError(f"need 1 <= m <= n, got m={m}, n={n}")
    mode = _resolve_mode(mode, n)
    if method == "dp":
        if mode == "exact":
            return Prob2.from_fraction(prefix_max_dp_table(n, m)[1])
        return Prob2.from_log2(_prefix_max_dp_float(n, m))
    if method != "reflection":
        raise ValueError(f"unknown method {method!r}")
    # 2 Pr[S >= m] - Pr[S = m]  ==  Pr[S = m] + 2 Pr[S > m]
    at = walk_point(n, m, mode)
    above = walk_tail(n, m + 1, mode) if m < n else None
    if mode == "exact":
        rest = above.exact if above is not None else Fraction(0)
        return Prob2.from_fraction(at.exact + 2 * rest)
    terms = [at.log2p]
    if above is not None:
        terms.append(above.log2p + 1.0)
    return Prob2.from_log2(log2_sum(terms))


# ---------------------------------------------------------------------------
# hitting times


def _solve_tridiagonal(sub, diag, sup, rhs):
    """Thomas algorithm; works on Fractions as well as floats."""
    n = len(diag)
    c = [None] * n
    d = [None] * n
    c[0] = sup[0] / diag[0] if n > 1 else 0
    d[0] = rhs[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - sub[i] * c[i - 1]
        c[i] = sup[i] / denom if i < n - 1 else 0
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / denom
    x = [None] * n
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def _truncated_hitting_mean(r: int, horizon: int) -> Fraction:
    # E[min(t_r, H)] = sum_{s<H} Pr[t_r > s]; counts carry an implicit 2^-s
    width = 2 * r - 1
    cur = [0] * width
    cur[r - 1] = 1
    acc = 0
    for s in range(horizon):
        acc += sum(cur) << (horizon - s)
        cur = [a + b for a, b in zip([0] + cur[:-1], cur[1:] + [0])]
    return Fraction(acc, 1 << horizon)


def hitting_time_mean(q: HittingQuery | int) -> Fraction:
    """Expected first time the fair walk reaches +-r.

    Without a horizon this solves the first-step equations
    ``E_i = 1 + (E_{i-1} + E_{i+1}) / 2`` on the interior states with
    ``E_{+-r} = 0`` in exact arithmetic and returns ``E_0``. With a horizon it
    returns ``E[min(t_r, horizon)]`` from an exact forward DP.
    """
    if isinstance(q, int):
        q = HittingQuery(q)
    r = q.r
    if q.horizon is not None:
        return _truncated_hitting_mean(r, q.horizon)
    size = 2 * r - 1
    two = Fraction(2)
    sub = [Fraction(-1)] * size
    sup = [Fraction(-1)] * size
    diag = [two] * size
    rhs = [two] * size
    return _solve_tridiagonal(sub, diag, sup, rhs)[r - 1]


# ---------------------------------------------------------------------------
# witness sequences


def compositions_count(total: int, parts: int) -> int:
    """Number of non-negative integer tuples of length ``parts`` summing to ``total``."""
    if total < 0 or parts < 1:
        raise DomainError("need total >= 0 and parts >= 1")
    return math.comb(total + parts - 1, parts - 1)


def enumerate_witnesses(total: int, parts: int) -> Iterator[WitnessSequence]:
    """Lexicographic enumeration, used as an independent count."""
    if total < 0 or parts < 1:
        raise DomainError("need total >= 0 and parts >= 1")

    def rec(left: int, slots: int):
        if slots == 1:
            yield (left,)
            return
        for first in range(left + 1):
            for rest in rec(left - first, slots - 1):
                yield (first, *rest)

    for q in rec(total, parts):
        yield WitnessSequence(q)


def witness_encode(w: WitnessSequence) -> str:
    """q_1 zeros then a one, q_2 zeros then a one, ..."""
    return "".join("0" * q + "1" for q in w.q)


def witness_decode(bits: str) -> WitnessSequence:
    if not bits or bits[-1] != "1" or set(bits) - {"0", "1"}:
        raise DomainError(f"not a witness encoding: {bits!r}")
    return WitnessSequence(tuple(len(run) for run in bits[:-1].split("1")))


# ---------------------------------------------------------------------------
# sums of integer geometric variables


def geometric_sum_tail(n: int, p, t: int, tail_cap: int | None = None) -> Prob2Interval:
    """Brackets on Pr[Y_1 + ... + Y_n >= t] with Pr[Y_i >= j] = p**j.

    Each Y_i is convolved on the values 0..tail_cap-1; the mass of
    ``{some Y_i >= tail_cap}`` is left out of the lower bracket and added to
    the upper bracket.
    """
    p = to_fraction(p)
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    if n < 1:
        raise DomainError("n must be >= 1")
    if t < 0:
        raise RangeError("threshold must be >= 0")
    if tail_cap is None:
        tail_cap = t + GEO_DEFAULT_PAD
    if tail_cap < t:
        raise CapacityError(f"tail_cap {tail_cap} is below the threshold {t}")
    if t == 0:
        return Prob2Interval(Prob2.one() if tail_cap > 0 else Prob2.zero(), Prob2.one())

    pmf = [p**j * (1 - p) for j in range(t)]  # values below t are all we need
    dist = [Fraction(1)] + [Fraction(0)] * (t - 1)
    for _ in range(n):
        dist = [sum(dist[i] * pmf[s - i] for i in range(s + 1)) for s in range(t)]
    below = sum(dist)  # Pr[sum <= t-1]; such outcomes never touch the cap
    kept = (1 - p**tail_cap) ** n
    lower = kept - below
    upper = 1 - below
    return Prob2Interval(Prob2.from_fraction(lower), Prob2.from_fraction(upper))


def exact_tail(q: TailQuery, mode: Mode = "auto") -> Prob2:
    if q.law == "fair-walk":
        return walk_tail(q.n, q.threshold, mode)
    return binom_tail(q.n, q.p, q.threshold, mode)
