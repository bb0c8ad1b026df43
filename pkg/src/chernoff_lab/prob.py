"""Probabilities carried in base-2 log space, optionally with an exact rational."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

NEG_INF = float("-inf")

# |log2p - log2(exact)| allowed when both forms are present
LOG2_CONSISTENCY = 1e-9


def log2_int(x: int) -> float:
    """log2 of a positive integer of any size, accurate to double precision."""
    if x <= 0:
        raise ValueError("log2_int needs a positive integer")
    bits = x.bit_length()
    if bits <= 1000:
        return math.log2(x)
    shift = bits - 64
    return shift + math.log2(x >> shift)


def log2_fraction(q: Fraction) -> float:
    if q < 0:
        raise ValueError("negative probability")
    if q == 0:
        return NEG_INF
    return log2_int(q.numerator) - log2_int(q.denominator)


def log2_sum(terms: Iterable[float]) -> float:
    """Stable log2(sum(2**t)) using a max shift and compensated summation."""
    terms = [t for t in terms if t != NEG_INF]
    if not terms:
        return NEG_INF
    top = max(terms)
    return top + math.log2(math.fsum(2.0 ** (t - top) for t in terms))


def to_fraction(x) -> Fraction:
    """Coerce ints, Fractions, floats and "a/b" strings to an exact Fraction."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"cannot represent {x!r} exactly")
        return Fraction(x)
    return Fraction(x)


@dataclass(frozen=True)
class Prob2:
    """A probability as ``log2p`` in [-inf, 0] plus an optional exact value."""

    log2p: float
    exact: Fraction | None = None

    def __post_init__(self):
        if math.isnan(self.log2p) or self.log2p > 0:
            raise ValueError(f"log2p must lie in [-inf, 0], got {self.log2p!r}")
        if self.exact is not None:
            if not 0 <= self.exact <= 1:
                raise ValueError(f"exact probability {self.exact} outside [0, 1]")
            ref = log2_fraction(self.exact)
            if ref == NEG_INF or self.log2p == NEG_INF:
                if ref != self.log2p:
                    raise ValueError("log2p and exact disagree about a zero probability")
            elif abs(ref - self.log2p) > LOG2_CONSISTENCY:
                raise ValueError("log2p and exact disagree")

    @classmethod
    def from_fraction(cls, q) -> Prob2:
        q = to_fraction(q)
        return cls(min(0.0, log2_fraction(q)), q)

    @classmethod
    def from_log2(cls, log2p: float) -> Prob2:
        return cls(min(0.0, float(log2p)))

    @classmethod
    def zero(cls) -> Prob2:
        return cls(NEG_INF, Fraction(0))

    @classmethod
    def one(cls) -> Prob2:
        return cls(0.0, Fraction(1))

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    @property
    def value(self) -> float:
        # underflows to 0.0 below ~2^-1074; use log2p for tiny values
        if self.exact is not None:
            return float(self.exact)
        return 2.0 ** self.log2p

    def complement(self) -> Prob2:
        if self.exact is None:
            raise ValueError("complement needs the exact form")
        return Prob2.from_fraction(1 - self.exact)

    def __str__(self) -> str:
        return format_prob(self)


def format_prob(p: Prob2) -> str:
    parts = [f"log2={_fmt(p.log2p)}", f"value={p.value:.12e}"]
    if p.exact is not None:
        parts.append(f"exact={p.exact}")
    return " ".join(parts)


def _fmt(x: float) -> str:
    if x == NEG_INF:
        return "-inf"
    return f"{x:.12g}"


@dataclass(frozen=True)
class Prob2Interval:
    """Lower/upper brackets on a probability."""

    lower: Prob2
    upper: Prob2

    def __post_init__(self):
        if self.lower.log2p > self.upper.log2p + LOG2_CONSISTENCY:
            raise ValueError("lower bracket exceeds upper bracket")
        if self.lower.exact is not None and self.upper.exact is not None:
            if self.lower.exact > self.upper.exact:
                raise ValueError("lower bracket exceeds upper bracket")
