"""Catalog of explicit-constant tail bounds.

Each function is total: it always returns a :class:`BoundResult`, recording
broken side conditions in ``violated`` instead of raising. Only inputs for
which the formula itself is undefined (``p`` outside (0, 1), an empty list of
means, ...) raise :class:`~chernoff_lab.errors.DomainError`.

Besides the float ``log2_bound`` every result carries a rational
``certificate`` when one can be produced rigorously: a number on the
conservative side of the bound (``<=`` the bound for upper bounds, ``>=`` for
lower bounds). When the bound is itself rational, ``exact`` holds it and the
certificate equals it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Literal, Sequence

from .errors import DomainError
from .prob import to_fraction

Direction = Literal["upper", "lower"]

FAMILIES = (
    "chebyshev-max",
    "chebyshev-max-adaptive",
    "poor-fair",
    "geo-sum",
    "geo-sum-int",
    "fair-upper",
    "fair-lower",
    "large-upper",
    "large-lower",
    "bennett-poor-high-v",
    "bennett-poor-low-v",
    "bennett-small",
    "bennett-large",
    "hoeffding-small",
    "hoeffding-large",
    "quarter-sqrt",
    "checkpoint-ladder",
    "grouped-lower",
)

# crossover between the two regimes of `query`, as a multiple of the mean
CROSSOVER = 2

_ROOT_BITS = 96
_MAX_ROOT_DEGREE = 1024
_MAX_POWER = 1 << 16
_E_TERMS = 30


@dataclass(frozen=True)
class BoundResult:
    family: str
    direction: Direction
    threshold: float
    log2_bound: float
    valid: bool
    violated: tuple[str, ...]
    citation: str
    params: dict = field(default_factory=dict, compare=False)
    exact: Fraction | None = None
    certificate: Fraction | None = None

    @property
    def vacuous(self) -> bool:
        return self.direction == "upper" and self.log2_bound >= 0

    @property
    def value(self) -> float:
        # vacuous bounds can sit far above the float range
        return 2.0**self.log2_bound if self.log2_bound < 1024 else math.inf


def _make(
    family: str,
    direction: Direction,
    threshold: float,
    log2_bound: float,
    violated: list[str],
    citation: str,
    params: dict,
    exact: Fraction | None = None,
    certificate: Fraction | None = None,
) -> BoundResult:
    violated = list(violated)
    if direction == "upper" and log2_bound > 0 and "bound<=1" not in violated:
        violated.append("bound<=1")
    if exact is not None:
        certificate = exact
    return BoundResult(
        family=family,
        direction=direction,
        threshold=float(threshold),
        log2_bound=float(log2_bound),
        valid=not violated,
        violated=tuple(violated),
        citation=citation,
        params=params,
        exact=exact,
        certificate=certificate,
    )


# ---------------------------------------------------------------------------
# rigorous rational approximations


def _iroot(x: int, b: int) -> int:
    """floor(x ** (1/b)) for integers x >= 0, b >= 1."""
    if x < 2 or b == 1:
        return x
    y = 1 << -(-x.bit_length() // b)
    while True:
        z = ((b - 1) * y + x // y ** (b - 1)) // b
        if z >= y:
            return y
        y = z


def _root(q: Fraction, b: int, up: bool) -> Fraction:
    """Rational within 2**-_ROOT_BITS (relative) of q ** (1/b), rounded down or up."""
    if b == 1:
        return q
    num, den = q.numerator, q.denominator
    scale = 1 << _ROOT_BITS
    radicand = num * den ** (b - 1) * scale**b
    lo = _iroot(radicand, b)
    if up and lo**b != radicand:
        lo += 1
    return Fraction(lo, den * scale)


def _rational_pow(base: Fraction, exp: Fraction, up: bool) -> tuple[Fraction | None, Fraction | None]:
    """base ** exp for rational exp: (exact value or None, one-sided approximation).

    Roots of degree above _MAX_ROOT_DEGREE are not attempted.
    """
    a, b = exp.numerator, exp.denominator
    if b > _MAX_ROOT_DEGREE or abs(a) > _MAX_POWER:
        return None, None
    whole = base**a
    if b == 1:
        return whole, whole
    rounded = _root(whole, b, up)
    if rounded ** b == whole:
        return rounded, rounded
    return None, rounded


def _e_bracket() -> tuple[Fraction, Fraction]:
    lo = sum(Fraction(1, math.factorial(j)) for j in range(_E_TERMS))
    hi = lo + Fraction(2, math.factorial(_E_TERMS))
    return lo, hi


def _sqrt(x) -> float:
    return math.sqrt(float(x))


# ---------------------------------------------------------------------------
# fair coins


def chebyshev_max_bound(n: int, k) -> BoundResult:
    """Prefix maximum of a fair walk: Pr[max_j S_j >= k sqrt(n)] <= 2/k^2.

    The value is capped at 1, so small ``k`` gives a vacuous but valid bound.
    """
    k = to_fraction(k)
    violated = [] if k >= 1 else ["k>=1"]
    value = min(Fraction(1), 2 / (k * k)) if k > 0 else Fraction(1)
    return _make(
        "chebyshev-max",
        "upper",
        float(k) * math.sqrt(n),
        math.log2(value),
        violated,
        "extended Chebyshev: Pr[max_j S_j >= k*sqrt(n)] <= 2/k^2",
        {"n": n, "k": k},
        exact=value,
    )


def poor_fair_bound(n: int, k: int) -> BoundResult:
    violated = []
    if k % 2:
        violated.append("k even")
    if k < 2:
        violated.append("k>=2")
    if k * k > n:
        violated.append("k<=sqrt(n)")
    exact, cert = _rational_pow(Fraction(2), Fraction(-k, 2), up=False)
    return _make(
        "poor-fair",
        "upper",
        k * math.sqrt(n),
        -k / 2,
        violated,
        "poor man's bound, fair coins: Pr[S_n >= k*sqrt(n)] <= 2^(-k/2)",
        {"n": n, "k": k},
        exact=exact,
        certificate=cert,
    )


def fair_upper_bound(n: int, k: int) -> BoundResult:
    violated = []
    if k < 1:
        violated.append("k>=1")
    if 256 * k * k > n:
        violated.append("16k*sqrt(n)<=n")
    return _make(
        "fair-upper",
        "upper",
        16 * k * math.sqrt(n),
        -2 * k * k,
        violated,
        "fair-coin upper bound: Pr[S_n >= 16k*sqrt(n)] <= 4^(-k^2)",
        {"n": n, "k": k},
        exact=Fraction(1, 4 ** (k * k)) if k >= 0 else None,
    )


def fair_lower_bound(n: int, k: int) -> BoundResult:
    violated = []
    if k < 1:
        violated.append("k>=1")
    if 16 * k * k > n:
        violated.append("k<=sqrt(n)/4")
    return _make(
        "fair-lower",
        "lower",
        k * math.sqrt(n),
        -32 * k * k,
        violated,
        "fair-coin lower bound: Pr[S_n >= k*sqrt(n)] >= 4^(-16k^2)",
        {"n": n, "k": k},
        exact=Fraction(1, 2 ** (32 * k * k)) if k >= 0 else None,
    )


def fair_sandwich(n: int, k: int) -> tuple[BoundResult, BoundResult]:
    """Both sides of the fair-coin tail at the same threshold ``k sqrt(n)``.

    The upper side rescales the ``16k sqrt(n)`` bound to ``k sqrt(n)``,
    giving ``2^(-k^2/128)``; it is stated for ``2 <= k <= sqrt(n)/4``.
    """
    lower = fair_lower_bound(n, k)
    violated = []
    if k < 2:
        violated.append("k>=2")
    if 16 * k * k > n:
        violated.append("k<=sqrt(n)/4")
    exact, cert = _rational_pow(Fraction(2), Fraction(-k * k, 128), up=False)
    upper = _make(
        "fair-upper",
        "upper",
        k * math.sqrt(n),
        -k * k / 128,
        violated,
        "fair-coin upper bound rescaled: Pr[S_n >= k*sqrt(n)] <= 2^(-k^2/128)",
        {"n": n, "k": k, "rescaled": True},
        exact=exact,
        certificate=cert,
    )
    return lower, upper


def quarter_sqrt_lower_bound(n: int) -> BoundResult:
    """Pr[S_n >= sqrt(n)/4] >= 1/4 for a fair walk of n >= 1 steps."""
    violated = [] if n >= 1 else ["n>=1"]
    return _make(
        "quarter-sqrt",
        "lower",
        math.sqrt(n) / 4,
        -2.0,
        violated,
        "quarter-sqrt lower bound: Pr[S_n >= sqrt(n)/4] >= 1/4",
        {"n": n},
        exact=Fraction(1, 4),
    )


def checkpoint_bound(n: int, s: int, spacing=None) -> BoundResult:
    """Pr[the walk ever reaches s * spacing] <= 2^-s.

    Holds for any spacing with Pr[max_j S_j >= spacing] <= 1/2; the default
    2 sqrt(n) + 1 is comfortably above that level.
    """
    spacing = 2 * math.sqrt(n) + 1 if spacing is None else float(spacing)
    violated = [] if s >= 1 else ["s>=1"]
    if spacing < 2 * math.sqrt(n):
        violated.append("spacing>=2*sqrt(n)")
    return _make(
        "checkpoint-ladder",
        "upper",
        s * spacing,
        -s,
        violated,
        "checkpoint ladder: Pr[t_s exists] <= 2^(-s)",
        {"n": n, "s": s, "spacing": spacing},
        exact=Fraction(1, 2**s) if s >= 0 else None,
    )


# ---------------------------------------------------------------------------
# geometric sums


def geo_sum_bound(n: int, p, integer_variant: bool = False) -> BoundResult:
    """Pr[Y_1 + ... + Y_n >= 2n] <= (4p)^n when Pr[Y_i >= j] <= p^j.

    With ``integer_variant`` the Y_i are integer-valued and the threshold
    drops to ``n``.
    """
    p = to_fraction(p)
    if not 0 < p < 1:
        raise DomainError("p must lie in (0, 1)")
    violated: list[str] = []
    value = (4 * p) ** n
    family = "geo-sum-int" if integer_variant else "geo-sum"
    threshold = n if integer_variant else 2 * n
    return _make(
        family,
        "upper",
        threshold,
        n * math.log2(4 * p),
        violated,
        f"geometric sum: Pr[sum Y_i >= {'n' if integer_variant else '2n'}] <= (4p)^n",
        {"n": n, "p": p},
        exact=value,
    )


# ---------------------------------------------------------------------------
# biased coins, large deviations


def large_dev_bounds(n: int, p, r) -> tuple[BoundResult, BoundResult]:
    """Upper ``(4/r)^(r mu)`` and lower ``(e r)^(-r mu)`` at threshold ``r mu``."""
    p = to_fraction(p)
    r = to_fraction(r)
    if not 0 < p <= 1:
        raise DomainError("p must lie in (0, 1]")
    mu = n * p
    rmu = r * mu
    violated = []
    if p > Fraction(1, 2):
        violated.append("p<=1/2")
    if r < 2:
        violated.append("r>=2")
    if rmu > n:
        violated.append("r*mu<=n")
    integral = rmu.denominator == 1 and rmu > 0
    if not integral:
        violated.append("r*mu positive integer")
    elif n % rmu.numerator:
        violated.append("r*mu divides n")
    params = {"n": n, "p": p, "r": r, "mu": mu}

    if integral:
        up_exact = (4 / r) ** rmu.numerator
    else:
        up_exact = None
    upper = _make(
        "large-upper",
        "upper",
        float(rmu),
        float(rmu) * math.log2(4 / float(r)),
        violated,
        "large deviation upper: Pr[X >= r*mu] <= (4/r)^(r*mu)",
        params,
        exact=up_exact,
    )

    cert = None
    if integral:
        e_lo, _ = _e_bracket()
        # (e_lo r)^(-r mu) >= (e r)^(-r mu)
        cert = (e_lo * r) ** (-rmu.numerator)
    lower = _make(
        "large-lower",
        "lower",
        float(rmu),
        -float(rmu) * math.log2(math.e * float(r)),
        violated,
        "large deviation lower: Pr[X >= r*mu] >= (e*r)^(-r*mu)",
        params,
        certificate=cert,
    )
    return upper, lower


# ---------------------------------------------------------------------------
# adaptive martingale game


def prefix_max_chebyshev_bound(v, ell) -> BoundResult:
    """Adaptive game with variance budget v: Pr[Y_max >= sqrt(ell v)] <= 1/ell."""
    v = to_fraction(v)
    ell = to_fraction(ell)
    violated = [] if ell >= 1 else ["ell>=1"]
    if v <= 0:
        violated.append("v>0")
    value = 1 / ell if ell > 0 else Fraction(1)
    return _make(
        "chebyshev-max-adaptive",
        "upper",
        _sqrt(ell * v),
        math.log2(value),
        violated,
        "prefix-max Chebyshev: Pr[Y_max^2 >= ell*v] <= 1/ell",
        {"v": v, "ell": ell},
        exact=value,
    )


def bennett_poor_bound(v, k: int, form: str | None = None) -> BoundResult:
    """Poor man's bound for the adaptive game.

    v >= 1: Pr[X >= 4k sqrt(v)] <= 4^-k.   v <= 1: Pr[X >= k] <= v^(k/2).
    form picks "high" or "low" explicitly; by default it follows v, with
    the high form at v = 1. Forcing a form on the wrong side of 1 flags it.
    """
    v = to_fraction(v)
    if form is None:
        form = "high" if v >= 1 else "low"
    if form not in ("high", "low"):
        raise DomainError(f"form must be 'high' or 'low', got {form!r}")
    violated = []
    if v <= 0:
        violated.append("v>0")
    if k < 1:
        violated.append("k>=1")
    if form == "high" and v < 1:
        violated.append("v>=1")
    if form == "low" and v > 1:
        violated.append("v<=1")
    params = {"v": v, "k": k}
    if form == "high":
        return _make(
            "bennett-poor-high-v",
            "upper",
            4 * k * _sqrt(v),
            -2 * k,
            violated,
            "poor man's bound, adaptive, v>=1: Pr[X >= 4k*sqrt(v)] <= 4^(-k)",
            params,
            exact=Fraction(1, 4**k) if k >= 0 else None,
        )
    exact, cert = (None, None)
    log2_bound = math.inf
    if v > 0:
        exact, cert = _rational_pow(v, Fraction(k, 2), up=False)
        log2_bound = (k / 2) * math.log2(v)
    return _make(
        "bennett-poor-low-v",
        "upper",
        k,
        log2_bound,
        violated,
        "poor man's bound, adaptive, v<=1: Pr[X >= k] <= v^(k/2)",
        params,
        exact=exact,
        certificate=cert,
    )


def bennett_small_bound(v, k) -> BoundResult:
    """Small-deviation regime: Pr[X >= 33k sqrt(v)] <= 4^(-k^2) for 1 <= k <= sqrt(v)."""
    v = to_fraction(v)
    k = to_fraction(k)
    violated = []
    if k < 1:
        violated.append("k>=1")
    if k * k > v:
        violated.append("k<=sqrt(v)")
    exact, cert = _rational_pow(Fraction(4), -k * k, up=False)
    return _make(
        "bennett-small",
        "upper",
        33 * float(k) * _sqrt(v),
        -2 * float(k * k),
        violated,
        "adaptive Bennett, small deviations: Pr[X >= 33k*sqrt(v)] <= 4^(-k^2)",
        {"v": v, "k": k},
        exact=exact,
        certificate=cert,
    )


def bennett_large_bound(v, r) -> BoundResult:
    """Large-deviation regime: Pr[X >= 3rv] <= (32/r)^(-rv/2) for integral rv."""
    v = to_fraction(v)
    r = to_fraction(r)
    rv = r * v
    violated = []
    if r < 1:
        violated.append("r>=1")
    if rv.denominator != 1 or rv <= 0:
        violated.append("r*v positive integer")
    if r >= 32:
        violated.append("r<32")
    exact = cert = None
    log2_bound = math.inf
    if r > 0:
        log2_bound = float(rv) / 2 * math.log2(float(r) / 32)
        if rv.denominator == 1:
            exact, cert = _rational_pow(r / 32, rv / 2, up=False)
    return _make(
        "bennett-large",
        "upper",
        3 * float(rv),
        log2_bound,
        violated,
        "adaptive Bennett, large deviations: Pr[X >= 3rv] <= (32/r)^(-rv/2)",
        {"v": v, "r": r},
        exact=exact,
        certificate=cert,
    )


def constructive_lower_bound(v, k: int) -> BoundResult:
    """Grouped fair steps: Pr[X >= k sqrt(v)/4] >= 4^(-k^2) for integer v >= k^2.

    This certifies the grouped fair-coin construction only. It is not a lower
    bound for the adaptive game in general.
    """
    v = to_fraction(v)
    violated = []
    if k < 1:
        violated.append("k>=1")
    if v.denominator != 1:
        violated.append("v integer")
    if k * k > v:
        violated.append("k<=sqrt(v)")
    return _make(
        "grouped-lower",
        "lower",
        k * _sqrt(v) / 4,
        -2 * k * k,
        violated,
        "grouped fair-coin construction: Pr[X >= k*sqrt(v)/4] >= 4^(-k^2)",
        {"v": v, "k": k},
        exact=Fraction(1, 4 ** (k * k)) if k >= 0 else None,
    )


def hoeffding_bounds(means: Sequence, k, r) -> tuple[BoundResult, BoundResult]:
    """Independent [0, 1] variables with the given means, centred and fed to
    the adaptive bounds with variance budget ``mu = sum(means)``.

    Thresholds are reported on the uncentred sum: ``mu + 33k sqrt(mu)`` and
    ``mu + 3r mu``.
    """
    means = [to_fraction(m) for m in means]
    if not means:
        raise DomainError("need at least one mean")
    if any(not 0 <= m <= 1 for m in means):
        raise DomainError("means must lie in [0, 1]")
    mu = sum(means)
    if mu <= 0:
        raise DomainError("the total mean must be positive")
    small = bennett_small_bound(mu, k)
    large = bennett_large_bound(mu, r)
    extra = {"n": len(means), "mu": mu}
    small = replace(
        small,
        family="hoeffding-small",
        threshold=float(mu) + small.threshold,
        citation="Hoeffding via adaptive Bennett: Pr[X >= mu + 33k*sqrt(mu)] <= 4^(-k^2)",
        params={**small.params, **extra},
    )
    large = replace(
        large,
        family="hoeffding-large",
        threshold=float(mu) + large.threshold,
        citation="Hoeffding via adaptive Bennett: Pr[X >= mu + 3r*mu] <= (32/r)^(-r*mu/2)",
        params={**large.params, **extra},
    )
    return small, large


# ---------------------------------------------------------------------------
# regime selection


def query(mu, n: int, t, regime: Literal["small", "large"] | None = None) -> BoundResult:
    """Pick the bound family for Pr[X >= t] of a 0-1 sum with mean mu.

    ``t <= 2 mu`` is the small-deviation regime (``t = mu + k sqrt(mu)``),
    everything above is the large-deviation regime (``t = r mu``). The
    returned bound is the family's explicit-constant bound for the derived
    ``k`` or ``r``; ``regime`` forces one family.
    """
    mu = to_fraction(mu)
    t = to_fraction(t)
    if mu <= 0:
        raise DomainError("mu must be positive")
    if t <= mu:
        raise DomainError("no concentration statement for t <= mu")
    if regime is None:
        regime = "small" if t <= CROSSOVER * mu else "large"
    if regime == "small":
        k = _exact_ratio_over_sqrt(t - mu, mu)
        if k is None:
            k = to_fraction((float(t) - float(mu)) / math.sqrt(float(mu)))
        res = bennett_small_bound(mu, k)
        return replace(
            res,
            family="hoeffding-small",
            threshold=float(mu) + res.threshold,
            citation="small-deviation regime: Pr[X >= mu + 33k*sqrt(mu)] <= 4^(-k^2)",
            params={**res.params, "n": n, "mu": mu, "regime": "small"},
        )
    if regime != "large":
        raise DomainError(f"unknown regime {regime!r}")
    r = t / mu
    upper, _ = large_dev_bounds(n, mu / n, r)
    return replace(upper, params={**upper.params, "regime": "large"})


def _exact_ratio_over_sqrt(num: Fraction, sq: Fraction) -> Fraction | None:
    """num / sqrt(sq) as a Fraction when sq is a perfect rational square."""
    a, b = math.isqrt(sq.numerator), math.isqrt(sq.denominator)
    if a * a == sq.numerator and b * b == sq.denominator:
        return num / Fraction(a, b)
    return None


def bound_for(
    family: str,
    *,
    n: int | None = None,
    p=None,
    k=None,
    r=None,
    v=None,
    means: Sequence | None = None,
) -> BoundResult:
    """Evaluate one family by name; missing parameters raise DomainError."""

    def need(**kw):
        missing = [name for name, val in kw.items() if val is None]
        if missing:
            raise DomainError(f"family {family!r} needs {', '.join(missing)}")

    if family == "chebyshev-max":
        need(n=n, k=k)
        return chebyshev_max_bound(n, k)
    if family == "chebyshev-max-adaptive":
        need(v=v, k=k)
        return prefix_max_chebyshev_bound(v, to_fraction(k) ** 2)
    if family == "poor-fair":
        need(n=n, k=k)
        return poor_fair_bound(n, _as_int(k))
    if family in ("geo-sum", "geo-sum-int"):
        need(n=n, p=p)
        return geo_sum_bound(n, p, integer_variant=family == "geo-sum-int")
    if family == "fair-upper":
        need(n=n, k=k)
        return fair_upper_bound(n, _as_int(k))
    if family == "fair-lower":
        need(n=n, k=k)
        return fair_lower_bound(n, _as_int(k))
    if family in ("large-upper", "large-lower"):
        need(n=n, p=p, r=r)
        upper, lower = large_dev_bounds(n, p, r)
        return upper if family == "large-upper" else lower
    if family in ("bennett-poor-high-v", "bennett-poor-low-v"):
        need(v=v, k=k)
        return bennett_poor_bound(v, _as_int(k), form=family.rsplit("-", 2)[1])
    if family == "bennett-small":
        need(v=v, k=k)
        return bennett_small_bound(v, k)
    if family == "bennett-large":
        need(v=v, r=r)
        return bennett_large_bound(v, r)
    if family == "grouped-lower":
        need(v=v, k=k)
        return constructive_lower_bound(v, _as_int(k))
    if family == "quarter-sqrt":
        need(n=n)
        return quarter_sqrt_lower_bound(n)
    if family == "checkpoint-ladder":
        need(n=n, k=k)
        return checkpoint_bound(n, _as_int(k))
    if family in ("hoeffding-small", "hoeffding-large"):
        if means is None:
            need(n=n, p=p)
            means = [to_fraction(p)] * n
        small, large = hoeffding_bounds(means, k if k is not None else 1, r if r is not None else 2)
        return small if family == "hoeffding-small" else large
    raise DomainError(f"unknown family {family!r}")


def _as_int(x) -> int:
    q = to_fraction(x)
    if q.denominator != 1:
        raise DomainError(f"expected an integer, got {x}")
    return int(q)
