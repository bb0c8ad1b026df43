import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chernoff_lab.prob import (
    NEG_INF,
    Prob2,
    Prob2Interval,
    format_prob,
    log2_fraction,
    log2_int,
    log2_sum,
    to_fraction,
)


def test_log2_int_big():
    assert log2_int(1 << 5000) == 5000.0
    assert log2_int(3 << 4000) == pytest.approx(4000 + math.log2(3), abs=1e-12)


def test_log2_sum_matches_direct():
    assert log2_sum([-1.0, -1.0]) == pytest.approx(0.0)
    assert log2_sum([]) == NEG_INF
    assert log2_sum([NEG_INF, -3.0]) == -3.0
    # far below the double range
    assert log2_sum([-5000.0, -5000.0]) == pytest.approx(-4999.0)


def test_to_fraction():
    assert to_fraction("1/16") == Fraction(1, 16)
    assert to_fraction(3) == 3
    assert to_fraction(0.5) == Fraction(1, 2)
    with pytest.raises(TypeError):
        to_fraction(True)
    with pytest.raises(ValueError):
        to_fraction(float("inf"))


def test_prob2_validation():
    with pytest.raises(ValueError):
        Prob2(0.5)
    with pytest.raises(ValueError):
        Prob2(-1.0, Fraction(1, 4))
    with pytest.raises(ValueError):
        Prob2(NEG_INF, Fraction(1, 2))
    with pytest.raises(ValueError):
        Prob2(-2.0, Fraction(3, 2))
    assert Prob2.zero().value == 0.0
    assert Prob2.one().log2p == 0.0


def test_prob2_complement_and_format():
    p = Prob2.from_fraction(Fraction(1, 4))
    assert p.complement().exact == Fraction(3, 4)
    assert "exact=1/4" in format_prob(p)
    assert str(Prob2.zero()).startswith("log2=-inf")
    with pytest.raises(ValueError):
        Prob2.from_log2(-3.0).complement()


def test_interval_ordering():
    lo, hi = Prob2.from_fraction(Fraction(1, 8)), Prob2.from_fraction(Fraction(1, 4))
    Prob2Interval(lo, hi)
    with pytest.raises(ValueError):
        Prob2Interval(hi, lo)


@given(st.integers(1, 10**6), st.integers(1, 10**6))
def test_from_fraction_consistent(a, b):
    q = Fraction(min(a, b), max(a, b))
    p = Prob2.from_fraction(q)
    assert p.log2p <= 0
    assert abs(p.log2p - log2_fraction(q)) <= 1e-9


@given(st.lists(st.floats(-2000, 0), min_size=1, max_size=20))
def test_log2_sum_dominates_max(terms):
    s = log2_sum(terms)
    assert s >= max(terms) - 1e-12
    assert s <= max(terms) + math.log2(len(terms)) + 1e-9
