"""Brute-force reference computations shared by the tests.

These enumerate paths or outcomes directly and share no code with the
package, so they can serve as an independent check.
"""

from fractions import Fraction
from itertools import accumulate, product

import pytest


def all_paths(n):
    """Every +-1 path of length n, as tuples of prefix sums."""
    for steps in product((1, -1), repeat=n):
        yield tuple(accumulate(steps))


def brute_walk_tail(n, t):
    hits = sum(1 for z in all_paths(n) if z[-1] >= t)
    return Fraction(hits, 2**n)


def brute_walk_lower_tail(n, t):
    hits = sum(1 for z in all_paths(n) if z[-1] <= t)
    return Fraction(hits, 2**n)


def brute_prefix_max(n, m):
    hits = sum(1 for z in all_paths(n) if max(z) >= m)
    return Fraction(hits, 2**n)


def brute_binom_tail(n, p, t):
    p = Fraction(p)
    total = Fraction(0)
    for bits in product((0, 1), repeat=n):
        h = sum(bits)
        if h >= t:
            total += p**h * (1 - p) ** (n - h)
    return total


def brute_truncated_hitting(r, horizon):
    """E[min(t_r, horizon)] by enumerating all paths of length horizon."""
    total = 0
    for z in all_paths(horizon):
        hit = next((i for i, s in enumerate(z, start=1) if abs(s) >= r), horizon)
        total += hit
    return Fraction(total, 2**horizon)


def brute_geo_sum_tail(n, p, t):
    """Pr[Y_1 + ... + Y_n >= t] for integer geometrics via the complement."""
    p = Fraction(p)
    below = Fraction(0)
    for ys in product(range(t), repeat=n):
        if sum(ys) < t:
            term = Fraction(1)
            for y in ys:
                term *= p**y * (1 - p)
            below += term
    return 1 - below


@pytest.fixture(scope="session")
def quick_reports():
    """Quick-scale reports for every suite, computed once per session."""
    from chernoff_lab.verify import SUITES, run_suite

    return {name: run_suite(name, "quick", 0) for name in SUITES}


# --- acceptance reporting ----------------------------------------------------

_CRITERIA: dict[int, str] = {}


@pytest.fixture
def criterion(request):
    """Record one pass/fail line per acceptance criterion.

    Usage: ``with criterion(3, "fair sandwich") as fails: fails.append(msg)``.
    Any recorded message or exception marks the criterion failed.
    """
    from contextlib import contextmanager

    @contextmanager
    def check(number, title):
        fails: list[str] = []
        try:
            yield fails
        except Exception as exc:
            fails.append(f"{type(exc).__name__}: {exc}")
            raise
        finally:
            status = "PASS" if not fails else "FAIL"
            detail = "" if not fails else f" ({len(fails)} failing checks, first: {fails[0]})"
            line = f"[{status}] criterion {number}: {title}{detail}"
            _CRITERIA[number] = line
            print(line)
        assert not fails, "\n".join(fails[:20])

    return check


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_CRITERIA):
            terminalreporter.write_line(_CRITERIA[number])
