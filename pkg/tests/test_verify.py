import json
import math
from fractions import Fraction

import pytest

from chernoff_lab import bounds as B
from chernoff_lab import verify as V
from chernoff_lab.errors import ContractError, UnknownSuiteError
from chernoff_lab.montecarlo import SimulationReport
from chernoff_lab.prob import Prob2



def _report(estimate, half):
    return SimulationReport(10**6, round(estimate * 10**6), estimate, estimate - half, estimate + half,
                            "clopper-pearson", 0.99, 0, "fixture")


QUARTER = B.poor_fair_bound(64, 4)  # upper, 2^-2


class TestCompare:
    def test_tiny_truth_under_quarter(self):
        row = V.compare(Prob2.from_fraction(Fraction(1, 2**256)), QUARTER)
        assert row.passed and row.truth_kind == "exact" and row.direction == "truth<=bound"

    def test_empirical_vs_lower(self):
        row = V.compare(_report(0.026, 0.001), B.constructive_lower_bound(64, 2))
        assert row.passed and row.truth_kind == "empirical" and row.direction == "truth>=bound"

    def test_deliberate_failure(self):
        row = V.compare(Prob2.from_fraction(Fraction(1, 2)), QUARTER)
        assert not row.passed
        assert not V.recompute_pass(row.fields())

    def test_direction_mismatch(self):
        with pytest.raises(ContractError):
            V.compare(Prob2.from_fraction(Fraction(1, 8)), QUARTER, direction="truth>=bound")

    def test_invalid_bound_is_skipped(self):
        bad = B.poor_fair_bound(64, 3)
        assert not bad.valid
        row = V.compare(Prob2.from_fraction(Fraction(1, 2)), bad)
        assert row.truth_kind == "skipped" and row.passed

    def test_empirical_widening(self):
        # estimate above the bound, but the interval reaches it: pass in the bound's favour
        assert V.compare(_report(0.26, 0.02), QUARTER).passed
        assert not V.compare(_report(0.3, 0.02), QUARTER).passed

    def test_rational_beats_float_noise(self):
        # exact equality holds rationally even where log2 rounding could wobble
        row = V.compare(Prob2.from_fraction(Fraction(1, 4)), QUARTER)
        assert row.passed

    def test_unknown_truth_type(self):
        with pytest.raises(ContractError):
            V.compare(0.5, QUARTER)


def _row(report, case_id):
    return next(c for c in report.cases if c.case_id == case_id)


class TestSuites:
    def test_all_quick_suites_pass(self, quick_reports):
        for name, rep in quick_reports.items():
            assert rep.overall_pass, [c.case_id for c in rep.failures]

    def test_hitting_two(self, quick_reports):
        row = _row(quick_reports["appendix"], "hitting-time-mean/r=2")
        assert row.log2_truth == row.log2_bound == 2.0 and row.passed

    def test_chebyshev_64_16(self, quick_reports):
        row = _row(quick_reports["fair"], "extended-chebyshev/n=64/k=2")
        assert row.threshold == 16 and row.log2_bound == -1 and row.passed
        assert row.truth_kind == "exact" and row.direction == "truth<=bound"

    def test_geo_closed_case(self, quick_reports):
        row = _row(quick_reports["geo"], "geo-sum-integer/n=2/p=1/8")
        assert row.log2_truth == pytest.approx(math.log2(11 / 256), abs=1e-12)
        assert row.log2_bound == -2 and row.passed

    def test_quick_caps(self, quick_reports):
        for rep in quick_reports.values():
            for c in rep.cases:
                # hitting-time rows store the truncation horizon in n, not a walk length
                if c.case_id.startswith("hitting-time-mc"):
                    continue
                assert c.n is None or c.n <= 256 or c.truth_kind == "oracle-only"

    def test_skipped_rows_kept(self, quick_reports):
        kinds = {c.truth_kind for rep in quick_reports.values() for c in rep.cases}
        assert {"exact", "empirical", "skipped"} <= kinds

    def test_rows_recompute(self, quick_reports):
        for rep in quick_reports.values():
            rows = V.read_csv(rep.to_csv())
            assert len(rows) == len(rep.cases)
            for row, case in zip(rows, rep.cases):
                assert (row["pass"] == "true") == case.passed == V.recompute_pass(row), row

    def test_csv_header(self, quick_reports):
        assert quick_reports["geo"].to_csv().splitlines()[0] == ",".join(V.COLUMNS)

    def test_json_mirror(self, quick_reports):
        rep = quick_reports["appendix"]
        doc = json.loads(rep.to_json())
        assert doc["overall_pass"] is True and doc["seed"] == 0
        assert len(doc["cases"]) == len(rep.cases)
        assert set(doc["cases"][0]) == set(V.COLUMNS)

    def test_summary(self, quick_reports):
        line = quick_reports["geo"].summary()
        assert line.startswith("PASS suite=geo scale=quick seed=0")


class TestReproducibility:
    def test_byte_identical(self, quick_reports):
        again = V.run_suite("geo", "quick", 0)
        assert again.to_csv() == quick_reports["geo"].to_csv()
        assert again.to_json() == quick_reports["geo"].to_json()

    def test_workers_do_not_change_order(self, quick_reports):
        assert V.run_suite("appendix", "quick", 0, workers=4).to_csv() == quick_reports["appendix"].to_csv()

    def test_seed_changes_only_sampled_rows(self, quick_reports):
        other = V.run_suite("appendix", "quick", 1)
        for a, b in zip(other.cases, quick_reports["appendix"].cases):
            assert a.case_id == b.case_id
            if a.truth_kind == "exact":
                assert a == b

    def test_write(self, tmp_path, quick_reports):
        rep = quick_reports["geo"]
        rep.write(tmp_path / "r.csv")
        rep.write(tmp_path / "r.json")
        assert (tmp_path / "r.csv").read_text() == rep.to_csv()
        assert (tmp_path / "r.json").read_text() == rep.to_json()


class TestRegistry:
    def test_unknown_suite(self):
        with pytest.raises(UnknownSuiteError):
            V.registry("nope")
        with pytest.raises(UnknownSuiteError):
            V.run_suite("nope")

    @pytest.mark.parametrize("scale", ["quick", "full"])
    def test_audit(self, scale):
        assert V.uncovered_anchors(scale) == []
        V.audit_coverage(scale)

    def test_audit_detects_gap(self, monkeypatch):
        monkeypatch.setattr(V, "ANCHORS", V.ANCHORS + ("made-up-anchor",))
        assert V.uncovered_anchors() == ["made-up-anchor"]
        with pytest.raises(AssertionError):
            V.audit_coverage()

    def test_keys_unique(self):
        keys = [s.key for s in V.registry("all", "full")]
        assert len(keys) == len(set(keys))

    def test_all_is_concatenation(self):
        assert [s.key for s in V.registry("all")] == [s.key for n in V.SUITES for s in V.registry(n)]


class TestPartition:
    def test_closes_on_reaching_quota(self):
        groups = V.greedy_partition([1, 1, 1, 1, 1], 2)
        assert groups == [(0, 2, 2, True), (2, 4, 2, True), (4, 5, 1, False)]

    def test_oversized_step_closes_alone(self):
        groups = V.greedy_partition([Fraction(1, 4), 3, Fraction(1, 4)], 1)
        assert groups[0] == (0, 2, Fraction(13, 4), True)
        assert groups[1] == (2, 3, Fraction(1, 4), False)


def test_fmt():
    assert V._fmt(None) == "" and V._fmt(True) == "true"
    assert V._fmt(Fraction(1, 16)) == "1/16"
    assert V._fmt(1 / 3) == "0.333333333333"
    assert V._fmt(-math.inf) == "-inf"
