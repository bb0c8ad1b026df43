import io
import json
import subprocess
import sys

import pytest

from chernoff_lab.cli import main
from chernoff_lab.verify import COLUMNS


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


class TestExamples:
    def test_hitting_prints_four(self):
        assert run("exact", "--kind", "hitting", "--r", "2") == (0, "4\n")

    def test_poor_fair(self):
        code, text = run("bound", "--family", "poor-fair", "--n", "64", "--k", "2")
        assert code == 0
        assert "log2_bound: -1.0" in text and "threshold: 16.0" in text
        assert "value: 5.000000000000e-01" in text

    def test_verify_geo(self, capsys):
        code, text = run("verify", "--suite", "geo", "--scale", "quick")
        assert code == 0
        assert text.splitlines()[0] == ",".join(COLUMNS)
        assert any(line.startswith("geo,geo-sum-integer/n=2/p=1/8,") and line.endswith(",true")
                   for line in text.splitlines())
        assert capsys.readouterr().err.startswith("PASS suite=geo")

    def test_verify_out(self, tmp_path):
        path = tmp_path / "geo.json"
        code, text = run("verify", "--suite", "geo", "--out", str(path))
        assert code == 0 and text.startswith("PASS suite=geo scale=quick seed=0")
        assert json.loads(path.read_text())["overall_pass"] is True

    def test_exact_kinds(self):
        assert "exact=26333/65536" in run("exact", "--kind", "walk", "--n", "16", "--t", "1")[1]
        assert "exact=3/8" in run("exact", "--kind", "prefix-max", "--n", "4", "--m", "2", "--method", "dp")[1]
        assert run("exact", "--kind", "compositions", "--total", "3", "--parts", "2")[1] == "4\n"
        code, text = run("exact", "--kind", "geo-sum", "--n", "2", "--p", "1/8", "--t", "2")
        assert code == 0 and "exact=11/256" in text
        code, text = run("exact", "--kind", "binom", "--n", "64", "--p", "1/16", "--t", "32")
        assert code == 0 and text.startswith("kind: binom\nprobability: log2=-")

    def test_simulate(self):
        code, text = run("simulate", "--iid", "fair-walk", "--n", "16", "--threshold", "1", "--trials", "20000")
        assert code == 0 and "ci_method: clopper-pearson" in text and "seed: 0" in text

    def test_simulate_strategy_dump(self, tmp_path):
        path = tmp_path / "t.csv"
        code, _ = run("simulate", "--strategy", "burst:8", "--v", "1", "--threshold", "3",
                      "--trials", "100", "--dump-trajectory", str(path))
        assert code == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "step,x,z,v_spent" and len(lines) == 9


class TestJson:
    @pytest.mark.parametrize("argv", [
        ("bound", "--family", "large-upper", "--n", "64", "--p", "1/16", "--r", "8"),
        ("exact", "--kind", "walk", "--n", "16", "--t", "1"),
        ("exact", "--kind", "hitting", "--r", "3"),
        ("simulate", "--iid", "bernoulli", "--n", "16", "--p", "1/4", "--threshold", "6", "--trials", "500"),
        ("verify", "--suite", "appendix"),
    ])
    def test_round_trip(self, argv):
        code, text = run(*argv, "--json")
        assert code == 0
        doc = json.loads(text)
        assert json.dumps(doc, indent=2) + "\n" == text

    def test_bound_fields(self):
        doc = json.loads(run("bound", "--family", "large-upper", "--n", "64", "--p", "1/16", "--r", "8", "--json")[1])
        assert doc["log2_bound"] == -32 and doc["certificate"] == "1/4294967296" and doc["valid"] is True


class TestExitCodes:
    def test_usage(self, capsys):
        assert run("bound")[0] == 2
        assert "needs --family" in capsys.readouterr().err
        assert run("bound", "--family", "nope")[0] == 2
        assert run("frobnicate")[0] == 2

    def test_domain_error(self, capsys):
        assert run("exact", "--kind", "prefix-max", "--n", "4", "--m", "5")[0] == 2
        assert "error" in capsys.readouterr().err

    def test_conflicting_flags(self):
        assert run("simulate", "--strategy", "rademacher", "--iid", "fair-walk", "--v", "4", "--threshold", "1")[0] == 2
        assert run("simulate", "--iid", "fair-walk", "--n", "4", "--v", "4")[0] == 2

    def test_unknown_strategy(self):
        assert run("simulate", "--strategy", "zigzag", "--v", "4", "--threshold", "1")[0] == 2

    def test_verification_failure(self, monkeypatch):
        from chernoff_lab import verify as V

        real = V.run_suite

        def broken(*a, **kw):
            rep = real("appendix", "quick", 0)
            bad = rep.cases[0].__class__(**{**rep.cases[0].__dict__, "passed": False})
            return V.VerificationReport(rep.suite, rep.scale, rep.seed, rep.config_digest, (bad,) + rep.cases[1:])

        monkeypatch.setattr(V, "run_suite", broken)
        code, text = run("verify", "--suite", "appendix", "--out", "/dev/null")
        assert code == 1 and text.startswith("FAIL")


class TestConfig:
    def test_file_supplies_defaults(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"family": "poor-fair", "n": 64, "k": "2"}))
        assert run("bound", "--config", str(cfg)) == run("bound", "--family", "poor-fair", "--n", "64", "--k", "2")

    def test_flags_win(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"family": "poor-fair", "n": 64, "k": 2}))
        code, text = run("bound", "--config", str(cfg), "--k", "4")
        assert code == 0 and "log2_bound: -2.0" in text

    def test_seed_default_and_override(self, tmp_path):
        base = ("simulate", "--iid", "fair-walk", "--n", "8", "--threshold", "2", "--trials", "300")
        assert run(*base) == run(*base, "--seed", "0")
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"seed": 5}))
        assert run(*base, "--config", str(cfg)) == run(*base, "--seed", "5")

    @pytest.mark.parametrize("doc", [{"colour": 1}, {"n": "x"}, {"family": "nope"}, [1, 2], {"n": [1]}])
    def test_bad_config(self, tmp_path, doc):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps(doc))
        assert run("bound", "--config", str(cfg))[0] == 2

    def test_missing_config(self, tmp_path):
        assert run("bound", "--config", str(tmp_path / "none.json"))[0] == 2


def test_byte_identical_stdout():
    argv = [sys.executable, "-m", "chernoff_lab", "simulate", "--strategy", "stop:2:rademacher",
            "--v", "16", "--threshold", "2", "--trials", "2000", "--seed", "7"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and b"successes:" in a
