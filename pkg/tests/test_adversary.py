import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chernoff_lab.adversary import (
    POINT_MASS,
    RADEMACHER,
    Burst,
    GameConfig,
    GroupedLower,
    Rademacher,
    StepDistribution,
    StopAtThreshold,
    Trajectory,
    checkpoints,
    default_horizon,
    make_strategy,
    play,
)
from chernoff_lab.errors import DomainError, ProtocolViolation, UnknownStrategyError
from chernoff_lab.oracle import walk_tail

# walk_tail(16, 1) = Pr[S_16 >= 2] = 26333/65536
GROUP_16 = Fraction(26333, 65536)


class TestStepDistribution:
    @given(st.fractions(0, 1), st.fractions(0, 1))
    def test_mean_zero_and_variance(self, a, b):
        d = StepDistribution(a, b)
        assert d.mean == 0
        assert d.variance == a * b
        assert 0 <= d.variance <= 1
        lo, hi = d.support()
        assert -1 <= lo <= 0 <= hi <= 1

    def test_two_point_probabilities(self):
        d = StepDistribution(Fraction(1, 8), 1)
        assert d.p_plus == Fraction(1, 9)
        assert d.sample(0.0) == 1.0 and d.sample(0.5) == -0.125

    def test_point_mass(self):
        assert POINT_MASS.degenerate and POINT_MASS.variance == 0
        assert POINT_MASS.sample(0.3) == 0.0

    @pytest.mark.parametrize("a,b", [(2, 1), (-1, 1), (1, "3/2")])
    def test_outside_unit_interval(self, a, b):
        with pytest.raises(DomainError):
            StepDistribution(a, b)


class TestConfig:
    def test_rejects_bad_budget(self):
        for bad in (dict(n=4, v=0), dict(n=0, v=1), dict(n=4, v=1, budget_mode="maybe")):
            with pytest.raises(DomainError):
                GameConfig(**bad)


class TestPlay:
    def test_rademacher_is_fair_walk(self):
        traj = play(GameConfig(32, 32, seed=5), Rademacher())
        assert all(x in (-1.0, 1.0) for x in traj.x)
        assert all(law == RADEMACHER for law in traj.laws)
        assert traj.total_variance == 32

    def test_prefix_sums(self):
        traj = play(GameConfig(40, 40, seed=1), Rademacher(), trial=3)
        z = 0.0
        for x, zi in zip(traj.x, traj.z):
            z += x
            assert zi == z
        assert traj.y_max == max(0.0, *traj.z)

    def test_fractional_budget_tail(self):
        traj = play(GameConfig(4, "5/2"), Rademacher())
        assert traj.v_spent == [1, 1, Fraction(1, 2), 0]
        assert traj.laws[2] == StepDistribution(Fraction(1, 2), 1)

    def test_replay_is_identical(self):
        for sid in ("rademacher", "grouped-lower:2", "burst:4", "stop:3:rademacher"):
            s = make_strategy(sid, 16)
            cfg = GameConfig(default_horizon(s, 16), 16, seed=99)
            assert play(cfg, s, 4).to_csv() == play(cfg, make_strategy(sid, 16), 4).to_csv()

    def test_trials_differ(self):
        cfg = GameConfig(64, 64, seed=0)
        assert play(cfg, Rademacher(), 0).x != play(cfg, Rademacher(), 1).x

    @settings(max_examples=40)
    @given(st.integers(0, 10**6), st.sampled_from([1, 2, 4, 8]))
    def test_stop_wrapper_freezes_at_max(self, seed, tau):
        traj = play(GameConfig(64, 64, seed=seed), StopAtThreshold(tau, Rademacher()))
        if traj.y_max >= tau:
            assert traj.final == traj.y_max == tau
            hit = next(i for i, z in enumerate(traj.z) if z >= tau)
            assert all(x == 0.0 for x in traj.x[hit + 1:])
            assert traj.total_variance == hit + 1

    def test_overspend_names_the_step(self):
        class Greedy:
            name = "greedy"

            def decide(self, history, remaining_budget, remaining_steps):
                return RADEMACHER

            def plan(self, v, n):
                return None

        with pytest.raises(ProtocolViolation) as info:
            play(GameConfig(5, 3), Greedy())
        assert info.value.step == 3

    def test_exactly_mode_underspend(self):
        with pytest.raises(ProtocolViolation) as info:
            play(GameConfig(4, 8, budget_mode="exactly"), Rademacher())
        assert info.value.step is None
        traj = play(GameConfig(8, 8, budget_mode="exactly"), Rademacher())
        assert traj.total_variance == 8

    @settings(max_examples=30)
    @given(st.sampled_from(["rademacher", "grouped-lower:2", "burst:2", "burst:8", "stop:4:burst:4"]),
           st.integers(0, 10**6))
    def test_budget_never_exceeded(self, sid, seed):
        s = make_strategy(sid, 16)
        traj = play(GameConfig(default_horizon(s, 16) + 3, 16, seed=seed), s)
        assert traj.total_variance <= 16
        for x, law in zip(traj.x, traj.laws):
            assert x in law.support() or (law.degenerate and x == 0.0)

    def test_csv_dump(self):
        traj = play(GameConfig(3, "3/2", seed=2), Rademacher())
        lines = traj.to_csv().splitlines()
        assert lines[0] == "step,x,z,v_spent"
        assert len(lines) == 4
        assert lines[2].split(",")[3] == "1/2"


class TestGrouped:
    def test_64_2(self):
        g = GroupedLower(64, 2)
        assert list(g.sizes) == [16] * 4
        assert list(g.targets) == [1] * 4
        assert g.threshold == 4
        assert g.group_success_probability(0) == GROUP_16 == walk_tail(16, 1).exact
        assert g.predicted_joint_success() == GROUP_16**4
        assert float(GROUP_16**4) == pytest.approx(0.02607, abs=1e-5)
        assert g.predicted_joint_success() >= Fraction(1, 4**4)

    def test_boundary(self):
        g = GroupedLower(4, 2)
        assert list(g.sizes) == [1] * 4

    def test_uneven_last_group(self):
        g = GroupedLower(10, 2)
        assert g.uneven
        assert list(g.sizes) == [2, 2, 2, 4]
        assert sum(g.sizes) == 10

    def test_too_small(self):
        with pytest.raises(DomainError):
            GroupedLower(3, 2)

    def test_joint_success_reads_groups(self):
        g = GroupedLower(4, 2)
        traj = Trajectory([1.0] * 4, [1.0, 2.0, 3.0, 4.0], [Fraction(1)] * 4, [RADEMACHER] * 4)
        assert g.joint_success(traj)
        traj.x[2] = -1.0
        assert not g.joint_success(traj)


class TestBurst:
    def test_example(self):
        b = Burst(1, 8)
        assert b.count == 8
        assert b.law == StepDistribution(Fraction(1, 8), 1)
        assert b.law.p_plus == Fraction(1, 9)
        traj = play(GameConfig(8, 1, budget_mode="exactly"), b)
        assert traj.total_variance == 1

    def test_miscount_rejected(self):
        # emitting r*v*r = 64 steps of variance 1/8 would spend 8; the ninth step is refused
        class Miscounted(Burst):
            def decide(self, history, remaining_budget, remaining_steps):
                return self.law

        with pytest.raises(ProtocolViolation) as info:
            play(GameConfig(64, 1), Miscounted(1, 8))
        assert info.value.step == 8

    def test_stops_when_budget_runs_out(self):
        traj = play(GameConfig(12, 1), Burst(1, 8))
        assert traj.total_variance == 1
        assert traj.stopped_at == 8

    @pytest.mark.parametrize("v,r", [(1, 1), ("1/3", 2), (0, 4)])
    def test_infeasible(self, v, r):
        with pytest.raises(DomainError):
            Burst(v, r)


class TestCheckpoints:
    def _traj(self, xs):
        z, out = 0.0, []
        for x in xs:
            z += x
            out.append(z)
        return Trajectory(list(xs), out, [Fraction(1)] * len(xs), [RADEMACHER] * len(xs))

    def test_all_positive(self):
        assert checkpoints(self._traj([1.0] * 10), 2) == [2, 4, 6, 8, 10]

    def test_never_reached(self):
        assert checkpoints(self._traj([1.0, -1.0, 1.0]), 2) == []

    def test_bad_spacing(self):
        with pytest.raises(DomainError):
            checkpoints(self._traj([1.0]), 0)

    @given(st.lists(st.sampled_from([1.0, -1.0]), max_size=60), st.integers(1, 6))
    def test_strictly_increasing_for_unit_steps(self, xs, spacing):
        t = checkpoints(self._traj(xs), spacing)
        assert all(a < b for a, b in zip(t, t[1:]))
        traj = self._traj(xs)
        for s, i in enumerate(t, start=1):
            assert traj.z[i - 1] >= s * spacing
            assert all(z < s * spacing for z in traj.z[: i - 1])


class TestFactory:
    def test_ids(self):
        assert isinstance(make_strategy("rademacher", 4), Rademacher)
        assert make_strategy("grouped-lower:2", 64).k == 2
        assert make_strategy("burst:4", 1).count == 4
        s = make_strategy("stop:3:burst:4", 1)
        assert isinstance(s, StopAtThreshold) and isinstance(s.inner, Burst)

    @pytest.mark.parametrize("sid", ["nope", "burst", "grouped-lower:x", "stop:2", "rademacher:3", "burst:0/0"])
    def test_unknown(self, sid):
        with pytest.raises(UnknownStrategyError):
            make_strategy(sid, 4)

    def test_horizon(self):
        assert default_horizon(make_strategy("burst:8", 2), 2) == 16
        assert default_horizon(make_strategy("stop:1:burst:8", 2), 2) == 16
        assert default_horizon(Rademacher(), "5/2") == math.ceil(Fraction(5, 2))
