"""Exact tails, explicit-constant bounds and seeded simulation for Chernoff-type inequalities."""

from .adversary import (
    Burst,
    GameConfig,
    GroupedLower,
    Rademacher,
    StepDistribution,
    StopAtThreshold,
    Trajectory,
    burst_strategy,
    checkpoints,
    grouped_lower_strategy,
    make_strategy,
    play,
)
from .bounds import BoundResult, bound_for, query
from .errors import (
    CapacityError,
    ContractError,
    DomainError,
    LabError,
    ProtocolViolation,
    RangeError,
    UnknownStrategyError,
    UnknownSuiteError,
)
from .montecarlo import (
    SimulationReport,
    StrategySubject,
    estimate_hitting_time,
    estimate_prefix_max_tail,
    estimate_tail,
)
from .oracle import (
    HittingQuery,
    TailQuery,
    WitnessSequence,
    binom_tail,
    compositions_count,
    geometric_sum_tail,
    hitting_time_mean,
    prefix_max_tail,
    walk_tail,
    witness_decode,
    witness_encode,
)
from .prob import Prob2, Prob2Interval
from .verify import VerificationCase, VerificationReport, audit_coverage, compare, run_suite

__version__ = "0.1.0"
