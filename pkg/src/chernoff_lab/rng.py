"""Counter-based uniforms: the draw for (seed, trial, step) is a pure function.

The value is the SplitMix64 output at position ``trial * 2**32 + step`` of the
stream keyed by ``seed``. Because nothing is carried between draws, any subset
of (trial, step) pairs can be generated in any order, in bulk or one at a time,
and always yields the same numbers.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1
_TO_UNIT = 2.0**-53

MAX_INDEX = 1 << 32


def _mix64(x: np.ndarray) -> np.ndarray:
    x = x ^ (x >> np.uint64(30))
    x *= _M1
    x ^= x >> np.uint64(27)
    x *= _M2
    x ^= x >> np.uint64(31)
    return x


def stream_key(seed: int) -> np.uint64:
    """Scramble a user seed into the additive key of its stream."""
    base = np.array([(int(seed) & _MASK64)], dtype=np.uint64)
    return _mix64(base + _GAMMA)[0]


def uniforms(seed: int, trials, step_start: int, count: int) -> np.ndarray:
    """Uniforms on [0, 1) of shape (len(trials), count).

    Row i holds the draws for trial ``trials[i]`` at steps
    ``step_start .. step_start + count - 1``.
    """
    trials = np.asarray(trials, dtype=np.uint64).reshape(-1)
    if step_start < 0 or step_start + count > MAX_INDEX:
        raise ValueError("step index out of range")
    if trials.size and int(trials.max()) >= MAX_INDEX:
        raise ValueError("trial index out of range")
    steps = np.arange(step_start, step_start + count, dtype=np.uint64)
    counter = (trials[:, None] << np.uint64(32)) | steps[None, :]
    x = counter * _GAMMA + stream_key(seed)
    return (_mix64(x) >> np.uint64(11)).astype(np.float64) * _TO_UNIT


def trial_uniforms(seed: int, trial: int, count: int) -> np.ndarray:
    """The draws of a single trial for steps 0..count-1."""
    return uniforms(seed, [trial], 0, count)[0]
