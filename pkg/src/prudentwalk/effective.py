"""The effective one-dimensional random walk behind the excursions.

Increments take value k with probability (1/3)(1/2)^|k|.  This module
provides exact-rational oracles for that law and its exit times, fast
samplers, the alternating ladder decomposition with its overshoots, the
overshoot-corrected companion path whose ladder values are pinned to
0 / -1, and the microscopic time change between effective steps and
lattice steps.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels

__all__ = [
    "IncrementLaw",
    "EffectiveWalkPath",
    "LadderDecomposition",
    "HatPath",
    "ExitOutcome",
    "increment_pmf",
    "sample_increment",
    "sample_increments",
    "simulate_effective_walk",
    "exit_time",
    "sample_exit_times",
    "exit_time_pmf_exact",
    "exit_time_pmf_table",
    "ladder_decompose",
    "hat_path",
    "microscopic_times",
    "microscopic_time",
    "effective_index_of_time",
    "sample_one_sided_excursion",
]

PMF_MAX_WIDTH = 30
PMF_MAX_TIME = 200

# Test hook: probability mass moved from the zero increment onto +-1.
# Used by the verification suite's mutation self-check; leave at 0.0.
_TAMPER_ENV = "PRUDENTWALK_TAMPER_INCREMENT"


class IncrementLaw:
    """Exact description of the increment distribution (1/3)(1/2)^|k|."""

    def pmf(self, k: int) -> Fraction:
        return Fraction(1, 3) / Fraction(2) ** abs(int(k))

    def mean_abs(self) -> Fraction:
        """E|xi| = 2/3 * sum k (1/2)^k = 4/3."""
        return Fraction(4, 3)

    def second_moment(self) -> Fraction:
        """E[xi^2] = 2/3 * sum k^2 (1/2)^k = 4."""
        return Fraction(4)

    def variance(self) -> Fraction:
        return self.second_moment()  # mean is zero by symmetry

    def second_moment_by_summation(self, tail: int = 128) -> Fraction:
        """Direct summation oracle for the closed forms above."""
        return sum((Fraction(k * k) * self.pmf(k) for k in range(-tail, tail + 1)), Fraction(0))


LAW = IncrementLaw()


def increment_pmf(k: int) -> Fraction:
    """P(increment = k), exact."""
    return LAW.pmf(k)


def _tamper_bias() -> float:
    raw = os.environ.get(_TAMPER_ENV, "")
    return float(raw) if raw else 0.0


def sample_increments(rng: np.random.Generator, size: int) -> np.ndarray:
    """Vectorized draw: zero w.p. 1/3, otherwise a sign times Geometric(1/2)."""
    p_zero = 1.0 / 3.0 + _tamper_bias()
    zero = rng.random(size) < p_zero
    mag = rng.geometric(0.5, size)
    sign = rng.integers(0, 2, size) * 2 - 1
    return np.where(zero, 0, sign * mag).astype(np.int64)


def sample_increment(rng: np.random.Generator) -> int:
    return int(sample_increments(rng, 1)[0])


@dataclass(frozen=True)
class EffectiveWalkPath:
    """Partial-sum path S_0 = 0, S_1, ..., S_n of the effective walk."""

    values: np.ndarray  # int64, length n + 1

    def __len__(self) -> int:
        return self.values.shape[0] - 1

    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def simulate_effective_walk(n: int, rng: np.random.Generator) -> EffectiveWalkPath:
    if n < 0:
        raise ValueError("step count must be nonnegative")
    values = np.zeros(n + 1, dtype=np.int64)
    if n:
        np.cumsum(sample_increments(rng, n), out=values[1:])
    return EffectiveWalkPath(values)


@dataclass(frozen=True)
class ExitOutcome:
    """First exit of the walk from [0, width-1] (or below 0 when one-sided)."""

    exit_time: int
    exit_side: str  # "below", "above", or "censored"
    final_value: int
    censored: bool = False


def exit_time(width, rng: np.random.Generator, cap: int = 10_000_000) -> ExitOutcome:
    """Sample the first exit from [0, width-1]; width may be math.inf.

    The one-sided exit has infinite mean, so runs are censored at cap
    steps; a censored outcome is reported, never silently dropped.
    """
    one_sided = width == math.inf or width is None
    if not one_sided and width < 1:
        raise ValueError("width must be >= 1 or infinite")
    w = 0 if one_sided else int(width)
    times = np.empty(1, dtype=np.int64)
    sides = np.empty(1, dtype=np.int64)
    finals = np.empty(1, dtype=np.int64)
    _kernels.effective_exit_times(rng, w, 1, cap, times, sides, finals)
    side = {-1: "below", 1: "above", 0: "censored"}[int(sides[0])]
    return ExitOutcome(int(times[0]), side, int(finals[0]), censored=side == "censored")


def sample_exit_times(width, n_samples: int, rng: np.random.Generator, cap: int = 10_000_000):
    """Bulk exit-time sampling; returns (times, sides) int64 arrays.

    sides: -1 below, +1 above, 0 censored at cap.
    """
    one_sided = width == math.inf or width is None
    w = 0 if one_sided else int(width)
    times = np.empty(n_samples, dtype=np.int64)
    sides = np.empty(n_samples, dtype=np.int64)
    finals = np.empty(n_samples, dtype=np.int64)
    _kernels.effective_exit_times(rng, w, n_samples, cap, times, sides, finals)
    return times, sides


@lru_cache(maxsize=None)
def _exit_pmf_table_cached(width: int, m_max: int) -> tuple:
    """P(exit from [0, width-1] at time m) for m = 1..m_max, exact.

    Dynamic programming over the kernel restricted to the interval: v holds
    the sub-probability vector of staying inside through step t.
    """
    stay = [[LAW.pmf(j - i) for j in range(width)] for i in range(width)]
    exit_mass = [1 - sum(stay[i], Fraction(0)) for i in range(width)]
    v = [Fraction(0)] * width
    v[0] = Fraction(1)
    out = []
    for _ in range(m_max):
        out.append(sum((v[i] * exit_mass[i] for i in range(width)), Fraction(0)))
        v = [
            sum((v[i] * stay[i][j] for i in range(width)), Fraction(0))
            for j in range(width)
        ]
    return tuple(out)


def exit_time_pmf_table(width: int, m_max: int) -> list[Fraction]:
    if not 1 <= width <= PMF_MAX_WIDTH:
        raise ValueError(f"width must be in [1, {PMF_MAX_WIDTH}]")
    if not 1 <= m_max <= PMF_MAX_TIME:
        raise ValueError(f"m must be in [1, {PMF_MAX_TIME}]")
    return list(_exit_pmf_table_cached(width, m_max))


def exit_time_pmf_exact(width: int, m: int) -> Fraction:
    """Exact P(first exit from [0, width-1] happens at step m)."""
    return exit_time_pmf_table(width, m)[m - 1]


@dataclass(frozen=True)
class LadderDecomposition:
    """Alternating ladder times tau_k and overshoots Delta_k.

    tau_0 = 0 and Delta_0 = 0; odd indices are first passages strictly
    below the previous ladder value, even indices strictly above, so
    (-1)^(k+1) Delta_k >= 0.
    """

    ladder_times: np.ndarray  # int64
    overshoots: np.ndarray  # int64

    def count(self) -> int:
        """Number of completed ladder epochs (excluding tau_0)."""
        return self.ladder_times.shape[0] - 1


def ladder_decompose(path: EffectiveWalkPath) -> LadderDecomposition:
    values = np.ascontiguousarray(path.values, dtype=np.int64)
    taus = np.empty(values.shape[0], dtype=np.int64)
    deltas = np.empty(values.shape[0], dtype=np.int64)
    k = _kernels.ladder_decompose_kernel(values, taus, deltas)
    return LadderDecomposition(taus[:k].copy(), deltas[:k].copy())


@dataclass(frozen=True)
class HatPath:
    """Overshoot-corrected path: hat(S)_n = S_n + sum of overshoots due by n.

    Its value at even ladder times is 0 and at odd ladder times is -1,
    which makes it the exact effective-walk image of a corner-model
    trajectory.
    """

    values: np.ndarray  # int64
    source: EffectiveWalkPath | None = None
    ladders: LadderDecomposition | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.values.shape[0] - 1


def hat_path(path: EffectiveWalkPath) -> HatPath:
    ladders = ladder_decompose(path)
    corr = np.zeros(path.values.shape[0], dtype=np.int64)
    if ladders.count():
        corr[ladders.ladder_times[1:]] = ladders.overshoots[1:]
    values = path.values + np.cumsum(corr)
    return HatPath(values, source=path, ladders=ladders)


def microscopic_times(hat: HatPath) -> np.ndarray:
    """t(n) = sum_{i<=n} (1 + |hat increment i|) for all n, t(0) = 0."""
    t = np.zeros(hat.values.shape[0], dtype=np.int64)
    np.cumsum(1 + np.abs(np.diff(hat.values)), out=t[1:])
    return t


def microscopic_time(hat: HatPath, n: int) -> int:
    if not 0 <= n <= len(hat):
        raise IndexError("index beyond path length")
    return int(microscopic_times(hat)[n])


def effective_index_of_time(hat: HatPath, t: int) -> int:
    """Smallest n with t(n) >= t."""
    times = microscopic_times(hat)
    if t > times[-1]:
        raise ValueError("time beyond the path horizon")
    return int(np.searchsorted(times, t, side="left"))


def sample_one_sided_excursion(
    rng: np.random.Generator, cap: int = 1_000_000, max_retries: int = 64
) -> np.ndarray:
    """One excursion of the effective walk: from 0 until first value < 0.

    These are the independent building blocks of the corner model.  The
    exit value is kept raw (overshoot not yet discarded).  Censored draws
    (no exit within cap) are retried; exhausting retries raises.
    """
    for _ in range(max_retries):
        chunks = [np.array([0], dtype=np.int64)]
        total = 0
        level = 0
        block = 256
        while total < cap:
            inc = sample_increments(rng, block)
            vals = level + np.cumsum(inc)
            hit = np.nonzero(vals < 0)[0]
            if hit.size:
                chunks.append(vals[: hit[0] + 1])
                return np.concatenate(chunks)
            chunks.append(vals)
            level = int(vals[-1])
            total += block
            block = min(2 * block, 1 << 16)
    raise RuntimeError("one-sided excursion exceeded cap in every retry")


def hat_to_corner_path(hat: HatPath, first_step: str = "horizontal"):
    """Unfold a hat path into its corner-model lattice trajectory.

    Re-exported from the excursion codec; see codec.unfold_hat_path.
    """
    from .codec import unfold_hat_path

    return unfold_hat_path(hat, first_step=first_step)
