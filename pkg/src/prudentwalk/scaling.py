"""Sampler for the Brownian limit process and its occupation-time laws.

The limit trajectory is, for u in [0, 1],

    Z_u = ( sigma1 * time W spends >= 0 on [0, 3u/7],
            sigma2 * time W spends <  0 on [0, 3u/7] ),

with W a standard Brownian motion and sigma1, sigma2 independent uniform
signs.  Occupation times are computed by left-endpoint quadrature, so
theta_plus + theta_minus equals the (grid-rounded) horizon exactly and
|Z_u(1)| + |Z_u(2)| = 3u/7 up to one quadrature step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BrownianPath",
    "OccupationPair",
    "ZProcessSample",
    "sample_brownian",
    "occupation_times",
    "z_process",
    "angle_cdf",
    "discrete_gamma",
    "discrete_occupation_gap",
]


@dataclass(frozen=True)
class BrownianPath:
    """Gaussian-increment path W_0 = 0, W_dt, W_2dt, ..."""

    dt: float
    values: np.ndarray

    @property
    def horizon(self) -> float:
        return (self.values.shape[0] - 1) * self.dt


def sample_brownian(dt: float, horizon: float, rng: np.random.Generator) -> BrownianPath:
    if dt <= 0 or horizon < dt:
        raise ValueError("need dt > 0 and horizon >= dt")
    n = int(round(horizon / dt))
    values = np.zeros(n + 1)
    np.cumsum(rng.standard_normal(n) * math.sqrt(dt), out=values[1:])
    return BrownianPath(dt, values)


@dataclass(frozen=True)
class OccupationPair:
    theta_plus: float
    theta_minus: float

    @property
    def horizon(self) -> float:
        return self.theta_plus + self.theta_minus


def occupation_times(path: BrownianPath, s: float) -> OccupationPair:
    """Time spent at-or-above / below zero on [0, s], left-endpoint rule."""
    if s > path.horizon + 1e-12:
        raise ValueError("s exceeds the path horizon")
    n_s = int(round(s / path.dt))
    above = int(np.count_nonzero(path.values[:n_s] >= 0.0))
    return OccupationPair(above * path.dt, (n_s - above) * path.dt)


@dataclass(frozen=True)
class ZProcessSample:
    sigma1: int
    sigma2: int
    u_grid: np.ndarray
    points: np.ndarray  # (len(u_grid), 2)
    dt: float

    def ray_deviation(self) -> float:
        """max_u | |Z(1)| + |Z(2)| - 3u/7 |, which is at most one dt."""
        l1 = np.abs(self.points).sum(axis=1)
        return float(np.max(np.abs(l1 - 3.0 * self.u_grid / 7.0)))


def z_process(path: BrownianPath, sigma1: int, sigma2: int, u_grid) -> ZProcessSample:
    if sigma1 not in (-1, 1) or sigma2 not in (-1, 1):
        raise ValueError("signs must be +-1")
    u = np.asarray(u_grid, dtype=np.float64)
    if u.size == 0 or np.any(u < 0) or np.any(u > 1):
        raise ValueError("u grid must lie in [0, 1]")
    if path.horizon + 1e-12 < 3.0 * float(u.max()) / 7.0:
        raise ValueError("path horizon too short for the requested grid")
    pts = np.empty((u.shape[0], 2))
    # cumulative count of nonnegative left endpoints gives all horizons at once
    nonneg = np.concatenate(([0], np.cumsum(path.values >= 0.0)))
    for i, ui in enumerate(u):
        n_s = int(round(3.0 * ui / 7.0 / path.dt))
        above = int(nonneg[n_s])
        pts[i, 0] = sigma1 * above * path.dt
        pts[i, 1] = sigma2 * (n_s - above) * path.dt
    return ZProcessSample(sigma1, sigma2, u, pts, path.dt)


def angle_cdf(x: float) -> float:
    """P(angle of Z to the first axis <= x) = (2/pi) arctan(sqrt(tan x))."""
    if not 0.0 < x < math.pi / 2.0:
        raise ValueError("angle must lie in (0, pi/2)")
    return (2.0 / math.pi) * math.atan(math.sqrt(math.tan(x)))


def discrete_gamma(hat, m: int) -> tuple[int, int]:
    """Counts of hat values >= 0 and < 0 among indices 0..m (inclusive).

    The inclusive-count convention makes the components sum to m + 1.
    """
    values = np.asarray(getattr(hat, "values", hat))
    if not 0 <= m < values.shape[0]:
        raise IndexError("index beyond path length")
    plus = int(np.count_nonzero(values[: m + 1] >= 0))
    return plus, (m + 1) - plus


def discrete_occupation_gap(s_values, hat_values) -> float:
    """sup_m |Gamma_m - Z_m|_inf / n between the hat path's occupation
    vector and the matched diffusive embedding of the raw walk.

    The embedding B_k = S_k / sigma shares the walk's noise, and its sign
    indicators do not depend on sigma, so the comparison reduces to
    counting sign disagreements between S and hat(S) prefix by prefix.
    """
    s = np.asarray(s_values)
    h = np.asarray(hat_values)
    if s.shape != h.shape:
        raise ValueError("paths must share a horizon")
    n = s.shape[0] - 1
    cum_s = np.cumsum(s >= 0)
    cum_h = np.cumsum(h >= 0)
    # the two theta components differ by the same count with opposite sign
    return float(np.max(np.abs(cum_s - cum_h))) / max(n, 1)
