"""Statistical engine: estimators, goodness-of-fit tests, exponent fits.

Every distributional acceptance check in the package routes through the
operations here; no other module computes test statistics of its own.
The chi-square p-value uses an in-module regularized incomplete gamma
(series + continued fraction, relative error below 1e-8).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

__all__ = [
    "StatReport",
    "EmpiricalCDF",
    "ks_statistic",
    "ks_distance",
    "chi_square",
    "chi_square_two_sample",
    "pool_tail",
    "pool_sparse_cells",
    "regularized_gamma_q",
    "loglog_slope",
    "speed_estimate",
    "sup_deviation_diagnostics",
    "render_report_table",
    "reports_to_json",
]

KS_CRITICAL = {0.10: 1.22, 0.05: 1.36, 0.01: 1.63}


@dataclass(frozen=True)
class StatReport:
    """One named check: estimate, statistic, threshold, verdict.

    The verdict is a pure function of (statistic, threshold, comparison);
    informational entries never fail a suite.
    """

    name: str
    estimate: float
    statistic: float
    threshold: float
    comparison: str = "<="  # statistic <= threshold  (or ">=")
    stderr: float | None = None
    informational: bool = False
    n_samples: int = 0
    seeds: str = ""
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        if self.comparison == "<=":
            return self.statistic <= self.threshold
        if self.comparison == ">=":
            return self.statistic >= self.threshold
        raise ValueError(f"unknown comparison {self.comparison!r}")

    @property
    def verdict(self) -> str:
        if self.informational:
            return "info"
        return "pass" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        d["passed"] = self.passed
        return d


def render_report_table(reports) -> str:
    lines = [f"{'check':<34} {'estimate':>12} {'statistic':>12} {'threshold':>12}  verdict"]
    for r in reports:
        lines.append(
            f"{r.name:<34} {r.estimate:>12.6g} {r.statistic:>12.6g} "
            f"{r.comparison:>2} {r.threshold:>9.6g}  {r.verdict}"
        )
    return "\n".join(lines)


def reports_to_json(reports) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, default=float)


class EmpiricalCDF:
    """Right-continuous step function of a sample."""

    def __init__(self, samples):
        self.values = np.sort(np.asarray(samples, dtype=np.float64))
        self.n = self.values.shape[0]

    def __call__(self, x):
        return np.searchsorted(self.values, x, side="right") / self.n


def ks_distance(samples, cdf) -> float:
    """sup_x |F_n(x) - F(x)| without any sample-size gate."""
    x = np.sort(np.asarray(samples, dtype=np.float64))
    n = x.shape[0]
    f = np.asarray([cdf(v) for v in x])
    if np.any(np.diff(f) < -1e-12):
        raise ValueError("reference cdf is not monotone on the sample range")
    grid = np.arange(1, n + 1) / n
    return float(max(np.max(grid - f), np.max(f - (grid - 1.0 / n))))


def ks_statistic(samples, cdf, level: float = 0.05):
    """Kolmogorov-Smirnov distance to a reference CDF.

    Returns (D, passed, threshold) with the asymptotic threshold
    c(level)/sqrt(n); sample sizes here are large enough for that to be
    safe.  Requires at least 50 samples.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] < 50:
        raise ValueError("need at least 50 samples")
    d = ks_distance(samples, cdf)
    try:
        c = KS_CRITICAL[level]
    except KeyError:
        raise ValueError(f"unsupported level {level}") from None
    threshold = c / math.sqrt(samples.shape[0])
    return d, d < threshold, threshold


def _gamma_q_series(a: float, x: float) -> float:
    """P(a, x) by power series; returns Q = 1 - P."""
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(1000):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * 1e-16:
            break
    p = total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    return 1.0 - p


def _gamma_q_cf(a: float, x: float) -> float:
    """Q(a, x) by Lentz's continued fraction."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 1000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-x + a * math.log(x) - math.lgamma(a))


def regularized_gamma_q(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) = Gamma(a, x)/Gamma(a)."""
    if a <= 0 or x < 0:
        raise ValueError("need a > 0 and x >= 0")
    if x == 0:
        return 1.0
    if x < a + 1.0:
        return _gamma_q_series(a, x)
    return _gamma_q_cf(a, x)


def chi_square(observed, expected_probs):
    """Pearson chi-square of counts against a fully specified law.

    Every bin must have expected count >= 5 (pool first; see pool_tail).
    Returns (statistic, p_value) with df = bins - 1.
    """
    obs = np.asarray(observed, dtype=np.float64)
    probs = np.asarray(expected_probs, dtype=np.float64)
    if obs.shape != probs.shape:
        raise ValueError("observed and expected shapes differ")
    n = obs.sum()
    expected = n * probs
    if np.any(expected < 5.0):
        raise ValueError("bins with expected count < 5; pool before testing")
    stat = float(np.sum((obs - expected) ** 2 / expected))
    df = obs.shape[0] - 1
    return stat, regularized_gamma_q(df / 2.0, stat / 2.0)


def chi_square_two_sample(counts_a, counts_b):
    """Two-sample chi-square homogeneity test over shared bins."""
    a = np.asarray(counts_a, dtype=np.float64)
    b = np.asarray(counts_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError("count vectors must share bins")
    keep = (a + b) > 0
    a, b = a[keep], b[keep]
    na, nb = a.sum(), b.sum()
    pooled = (a + b) / (na + nb)
    ea, eb = na * pooled, nb * pooled
    if np.any(ea < 5.0) or np.any(eb < 5.0):
        raise ValueError("bins with expected count < 5; pool before testing")
    stat = float(np.sum((a - ea) ** 2 / ea) + np.sum((b - eb) ** 2 / eb))
    df = a.shape[0] - 1
    return stat, regularized_gamma_q(df / 2.0, stat / 2.0)


def pool_tail(counts, probs, tail_count: int = 0, tail_prob: float = 0.0, min_expected: float = 5.0):
    """Pool trailing bins (plus any beyond-support mass) into one tail bin
    until every expected count reaches min_expected.

    counts/probs are aligned by value in increasing order; tail_count and
    tail_prob describe observations and probability beyond the listed
    support.  Returns (pooled_counts, pooled_probs).
    """
    counts = np.asarray(counts, dtype=np.int64)
    probs = np.asarray(probs, dtype=np.float64)
    n = counts.sum() + tail_count
    cut = counts.shape[0]
    acc_p = float(tail_prob)
    acc_c = int(tail_count)

    def _ok(cut_at: int, tp: float, tc: int) -> bool:
        lead_ok = bool(np.all(n * probs[:cut_at] >= min_expected))
        tail_ok = (tp == 0.0 and tc == 0) or n * tp >= min_expected
        return lead_ok and tail_ok

    while cut > 0 and not _ok(cut, acc_p, acc_c):
        cut -= 1
        acc_p += probs[cut]
        acc_c += counts[cut]
    if cut == 0:
        raise ValueError("sample too small to satisfy the pooling floor")
    if acc_p > 0 or acc_c > 0:
        return (
            np.concatenate([counts[:cut], [acc_c]]),
            np.concatenate([probs[:cut], [acc_p]]),
        )
    return counts[:cut].copy(), probs[:cut].copy()


def pool_sparse_cells(observed, probs, min_expected: float = 5.0):
    """Pool unordered sparse cells (expected < floor) into one bin.

    If even the pooled bin stays below the floor it is dropped and the
    test becomes conditional on the kept cells (callers renormalize).
    """
    obs = np.asarray(observed, dtype=np.int64)
    p = np.asarray(probs, dtype=np.float64)
    n = obs.sum()
    keep = n * p >= min_expected
    if not keep.any():
        raise ValueError("no cell reaches the expected-count floor")
    rest_p = float(p[~keep].sum())
    rest_c = int(obs[~keep].sum())
    if n * rest_p >= min_expected:
        return np.concatenate([obs[keep], [rest_c]]), np.concatenate([p[keep], [rest_p]])
    return obs[keep].copy(), p[keep].copy()


def loglog_slope(t, values):
    """OLS slope of log(values) against log(t), with its standard error."""
    t = np.asarray(t, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.shape[0] < 4:
        raise ValueError("need at least 4 points")
    if np.any(t <= 0) or np.any(v <= 0):
        raise ValueError("log-log fit needs positive data")
    x = np.log(t)
    y = np.log(v)
    xc = x - x.mean()
    sxx = float(np.sum(xc**2))
    slope = float(np.sum(xc * y) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    dof = x.shape[0] - 2
    stderr = math.sqrt(float(np.sum(resid**2)) / dof / sxx) if dof > 0 else 0.0
    return slope, stderr


def speed_estimate(final_positions, t: int):
    """Mean L1 speed |gamma_t|_1 / t with stderr and a 95% CI."""
    pos = np.asarray(final_positions, dtype=np.float64)
    if pos.shape[0] < 2:
        raise ValueError("need at least two trajectories")
    speeds = np.abs(pos).sum(axis=1) / t
    mean = float(speeds.mean())
    stderr = float(speeds.std(ddof=1) / math.sqrt(speeds.shape[0]))
    return mean, stderr, (mean - 1.96 * stderr, mean + 1.96 * stderr)


def sup_deviation_diagnostics(s_values, hat_values, brownian_values=None):
    """Informational sup-norm diagnostics between a walk and its companions.

    Reports max|S - hat(S)| / sqrt(n), sup_m |t(m) - (7/3) m| / n (exact
    integer arithmetic: |3 t(m) - 7 m| / 3n), and the occupation-vector
    gap against the matched diffusive embedding (whose sign indicators
    are those of S itself, making brownian_values optional).
    """
    s = np.asarray(s_values, dtype=np.int64)
    h = np.asarray(hat_values, dtype=np.int64)
    if s.shape != h.shape:
        raise ValueError("paths must share a horizon")
    n = s.shape[0] - 1
    if n < 1:
        raise ValueError("empty path")
    max_gap = float(np.max(np.abs(s - h)))
    t_all = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(1 + np.abs(np.diff(h)), out=t_all[1:])
    time_dev = float(np.max(np.abs(3 * t_all - 7 * np.arange(n + 1, dtype=np.int64)))) / 3.0
    if brownian_values is not None:
        b = np.asarray(brownian_values, dtype=np.float64)
        occ_gap = float(np.max(np.abs(np.cumsum(b >= 0) - np.cumsum(h >= 0)))) / n
    else:
        occ_gap = float(np.max(np.abs(np.cumsum(s >= 0) - np.cumsum(h >= 0)))) / n
    reports = [
        StatReport(
            name="hat_gap_over_sqrt_n",
            estimate=max_gap / math.sqrt(n),
            statistic=max_gap / math.sqrt(n),
            threshold=math.inf,
            informational=True,
            n_samples=n,
        ),
        StatReport(
            name="time_change_sup_dev_over_n",
            estimate=time_dev / n,
            statistic=time_dev / n,
            threshold=math.inf,
            informational=True,
            n_samples=n,
        ),
        StatReport(
            name="occupation_gap_over_n",
            estimate=occ_gap,
            statistic=occ_gap,
            threshold=math.inf,
            informational=True,
            n_samples=n,
        ),
    ]
    return reports
