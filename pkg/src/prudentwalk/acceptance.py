"""The verification suite: one function per criterion, spec-pinned gates.

Each criterion runs at the full desk scale by default and at a 10x
smaller scale with 2x looser tolerances under quick=True (per-criterion
quick adjustments are spelled out in each docstring).  All runs are
deterministic: every criterion owns a fixed master seed and replicas are
keyed by index.

Criteria (names match the runner's output lines):

 1 speed_law           mean L1 speed at t = 1e6 within 3/7 +- 0.02
 2 angle_law           KS(angle sample, (2/pi) arctan sqrt(tan x)) < 0.05
 3 quadrant_uniformity settled-quadrant frequencies 0.25 +- 0.03
 4 excursion_law       chi-square vs the exact exit-time oracle, walls 2/3/5
 5 overshoot_law       ladder overshoots geometric(1/2), chi-square p > 0.01
 6 hat_anchoring       corrected path exactly 0 / -1 at ladder times
 7 time_change         |t(1e6)/1e6 - 7/3| < 0.01 in >= 99% of seeds
 8 index_oracle        extrema index == scan referee, 2D+3D, zero mismatches
 9 z_ray               |Z1| + |Z2| = 3u/7 within one quadrature step
10 crossing_decay      smoothed P(cross at pair k) nonincreasing, slope <= -1.2
11 exponent_3d         fitted 3D norm exponent within [0.66, 0.85]
12 coupling_fidelity   (X0, Y0, X1) law matches the truncation coupling
13 diagnostics_trend   sup-deviation ratios strictly decrease with n
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, effective, scaling, stats, walk2d, walk3d
from .rng import replica_rng
from .stats import StatReport

__all__ = ["Scale", "CRITERIA", "run_criterion", "run_all"]


@dataclass(frozen=True)
class Scale:
    quick: bool = False

    @property
    def name(self) -> str:
        return "quick" if self.quick else "full"

    def size(self, full: int) -> int:
        return max(full // 10, 1) if self.quick else full

    def tol(self, full: float) -> float:
        return 2.0 * full if self.quick else full


def _fold_to_first_quadrant(summary) -> float | None:
    """Endpoint angle after reflecting the settled quadrant onto the first.

    Conditioning on quadrant 1 directly would keep ~1/4 of the replicas;
    the lattice symmetries make the reflected sample equal in law, so all
    replicas contribute.  Returns None when a coordinate is still
    nonpositive after folding (walker not yet settled).
    """
    q = walk2d.summary_quadrant(summary)
    sx = 1 if q in (1, 4) else -1
    sy = 1 if q in (1, 2) else -1
    x = sx * int(summary[_kernels.S_X])
    y = sy * int(summary[_kernels.S_Y])
    if x <= 0 or y <= 0:
        return None
    return math.atan2(y, x)


def crit_speed_law(scale: Scale) -> list[StatReport]:
    """1: mean |gamma_t|_1 / t over 200 replicas at t = 1e6 in 3/7 +- 0.02.

    quick: 20 replicas at t = 1e5, band +- 0.04.
    """
    n = scale.size(1_000_000)
    replicas = scale.size(200)
    tol = scale.tol(0.02)
    eng = walk2d.Walk2DEngine(n)
    finals = np.empty((replicas, 2))
    for r in range(replicas):
        _, s = eng.run_path(replica_rng(1001, r), n, record_path=False)
        finals[r] = (s[_kernels.S_X], s[_kernels.S_Y])
    mean, stderr, _ = stats.speed_estimate(finals, n)
    return [
        StatReport(
            name="speed_law",
            estimate=mean,
            statistic=abs(mean - 3.0 / 7.0),
            threshold=tol,
            stderr=stderr,
            n_samples=replicas,
            seeds="master 1001",
            details={"t": n, "target": 3.0 / 7.0},
        )
    ]


def crit_angle_law(scale: Scale) -> list[StatReport]:
    """2: KS distance of the quadrant-1 endpoint angle to the closed form,
    2000 replicas at t = 1e6, < 0.05.  All settled quadrants are folded
    onto the first by the lattice symmetry (equal in law to conditioning).

    quick: 200 replicas at t = 1e5, KS < 0.10.
    """
    n = scale.size(1_000_000)
    replicas = scale.size(2000)
    tol = scale.tol(0.05)
    eng = walk2d.Walk2DEngine(n)
    angles = []
    skipped = 0
    for r in range(replicas):
        _, s = eng.run_path(replica_rng(1002, r), n, record_path=False)
        a = _fold_to_first_quadrant(s)
        if a is None:
            skipped += 1
        else:
            angles.append(a)
    d, _, _ = stats.ks_statistic(angles, scaling.angle_cdf, level=0.05)
    return [
        StatReport(
            name="angle_law",
            estimate=d,
            statistic=d,
            threshold=tol,
            n_samples=len(angles),
            seeds="master 1002",
            details={"t": n, "unsettled_skipped": skipped},
        )
    ]


def crit_quadrant_uniformity(scale: Scale) -> list[StatReport]:
    """3: settled-quadrant frequencies over 4000 replicas at t = 1e5,
    each within 0.25 +- 0.03.

    quick: 400 replicas at t = 1e4, +- 0.06.
    """
    n = scale.size(100_000)
    replicas = scale.size(4000)
    tol = scale.tol(0.03)
    eng = walk2d.Walk2DEngine(n)
    counts = np.zeros(5, dtype=np.int64)
    for r in range(replicas):
        _, s = eng.run_path(replica_rng(1003, r), n, record_path=False)
        counts[walk2d.summary_quadrant(s)] += 1
    freqs = counts[1:] / replicas
    return [
        StatReport(
            name="quadrant_uniformity",
            estimate=float(freqs.max()),
            statistic=float(np.abs(freqs - 0.25).max()),
            threshold=tol,
            n_samples=replicas,
            seeds="master 1003",
            details={"frequencies": freqs.tolist(), "t": n},
        )
    ]


def crit_excursion_law(scale: Scale) -> list[StatReport]:
    """4: excursion displacements at walls 2, 3, 5 match the exact exit-time
    oracle, chi-square p > 0.01 on >= 1e5 excursions per wall.  Both
    excursion kinds contribute (the conditional law is the same exit law
    with the wall being the current transverse side length).

    quick: >= 1e4 excursions per wall, same p threshold.
    """
    target = scale.size(100_000)
    walls = (2, 3, 5)
    n_steps = 1500
    eng = walk2d.Walk2DEngine(n_steps)
    by_wall: dict[int, list[int]] = {w: [] for w in walls}
    r = 0
    # walls this small occur only in the first few excursions of a walk,
    # so harvest many short runs until every wall has its quota
    while min(len(v) for v in by_wall.values()) < target:
        recs, _ = eng.run_excursions(replica_rng(1004, r), n_steps)
        for row in recs:
            w = int(row[_kernels.E_WALL])
            if w in by_wall:
                by_wall[w].append(int(row[_kernels.E_DISP]))
        r += 1
        if r > 400 * (target // 100 + 1):
            raise RuntimeError("excursion harvest failed to reach quota")
    out = []
    for w in walls:
        disps = np.asarray(by_wall[w])
        m_max = effective.PMF_MAX_TIME
        probs = np.array([float(p) for p in effective.exit_time_pmf_table(w, m_max)])
        counts = np.bincount(np.minimum(disps, m_max + 1), minlength=m_max + 2)[1 : m_max + 1]
        tail_count = int((disps > m_max).sum())
        c, p = stats.pool_tail(counts, probs, tail_count, 1.0 - probs.sum())
        stat, pval = stats.chi_square(c, p / p.sum())
        out.append(
            StatReport(
                name=f"excursion_law_wall_{w}",
                estimate=pval,
                statistic=pval,
                threshold=0.01,
                comparison=">=",
                n_samples=int(disps.size),
                seeds="master 1004",
                details={"chi_square": stat, "bins": len(c), "walks": r},
            )
        )
    return out


def _harvest_ladders(master_seed: int, n_paths: int, path_len: int):
    """Completed ladder overshoots and anchoring violations over many walks."""
    overshoots = []
    anchor_violations = 0
    ladder_count = 0
    for r in range(n_paths):
        rng = replica_rng(master_seed, r)
        path = effective.simulate_effective_walk(path_len, rng)
        lad = effective.ladder_decompose(path)
        hat = effective.hat_path(path)
        k = lad.count()
        ladder_count += k
        if k:
            overshoots.append(np.abs(lad.overshoots[1:]))
            signs = -lad.overshoots[1:] * np.where(np.arange(1, k + 1) % 2 == 1, -1, 1)
            if np.any(signs < 0):
                anchor_violations += 1  # alternation broken counts as violation
            hat_at = hat.values[lad.ladder_times]
            expect = np.where(np.arange(k + 1) % 2 == 0, 0, -1)
            anchor_violations += int(np.count_nonzero(hat_at != expect))
    return (
        np.concatenate(overshoots) if overshoots else np.zeros(0, dtype=np.int64),
        anchor_violations,
        ladder_count,
    )


def crit_overshoot_law(scale: Scale) -> list[StatReport]:
    """5: |overshoot| at completed ladders is geometric(1/2) on {0,1,...},
    chi-square p > 0.01 on >= 1e5 ladders.

    quick: >= 1e4 ladders.
    """
    target = scale.size(100_000)
    path_len = 10_000
    # ladder epochs have infinite mean, so a length-L walk yields ~sqrt(L)
    n_paths = max(2 * target // int(math.sqrt(path_len)), 4)
    absd, _, _ = _harvest_ladders(1005, n_paths, path_len)
    if absd.size < target:
        raise RuntimeError("too few ladders harvested")
    m_max = 40
    probs = np.array([0.5 ** (j + 1) for j in range(m_max + 1)])
    counts = np.bincount(np.minimum(absd, m_max + 1), minlength=m_max + 2)[: m_max + 1]
    tail_count = int((absd > m_max).sum())
    c, p = stats.pool_tail(counts, probs, tail_count, 1.0 - probs.sum())
    stat, pval = stats.chi_square(c, p / p.sum())
    return [
        StatReport(
            name="overshoot_law",
            estimate=pval,
            statistic=pval,
            threshold=0.01,
            comparison=">=",
            n_samples=int(absd.size),
            seeds="master 1005",
            details={"chi_square": stat, "bins": len(c)},
        )
    ]


def crit_hat_anchoring(scale: Scale) -> list[StatReport]:
    """6: the corrected path equals 0 at even and -1 at odd ladder times,
    with alternating overshoot signs; zero violations over 200 walks of
    5e4 steps.

    quick: 20 walks of 5e3 steps (the gate stays zero violations).
    """
    n_paths = scale.size(200)
    path_len = scale.size(50_000)
    _, violations, ladders = _harvest_ladders(1006, n_paths, path_len)
    return [
        StatReport(
            name="hat_anchoring",
            estimate=float(violations),
            statistic=float(violations),
            threshold=0.0,
            n_samples=ladders,
            seeds="master 1006",
        )
    ]


def crit_time_change(scale: Scale) -> list[StatReport]:
    """7: |t(n)/n - 7/3| < 0.01 at n = 1e6 for >= 99% of 100 seeds.

    quick: n = 1e5, 20 seeds, deviation < 0.02.
    """
    n = scale.size(1_000_000)
    seeds = scale.size(100)
    tol = scale.tol(0.01)
    good = 0
    devs = []
    for r in range(seeds):
        rng = replica_rng(1007, r)
        path = effective.simulate_effective_walk(n, rng)
        hat = effective.hat_path(path)
        t_n = effective.microscopic_time(hat, n)
        dev = abs(t_n / n - 7.0 / 3.0)
        devs.append(dev)
        if dev < tol:
            good += 1
    frac = good / seeds
    return [
        StatReport(
            name="time_change",
            estimate=float(np.median(devs)),
            statistic=frac,
            threshold=0.99,
            comparison=">=",
            n_samples=seeds,
            seeds="master 1007",
            details={"n": n, "tolerance": tol},
        )
    ]


def crit_index_oracle(scale: Scale) -> list[StatReport]:
    """8: extrema-index allowed sets equal the scan referee's at every step
    of 1e5-step runs (2D prudent, 2D corner, 3D), every taken step is
    legal, the 2D walker stays on its rectangle boundary, and the prudent
    walker always has >= 2 choices.  Zero tolerance.

    quick: 1e4-step runs.
    """
    n = scale.size(100_000)
    out = []
    for variant in ("prudent", "corner"):
        path = walk2d.simulate(n, seed=replica_rng(1008, 0 if variant == "prudent" else 1), variant=variant)
        r = walk2d.replay_check_fast(path)
        bad = r["mismatches"] + r["illegal_steps"] + r["boundary_violations"]
        floor = 2 if variant == "prudent" else 1
        if r["min_allowed"] < floor:
            bad += 1
        out.append(
            StatReport(
                name=f"index_oracle_2d_{variant}",
                estimate=float(bad),
                statistic=float(bad),
                threshold=0.0,
                n_samples=n,
                seeds="master 1008",
                details=r,
            )
        )
    path3, _, info = walk3d.simulate_3d(n, seed=replica_rng(1008, 2))
    r3 = walk3d.replay_check_3d(path3)
    bad3 = r3["mismatches"] + r3["illegal_steps"]
    out.append(
        StatReport(
            name="index_oracle_3d",
            estimate=float(bad3),
            statistic=float(bad3),
            threshold=0.0,
            n_samples=n,
            seeds="master 1008",
            details=r3,
        )
    )
    out.append(
        StatReport(
            name="min_directions_3d",
            estimate=float(r3["min_allowed"]),
            statistic=float(r3["min_allowed"]),
            threshold=3.0,
            comparison=">=",
            informational=True,  # conjecture-level bound: reported, not fatal
            n_samples=n,
            seeds="master 1008",
            details={"thin_steps": info["thin_steps"]},
        )
    )
    return out


def crit_z_ray(scale: Scale) -> list[StatReport]:
    """9: |Z_u(1)| + |Z_u(2)| = 3u/7 within one quadrature step at every
    grid point, 20 seeds at dt = 1e-4, all four sign pairs.

    quick: 5 seeds at dt = 1e-3.
    """
    dt = 1e-3 if scale.quick else 1e-4
    seeds = scale.size(20)
    u_grid = np.linspace(0.05, 1.0, 20)
    worst = 0.0
    for r in range(seeds):
        rng = replica_rng(1009, r)
        w = scaling.sample_brownian(dt, 3.0 / 7.0 + dt, rng)
        s1 = 1 if rng.random() < 0.5 else -1
        s2 = 1 if rng.random() < 0.5 else -1
        z = scaling.z_process(w, s1, s2, u_grid)
        worst = max(worst, z.ray_deviation())
    return [
        StatReport(
            name="z_ray",
            estimate=worst,
            statistic=worst,
            threshold=dt,
            n_samples=seeds * u_grid.shape[0],
            seeds="master 1009",
            details={"dt": dt},
        )
    ]


def crit_crossing_decay(scale: Scale) -> list[StatReport]:
    """10: the probability that excursion pair k crosses a side, smoothed
    over dyadic blocks of k in [4, 64], is nonincreasing with log-log
    slope <= -1.2, over 1e4 replicas.

    quick: 1e3 replicas, slope <= -0.9 (half the decades, noisier).
    """
    replicas = scale.size(10_000)
    slope_gate = -0.9 if scale.quick else -1.2
    pairs_needed = 65
    n_steps = 400_000
    eng = walk2d.Walk2DEngine(n_steps)
    cross_any = np.zeros(pairs_needed, dtype=np.int64)
    seen = np.zeros(pairs_needed, dtype=np.int64)
    short = 0
    for r in range(replicas):
        recs, _ = eng.run_excursions(
            replica_rng(1010, r), n_steps, max_records=2 * pairs_needed
        )
        k_pairs = recs.shape[0] // 2
        if k_pairs < pairs_needed:
            short += 1
        for k in range(min(k_pairs, pairs_needed)):
            seen[k] += 1
            crossed = recs[2 * k, _kernels.E_CROSSED] or recs[2 * k + 1, _kernels.E_CROSSED]
            if crossed:
                cross_any[k] += 1
    blocks = [(4, 8), (8, 16), (16, 32), (32, 65)]
    centers = []
    means = []
    for a, b in blocks:
        p = cross_any[a:b].sum() / max(seen[a:b].sum(), 1)
        centers.append(math.sqrt(a * (b - 1)))
        means.append(max(p, 1e-12))
    increases = sum(1 for i in range(len(means) - 1) if means[i + 1] > means[i])
    slope, slope_err = stats.loglog_slope(centers, means)
    return [
        StatReport(
            name="crossing_monotone",
            estimate=float(increases),
            statistic=float(increases),
            threshold=0.0,
            n_samples=replicas,
            seeds="master 1010",
            details={"block_means": means, "short_replicas": short},
        ),
        StatReport(
            name="crossing_slope",
            estimate=slope,
            statistic=slope,
            threshold=slope_gate,
            stderr=slope_err,
            n_samples=replicas,
            seeds="master 1010",
        ),
    ]


def crit_exponent_3d(scale: Scale) -> list[StatReport]:
    """11: the 3D endpoint-norm exponent fitted over the top 1.5 decades of
    t in [1e4, 1e6] with 50 seeds lies in [0.66, 0.85]; the point estimate
    is additionally reported against the literature value 0.75.

    quick: t in [1e3, 1e5], 10 seeds, band widened to [0.47, 1.04].
    """
    t_max = scale.size(1_000_000)
    seeds = scale.size(50)
    lo, hi = (0.66, 0.85)
    if scale.quick:
        half = (hi - lo) / 2
        lo, hi = lo - half, hi + half
    grid = np.unique(np.geomspace(t_max / 100, t_max, 13).astype(np.int64))
    series = walk3d.endpoint_norm_series(seeds, grid, master_seed=1011)
    keep = series["t"] >= t_max / 10 ** 1.5
    slope, slope_err = stats.loglog_slope(series["t"][keep], series["mean"][keep])
    in_band = float(lo <= slope <= hi)
    return [
        StatReport(
            name="exponent_3d",
            estimate=slope,
            statistic=in_band,
            threshold=1.0,
            comparison=">=",
            stderr=slope_err,
            n_samples=seeds,
            seeds="master 1011",
            details={"band": [lo, hi], "points": int(keep.sum())},
        ),
        StatReport(
            name="exponent_3d_vs_reported",
            estimate=slope,
            statistic=abs(slope - 0.75),
            threshold=math.inf,
            informational=True,  # the reference value is itself only numerical
            n_samples=seeds,
            seeds="master 1011",
        ),
    ]


def _triples_to_counts(triples: np.ndarray, clip: int = 11) -> np.ndarray:
    """Flatten (X0, Y0, X1) triples into joint cells, values > 10 pooled."""
    t = np.minimum(triples, clip)
    flat = ((t[:, 0] - 1) * clip + (t[:, 1] - 1)) * clip + (t[:, 2] - 1)
    return np.bincount(flat, minlength=clip**3)


def crit_coupling_fidelity(scale: Scale) -> list[StatReport]:
    """12: the joint law of (X0, Y0, X1) from the truncation coupling
    matches direct simulation, chi-square p > 0.01 on 1e5 direct triples
    (displacements pooled above 10).  The coupled law is sampled 20x
    larger and used as the expected distribution.

    quick: 1e4 direct triples.
    """
    n_direct = scale.size(100_000)
    n_coupled = 20 * n_direct
    # direct side: decompose simulated walks, extending until T_2 completes
    direct = np.zeros((n_direct, 3), dtype=np.int64)
    eng = walk2d.Walk2DEngine(64_000)
    for r in range(n_direct):
        length = 1000
        while True:
            recs, _ = eng.run_excursions(replica_rng(1012, r), length, max_records=4)
            if recs.shape[0] >= 3:
                break
            length *= 4
            if length > 64_000:
                raise RuntimeError("excursion triple did not complete")
        direct[r, 0] = recs[0, _kernels.E_DISP]
        direct[r, 1] = recs[1, _kernels.E_DISP]
        direct[r, 2] = recs[2, _kernels.E_DISP]
    coupled = np.zeros((n_coupled, 3), dtype=np.int64)
    _kernels.coupled_displacement_chain(replica_rng(2012, 0), n_coupled, 3, coupled)
    obs = _triples_to_counts(direct)
    ref = _triples_to_counts(coupled)
    probs = ref / ref.sum()
    obs_pooled, probs_pooled = stats.pool_sparse_cells(obs, probs)
    stat, pval = stats.chi_square(obs_pooled, probs_pooled / probs_pooled.sum())
    return [
        StatReport(
            name="coupling_fidelity",
            estimate=pval,
            statistic=pval,
            threshold=0.01,
            comparison=">=",
            n_samples=n_direct,
            seeds="masters 1012/2012",
            details={"chi_square": stat, "bins": int(obs_pooled.shape[0])},
        )
    ]


def crit_diagnostics_trend(scale: Scale) -> list[StatReport]:
    """13: medians over 31 seeds of max|S - hat(S)|/sqrt(n) and of
    sup_m |t(m) - (7/3)m|/n strictly decrease along n in {1e4, 1e5, 1e6}.
    The underlying ratios are reported informationally.

    quick: n in {1e3, 1e4, 1e5}, 11 seeds.
    """
    ns = [scale.size(v) for v in (10_000, 100_000, 1_000_000)]
    seeds = 11 if scale.quick else 31
    med_gap = []
    med_time = []
    med_occ = []
    for n in ns:
        gaps = []
        times = []
        occs = []
        for r in range(seeds):
            rng = replica_rng(1013, r)
            path = effective.simulate_effective_walk(n, rng)
            hat = effective.hat_path(path)
            reports = stats.sup_deviation_diagnostics(path.values, hat.values)
            gaps.append(reports[0].statistic)
            times.append(reports[1].statistic)
            occs.append(reports[2].statistic)
        med_gap.append(float(np.median(gaps)))
        med_time.append(float(np.median(times)))
        med_occ.append(float(np.median(occs)))
    worst_gap = max(med_gap[i + 1] - med_gap[i] for i in range(2))
    worst_time = max(med_time[i + 1] - med_time[i] for i in range(2))
    return [
        StatReport(
            name="diag_hat_gap_trend",
            estimate=med_gap[-1],
            statistic=worst_gap,
            threshold=0.0,
            n_samples=seeds,
            seeds="master 1013",
            details={"medians": med_gap, "n_grid": ns},
        ),
        StatReport(
            name="diag_time_dev_trend",
            estimate=med_time[-1],
            statistic=worst_time,
            threshold=0.0,
            n_samples=seeds,
            seeds="master 1013",
            details={"medians": med_time, "n_grid": ns},
        ),
        StatReport(
            name="diag_occupation_gap",
            estimate=med_occ[-1],
            statistic=med_occ[-1],
            threshold=math.inf,
            informational=True,
            n_samples=seeds,
            seeds="master 1013",
            details={"medians": med_occ, "n_grid": ns},
        ),
    ]


CRITERIA = [
    (1, "speed_law", crit_speed_law),
    (2, "angle_law", crit_angle_law),
    (3, "quadrant_uniformity", crit_quadrant_uniformity),
    (4, "excursion_law", crit_excursion_law),
    (5, "overshoot_law", crit_overshoot_law),
    (6, "hat_anchoring", crit_hat_anchoring),
    (7, "time_change", crit_time_change),
    (8, "index_oracle", crit_index_oracle),
    (9, "z_ray", crit_z_ray),
    (10, "crossing_decay", crit_crossing_decay),
    (11, "exponent_3d", crit_exponent_3d),
    (12, "coupling_fidelity", crit_coupling_fidelity),
    (13, "diagnostics_trend", crit_diagnostics_trend),
]


def run_criterion(number: int, scale: Scale) -> list[StatReport]:
    for num, _, fn in CRITERIA:
        if num == number:
            return fn(scale)
    raise ValueError(f"no criterion {number}")


def run_all(quick: bool = False, echo=None) -> tuple[list[StatReport], bool]:
    """Run every criterion; returns (reports, all non-informational pass)."""
    import time as _time

    scale = Scale(quick=quick)
    reports: list[StatReport] = []
    all_pass = True
    for num, label, fn in CRITERIA:
        t0 = _time.time()
        rs = fn(scale)
        dt = _time.time() - t0
        gate = [r for r in rs if not r.informational]
        ok = all(r.passed for r in gate)
        all_pass = all_pass and ok
        if echo is not None:
            status = "PASS" if ok else "FAIL"
            echo(f"criterion {num:2d} {label:<22} {status}  ({dt:6.1f}s)")
        reports.extend(rs)
    return reports, all_pass
