"""3D generalization: steps are forbidden toward visited sites on the axis line.

The step rule is the natural extension of the 2D one: direction e is
allowed iff the open half-line {pos + k e, k > 0} holds no visited site.
Per-line extrema (three maps keyed by the transverse coordinate pair)
answer each query in O(1); `naive_allowed_directions_3d` is the scan
referee.  Unlike 2D there is no two-directions guarantee; the kernel
counts steps with fewer than 3 allowed directions and reports them as a
soft diagnostic rather than failing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import LatticePath3D
from .rng import replica_rng, rng_from_seed

__all__ = [
    "DIRECTIONS_3D",
    "LineExtremaIndex3D",
    "WalkState3D",
    "allowed_directions_3d",
    "naive_allowed_directions_3d",
    "simulate_3d",
    "endpoint_norm_series",
]

DIRECTIONS_3D = (
    (1, 0, 0),
    (-1, 0, 0),
    (0, 1, 0),
    (0, -1, 0),
    (0, 0, 1),
    (0, 0, -1),
)


class LineExtremaIndex3D:
    """Min/max visited coordinate along every axis-parallel line."""

    def __init__(self):
        self.lines = ({}, {}, {})  # axis -> {(transverse pair): [lo, hi]}

    @staticmethod
    def _key(axis: int, site) -> tuple[int, int]:
        if axis == 0:
            return (site[1], site[2])
        if axis == 1:
            return (site[0], site[2])
        return (site[0], site[1])

    def add(self, site) -> None:
        for axis in range(3):
            k = self._key(axis, site)
            v = site[axis]
            rec = self.lines[axis].get(k)
            if rec is None:
                self.lines[axis][k] = [v, v]
            else:
                if v < rec[0]:
                    rec[0] = v
                if v > rec[1]:
                    rec[1] = v

    def blocked(self, direction, site) -> bool:
        axis = 0 if direction[0] else (1 if direction[1] else 2)
        rec = self.lines[axis].get(self._key(axis, site))
        if rec is None:
            return False
        if direction[axis] > 0:
            return rec[1] > site[axis]
        return rec[0] < site[axis]


@dataclass
class WalkState3D:
    rng: np.random.Generator
    sites: list = field(default_factory=lambda: [(0, 0, 0)])
    position: tuple[int, int, int] = (0, 0, 0)
    index: LineExtremaIndex3D = field(default_factory=LineExtremaIndex3D)

    def __post_init__(self):
        self.index.add((0, 0, 0))


def allowed_directions_3d(state: WalkState3D) -> frozenset:
    return frozenset(
        d for d in DIRECTIONS_3D if not state.index.blocked(d, state.position)
    )


def step_3d(state: WalkState3D) -> WalkState3D:
    allowed = [d for d in DIRECTIONS_3D if not state.index.blocked(d, state.position)]
    d = allowed[int(state.rng.random() * len(allowed))]
    p = tuple(a + b for a, b in zip(state.position, d))
    state.sites.append(p)
    state.position = p
    state.index.add(p)
    return state


def naive_allowed_directions_3d(sites, position=None) -> frozenset:
    """Scan referee: walk each half-line out to the visited bounding box."""
    pts = [tuple(int(v) for v in p) for p in sites]
    visited = set(pts)
    if position is None:
        position = pts[-1]
    lo = [min(p[a] for p in visited) for a in range(3)]
    hi = [max(p[a] for p in visited) for a in range(3)]
    out = []
    for d in DIRECTIONS_3D:
        cur = tuple(p + dd for p, dd in zip(position, d))
        blocked = False
        while all(lo[a] <= cur[a] <= hi[a] for a in range(3)):
            if cur in visited:
                blocked = True
                break
            cur = tuple(p + dd for p, dd in zip(cur, d))
        if not blocked:
            out.append(d)
    return frozenset(out)


def simulate_3d(n: int, seed=None, checkpoints=None, record_path: bool = True):
    """n-step 3D walk; deterministic in seed.

    Returns (LatticePath3D | None, checkpoint positions, summary dict).
    With record_path=False only checkpoints and the summary are kept,
    and memory stays proportional to the number of visited lines.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else rng_from_seed(0 if seed is None else seed)
    cps = np.asarray(checkpoints if checkpoints is not None else [], dtype=np.int64)
    cp_pos = np.zeros((cps.shape[0], 3), dtype=np.int64)
    path = np.zeros((n + 1, 3), dtype=np.int32) if record_path else np.zeros((1, 3), dtype=np.int32)
    summary = np.zeros(6, dtype=np.int64)
    _kernels.walk3d_path(rng, n, cps, cp_pos, record_path, path, summary)
    info = {
        "endpoint": (int(summary[0]), int(summary[1]), int(summary[2])),
        "min_allowed": int(summary[3]),
        "thin_steps": int(summary[4]),
        "steps_completed": int(summary[5]),
    }
    result = None
    if record_path:
        done = info["steps_completed"]
        result = LatticePath3D(
            path[: done + 1].astype(np.int64),
            seed=seed if isinstance(seed, int) else None,
            meta=info,
        )
    return result, cp_pos, info


def replay_check_3d(path) -> dict:
    """Replay a 3D trajectory against the line index and a literal scan.

    Compiled version of the referee (the pure-Python scan is quadratic in
    a way that makes 1e5-step checks impractical); the pure-Python
    naive_allowed_directions_3d covers small paths in unit tests.
    """
    sites = np.asarray(getattr(path, "sites", path), dtype=np.int64)
    if np.abs(sites).max() >= (1 << 20):
        raise ValueError("replay supports coordinates below 2**20")
    result = np.zeros(3, dtype=np.int64)
    _kernels.walk3d_replay(sites, result)
    return {
        "mismatches": int(result[0]),
        "illegal_steps": int(result[1]),
        "min_allowed": int(result[2]),
    }


def endpoint_norm_series(seeds, checkpoints, master_seed: int | None = None):
    """Mean endpoint L2 norm across seeds at each checkpoint time.

    `seeds` is either an iterable of explicit seeds or an integer count
    (replicas of master_seed).  Returns a structured dict with arrays
    t, mean, stderr and the seed count, ready for the exponent fit.
    """
    cps = np.asarray(sorted(checkpoints), dtype=np.int64)
    if np.any(np.diff(cps) <= 0):
        raise ValueError("checkpoints must be strictly increasing")
    if isinstance(seeds, int):
        gens = [replica_rng(0 if master_seed is None else master_seed, r) for r in range(seeds)]
    else:
        gens = [rng_from_seed(s) for s in seeds]
    n = int(cps[-1])
    norms = np.zeros((len(gens), cps.shape[0]))
    for i, g in enumerate(gens):
        _, cp_pos, _ = simulate_3d(n, seed=g, checkpoints=cps, record_path=False)
        norms[i] = np.sqrt((cp_pos.astype(np.float64) ** 2).sum(axis=1))
    mean = norms.mean(axis=0)
    stderr = norms.std(axis=0, ddof=1) / np.sqrt(len(gens)) if len(gens) > 1 else np.zeros_like(mean)
    return {"t": cps, "mean": mean, "stderr": stderr, "nseeds": len(gens)}
