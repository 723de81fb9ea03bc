"""2D kinetic prudent walk and its corner-model variant.

A direction is allowed iff the open axis half-line from the walker
contains no visited site; the corner variant additionally treats the
closed southwest quadrant {x <= 0, y <= 0} as visited.  Steps are uniform
over allowed directions.

Two engines implement the same rule: a pure-Python `WalkState` built on
`OccupancyIndex` (per-row/per-column extrema, O(1) per query), and the
compiled kernels in _kernels.py.  `naive_allowed_directions` is the
deliberately simple referee that scans the visited set along each
half-line; the extrema index is correct because a half-line along a row
is blocked iff that row's visited extremum lies beyond the walker, and
extrema witness existence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .codec import parse_corner_excursion
from .lattice import DIRECTIONS_2D, BoundingRect, LatticePath
from .rng import rng_from_seed

__all__ = [
    "OccupancyIndex",
    "WalkState",
    "ExcursionRecord",
    "CouplingState",
    "CoupledExcursion",
    "allowed_directions",
    "naive_allowed_directions",
    "step",
    "simulate",
    "Walk2DEngine",
    "excursion_decompose",
    "excursion_to_effective",
    "detect_crossing",
    "settled_quadrant",
    "couple_corner_to_prudent",
    "sample_corner_excursions",
    "replay_check",
]

_OBSTACLE_SW = "corner"


def _obstacle_blocks(direction: tuple[int, int], x: int, y: int) -> bool:
    """Does the half-line from (x, y) meet {x' <= 0, y' <= 0}?"""
    dx, dy = direction
    if dx > 0:
        return y <= 0 and x <= -1
    if dx < 0:
        return y <= 0
    if dy > 0:
        return x <= 0 and y <= -1
    return x <= 0


class OccupancyIndex:
    """Per-row and per-column extrema of the visited set."""

    def __init__(self):
        self.row_extrema: dict[int, list[int]] = {}
        self.col_extrema: dict[int, list[int]] = {}

    def add(self, x: int, y: int) -> None:
        row = self.row_extrema.get(y)
        if row is None:
            self.row_extrema[y] = [x, x]
        else:
            if x < row[0]:
                row[0] = x
            if x > row[1]:
                row[1] = x
        col = self.col_extrema.get(x)
        if col is None:
            self.col_extrema[x] = [y, y]
        else:
            if y < col[0]:
                col[0] = y
            if y > col[1]:
                col[1] = y

    def blocked(self, direction: tuple[int, int], x: int, y: int) -> bool:
        """A visited site lies strictly beyond (x, y) along direction."""
        dx, dy = direction
        if dx > 0:
            row = self.row_extrema.get(y)
            return row is not None and row[1] > x
        if dx < 0:
            row = self.row_extrema.get(y)
            return row is not None and row[0] < x
        col = self.col_extrema.get(x)
        if dy > 0:
            return col is not None and col[1] > y
        return col is not None and col[0] < y


@dataclass
class WalkState:
    """Single-owner stepwise walk; mutated in place by step()."""

    rng: np.random.Generator
    variant: str = "prudent"
    first_step: str | None = "east"
    sites: list = field(default_factory=lambda: [(0, 0)])
    position: tuple[int, int] = (0, 0)
    rect: BoundingRect = field(default_factory=lambda: BoundingRect(0, 0, 0, 0))
    index: OccupancyIndex = field(default_factory=OccupancyIndex)

    def __post_init__(self):
        if self.variant not in ("prudent", "corner"):
            raise ValueError(f"unknown variant {self.variant!r}")
        self.index.add(0, 0)

    @property
    def obstacle(self) -> bool:
        return self.variant == _OBSTACLE_SW

    def time(self) -> int:
        return len(self.sites) - 1


def allowed_directions(state: WalkState) -> frozenset:
    """Allowed unit directions at the current position, from the index."""
    x, y = state.position
    out = []
    for d in DIRECTIONS_2D:
        if state.index.blocked(d, x, y):
            continue
        if state.obstacle and _obstacle_blocks(d, x, y):
            continue
        out.append(d)
    return frozenset(out)


def naive_allowed_directions(path, position=None, obstacle: bool = False) -> frozenset:
    """Referee implementation: scan the visited set along each half-line.

    `path` may be a LatticePath, an (T+1, 2) array, or any iterable of
    sites.  The scan runs out to the bounding rectangle of the visited
    set; the quadrant obstacle is tested analytically since it is
    unbounded.
    """
    if isinstance(path, LatticePath):
        sites_arr = path.sites
        if obstacle is False:
            obstacle = path.variant == _OBSTACLE_SW
    else:
        sites_arr = np.asarray(list(path) if not isinstance(path, np.ndarray) else path)
    visited = {(int(p[0]), int(p[1])) for p in sites_arr}
    if position is None:
        position = (int(sites_arr[-1][0]), int(sites_arr[-1][1]))
    xs = [p[0] for p in visited]
    ys = [p[1] for p in visited]
    rect = BoundingRect(min(xs), max(xs), min(ys), max(ys))
    x, y = position
    out = []
    for d in DIRECTIONS_2D:
        dx, dy = d
        cx, cy = x + dx, y + dy
        blocked = False
        while rect.contains(cx, cy):
            if (cx, cy) in visited:
                blocked = True
                break
            cx += dx
            cy += dy
        if not blocked and obstacle:
            blocked = _obstacle_blocks(d, x, y)
        if not blocked:
            out.append(d)
    return frozenset(out)


def step(state: WalkState) -> WalkState:
    """Append one uniformly chosen allowed step; returns the same state.

    Candidate directions are examined in the fixed order E, W, N, S and
    one uniform double decides among them, matching the compiled kernels
    draw for draw.
    """
    x, y = state.position
    allowed = []
    for d in DIRECTIONS_2D:
        if state.index.blocked(d, x, y):
            continue
        if state.obstacle and _obstacle_blocks(d, x, y):
            continue
        allowed.append(d)
    if state.time() == 0 and state.first_step is not None:
        d = {"east": (1, 0), "north": (0, 1)}[state.first_step]
        if d not in allowed:
            raise RuntimeError("forced first step is not allowed")
    else:
        d = allowed[int(state.rng.random() * len(allowed))]
    nx, ny = x + d[0], y + d[1]
    state.sites.append((nx, ny))
    state.position = (nx, ny)
    state.rect = BoundingRect(
        min(state.rect.x_min, nx),
        max(state.rect.x_max, nx),
        min(state.rect.y_min, ny),
        max(state.rect.y_max, ny),
    )
    state.index.add(nx, ny)
    return state


class Walk2DEngine:
    """Kernel-backed engine with reusable work buffers.

    One engine serves one thread; buffers are recycled between runs, so
    views returned by run_path are only valid until the next call.
    """

    def __init__(self, n_max: int):
        self.n_max = n_max
        size = 2 * n_max + 3
        self._row_min = np.full(size, _kernels.SENTINEL, dtype=np.int32)
        self._row_max = np.zeros(size, dtype=np.int32)
        self._col_min = np.full(size, _kernels.SENTINEL, dtype=np.int32)
        self._col_max = np.zeros(size, dtype=np.int32)
        self._path = np.zeros((n_max + 1, 2), dtype=np.int32)
        self._dummy_path = np.zeros((1, 2), dtype=np.int32)
        self._summary = np.zeros(_kernels.SUMMARY_LEN, dtype=np.int64)

    @staticmethod
    def _first_dir(first_step) -> int:
        return {None: -1, "east": 0, "north": 2}[first_step]

    def run_path(self, rng, n, variant="prudent", first_step="east", record_path=True):
        """Simulate n steps; returns (path view (n+1, 2) or None, summary copy)."""
        if n > self.n_max:
            raise ValueError("n exceeds this engine's capacity")
        _kernels.walk2d_path(
            rng,
            n,
            variant == _OBSTACLE_SW,
            self._first_dir(first_step),
            record_path,
            self._path if record_path else self._dummy_path,
            self._row_min,
            self._row_max,
            self._col_min,
            self._col_max,
            self._summary,
        )
        return (self._path[: n + 1] if record_path else None), self._summary.copy()

    def run_excursions(self, rng, n, variant="prudent", first_step="east", max_records=2**62):
        """Simulate while harvesting completed excursion records.

        Returns (records int64[(k, 6)], summary copy); columns are
        (kind, start, end, displacement, wall, crossed) with kind 0 for
        width-pushing (vertical) and 1 for height-pushing (horizontal).
        """
        cap = min(max_records, n + 2)
        exc = np.zeros((cap, _kernels.EXC_COLS), dtype=np.int64)
        k = _kernels.walk2d_excursions(
            rng,
            n,
            variant == _OBSTACLE_SW,
            self._first_dir(first_step),
            cap,
            exc,
            self._row_min,
            self._row_max,
            self._col_min,
            self._col_max,
            self._summary,
        )
        return exc[:k], self._summary.copy()


def simulate(n: int, seed=None, variant: str = "prudent", first_step: str | None = "east") -> LatticePath:
    """n-step trajectory of the chosen variant, deterministic in seed."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if variant not in ("prudent", "corner"):
        raise ValueError(f"unknown variant {variant!r}")
    rng = seed if isinstance(seed, np.random.Generator) else rng_from_seed(0 if seed is None else seed)
    engine = Walk2DEngine(n)
    path, summary = engine.run_path(rng, n, variant=variant, first_step=first_step)
    meta = {
        "min_allowed": int(summary[_kernels.S_MIN_ALLOWED]),
        "boundary_violations": int(summary[_kernels.S_BOUNDARY_VIOLATIONS]),
        "first_step": first_step,
    }
    return LatticePath(path.astype(np.int64), variant=variant, seed=seed if isinstance(seed, int) else None, meta=meta)


@dataclass(frozen=True)
class ExcursionRecord:
    """One excursion along a side of the bounding rectangle.

    Width-pushing (vertical-side) excursions span (start, end] =
    (T_k, U_k] with displacement W_{T_{k+1}} - W_{T_k} and wall H_{T_k};
    height-pushing ones span (U_k, T_{k+1}] with displacement
    H_{T_{k+1}} - H_{T_k} and wall W_{U_k}.
    """

    index: int
    kind: str  # "vertical" or "horizontal"
    start: int
    end: int
    displacement: int
    wall_length: int
    crossed: bool


def _rect_series(sites: np.ndarray):
    x = sites[:, 0]
    y = sites[:, 1]
    xmin = np.minimum.accumulate(x)
    xmax = np.maximum.accumulate(x)
    ymin = np.minimum.accumulate(y)
    ymax = np.maximum.accumulate(y)
    return x, y, xmin, xmax, ymin, ymax


def _side_mask(v, vmin, vmax, t) -> int:
    """bit 1: at the low side, bit 2: at the high side (3 when degenerate)."""
    return (1 if v[t] == vmin[t] else 0) | (2 if v[t] == vmax[t] else 0)


def excursion_decompose(path: LatticePath) -> list[ExcursionRecord]:
    """Split a trajectory into alternating excursion records.

    The path must open with a horizontal step (rotate first otherwise).
    Only completed excursions (those whose closing boundary time exists
    within the path) are emitted.
    """
    sites = np.asarray(path.sites)
    if sites.shape[0] < 2 or sites[1, 1] != 0:
        raise ValueError("path must start with a horizontal step")
    x, y, xmin, xmax, ymin, ymax = _rect_series(sites)
    W = xmax - xmin + 1
    H = ymax - ymin + 1
    w_grow = np.nonzero(np.diff(W))[0] + 1
    h_grow = np.nonzero(np.diff(H))[0] + 1

    records: list[ExcursionRecord] = []
    t_start = 0
    k = 0
    while True:
        i = np.searchsorted(h_grow, t_start, side="right")
        if i >= h_grow.shape[0]:
            break
        u = int(h_grow[i]) - 1
        j = np.searchsorted(w_grow, u, side="right")
        if j >= w_grow.shape[0]:
            break
        t_next = int(w_grow[j]) - 1
        ys_start = _side_mask(y, ymin, ymax, t_start)
        ys_u = _side_mask(y, ymin, ymax, u)
        xs_u = _side_mask(x, xmin, xmax, u)
        xs_next = _side_mask(x, xmin, xmax, t_next)
        crossed_v = (ys_start == 1 and ys_u == 2) or (ys_start == 2 and ys_u == 1)
        crossed_h = (xs_u == 1 and xs_next == 2) or (xs_u == 2 and xs_next == 1)
        records.append(
            ExcursionRecord(
                index=k,
                kind="vertical",
                start=t_start,
                end=u,
                displacement=int(W[t_next] - W[t_start]),
                wall_length=int(H[t_start]),
                crossed=crossed_v,
            )
        )
        records.append(
            ExcursionRecord(
                index=k,
                kind="horizontal",
                start=u,
                end=t_next,
                displacement=int(H[t_next] - H[t_start]),
                wall_length=int(W[u]),
                crossed=crossed_h,
            )
        )
        t_start = t_next
        k += 1
    return records


def detect_crossing(path: LatticePath, record: ExcursionRecord) -> bool:
    """Did the excursion's endpoints sit on opposite corners of its side?"""
    sites = np.asarray(path.sites)
    x, y, xmin, xmax, ymin, ymax = _rect_series(sites)
    if record.kind == "vertical":
        a = _side_mask(y, ymin, ymax, record.start)
        b = _side_mask(y, ymin, ymax, record.end)
    else:
        a = _side_mask(x, xmin, xmax, record.start)
        b = _side_mask(x, xmin, xmax, record.end)
    return (a == 1 and b == 2) or (a == 2 and b == 1)


def excursion_to_effective(segment, kind: str | None = None) -> np.ndarray:
    """Effective-walk excursion encoded by one lattice excursion segment.

    Inverse of the hat-path unfolding on single excursions; see
    codec.parse_corner_excursion for the segment framing.
    """
    return parse_corner_excursion(segment, kind=kind)


def settled_quadrant(path) -> int:
    """Quadrant of the corner occupied at the last corner-visit time.

    Quadrants are numbered 1 (NE), 2 (NW), 3 (SW), 4 (SE).  Degenerate
    sides at the visit are disambiguated by the rectangle's growth after
    the visit, defaulting to the first-step orientation.
    """
    sites = np.asarray(getattr(path, "sites", path))
    x, y, xmin, xmax, ymin, ymax = _rect_series(sites)
    at_corner = ((x == xmin) | (x == xmax)) & ((y == ymin) | (y == ymax))
    t = int(np.nonzero(at_corner)[0][-1])
    east = x[t] == xmax[t]
    west = x[t] == xmin[t]
    if east and west:
        east = (xmax[-1] - x[t]) >= (x[t] - xmin[-1])
    north = y[t] == ymax[t]
    south = y[t] == ymin[t]
    if north and south:
        north = (ymax[-1] - y[t]) >= (y[t] - ymin[-1])
    if east:
        return 1 if north else 4
    return 2 if north else 3


def summary_quadrant(summary: np.ndarray) -> int:
    """settled_quadrant computed from a kernel summary, path-free.

    Mirrors settled_quadrant: sides at the last corner visit, ties broken
    by where the rectangle grew afterwards.
    """
    k = _kernels
    east = summary[k.S_LC_X] == summary[k.S_LC_XMAX]
    west = summary[k.S_LC_X] == summary[k.S_LC_XMIN]
    if east and west:
        east = (summary[k.S_XMAX] - summary[k.S_LC_X]) >= (summary[k.S_LC_X] - summary[k.S_XMIN])
    north = summary[k.S_LC_Y] == summary[k.S_LC_YMAX]
    south = summary[k.S_LC_Y] == summary[k.S_LC_YMIN]
    if north and south:
        north = (summary[k.S_YMAX] - summary[k.S_LC_Y]) >= (summary[k.S_LC_Y] - summary[k.S_YMIN])
    if east:
        return 1 if north else 4
    return 2 if north else 3


@dataclass(frozen=True)
class CoupledExcursion:
    kind: str  # "vertical" or "horizontal"
    values: np.ndarray  # effective values kept after (possible) truncation
    truncated: bool
    displacement: int
    reach_depth: int


@dataclass
class CouplingState:
    """Accumulated side lengths of the reconstructed walk.

    heights[k] = Y_0 + ... + Y_{k-1}; widths[k] = X_0 + ... + X_k.
    """

    heights: list[int] = field(default_factory=lambda: [0])
    widths: list[int] = field(default_factory=list)


def couple_corner_to_prudent(corner_excursions, first_kind: str = "vertical"):
    """Truncation coupling from corner-model excursions to walk-law ones.

    Input excursions are effective one-sided paths ([0, ..., first value
    below 0], raw exit value kept) alternating vertical/horizontal.  An
    excursion whose reach depth (maximum value, the dip below its start)
    stays within the accumulated opposite side length passes through;
    otherwise it is cut at the first time the depth exceeds that length,
    turning the cut step into the exit.

    Returns (list of CoupledExcursion, CouplingState).
    """
    if first_kind != "vertical":
        raise ValueError("coupled streams start with a vertical excursion")
    state = CouplingState()
    out: list[CoupledExcursion] = []
    acc_h = 0
    acc_w = 0
    kind_v = True
    for exc in corner_excursions:
        values = np.asarray(exc, dtype=np.int64)
        if values[0] != 0 or values[-1] >= 0 or (values[:-1] < 0).any():
            raise ValueError("not a one-sided excursion")
        limit = acc_h if kind_v else acc_w
        interior = values[:-1]
        reach = int(interior.max()) if interior.size else 0
        over = np.nonzero(values >= limit + 1)[0]
        if over.size and over[0] < values.shape[0] - 1:
            cut = int(over[0])
            kept = values[: cut + 1]
            truncated = True
        else:
            kept = values
            truncated = False
        disp = kept.shape[0] - 1
        out.append(
            CoupledExcursion(
                kind="vertical" if kind_v else "horizontal",
                values=kept,
                truncated=truncated,
                displacement=disp,
                reach_depth=reach,
            )
        )
        if kind_v:
            acc_w += disp
            state.widths.append(acc_w)
        else:
            acc_h += disp
            state.heights.append(acc_h)
        kind_v = not kind_v
    return out, state


def sample_corner_excursions(rng, count: int, cap: int = 1_000_000) -> list[np.ndarray]:
    """Independent one-sided effective excursions (the corner model's bricks)."""
    from .effective import sample_one_sided_excursion

    return [sample_one_sided_excursion(rng, cap=cap) for _ in range(count)]


def replay_check_fast(path: LatticePath) -> dict:
    """Compiled version of replay_check for long trajectories."""
    sites = np.asarray(path.sites, dtype=np.int64)
    if np.abs(sites).max() >= (1 << 20):
        raise ValueError("replay supports coordinates below 2**20")
    result = np.zeros(4, dtype=np.int64)
    _kernels.walk2d_replay(sites, path.variant == _OBSTACLE_SW, result)
    return {
        "mismatches": int(result[0]),
        "illegal_steps": int(result[1]),
        "boundary_violations": int(result[2]),
        "min_allowed": int(result[3]),
    }


def replay_check(path: LatticePath, check_every: int = 1):
    """Replay a trajectory against both the index and the scan referee.

    For each step: the index-based allowed set must equal the naive
    scan's, the taken step must be allowed, and the walker must sit on
    the rectangle boundary.  Returns a dict of violation counters and
    the minimum allowed-set size seen.
    """
    sites = np.asarray(path.sites)
    obstacle = path.variant == _OBSTACLE_SW
    index = OccupancyIndex()
    index.add(0, 0)
    visited = {(0, 0)}
    x_min = x_max = y_min = y_max = 0
    mismatches = 0
    illegal_steps = 0
    boundary_violations = 0
    min_allowed = 4
    for t in range(sites.shape[0] - 1):
        x, y = int(sites[t, 0]), int(sites[t, 1])
        fast = []
        for d in DIRECTIONS_2D:
            if index.blocked(d, x, y):
                continue
            if obstacle and _obstacle_blocks(d, x, y):
                continue
            fast.append(d)
        if t % check_every == 0:
            naive = []
            for d in DIRECTIONS_2D:
                dx, dy = d
                cx, cy = x + dx, y + dy
                blocked = False
                while x_min <= cx <= x_max and y_min <= cy <= y_max:
                    if (cx, cy) in visited:
                        blocked = True
                        break
                    cx += dx
                    cy += dy
                if not blocked and obstacle:
                    blocked = _obstacle_blocks(d, x, y)
                if not blocked:
                    naive.append(d)
            if fast != naive:
                mismatches += 1
        min_allowed = min(min_allowed, len(fast))
        nx, ny = int(sites[t + 1, 0]), int(sites[t + 1, 1])
        if (nx - x, ny - y) not in fast:
            illegal_steps += 1
        visited.add((nx, ny))
        index.add(nx, ny)
        x_min = min(x_min, nx)
        x_max = max(x_max, nx)
        y_min = min(y_min, ny)
        y_max = max(y_max, ny)
        if not (nx == x_min or nx == x_max or ny == y_min or ny == y_max):
            boundary_violations += 1
    return {
        "mismatches": mismatches,
        "illegal_steps": illegal_steps,
        "boundary_violations": boundary_violations,
        "min_allowed": min_allowed,
    }
