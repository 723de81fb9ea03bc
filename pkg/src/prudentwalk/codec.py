"""Bijection between hat-path excursions and corner-model lattice excursions.

A hat path alternates excursions of two types: 0 -> -1 with nonnegative
values in between, and -1 -> 0 with values <= -1 in between.  Unfolded
into the first quadrant (the fixed orientation; any global reflection is
statistics-invariant), the first type becomes a lattice excursion that
pushes the east edge of the occupied region and the second type one that
pushes the top edge:

* width-pushing excursion: the walker sits on the frontier column.  One
  effective step of size d maps to a vertical run of |d| lattice steps
  (down when the hat value rises, i.e. the walker sinks deeper below the
  top) followed by one east step onto a fresh column.  The closing step
  is an upward run that crosses the old top by exactly one site: the
  effective exit jump is truncated to land one past the wall and its
  overshoot is discarded on the lattice side.
* height-pushing excursion: the transpose picture, with horizontal runs,
  north advances, and a closing eastward run that crosses the east edge.

The crossing step that closes an excursion is simultaneously the arrival
step of the next one.  A single excursion segment therefore spans exactly
sum(1 + |hat increment|) lattice steps (its leading arrival step
included), while a K-excursion path has K - 1 shared boundary steps.

Both directions of the bijection live here so the truncation convention
is encoded exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import LatticePath

__all__ = [
    "UnfoldResult",
    "unfold_hat_path",
    "parse_corner_path",
    "parse_corner_excursion",
    "split_hat_excursions",
    "MalformedExcursionError",
]

_E, _W, _N, _S = 0, 1, 2, 3
_DIRVEC = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)


class MalformedExcursionError(ValueError):
    """Raised when a lattice segment is not a corner-model excursion.

    step_index points at the first offending step.
    """

    def __init__(self, message: str, step_index: int):
        super().__init__(f"{message} (step {step_index})")
        self.step_index = step_index


def split_hat_excursions(values: np.ndarray) -> tuple[list[tuple[int, int]], int]:
    """Complete excursion windows [(start, end)] of a hat path, plus the cut.

    Windows alternate 0 -> -1 and -1 -> 0; `cut` is the index after the
    last complete excursion (values beyond it form an unfinished tail).
    """
    if values[0] != 0:
        raise ValueError("hat paths start at 0")
    windows = []
    a = 0
    n = values.shape[0] - 1
    to_minus_one = True
    while a < n:
        target_hit = None
        for i in range(a + 1, n + 1):
            v = values[i]
            if to_minus_one:
                if v < 0:
                    if v != -1:
                        raise ValueError(f"hat excursion must end at -1, got {v} at {i}")
                    target_hit = i
                    break
            else:
                if v > -1:
                    if v != 0:
                        raise ValueError(f"hat excursion must end at 0, got {v} at {i}")
                    target_hit = i
                    break
        if target_hit is None:
            break
        windows.append((a, target_hit))
        a = target_hit
        to_minus_one = not to_minus_one
    return windows, a


@dataclass(frozen=True)
class UnfoldResult:
    path: LatticePath
    cut_index: int  # hat index of the last completed excursion boundary
    complete: bool


def unfold_hat_path(hat, first_step: str = "horizontal") -> UnfoldResult:
    """Corner-model lattice trajectory whose excursion image is `hat`.

    first_step selects the axis of the forced opening step: "horizontal"
    starts with a width-pushing excursion, "vertical" with the transposed
    picture.  An unfinished trailing excursion is not emitted; the cut
    index reports where the hat path was truncated.
    """
    if first_step not in ("horizontal", "vertical"):
        raise ValueError("first_step must be 'horizontal' or 'vertical'")
    values = np.asarray(getattr(hat, "values", hat), dtype=np.int64)
    windows, cut = split_hat_excursions(values)

    dirs: list[int] = []
    counts: list[int] = []

    def emit(d: int, c: int) -> None:
        if c > 0:
            dirs.append(d)
            counts.append(c)

    emit(_E, 1)  # forced opening step, the first excursion's arrival
    for w_idx, (a, b) in enumerate(windows):
        vals = values[a : b + 1]
        if w_idx % 2 == 0:
            # width-pushing: vertical runs, east advances, closing climb
            for i in range(1, vals.shape[0] - 1):
                dv = int(vals[i] - vals[i - 1])
                if dv > 0:
                    emit(_S, dv)
                elif dv < 0:
                    emit(_N, -dv)
                emit(_E, 1)
            emit(_N, int(vals[-2]) + 1)  # climb from depth hat[-2] to one past the top
        else:
            # height-pushing: horizontal runs, north advances, closing east run
            for i in range(1, vals.shape[0] - 1):
                dd = int(vals[i - 1] - vals[i])  # depth left of the east edge rises as hat falls
                if dd > 0:
                    emit(_W, dd)
                elif dd < 0:
                    emit(_E, -dd)
                emit(_N, 1)
            emit(_E, (-1 - int(vals[-2])) + 1)

    if windows:
        dirs_arr = np.repeat(np.array(dirs, dtype=np.int64), np.array(counts, dtype=np.int64))
        deltas = _DIRVEC[dirs_arr]
        sites = np.zeros((deltas.shape[0] + 1, 2), dtype=np.int64)
        np.cumsum(deltas, axis=0, out=sites[1:])
    else:
        sites = np.zeros((1, 2), dtype=np.int64)
    if first_step == "vertical":
        sites = sites[:, ::-1].copy()
    path = LatticePath(sites, variant="corner", meta={"first_step": first_step})
    return UnfoldResult(path=path, cut_index=cut, complete=cut == values.shape[0] - 1)


def _steps_to_dirs(sites: np.ndarray) -> np.ndarray:
    d = np.diff(sites, axis=0)
    out = np.empty(d.shape[0], dtype=np.int64)
    for i, (dx, dy) in enumerate(((1, 0), (-1, 0), (0, 1), (0, -1))):
        out[np.logical_and(d[:, 0] == dx, d[:, 1] == dy)] = i
    return out


def parse_corner_path(path) -> tuple[np.ndarray, str, int]:
    """Inverse of unfold_hat_path on whole trajectories.

    Returns (hat values, first_step, consumed lattice steps).  A trailing
    incomplete excursion is ignored; `consumed` marks where parsing
    stopped.  Raises MalformedExcursionError when the trajectory does not
    follow the corner-excursion grammar.
    """
    sites = np.asarray(getattr(path, "sites", path), dtype=np.int64)
    if sites.shape[0] < 2:
        return np.zeros(1, dtype=np.int64), "horizontal", 0
    if sites[1, 0] == 1 and sites[1, 1] == 0:
        first_step = "horizontal"
    elif sites[1, 0] == 0 and sites[1, 1] == 1:
        first_step = "vertical"
        sites = sites[:, ::-1]
    else:
        raise MalformedExcursionError("opening step must head east or north", 0)

    dirs = _steps_to_dirs(sites)
    T = dirs.shape[0]
    hat = [0]
    x, y = 1, 0
    x_right, y_top = 1, 0
    t = 1  # dirs[0] is the forced opening step
    consumed = 1
    width_phase = True
    committed_hat_len = 1

    while t < T:
        if width_phase:
            # [vertical run][east advance], or an up run crossing the top
            depth = y_top - y
            d = dirs[t]
            if d == _S:
                while t < T and dirs[t] == _S:
                    y -= 1
                    t += 1
                depth = y_top - y
                if t >= T:
                    break
                if dirs[t] != _E:
                    raise MalformedExcursionError("down run must end with an east advance", t)
                x += 1
                t += 1
                x_right = x
                hat.append(depth)
            elif d == _N:
                crossed = False
                while t < T and dirs[t] == _N:
                    y += 1
                    t += 1
                    if y == y_top + 1:
                        crossed = True
                        break
                if crossed:
                    if x != x_right:
                        raise MalformedExcursionError("top crossing away from the east column", t - 1)
                    y_top = y
                    hat.append(-1)
                    width_phase = False
                    consumed = t
                    committed_hat_len = len(hat)
                else:
                    if t >= T:
                        break
                    if dirs[t] != _E:
                        raise MalformedExcursionError("up run must cross the top or end east", t)
                    x += 1
                    t += 1
                    x_right = x
                    hat.append(y_top - y)
            elif d == _E:
                x += 1
                t += 1
                x_right = x
                hat.append(depth)
            else:
                raise MalformedExcursionError("westward step inside a width-pushing excursion", t)
        else:
            # [horizontal run][north advance], or an east run crossing the edge
            d = dirs[t]
            if d == _W:
                while t < T and dirs[t] == _W:
                    x -= 1
                    t += 1
                if t >= T:
                    break
                if dirs[t] != _N:
                    raise MalformedExcursionError("west run must end with a north advance", t)
                y += 1
                t += 1
                y_top = y
                hat.append(-1 - (x_right - x))
            elif d == _E:
                crossed = False
                while t < T and dirs[t] == _E:
                    x += 1
                    t += 1
                    if x == x_right + 1:
                        crossed = True
                        break
                if crossed:
                    if y != y_top:
                        raise MalformedExcursionError("edge crossing away from the top row", t - 1)
                    x_right = x
                    hat.append(0)
                    width_phase = True
                    consumed = t
                    committed_hat_len = len(hat)
                else:
                    if t >= T:
                        break
                    if dirs[t] != _N:
                        raise MalformedExcursionError("east run must cross the edge or end north", t)
                    y += 1
                    t += 1
                    y_top = y
                    hat.append(-1 - (x_right - x))
            elif d == _N:
                y += 1
                t += 1
                y_top = y
                hat.append(-1 - (x_right - x))
            else:
                raise MalformedExcursionError("southward step inside a height-pushing excursion", t)

    return np.array(hat[:committed_hat_len], dtype=np.int64), first_step, consumed


def parse_corner_excursion(segment: np.ndarray, kind: str | None = None) -> np.ndarray:
    """Effective-walk excursion encoded by one lattice excursion segment.

    The segment spans the excursion's arrival step (shared with the
    previous excursion's closing run) through its own closing run, so a
    width-pushing segment opens eastward and a height-pushing one opens
    northward; `kind` ("vertical"/"horizontal") may override detection.
    Returns hat-convention values: [0, ..., -1] for width-pushing
    segments, [-1, ..., 0] for height-pushing ones.
    """
    sites = np.asarray(segment, dtype=np.int64)
    if sites.ndim != 2 or sites.shape[0] < 2:
        raise MalformedExcursionError("segment needs at least one step", 0)
    d0 = tuple(sites[1] - sites[0])
    if kind is None:
        if d0 == (1, 0):
            kind = "vertical"
        elif d0 == (0, 1):
            kind = "horizontal"
        else:
            raise MalformedExcursionError("segment must open east or north", 0)
    if kind == "horizontal":
        # transpose onto the width-pushing picture
        sites = sites[:, ::-1]
        d0 = tuple(sites[1] - sites[0])
    if d0 != (1, 0):
        raise MalformedExcursionError("arrival step inconsistent with kind", 0)

    dirs = _steps_to_dirs(sites - sites[0])
    T = dirs.shape[0]
    x, y = 1, 0
    y_top = 0
    x_right = 1
    out = [0]
    t = 1
    closed = False
    while t < T:
        d = dirs[t]
        if d == _S:
            while t < T and dirs[t] == _S:
                y -= 1
                t += 1
            if t >= T or dirs[t] != _E:
                raise MalformedExcursionError("down run must end with an east advance", t)
            x += 1
            x_right = x
            t += 1
            out.append(y_top - y)
        elif d == _N:
            crossed = False
            while t < T and dirs[t] == _N:
                y += 1
                t += 1
                if y == y_top + 1:
                    crossed = True
                    break
            if not crossed:
                if t >= T or dirs[t] != _E:
                    raise MalformedExcursionError("up run must cross the top or end east", t)
                x += 1
                x_right = x
                t += 1
                out.append(y_top - y)
            else:
                if x != x_right:
                    raise MalformedExcursionError("top crossing away from the east column", t - 1)
                out.append(-1)
                closed = True
                if t != T:
                    raise MalformedExcursionError("steps after the closing run", t)
        elif d == _E:
            x += 1
            x_right = x
            t += 1
            out.append(y_top - y)
        else:
            raise MalformedExcursionError("westward step inside an excursion", t)
    if not closed:
        raise MalformedExcursionError("segment ends before its closing run", T)
    values = np.array(out, dtype=np.int64)
    if kind == "horizontal":
        # map back to hat convention: depths d become values -1 - d, exit 0
        values = -1 - values
        values[-1] = 0
    return values
