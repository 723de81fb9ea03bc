"""Compiled hot loops for the walk engines.

Everything here is numba-jitted and GIL-free so replica fan-out can use
plain threads.  The 2D step rule lives in `_allowed2d_mask`; every 2D
kernel goes through it, and the pure-Python `WalkState` in walk2d.py
mirrors the same logic so the two implementations can referee each
other.

Randomness protocol: each kernel consumes exactly one uniform double per
free step (none for a forced first step), drawn from the numpy Generator
passed in.  The chosen direction is ``allowed[int(u * n_allowed)]`` with
candidate directions enumerated in the fixed order E, W, N, S (and
+x,-x,+y,-y,+z,-z in 3D).
"""

from __future__ import annotations

import numpy as np
from numba import int64, njit
from numba.typed import Dict

SENTINEL = np.int32(2147483647)

# direction tables, index order is part of the RNG protocol
DIR2D = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]], dtype=np.int64)
DIR3D = np.array(
    [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]],
    dtype=np.int64,
)

# summary vector layout for 2D kernels
S_XMIN, S_XMAX, S_YMIN, S_YMAX = 0, 1, 2, 3
S_X, S_Y = 4, 5
S_LC_T, S_LC_X, S_LC_Y = 6, 7, 8
S_LC_XMIN, S_LC_XMAX, S_LC_YMIN, S_LC_YMAX = 9, 10, 11, 12
S_MIN_ALLOWED = 13
S_BOUNDARY_VIOLATIONS = 14
SUMMARY_LEN = 15

# excursion record columns
E_KIND, E_START, E_END, E_DISP, E_WALL, E_CROSSED = 0, 1, 2, 3, 4, 5
EXC_COLS = 6


@njit(inline="always")
def _allowed2d_mask(x, y, row_min, row_max, col_min, col_max, off, obstacle):
    """Allowed-direction flags (E, W, N, S) at (x, y).

    A direction is allowed iff the open half-line from (x, y) contains no
    visited site (witnessed by the per-row/per-column extrema) and, for
    the corner variant, does not meet the southwest quadrant
    {x <= 0, y <= 0}: eastward that quadrant is reached only when
    x <= -1 and y <= 0, westward whenever y <= 0, northward only when
    x <= 0 and y <= -1, southward whenever x <= 0.
    """
    a_e = row_max[y + off] <= x
    a_w = row_min[y + off] >= x
    a_n = col_max[x + off] <= y
    a_s = col_min[x + off] >= y
    if obstacle:
        a_e = a_e and not (y <= 0 and x <= -1)
        a_w = a_w and y > 0
        a_n = a_n and not (x <= 0 and y <= -1)
        a_s = a_s and x > 0
    return a_e, a_w, a_n, a_s


@njit(inline="always")
def _pick_dir(a_e, a_w, a_n, a_s, k):
    """Step vector of the k-th allowed direction in E, W, N, S order."""
    if a_e:
        if k == 0:
            return 1, 0
        k -= 1
    if a_w:
        if k == 0:
            return -1, 0
        k -= 1
    if a_n:
        if k == 0:
            return 0, 1
        k -= 1
    return 0, -1


@njit(inline="always")
def _visit2d(x, y, row_min, row_max, col_min, col_max, off):
    # NOTE: the hot kernels repeat this logic literally in their step
    # loops; routing the per-step update through a helper call measurably
    # blocks LLVM's loop optimization (~2.5x slower).  Keep both in sync.
    if row_min[y + off] == SENTINEL:
        row_min[y + off] = x
        row_max[y + off] = x
    else:
        if x < row_min[y + off]:
            row_min[y + off] = x
        if x > row_max[y + off]:
            row_max[y + off] = x
    if col_min[x + off] == SENTINEL:
        col_min[x + off] = y
        col_max[x + off] = y
    else:
        if y < col_min[x + off]:
            col_min[x + off] = y
        if y > col_max[x + off]:
            col_max[x + off] = y


@njit(inline="always")
def _clear2d(row_min, col_min, off, x_min, x_max, y_min, y_max):
    for yy in range(y_min, y_max + 1):
        row_min[yy + off] = SENTINEL
    for xx in range(x_min, x_max + 1):
        col_min[xx + off] = SENTINEL


@njit(nogil=True, cache=True)
def walk2d_path(rng, n, obstacle, first_dir, record_path, path, row_min, row_max, col_min, col_max, summary):
    """Run n steps, recording the trajectory into path[(n+1), 2].

    first_dir >= 0 forces that direction on step 1 without consuming
    randomness.  With record_path false, path may be a dummy 1x2 array.
    The extrema buffers must be clean (row_min/col_min all SENTINEL over
    any previously touched range); they are cleaned again before
    returning.
    """
    off = (row_min.shape[0] - 1) // 2
    x = 0
    y = 0
    x_min = 0
    x_max = 0
    y_min = 0
    y_max = 0
    _visit2d(x, y, row_min, row_max, col_min, col_max, off)
    if record_path:
        path[0, 0] = 0
        path[0, 1] = 0
    lc_t = 0
    lc_x = 0
    lc_y = 0
    lc_xmin = 0
    lc_xmax = 0
    lc_ymin = 0
    lc_ymax = 0
    min_allowed = 4
    violations = 0
    for t in range(1, n + 1):
        a_e, a_w, a_n, a_s = _allowed2d_mask(
            x, y, row_min, row_max, col_min, col_max, off, obstacle
        )
        na = int(a_e) + int(a_w) + int(a_n) + int(a_s)
        if na < min_allowed:
            min_allowed = na
        if t == 1 and first_dir >= 0:
            dx = DIR2D[first_dir, 0]
            dy = DIR2D[first_dir, 1]
        else:
            dx, dy = _pick_dir(a_e, a_w, a_n, a_s, int(rng.random() * na))
        x += dx
        y += dy
        if x < x_min:
            x_min = x
        elif x > x_max:
            x_max = x
        if y < y_min:
            y_min = y
        elif y > y_max:
            y_max = y
        if row_min[y + off] == SENTINEL:
            row_min[y + off] = x
            row_max[y + off] = x
        else:
            if x < row_min[y + off]:
                row_min[y + off] = x
            if x > row_max[y + off]:
                row_max[y + off] = x
        if col_min[x + off] == SENTINEL:
            col_min[x + off] = y
            col_max[x + off] = y
        else:
            if y < col_min[x + off]:
                col_min[x + off] = y
            if y > col_max[x + off]:
                col_max[x + off] = y
        if record_path:
            path[t, 0] = x
            path[t, 1] = y
        x_edge = x == x_min or x == x_max
        y_edge = y == y_min or y == y_max
        if not (x_edge or y_edge):
            violations += 1
        elif x_edge and y_edge:
            lc_t = t
            lc_x = x
            lc_y = y
            lc_xmin = x_min
            lc_xmax = x_max
            lc_ymin = y_min
            lc_ymax = y_max
    summary[S_XMIN] = x_min
    summary[S_XMAX] = x_max
    summary[S_YMIN] = y_min
    summary[S_YMAX] = y_max
    summary[S_X] = x
    summary[S_Y] = y
    summary[S_LC_T] = lc_t
    summary[S_LC_X] = lc_x
    summary[S_LC_Y] = lc_y
    summary[S_LC_XMIN] = lc_xmin
    summary[S_LC_XMAX] = lc_xmax
    summary[S_LC_YMIN] = lc_ymin
    summary[S_LC_YMAX] = lc_ymax
    summary[S_MIN_ALLOWED] = min_allowed
    summary[S_BOUNDARY_VIOLATIONS] = violations
    _clear2d(row_min, col_min, off, x_min, x_max, y_min, y_max)


@njit(nogil=True, cache=True)
def walk2d_excursions(
    rng, n, obstacle, first_dir, max_records, exc, row_min, row_max, col_min, col_max, summary
):
    """Run up to n steps while decomposing into excursions on the fly.

    Emits completed records (kind, start, end, displacement, wall,
    crossed) into exc; vertical records carry kind 0 and horizontal
    kind 1.  Stops once max_records records exist (or n steps are
    exhausted).  Returns the record count.  Consumes randomness exactly
    like walk2d_path, so equal generator states yield equal walks.
    """
    off = (row_min.shape[0] - 1) // 2
    x = 0
    y = 0
    x_min = 0
    x_max = 0
    y_min = 0
    y_max = 0
    _visit2d(x, y, row_min, row_max, col_min, col_max, off)
    min_allowed = 4
    violations = 0

    # excursion bookkeeping: phase 0 = vertical (awaiting height growth),
    # phase 1 = horizontal (awaiting width growth)
    phase = 0
    t_start = 0  # T_k
    w_at_start = 1
    h_at_start = 1
    yside_at_start = 3  # bit 1 = bottom, bit 2 = top
    u_time = 0
    w_at_u = 1
    yside_at_u = 3
    xside_at_u = 3
    n_rec = 0

    for t in range(1, n + 1):
        a_e, a_w, a_n, a_s = _allowed2d_mask(
            x, y, row_min, row_max, col_min, col_max, off, obstacle
        )
        na = int(a_e) + int(a_w) + int(a_n) + int(a_s)
        if na < min_allowed:
            min_allowed = na
        if t == 1 and first_dir >= 0:
            dx = DIR2D[first_dir, 0]
            dy = DIR2D[first_dir, 1]
        else:
            dx, dy = _pick_dir(a_e, a_w, a_n, a_s, int(rng.random() * na))
        px = x
        py = y
        p_xmin = x_min
        p_xmax = x_max
        p_ymin = y_min
        p_ymax = y_max
        x += dx
        y += dy
        grew_w = False
        grew_h = False
        if x < x_min:
            x_min = x
            grew_w = True
        if x > x_max:
            x_max = x
            grew_w = True
        if y < y_min:
            y_min = y
            grew_h = True
        if y > y_max:
            y_max = y
            grew_h = True
        if row_min[y + off] == SENTINEL:
            row_min[y + off] = x
            row_max[y + off] = x
        else:
            if x < row_min[y + off]:
                row_min[y + off] = x
            if x > row_max[y + off]:
                row_max[y + off] = x
        if col_min[x + off] == SENTINEL:
            col_min[x + off] = y
            col_max[x + off] = y
        else:
            if y < col_min[x + off]:
                col_min[x + off] = y
            if y > col_max[x + off]:
                col_max[x + off] = y
        if not (x == x_min or x == x_max or y == y_min or y == y_max):
            violations += 1

        if grew_h and phase == 0:
            # U_k is the step before the height first grows after T_k
            u_time = t - 1
            w_at_u = p_xmax - p_xmin + 1
            yside_at_u = (1 if py == p_ymin else 0) | (2 if py == p_ymax else 0)
            xside_at_u = (1 if px == p_xmin else 0) | (2 if px == p_xmax else 0)
            phase = 1
        elif grew_w and phase == 1:
            # T_{k+1}: both records of pair k are now complete
            t_next = t - 1
            w_here = p_xmax - p_xmin + 1
            h_here = p_ymax - p_ymin + 1
            yside_here = (1 if py == p_ymin else 0) | (2 if py == p_ymax else 0)
            xside_here = (1 if px == p_xmin else 0) | (2 if px == p_xmax else 0)
            crossed_v = (yside_at_start == 1 and yside_at_u == 2) or (
                yside_at_start == 2 and yside_at_u == 1
            )
            crossed_h = (xside_at_u == 1 and xside_here == 2) or (
                xside_at_u == 2 and xside_here == 1
            )
            exc[n_rec, E_KIND] = 0
            exc[n_rec, E_START] = t_start
            exc[n_rec, E_END] = u_time
            exc[n_rec, E_DISP] = w_here - w_at_start
            exc[n_rec, E_WALL] = h_at_start
            exc[n_rec, E_CROSSED] = 1 if crossed_v else 0
            n_rec += 1
            if n_rec < max_records:
                exc[n_rec, E_KIND] = 1
                exc[n_rec, E_START] = u_time
                exc[n_rec, E_END] = t_next
                exc[n_rec, E_DISP] = h_here - h_at_start
                exc[n_rec, E_WALL] = w_at_u
                exc[n_rec, E_CROSSED] = 1 if crossed_h else 0
                n_rec += 1
            t_start = t_next
            w_at_start = w_here
            h_at_start = h_here
            yside_at_start = yside_here
            phase = 0
            if n_rec >= max_records:
                break
    summary[S_XMIN] = x_min
    summary[S_XMAX] = x_max
    summary[S_YMIN] = y_min
    summary[S_YMAX] = y_max
    summary[S_X] = x
    summary[S_Y] = y
    summary[S_MIN_ALLOWED] = min_allowed
    summary[S_BOUNDARY_VIOLATIONS] = violations
    _clear2d(row_min, col_min, off, x_min, x_max, y_min, y_max)
    return n_rec


@njit(nogil=True, cache=True)
def walk2d_naive_bench(rng, n, obstacle, first_dir, visited):
    """Reference stepper: full half-line scans against a visited-site set.

    Used only by the benchmark harness as the O(t)-per-step baseline; the
    correctness referee stays in pure Python (walk2d.naive_allowed_directions).
    visited is an empty typed Dict[int64, int64] used as a set.
    """
    B = int64(1) << 30  # keeps packed pairs positive: coords stay below 2**30
    x = int64(0)
    y = int64(0)
    x_min = int64(0)
    x_max = int64(0)
    y_min = int64(0)
    y_max = int64(0)
    visited[(x + B) << 32 | (y + B)] = 1
    dirs = np.empty(4, dtype=np.int64)
    for t in range(1, n + 1):
        na = 0
        for d in range(4):
            dx = DIR2D[d, 0]
            dy = DIR2D[d, 1]
            blocked = False
            cx = x + dx
            cy = y + dy
            while cx >= x_min and cx <= x_max and cy >= y_min and cy <= y_max:
                if ((cx + B) << 32 | (cy + B)) in visited:
                    blocked = True
                    break
                cx += dx
                cy += dy
            if not blocked and obstacle:
                if dx > 0:
                    blocked = y <= 0 and x <= -1
                elif dx < 0:
                    blocked = y <= 0
                elif dy > 0:
                    blocked = x <= 0 and y <= -1
                else:
                    blocked = x <= 0
            if not blocked:
                dirs[na] = d
                na += 1
        if t == 1 and first_dir >= 0:
            d = first_dir
        else:
            d = dirs[int(rng.random() * na)]
        x += DIR2D[d, 0]
        y += DIR2D[d, 1]
        if x < x_min:
            x_min = x
        if x > x_max:
            x_max = x
        if y < y_min:
            y_min = y
        if y > y_max:
            y_max = y
        visited[(x + B) << 32 | (y + B)] = 1
    return x + y


@njit(nogil=True, cache=True)
def walk3d_path(rng, n, checkpoints, checkpoint_pos, record_path, path, summary):
    """3D walk: a step is blocked iff its axis half-line holds a visited site.

    Per-line extrema are kept in three hash maps keyed by the packed
    transverse coordinates.  checkpoints is a sorted int64 array of times
    at which the position is snapshotted into checkpoint_pos.  When
    record_path is true, path must have shape (n+1, 3).

    summary: [0..2] final position, [3] min allowed seen, [4] count of
    steps with fewer than 3 allowed directions, [5] steps completed
    (less than n only if the walker ever had no allowed direction, which
    the 2D guarantee does not extend to).
    """
    B = int64(1) << 30  # keeps packed pairs positive: coords stay below 2**30
    lines_x = Dict.empty(int64, int64)
    lines_y = Dict.empty(int64, int64)
    lines_z = Dict.empty(int64, int64)
    x = int64(0)
    y = int64(0)
    z = int64(0)

    kyz = (y + B) << 32 | (z + B)
    kxz = (x + B) << 32 | (z + B)
    kxy = (x + B) << 32 | (y + B)
    lines_x[kyz] = (x + B) << 32 | (x + B)
    lines_y[kxz] = (y + B) << 32 | (y + B)
    lines_z[kxy] = (z + B) << 32 | (z + B)
    if record_path:
        path[0, 0] = 0
        path[0, 1] = 0
        path[0, 2] = 0
    ci = 0
    if checkpoints.shape[0] > 0 and checkpoints[0] == 0:
        checkpoint_pos[0, 0] = 0
        checkpoint_pos[0, 1] = 0
        checkpoint_pos[0, 2] = 0
        ci = 1
    min_allowed = 6
    thin_steps = 0
    steps_done = 0
    dirs = np.empty(6, dtype=np.int64)
    for t in range(1, n + 1):
        kyz = (y + B) << 32 | (z + B)
        kxz = (x + B) << 32 | (z + B)
        kxy = (x + B) << 32 | (y + B)
        vx = lines_x[kyz]
        vy = lines_y[kxz]
        vz = lines_z[kxy]
        na = 0
        # unpack: high 32 bits = min + B, low = max + B
        x_lo = (vx >> 32) - B
        x_hi = (vx & 0xFFFFFFFF) - B
        y_lo = (vy >> 32) - B
        y_hi = (vy & 0xFFFFFFFF) - B
        z_lo = (vz >> 32) - B
        z_hi = (vz & 0xFFFFFFFF) - B
        if x_hi <= x:
            dirs[na] = 0
            na += 1
        if x_lo >= x:
            dirs[na] = 1
            na += 1
        if y_hi <= y:
            dirs[na] = 2
            na += 1
        if y_lo >= y:
            dirs[na] = 3
            na += 1
        if z_hi <= z:
            dirs[na] = 4
            na += 1
        if z_lo >= z:
            dirs[na] = 5
            na += 1
        if na < min_allowed:
            min_allowed = na
        if na < 3:
            thin_steps += 1
        if na == 0:
            break
        steps_done = t
        d = dirs[int(rng.random() * na)]
        x += DIR3D[d, 0]
        y += DIR3D[d, 1]
        z += DIR3D[d, 2]
        kyz = (y + B) << 32 | (z + B)
        kxz = (x + B) << 32 | (z + B)
        kxy = (x + B) << 32 | (y + B)
        xb = x + B
        yb = y + B
        zb = z + B
        if kyz in lines_x:
            v = lines_x[kyz]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if xb < lo:
                lo = xb
            if xb > hi:
                hi = xb
            lines_x[kyz] = lo << 32 | hi
        else:
            lines_x[kyz] = xb << 32 | xb
        if kxz in lines_y:
            v = lines_y[kxz]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if yb < lo:
                lo = yb
            if yb > hi:
                hi = yb
            lines_y[kxz] = lo << 32 | hi
        else:
            lines_y[kxz] = yb << 32 | yb
        if kxy in lines_z:
            v = lines_z[kxy]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if zb < lo:
                lo = zb
            if zb > hi:
                hi = zb
            lines_z[kxy] = lo << 32 | hi
        else:
            lines_z[kxy] = zb << 32 | zb
        if record_path:
            path[t, 0] = x
            path[t, 1] = y
            path[t, 2] = z
        if ci < checkpoints.shape[0] and checkpoints[ci] == t:
            checkpoint_pos[ci, 0] = x
            checkpoint_pos[ci, 1] = y
            checkpoint_pos[ci, 2] = z
            ci += 1
    summary[0] = x
    summary[1] = y
    summary[2] = z
    summary[3] = min_allowed
    summary[4] = thin_steps
    summary[5] = steps_done


@njit(inline="always")
def _draw_increment(rng):
    """One step of the effective walk: 0 w.p. 1/3, else +-Geometric(1/2)."""
    if rng.random() < 1.0 / 3.0:
        return int64(0)
    g = int64(1)
    while rng.random() >= 0.5:
        g += 1
    if rng.random() < 0.5:
        return g
    return -g


@njit(nogil=True, cache=True)
def effective_exit_times(rng, width, n_samples, cap, times, sides, finals):
    """Sample first exits of the effective walk from [0, width-1].

    width <= 0 means the one-sided case (exit only below 0).  A sample
    that has not exited after cap steps is censored: side 0, time cap.
    """
    for i in range(n_samples):
        s = int64(0)
        m = int64(0)
        exited = False
        while m < cap:
            m += 1
            s += _draw_increment(rng)
            if s < 0:
                times[i] = m
                sides[i] = -1
                finals[i] = s
                exited = True
                break
            if width > 0 and s >= width:
                times[i] = m
                sides[i] = 1
                finals[i] = s
                exited = True
                break
        if not exited:
            times[i] = cap
            sides[i] = 0
            finals[i] = s


@njit(nogil=True, cache=True)
def ladder_decompose_kernel(values, taus, deltas):
    """Alternating ladder times and overshoots of an integer path.

    taus[0] = 0 and deltas[0] = 0; odd entries mark first passages
    strictly below the previous anchor, even entries strictly above.
    Returns the number of entries written (completed ladders + 1).
    """
    taus[0] = 0
    deltas[0] = 0
    anchor = values[0]
    k = 0
    below_next = True
    for i in range(1, values.shape[0]):
        v = values[i]
        if below_next:
            if v < anchor:
                k += 1
                taus[k] = i
                deltas[k] = -1 - (v - anchor)
                anchor = v
                below_next = False
        else:
            if v > anchor:
                k += 1
                taus[k] = i
                deltas[k] = 1 - (v - anchor)
                anchor = v
                below_next = True
    return k + 1


@njit(nogil=True, cache=True)
def coupled_displacement_chain(rng, n_chains, per_chain, out):
    """Displacement chains of the corner-to-prudent coupling.

    Chain entry j is the first exit time of a fresh effective excursion
    from [0, L_j - 1], where L_0 = 1 and L_{j+1} = 1 + (previous entry):
    exactly the accumulated-length truncation rule applied lazily, and by
    the excursion law also the telescoping law of the true walk's
    (X_0, Y_0, X_1, ...).  out has shape (n_chains, per_chain).
    """
    for i in range(n_chains):
        width = int64(1)
        for j in range(per_chain):
            s = int64(0)
            m = int64(0)
            while True:
                m += 1
                s += _draw_increment(rng)
                if s < 0 or s >= width:
                    break
            out[i, j] = m
            width = m + 1


@njit(nogil=True, cache=True)
def coupling_truncation_events(rng, n_pairs, truncated_flags):
    """Simulate one corner-to-prudent coupling run of n_pairs excursion pairs.

    truncated_flags[k] is set when either excursion of pair k is truncated
    (its dip exceeds the accumulated opposite side length).  Corner
    excursions are consumed lazily: each is simulated only until it either
    ends (exits below) or trips the truncation level.
    """
    acc_h = int64(0)
    acc_w = int64(0)
    for k in range(n_pairs):
        truncated_flags[k] = 0
        # vertical excursion against accumulated height
        s = int64(0)
        m = int64(0)
        while True:
            m += 1
            s += _draw_increment(rng)
            if s >= acc_h + 1:
                truncated_flags[k] = 1
                break
            if s < 0:
                break
        acc_w += m
        # horizontal excursion against accumulated width
        s = int64(0)
        m = int64(0)
        while True:
            m += 1
            s += _draw_increment(rng)
            if s >= acc_w + 1:
                truncated_flags[k] = 1
                break
            if s < 0:
                break
        acc_h += m


@njit(nogil=True, cache=True)
def walk3d_replay(sites, result):
    """Replay a 3D trajectory against both the line index and a set scan.

    For every step: compare the index-derived allowed set with a literal
    half-line scan over the visited set (bounded by the visited box), and
    check the taken step was allowed.  result: [0] allowed-set
    mismatches, [1] illegal steps, [2] min allowed size seen.
    Coordinates must stay below 2**20 in absolute value (21-bit site
    packing); the wrapper checks this.
    """
    B = int64(1) << 30
    BV = int64(1) << 20
    lines_x = Dict.empty(int64, int64)
    lines_y = Dict.empty(int64, int64)
    lines_z = Dict.empty(int64, int64)
    visited = Dict.empty(int64, int64)
    T = sites.shape[0] - 1
    x = int64(sites[0, 0])
    y = int64(sites[0, 1])
    z = int64(sites[0, 2])
    lo0 = x
    hi0 = x
    lo1 = y
    hi1 = y
    lo2 = z
    hi2 = z
    lines_x[(y + B) << 32 | (z + B)] = (x + B) << 32 | (x + B)
    lines_y[(x + B) << 32 | (z + B)] = (y + B) << 32 | (y + B)
    lines_z[(x + B) << 32 | (y + B)] = (z + B) << 32 | (z + B)
    visited[((x + BV) << 42) | ((y + BV) << 21) | (z + BV)] = 1
    mismatches = int64(0)
    illegal = int64(0)
    min_allowed = int64(6)
    for t in range(T):
        x = int64(sites[t, 0])
        y = int64(sites[t, 1])
        z = int64(sites[t, 2])
        vx = lines_x[(y + B) << 32 | (z + B)]
        vy = lines_y[(x + B) << 32 | (z + B)]
        vz = lines_z[(x + B) << 32 | (y + B)]
        x_lo = (vx >> 32) - B
        x_hi = (vx & 0xFFFFFFFF) - B
        y_lo = (vy >> 32) - B
        y_hi = (vy & 0xFFFFFFFF) - B
        z_lo = (vz >> 32) - B
        z_hi = (vz & 0xFFFFFFFF) - B
        na = 0
        for d in range(6):
            dx = DIR3D[d, 0]
            dy = DIR3D[d, 1]
            dz = DIR3D[d, 2]
            if d == 0:
                fast_allowed = x_hi <= x
            elif d == 1:
                fast_allowed = x_lo >= x
            elif d == 2:
                fast_allowed = y_hi <= y
            elif d == 3:
                fast_allowed = y_lo >= y
            elif d == 4:
                fast_allowed = z_hi <= z
            else:
                fast_allowed = z_lo >= z
            cx = x + dx
            cy = y + dy
            cz = z + dz
            blocked = False
            while lo0 <= cx <= hi0 and lo1 <= cy <= hi1 and lo2 <= cz <= hi2:
                if ((cx + BV) << 42 | (cy + BV) << 21 | (cz + BV)) in visited:
                    blocked = True
                    break
                cx += dx
                cy += dy
                cz += dz
            if fast_allowed == blocked:
                mismatches += 1
            if fast_allowed:
                na += 1
        if na < min_allowed:
            min_allowed = na
        # the taken step must be allowed per the scan
        sdx = int64(sites[t + 1, 0]) - x
        sdy = int64(sites[t + 1, 1]) - y
        sdz = int64(sites[t + 1, 2]) - z
        cx = x + sdx
        cy = y + sdy
        cz = z + sdz
        step_blocked = False
        while lo0 <= cx <= hi0 and lo1 <= cy <= hi1 and lo2 <= cz <= hi2:
            if ((cx + BV) << 42 | (cy + BV) << 21 | (cz + BV)) in visited:
                step_blocked = True
                break
            cx += sdx
            cy += sdy
            cz += sdz
        if step_blocked:
            illegal += 1
        # apply the step
        x += sdx
        y += sdy
        z += sdz
        if x < lo0:
            lo0 = x
        elif x > hi0:
            hi0 = x
        if y < lo1:
            lo1 = y
        elif y > hi1:
            hi1 = y
        if z < lo2:
            lo2 = z
        elif z > hi2:
            hi2 = z
        kyz = (y + B) << 32 | (z + B)
        kxz = (x + B) << 32 | (z + B)
        kxy = (x + B) << 32 | (y + B)
        xb = x + B
        yb = y + B
        zb = z + B
        if kyz in lines_x:
            v = lines_x[kyz]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if xb < lo:
                lo = xb
            if xb > hi:
                hi = xb
            lines_x[kyz] = lo << 32 | hi
        else:
            lines_x[kyz] = xb << 32 | xb
        if kxz in lines_y:
            v = lines_y[kxz]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if yb < lo:
                lo = yb
            if yb > hi:
                hi = yb
            lines_y[kxz] = lo << 32 | hi
        else:
            lines_y[kxz] = yb << 32 | yb
        if kxy in lines_z:
            v = lines_z[kxy]
            lo = v >> 32
            hi = v & 0xFFFFFFFF
            if zb < lo:
                lo = zb
            if zb > hi:
                hi = zb
            lines_z[kxy] = lo << 32 | hi
        else:
            lines_z[kxy] = zb << 32 | zb
        visited[((x + BV) << 42) | ((y + BV) << 21) | (z + BV)] = 1
    result[0] = mismatches
    result[1] = illegal
    result[2] = min_allowed


@njit(nogil=True, cache=True)
def walk2d_replay(sites, obstacle, result):
    """Replay a 2D trajectory: extrema index vs literal half-line scans.

    result: [0] allowed-set mismatches, [1] illegal steps, [2] boundary
    violations, [3] min allowed size.  Coordinates must stay below 2**20
    in absolute value.
    """
    BV = int64(1) << 20
    visited = Dict.empty(int64, int64)
    T = sites.shape[0] - 1
    x = int64(sites[0, 0])
    y = int64(sites[0, 1])
    x_min = x
    x_max = x
    y_min = y
    y_max = y
    # per-row/per-column extrema, dict-backed to stay allocation-light
    row_lo = Dict.empty(int64, int64)
    row_hi = Dict.empty(int64, int64)
    col_lo = Dict.empty(int64, int64)
    col_hi = Dict.empty(int64, int64)
    row_lo[y] = x
    row_hi[y] = x
    col_lo[x] = y
    col_hi[x] = y
    visited[(x + BV) << 21 | (y + BV)] = 1
    mismatches = int64(0)
    illegal = int64(0)
    violations = int64(0)
    min_allowed = int64(4)
    for t in range(T):
        x = int64(sites[t, 0])
        y = int64(sites[t, 1])
        na = 0
        for d in range(4):
            dx = DIR2D[d, 0]
            dy = DIR2D[d, 1]
            if d == 0:
                fast_allowed = row_hi[y] <= x
                if obstacle and y <= 0 and x <= -1:
                    fast_allowed = False
            elif d == 1:
                fast_allowed = row_lo[y] >= x
                if obstacle and y <= 0:
                    fast_allowed = False
            elif d == 2:
                fast_allowed = col_hi[x] <= y
                if obstacle and x <= 0 and y <= -1:
                    fast_allowed = False
            else:
                fast_allowed = col_lo[x] >= y
                if obstacle and x <= 0:
                    fast_allowed = False
            cx = x + dx
            cy = y + dy
            blocked = False
            while x_min <= cx <= x_max and y_min <= cy <= y_max:
                if ((cx + BV) << 21 | (cy + BV)) in visited:
                    blocked = True
                    break
                cx += dx
                cy += dy
            if not blocked and obstacle:
                if dx > 0:
                    blocked = y <= 0 and x <= -1
                elif dx < 0:
                    blocked = y <= 0
                elif dy > 0:
                    blocked = x <= 0 and y <= -1
                else:
                    blocked = x <= 0
            if fast_allowed == blocked:
                mismatches += 1
            if fast_allowed:
                na += 1
        if na < min_allowed:
            min_allowed = na
        sdx = int64(sites[t + 1, 0]) - x
        sdy = int64(sites[t + 1, 1]) - y
        # the taken step must be allowed by the scan + obstacle rule
        cx = x + sdx
        cy = y + sdy
        step_blocked = False
        while x_min <= cx <= x_max and y_min <= cy <= y_max:
            if ((cx + BV) << 21 | (cy + BV)) in visited:
                step_blocked = True
                break
            cx += sdx
            cy += sdy
        if not step_blocked and obstacle:
            if sdx > 0:
                step_blocked = y <= 0 and x <= -1
            elif sdx < 0:
                step_blocked = y <= 0
            elif sdy > 0:
                step_blocked = x <= 0 and y <= -1
            else:
                step_blocked = x <= 0
        if step_blocked:
            illegal += 1
        x += sdx
        y += sdy
        if x < x_min:
            x_min = x
        elif x > x_max:
            x_max = x
        if y < y_min:
            y_min = y
        elif y > y_max:
            y_max = y
        if y in row_lo:
            if x < row_lo[y]:
                row_lo[y] = x
            if x > row_hi[y]:
                row_hi[y] = x
        else:
            row_lo[y] = x
            row_hi[y] = x
        if x in col_lo:
            if y < col_lo[x]:
                col_lo[x] = y
            if y > col_hi[x]:
                col_hi[x] = y
        else:
            col_lo[x] = y
            col_hi[x] = y
        visited[(x + BV) << 21 | (y + BV)] = 1
        if not (x == x_min or x == x_max or y == y_min or y == y_max):
            violations += 1
    result[0] = mismatches
    result[1] = illegal
    result[2] = violations
    result[3] = min_allowed


@njit(nogil=True, cache=True)
def walk3d_naive_bench(rng, n, visited):
    """Reference 3D stepper scanning the visited set along half-lines.

    Benchmark baseline only; visited is an empty typed Dict used as a
    set.  Coordinates must stay below 2**20 in absolute value.
    """
    BV = int64(1) << 20
    x = int64(0)
    y = int64(0)
    z = int64(0)
    lo0 = x
    hi0 = x
    lo1 = y
    hi1 = y
    lo2 = z
    hi2 = z
    visited[(x + BV) << 42 | (y + BV) << 21 | (z + BV)] = 1
    dirs = np.empty(6, dtype=np.int64)
    for t in range(1, n + 1):
        na = 0
        for d in range(6):
            dx = DIR3D[d, 0]
            dy = DIR3D[d, 1]
            dz = DIR3D[d, 2]
            cx = x + dx
            cy = y + dy
            cz = z + dz
            blocked = False
            while lo0 <= cx <= hi0 and lo1 <= cy <= hi1 and lo2 <= cz <= hi2:
                if ((cx + BV) << 42 | (cy + BV) << 21 | (cz + BV)) in visited:
                    blocked = True
                    break
                cx += dx
                cy += dy
                cz += dz
            if not blocked:
                dirs[na] = d
                na += 1
        if na == 0:
            break
        d = dirs[int(rng.random() * na)]
        x += DIR3D[d, 0]
        y += DIR3D[d, 1]
        z += DIR3D[d, 2]
        if x < lo0:
            lo0 = x
        elif x > hi0:
            hi0 = x
        if y < lo1:
            lo1 = y
        elif y > hi1:
            hi1 = y
        if z < lo2:
            lo2 = z
        elif z > hi2:
            hi2 = z
        visited[(x + BV) << 42 | (y + BV) << 21 | (z + BV)] = 1
    return x + y + z
