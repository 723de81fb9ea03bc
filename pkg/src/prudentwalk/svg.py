"""Minimal static SVG emission: trajectory polylines and CDF overlays.

Deliberately spartan: one polyline (or two step-function paths), a
viewBox equal to the data's bounding box, no styling beyond stroke
colours.  Anything richer is out of scope.
"""

from __future__ import annotations

import numpy as np

__all__ = ["polyline_svg", "cdf_overlay_svg"]


def polyline_svg(points: np.ndarray, stroke: str = "black") -> str:
    """One polyline through integer lattice points; viewBox = bounding box."""
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("need an (n, 2) point array")
    x_min, y_min = pts.min(axis=0)
    x_max, y_max = pts.max(axis=0)
    w = max(int(x_max - x_min), 1)
    h = max(int(y_max - y_min), 1)
    body = " ".join(f"{int(x)},{int(-y)}" for x, y in pts)  # svg y grows downward
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" '
        f'viewBox="{int(x_min)} {int(-y_max)} {w} {h}">\n'
        f'<polyline fill="none" stroke="{stroke}" stroke-width="{max(w, h) / 800}" '
        f'points="{body}"/>\n</svg>\n'
    )


def _step_path(xs, ys) -> str:
    parts = [f"M {xs[0]:.6g} {1 - ys[0]:.6g}"]
    for i in range(1, len(xs)):
        parts.append(f"L {xs[i]:.6g} {1 - ys[i - 1]:.6g}")
        parts.append(f"L {xs[i]:.6g} {1 - ys[i]:.6g}")
    return " ".join(parts)


def cdf_overlay_svg(xs_a, ys_a, xs_b, ys_b) -> str:
    """Two CDFs drawn as step functions over a shared x range."""
    lo = min(min(xs_a), min(xs_b))
    hi = max(max(xs_a), max(xs_b))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="{lo:.6g} 0 {hi - lo:.6g} 1">\n'
        f'<path fill="none" stroke="black" stroke-width="{(hi - lo) / 400}" '
        f'd="{_step_path(list(xs_a), list(ys_a))}"/>\n'
        f'<path fill="none" stroke="red" stroke-width="{(hi - lo) / 400}" '
        f'd="{_step_path(list(xs_b), list(ys_b))}"/>\n</svg>\n'
    )
