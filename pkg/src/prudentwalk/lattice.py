"""Lattice trajectory containers shared by the 2D/3D engines and the codec."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["BoundingRect", "LatticePath", "LatticePath3D", "DIRECTIONS_2D", "DIR_CHARS_2D"]

# direction order is part of the sampling protocol: E, W, N, S
DIRECTIONS_2D = ((1, 0), (-1, 0), (0, 1), (0, -1))
DIR_CHARS_2D = "RLUD"


@dataclass(frozen=True)
class BoundingRect:
    """Smallest axis-aligned rectangle containing the visited sites."""

    x_min: int
    x_max: int
    y_min: int
    y_max: int

    @property
    def width(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def height(self) -> int:
        return self.y_max - self.y_min + 1

    def contains(self, x: int, y: int) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max

    def on_boundary(self, x: int, y: int) -> bool:
        return self.contains(x, y) and (
            x == self.x_min or x == self.x_max or y == self.y_min or y == self.y_max
        )


def _check_unit_steps(sites: np.ndarray) -> None:
    if sites.ndim != 2 or sites.shape[0] < 1:
        raise ValueError("sites must be a (T+1, d) array")
    if np.any(sites[0] != 0):
        raise ValueError("trajectories start at the origin")
    if sites.shape[0] > 1:
        d = np.abs(np.diff(sites, axis=0)).sum(axis=1)
        if np.any(d != 1):
            raise ValueError("consecutive sites must differ by one unit step")


@dataclass(frozen=True)
class LatticePath:
    """Time-ordered 2D trajectory; sites[t] is the position after t steps."""

    sites: np.ndarray  # (T+1, 2) integer array
    variant: str = "prudent"  # "prudent" or "corner"
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_unit_steps(self.sites)

    def __len__(self) -> int:
        """Number of steps."""
        return self.sites.shape[0] - 1

    def bounding_rect(self) -> BoundingRect:
        mins = self.sites.min(axis=0)
        maxs = self.sites.max(axis=0)
        return BoundingRect(int(mins[0]), int(maxs[0]), int(mins[1]), int(maxs[1]))

    def endpoint(self) -> tuple[int, int]:
        return int(self.sites[-1, 0]), int(self.sites[-1, 1])


@dataclass(frozen=True)
class LatticePath3D:
    """Time-ordered 3D trajectory."""

    sites: np.ndarray  # (T+1, 3)
    seed: int | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        _check_unit_steps(self.sites)

    def __len__(self) -> int:
        return self.sites.shape[0] - 1

    def endpoint(self) -> tuple[int, int, int]:
        return tuple(int(v) for v in self.sites[-1])
