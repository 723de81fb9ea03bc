"""Kinetic prudent walk simulation and limit-law verification toolkit.

Subpackages by theme:

- effective: the 1D effective random walk, its exit times, ladders,
  overshoots, and the microscopic time change
- walk2d / walk3d: the lattice walks with O(1)-per-step occupancy
  indexes and their scan referees
- codec: the bijection between hat-path excursions and corner-model
  lattice excursions
- scaling: the Brownian limit process, occupation times, angle law
- stats: estimators and goodness-of-fit machinery
- acceptance: the verification suite behind `prudentwalk verify`
- cli: command-line front end
"""

__version__ = "0.1.0"

from . import codec, effective, lattice, rng, scaling, stats, walk2d, walk3d  # noqa: F401
