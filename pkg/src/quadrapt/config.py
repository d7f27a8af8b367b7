"""Shared numerical tolerances and environment-driven settings."""

from __future__ import annotations

import os
from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Knobs used across the pipeline; defaults are the shipped calibration."""

    cubic_zero: float = 1e-9        # singular cubic form, relative to jet magnitude
    root_merge_angle: float = 1e-8  # direction roots closer than this merge
    boundary_rel: float = 1e-9      # Delta/delta boundary detection, scale-relative
    monge_residual: float = 1e-10   # |F(q)| tolerance, scaled by 1+|q|^2
    newton_tol: float = 1e-12       # quadratic-point refinement target
    seed_factor: float = 1e-4       # candidate threshold vs median grid norm
    near_parabolic: float = 1e-6    # |hess| below this: excluded from index sums
    merge_distance: float = 1e-6    # duplicate quadratic-point merge radius
    winding_depth: int = 40         # max bisection depth in degree tracking


DEFAULT_TOL = Tolerances()


def worker_count() -> int:
    """Parallelism cap from QUADRAPT_THREADS (defaults to 1 = sequential)."""
    try:
        return max(1, int(os.environ.get("QUADRAPT_THREADS", "1")))
    except ValueError:
        return 1
