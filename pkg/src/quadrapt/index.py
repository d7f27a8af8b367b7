"""Winding-number index engine.

The topological degree of a loop t -> R^2 \\ {0} is computed by continuous
angle tracking: sample, wrap increments to (-pi, pi], and bisect any interval
whose angular step reaches pi/2.  Once every step is below pi/2 the wrapped sum
is the exact winding of the continuous loop, so the only failure mode is a
near-zero of the map, which is reported rather than guessed at.

Indices built on top of it:

* elliptic simple points:   I = -deg(A1 + i B1)/3, cross-checked against
  I = 1 - deg(P + i Q)/3 (the two differ by the e^{3it} factor on the circle);
* hyperbolic simple points: I = deg((x,y) -> (Q, P)) + 1 (needs ad != 0; a tiny
  in-component perturbation restores it, the index being locally constant on
  {delta != 0}), cross-checked against a direct line-field winding;
* semi-homogeneous forms:   I = -deg(A_n + i B_n)/3 with
  A_n + i B_n = h_xxx - 3 h_xyy + i (h_yyy - 3 h_xxy) for the homogeneous
  surface term h of degree n + 3.

Indices are exact rationals (thirds stay thirds).
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL
from .errors import (
    NearSingularError,
    NonSimpleError,
    NotSemiHomogeneousError,
    QuadraptError,
    UsageError,
)
from .localmodel import EllipticModel, HyperbolicModel, char_polys, hyperbolic_model

__all__ = [
    "LoopMap",
    "winding_degree",
    "linefield_winding",
    "elliptic_index",
    "hyperbolic_index",
    "hyperbolic_linefield_index",
    "SemiHomogeneousForm",
    "semi_homogeneous_form",
    "semihomogeneous_index",
    "LoewnerReport",
    "loewner_check",
    "hpoly_eval",
    "hpoly_dx",
    "hpoly_dy",
]

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class LoopMap:
    """A nonvanishing loop sampler t in [0, 2pi] -> R^2 plus its observed margin."""

    sampler: Callable
    min_norm: float


def _as_sampler(m):
    return m.sampler if isinstance(m, LoopMap) else m


def winding_degree(loop, samples: int = 64, depth: int | None = None,
                   zero_tol: float = 1e-12) -> int:
    """Topological degree of a loop, certified by sub-pi/2 angular steps."""
    sampler = _as_sampler(loop)
    depth = DEFAULT_TOL.winding_depth if depth is None else depth
    ts = np.linspace(0.0, TWO_PI, samples + 1)
    vals = np.asarray(sampler(ts), dtype=float)
    norms = np.hypot(vals[:, 0], vals[:, 1])
    if float(norms.min()) < zero_tol:
        raise NearSingularError("loop passes within zero tolerance of the origin")
    ang = np.arctan2(vals[:, 1], vals[:, 0])

    def refine(t0, t1, a0, a1, d):
        inc = (a1 - a0 + math.pi) % TWO_PI - math.pi
        if abs(inc) < math.pi / 2:
            return inc
        if d >= depth:
            raise NearSingularError("winding refinement depth exhausted")
        tm = 0.5 * (t0 + t1)
        vm = np.asarray(sampler(np.array([tm])), dtype=float)[0]
        nm = math.hypot(vm[0], vm[1])
        if nm < zero_tol:
            raise NearSingularError("loop passes within zero tolerance of the origin")
        am = math.atan2(vm[1], vm[0])
        return refine(t0, tm, a0, am, d + 1) + refine(tm, t1, am, a1, d + 1)

    total = 0.0
    for k in range(samples):
        total += refine(ts[k], ts[k + 1], ang[k], ang[k + 1], 0)
    deg = total / TWO_PI
    if abs(deg - round(deg)) > 1e-6:
        raise QuadraptError(f"winding total {deg} is not an integer")
    return int(round(deg))


def linefield_winding(angle_sampler, samples: int = 256,
                      depth: int | None = None) -> Fraction:
    """Index of a line field from its direction angle along a loop (mod pi).

    Increments are wrapped to (-pi/2, pi/2] and refined below pi/4; the result
    is a half-integer rational (total rotation / 2 pi).
    """
    depth = DEFAULT_TOL.winding_depth if depth is None else depth
    ts = np.linspace(0.0, TWO_PI, samples + 1)
    ang = np.asarray(angle_sampler(ts), dtype=float)

    def refine(t0, t1, a0, a1, d):
        inc = (a1 - a0 + math.pi / 2) % math.pi - math.pi / 2
        if abs(inc) < math.pi / 4:
            return inc
        if d >= depth:
            raise NearSingularError("line-field refinement depth exhausted")
        tm = 0.5 * (t0 + t1)
        am = float(angle_sampler(np.array([tm]))[0])
        return refine(t0, tm, a0, am, d + 1) + refine(tm, t1, am, a1, d + 1)

    total = 0.0
    for k in range(samples):
        total += refine(ts[k], ts[k + 1], ang[k], ang[k + 1], 0)
    halves = 2.0 * total / TWO_PI
    if abs(halves - round(halves)) > 1e-6:
        raise QuadraptError("line-field rotation is not a half-integer")
    return Fraction(int(round(halves)), 2)


# ---------------------------------------------------------------------------
# Model indices
# ---------------------------------------------------------------------------


def _linear_loop(a, b, c, d):
    def sampler(ts):
        co, si = np.cos(ts), np.sin(ts)
        return np.column_stack([a * co + b * si, c * co + d * si])

    return sampler


def elliptic_index(m: EllipticModel) -> Fraction:
    """Index of the 3-web at a simple elliptic quadratic point.

    Computes -deg(A1 + i B1)/3 and asserts agreement with 1 - deg(P + i Q)/3.
    """
    if not m.simple:
        raise NonSimpleError("elliptic index needs delta != 0")
    a, b, c, d = m.abcd
    deg1 = winding_degree(_linear_loop(a, b, c, d))
    index = Fraction(-deg1, 3)
    cp = char_polys(m)

    def pq(ts):
        return np.column_stack([cp.P_theta(ts), cp.Q_theta(ts)])

    cross = 1 - Fraction(winding_degree(pq), 3)
    if cross != index:
        raise QuadraptError(f"index cross-check failed: {index} vs {cross}")
    return index


def hyperbolic_linefield_index(m: HyperbolicModel) -> Fraction:
    """Line-field index by direct direction tracking of (ax+by)dx^3+(cx+dy)dy^3."""
    a, b, c, d = m.abcd

    def angle(ts):
        co, si = np.cos(ts), np.sin(ts)
        a1 = a * co + b * si
        b1 = c * co + d * si
        return np.arctan2(np.cbrt(-a1), np.cbrt(b1))

    return linefield_winding(angle)


def hyperbolic_index(m: HyperbolicModel, check: bool = True) -> int:
    """Index of the line field at a simple hyperbolic quadratic point.

    deg((x,y) -> (Q, P)) + 1; when ad = 0 the model is nudged inside its
    delta-component first (P and Q share a root exactly when ad = 0).
    """
    if not m.simple:
        raise NonSimpleError("hyperbolic index needs delta != 0")
    a, b, c, d = m.abcd
    mm = max(abs(v) for v in m.abcd)
    work = m
    if abs(a * d) <= 1e-8 * (1.0 + mm) ** 2:
        eta = 1e-3 * (1.0 + mm)
        for da, dd in ((eta, 0.0), (-eta, 0.0), (0.0, eta), (0.0, -eta),
                       (eta, eta), (-eta, -eta)):
            a2, d2 = a + da, d + dd
            delta2 = a2 * d2 - b * c
            if abs(a2 * d2) > 0.5 * eta * (1.0 + mm) and np.sign(delta2) == np.sign(m.delta) \
                    and abs(delta2) > 0.5 * abs(m.delta):
                work = hyperbolic_model(a2, b, c, d2, m.e)
                break
        else:
            raise QuadraptError("could not restore ad != 0 within the delta component")
    cp = char_polys(work)

    def qp(ts):
        return np.column_stack([cp.Q_theta(ts), cp.P_theta(ts)])

    index = winding_degree(qp) + 1
    if check:
        direct = hyperbolic_linefield_index(m)
        if direct != index:
            raise QuadraptError(f"line-field winding {direct} != (Q,P) degree {index}")
    return index


# ---------------------------------------------------------------------------
# Homogeneous polynomials and semi-homogeneous forms
# ---------------------------------------------------------------------------


def hpoly_eval(coef, t):
    """Evaluate sum coef[k] x^{m-k} y^k on the unit circle."""
    coef = np.asarray(coef, dtype=float)
    m = len(coef) - 1
    t = np.asarray(t, dtype=float)
    c, s = np.cos(t), np.sin(t)
    out = np.zeros_like(c)
    for k in range(m + 1):
        out = out + coef[k] * c ** (m - k) * s**k
    return out


def hpoly_dx(coef):
    coef = np.asarray(coef, dtype=float)
    m = len(coef) - 1
    return np.array([(m - k) * coef[k] for k in range(m)])


def hpoly_dy(coef):
    coef = np.asarray(coef, dtype=float)
    m = len(coef) - 1
    return np.array([(k + 1) * coef[k + 1] for k in range(m)])


def _hpoly_real_root_angles(coef, rel=1e-9):
    """Angles in [0, pi) of real projective roots of a homogeneous polynomial."""
    coef = np.asarray(coef, dtype=float)
    m = float(np.max(np.abs(coef)))
    if m == 0.0:
        raise UsageError("zero polynomial has no isolated roots")
    poly = list(coef[::-1])  # highest power of s = y/x first
    n_inf = 0
    while len(poly) > 1 and abs(poly[0]) <= 1e-12 * m:
        poly.pop(0)
        n_inf += 1
    angles = []
    if len(poly) > 1:
        for r in np.roots(poly):
            if abs(r.imag) <= 1e-7 * (1.0 + abs(r.real)):
                angles.append(math.atan(float(r.real)) % math.pi)
    if n_inf:
        angles.append(math.pi / 2.0)
    return sorted(angles)


@dataclass(frozen=True)
class SemiHomogeneousForm:
    """Lowest nonvanishing web jet of a surface term h (homogeneous, deg n+3)."""

    n: int
    h: np.ndarray
    An: np.ndarray
    Bn: np.ndarray


def semi_homogeneous_form(h_coeffs, tol: float = 1e-6) -> SemiHomogeneousForm:
    """Build A_n, B_n from h and verify their only common zero is the origin."""
    h = np.asarray(h_coeffs, dtype=float)
    deg = len(h) - 1
    if deg < 4:
        raise UsageError("h must have degree >= 4")
    n = deg - 3
    hx = hpoly_dx(h)
    hy = hpoly_dy(h)
    An = hpoly_dx(hpoly_dx(hx)) - 3.0 * hpoly_dx(hpoly_dy(hy))
    Bn = hpoly_dy(hpoly_dy(hy)) - 3.0 * hpoly_dy(hpoly_dx(hx))
    sa = float(np.max(np.abs(An)))
    sb = float(np.max(np.abs(Bn)))
    if max(sa, sb) == 0.0:
        raise NotSemiHomogeneousError("web jet vanishes identically")
    if sa == 0.0 or sb == 0.0:
        nz, z = (Bn, sb) if sa == 0.0 else (An, sa)
        if _hpoly_real_root_angles(nz):
            raise NotSemiHomogeneousError("one component vanishes, the other has real roots")
        return SemiHomogeneousForm(n, h, An, Bn)
    for ang in _hpoly_real_root_angles(An):
        if abs(float(hpoly_eval(Bn, ang))) < tol * sb:
            raise NotSemiHomogeneousError(f"A_n and B_n share the root angle {ang:.6f}")
    return SemiHomogeneousForm(n, h, An, Bn)


def semihomogeneous_index(s: SemiHomogeneousForm) -> Fraction:
    """Web index -deg(A_n + i B_n)/3 of a semi-homogeneous cubic form."""

    def ab(ts):
        return np.column_stack([hpoly_eval(s.An, ts), hpoly_eval(s.Bn, ts)])

    return Fraction(-winding_degree(ab, samples=max(64, 16 * (s.n + 1))), 3)


# ---------------------------------------------------------------------------
# Loewner-bound harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LoewnerReport:
    trials: int
    max_degree: int
    seed: int
    violations: int
    rejected: int
    histogram: dict  # str(index) -> count

    def to_json(self) -> dict:
        return {
            "schemaVersion": 1,
            "trials": self.trials,
            "maxDegree": self.max_degree,
            "seed": self.seed,
            "violations": self.violations,
            "rejected": self.rejected,
            "histogram": dict(sorted(self.histogram.items())),
        }


def loewner_check(trials: int, max_degree: int = 8, seed: int = 0) -> LoewnerReport:
    """Random semi-homogeneous forms of degree <= max_degree; indices must be <= 1.

    The reported histogram maps index values to counts; a violation is an
    index above 1 (the conjectural bound under semi-homogeneity).
    """
    if max_degree < 4:
        raise UsageError("max_degree must be >= 4")
    rng = np.random.default_rng(seed)
    hist: Counter = Counter()
    violations = 0
    rejected = 0
    done = 0
    while done < trials:
        deg = int(rng.integers(4, max_degree + 1))
        h = rng.uniform(-1.0, 1.0, deg + 1)
        try:
            form = semi_homogeneous_form(h)
            idx = semihomogeneous_index(form)
        except (NotSemiHomogeneousError, NearSingularError):
            rejected += 1
            if rejected > 100 * max(trials, 1):
                raise QuadraptError("semi-homogeneous rejection rate too high")
            continue
        hist[str(idx)] += 1
        if idx > 1:
            violations += 1
        done += 1
    return LoewnerReport(trials, max_degree, seed, violations, rejected, dict(hist))
