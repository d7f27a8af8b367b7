"""Cubic form of a graph surface and the directions it cuts out.

Everything downstream works with the *numerator* components of the cubic form,

    n111 = 1/4 fxxx fxx fyy - 3/4 fxyy fxx^2 + 3/2 fxxy fxx fxy - fxxx fxy^2
    n112 = -1/4 fxx^2 fyyy + 3/4 fxx fyy fxxy - 1/2 fxy fyy fxxx
    n122 = -1/4 fyy^2 fxxx + 3/4 fxx fyy fxyy - 1/2 fxy fxx fyyy
    n222 = 1/4 fyyy fxx fyy - 3/4 fxxy fyy^2 + 3/2 fxyy fyy fxy - fyyy fxy^2

together with hess = fxx fyy - fxy^2.  These are polynomial in the 3-jet, hence
finite and smooth across the parabolic curve, and they agree with the cubic
form itself up to the positive conformal factor |hess|^{5/4}; only the
conformal class matters for null directions and for quadratic-point detection.

The binary cubic n111 dx^3 + 3 n112 dx^2 dy + 3 n122 dx dy^2 + n222 dy^3 has
three real root directions at elliptic points (the 3-web) and one at
hyperbolic points (the line field).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT_TOL
from .errors import NormalizationRequiredError, SingularCubicError, UsageError
from .jets import Jet2

__all__ = [
    "CubicFormValue",
    "DirectionSet",
    "cubic_components",
    "cubic_component_jets",
    "components_from_partials",
    "bcde_directions",
    "darboux_directions",
    "solve_cubic_directions",
    "cubic_value_at_direction",
]


@dataclass(frozen=True)
class CubicFormValue:
    """Numerator components of the cubic form plus the Hessian data at a point."""

    n111: float
    n112: float
    n122: float
    n222: float
    hess: float
    gN: tuple  # (fxx, fxy, fyy)

    @property
    def components(self) -> np.ndarray:
        return np.array([self.n111, self.n112, self.n122, self.n222])

    @property
    def coefficients(self) -> np.ndarray:
        """Binary-cubic coefficients (dx^3, dx^2 dy, dx dy^2, dy^3)."""
        return np.array([self.n111, 3 * self.n112, 3 * self.n122, self.n222])

    @property
    def region(self) -> str:
        if self.hess > 0:
            return "elliptic"
        if self.hess < 0:
            return "hyperbolic"
        return "parabolic"

    def zero_scale(self) -> float:
        # numerators are quadratic in 2nd partials times one 3rd partial
        return (1.0 + max(abs(g) for g in self.gN)) ** 3


@dataclass(frozen=True)
class DirectionSet:
    """Undirected direction angles in [0, pi); kind encodes the root pattern."""

    kind: str  # 'Elliptic3' | 'Hyperbolic1' | 'Degenerate'
    angles: tuple


def components_from_partials(fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy):
    """Vectorized numerator components; inputs broadcast together."""
    n111 = 0.25 * fxxx * fxx * fyy - 0.75 * fxyy * fxx**2 + 1.5 * fxxy * fxx * fxy - fxxx * fxy**2
    n112 = -0.25 * fxx**2 * fyyy + 0.75 * fxx * fyy * fxxy - 0.5 * fxy * fyy * fxxx
    n122 = -0.25 * fyy**2 * fxxx + 0.75 * fxx * fyy * fxyy - 0.5 * fxy * fxx * fyyy
    n222 = 0.25 * fyyy * fxx * fyy - 0.75 * fxxy * fyy**2 + 1.5 * fxyy * fyy * fxy - fyyy * fxy**2
    hess = fxx * fyy - fxy**2
    return n111, n112, n122, n222, hess


def cubic_components(j: Jet2) -> CubicFormValue:
    """Numerator components of the cubic form from a jet of order >= 3."""
    if j.order < 3:
        raise UsageError("cubic_components needs a jet of order >= 3")
    fxx, fxy, fyy = j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)
    fxxx, fxxy = j.partial(3, 0), j.partial(2, 1)
    fxyy, fyyy = j.partial(1, 2), j.partial(0, 3)
    n111, n112, n122, n222, hess = components_from_partials(
        fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy
    )
    return CubicFormValue(n111, n112, n122, n222, hess, (fxx, fxy, fyy))


def cubic_component_jets(j: Jet2):
    """Numerator components as jets of order j.order - 3 (values plus derivatives).

    Returns (n111, n112, n122, n222, hess) jets.  Used for Newton refinement of
    quadratic points (order-4 input gives exact gradients) and for reading off
    higher jets of the cubic form at degenerate singularities.
    """
    if j.order < 3:
        raise UsageError("cubic_component_jets needs a jet of order >= 3")
    m = j.order - 3
    fx = j.dx()
    fy = j.dy()
    fxx = fx.dx().truncate(m)
    fxy = fx.dy().truncate(m)
    fyy = fy.dy().truncate(m)
    fxxx = fx.dx().dx().truncate(m)
    fxxy = fx.dx().dy().truncate(m)
    fxyy = fx.dy().dy().truncate(m)
    fyyy = fy.dy().dy().truncate(m)
    n111, n112, n122, n222, hess = components_from_partials(
        fxx, fxy, fyy, fxxx, fxxy, fxyy, fyyy
    )
    return n111, n112, n122, n222, hess


def _real_roots_cubic(k3, k2, k1, k0, rel=1e-13):
    """Real slope roots of k3 m^3 + k2 m^2 + k1 m + k0, plus count at infinity.

    Returns (finite_roots, n_infinite) where n_infinite counts vanished leading
    coefficients (roots of the binary form along dx = 0).
    """
    scale = max(abs(k3), abs(k2), abs(k1), abs(k0))
    tol = rel * scale
    if abs(k3) <= tol:
        if abs(k2) <= tol:
            if abs(k1) <= tol:
                return [], 3
            return [-k0 / k1], 2
        disc = k1 * k1 - 4 * k2 * k0
        if disc < -tol * tol:
            return [], 1
        if disc <= tol * tol:
            return [-k1 / (2 * k2)] * 2, 1
        r = math.sqrt(disc)
        return [(-k1 - r) / (2 * k2), (-k1 + r) / (2 * k2)], 1
    # depressed cubic t^3 + p t + q with m = t - k2/(3 k3)
    b, c, d = k2 / k3, k1 / k3, k0 / k3
    p = c - b * b / 3.0
    q = 2.0 * b**3 / 27.0 - b * c / 3.0 + d
    shift = -b / 3.0
    pscale = max(abs(p), abs(q) ** (2.0 / 3.0), tol)
    disc = -4.0 * p**3 - 27.0 * q * q
    if abs(p) <= rel * pscale and abs(q) ** (2.0 / 3.0) <= rel * pscale:
        return [shift] * 3, 0
    if disc > rel * pscale**3:
        # three distinct real roots (trigonometric form)
        rr = math.sqrt(-p / 3.0)
        arg = max(-1.0, min(1.0, 3.0 * q / (2.0 * p) / rr))
        phi = math.acos(arg) / 3.0
        return [2 * rr * math.cos(phi - 2 * math.pi * k / 3.0) + shift for k in range(3)], 0
    if disc < -rel * pscale**3:
        # one real root (Cardano)
        h = math.sqrt(q * q / 4.0 + p**3 / 27.0)
        u = math.copysign(abs(-q / 2.0 + h) ** (1.0 / 3.0), -q / 2.0 + h)
        v = math.copysign(abs(-q / 2.0 - h) ** (1.0 / 3.0), -q / 2.0 - h)
        return [u + v + shift], 0
    # borderline double root
    if abs(q) <= rel * pscale ** 1.5:
        return [shift] * 3, 0
    double = -3.0 * q / (2.0 * p)
    single = 3.0 * q / p
    return [double, double, single], 0


def solve_cubic_directions(coeffs, merge_angle=DEFAULT_TOL.root_merge_angle):
    """Direction angles of a binary cubic; returns (angles, merged_flag)."""
    k3, k2, k1, k0 = (float(c) for c in coeffs)
    finite, n_inf = _real_roots_cubic(k0, k1, k2, k3)
    # note: polynomial in m = dy/dx is k3 + k2 m + k1 m^2 + k0 m^3
    angles = [math.atan(m) % math.pi for m in finite]
    angles += [math.pi / 2.0] * min(n_inf, 1)
    merged = n_inf > 1
    angles.sort()
    out = []
    for a in angles:
        dup = any(
            min(abs(a - b), math.pi - abs(a - b)) < merge_angle for b in out
        )
        if dup:
            merged = True
        else:
            out.append(a)
    return out, merged


def cubic_value_at_direction(coeffs, angle):
    c, s = math.cos(angle), math.sin(angle)
    k3, k2, k1, k0 = coeffs
    return k3 * c**3 + k2 * c * c * s + k1 * c * s * s + k0 * s**3


def bcde_directions(c: CubicFormValue, zero_tol: float | None = None,
                    merge_angle=DEFAULT_TOL.root_merge_angle) -> DirectionSet:
    """Real root directions of the binary cubic differential equation.

    Raises SingularCubicError when all components vanish within tolerance;
    that is the signature of a quadratic point.
    """
    comp = c.components
    tol = zero_tol if zero_tol is not None else DEFAULT_TOL.cubic_zero * c.zero_scale()
    if float(np.max(np.abs(comp))) < tol:
        raise SingularCubicError("cubic form vanishes here (quadratic point)")
    angles, merged = solve_cubic_directions(c.coefficients, merge_angle)
    if merged:
        kind = "Degenerate"
    elif len(angles) == 3:
        kind = "Elliptic3"
    elif len(angles) == 1:
        kind = "Hyperbolic1"
    else:
        kind = "Degenerate"
    return DirectionSet(kind, tuple(angles))


def darboux_directions(j: Jet2) -> DirectionSet:
    """Null directions of the third-order contact term at a normalized 2-jet.

    The 2-jet must be (x^2+y^2)/2 or xy; these coincide with the cubic form's
    null directions at the point, so the computation routes through
    :func:`cubic_components`.
    """
    fxx, fxy, fyy = j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)
    scale = 1.0 + max(abs(fxx), abs(fxy), abs(fyy))
    tol = 1e-9 * scale
    elliptic = abs(fxx - 1) < tol and abs(fyy - 1) < tol and abs(fxy) < tol
    hyperbolic = abs(fxx) < tol and abs(fyy) < tol and abs(fxy - 1) < tol
    if not (elliptic or hyperbolic):
        raise NormalizationRequiredError(
            "2-jet must be (x^2+y^2)/2 or xy; normalize the chart first"
        )
    return bcde_directions(cubic_components(j))
