"""Truncated bivariate Taylor arithmetic and surface charts.

A ``Jet2`` holds the scaled Taylor coefficients c[i,j] = (d^{i+j} f / dx^i dy^j) / (i! j!)
of a graph function at a base point, densely over all i+j <= order.  Products of
jets are exact truncations: the jet of f*g equals jet(f)*jet(g) truncated at the
common order, which is what makes degree-by-degree solution of implicit
equations (Monge charts, shears) a fixed-point iteration that gains one order
per pass.

Charts come in two flavours: polynomial graphs z = f(x,y), re-expanded exactly
at any base point, and Monge charts of polynomial implicit surfaces F(x,y,z)=0,
solved over a fixed orthonormal tangent frame.  A private batched layer
(coefficient arrays of shape (npoints, ncoeff)) backs the grid scans in
``globalsearch`` without changing the scalar API.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .config import DEFAULT_TOL
from .errors import (
    ChartDomainError,
    DegenerateChartError,
    OffSurfaceError,
    QuadraptError,
    UsageError,
)

__all__ = [
    "Jet2",
    "ncoeff",
    "coeff_index",
    "jet_constant",
    "jet_variable",
    "jet_from_coeffs",
    "polyval_jets",
    "compose_linear",
    "jet_rotate",
    "regraph_shear",
    "Rect",
    "Disc",
    "SurfaceChart",
    "graph_chart",
    "jet_eval",
    "ImplicitSurface",
    "MongeChart",
    "monge_chart",
]


def ncoeff(order: int) -> int:
    return (order + 1) * (order + 2) // 2


def coeff_index(i: int, j: int) -> int:
    """Flat index of the x^i y^j coefficient (degree-major, then y-power)."""
    d = i + j
    return d * (d + 1) // 2 + j


def _degrees(order):
    """(i, j) exponent arrays aligned with the flat layout."""
    ii, jj = [], []
    for d in range(order + 1):
        for j in range(d + 1):
            ii.append(d - j)
            jj.append(j)
    return np.array(ii), np.array(jj)


_MUL_TABLES: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _mul_table(order: int):
    """Index triples (ia, ib, iout) for truncated coefficient convolution."""
    tab = _MUL_TABLES.get(order)
    if tab is None:
        ii, jj = _degrees(order)
        n = ncoeff(order)
        ia, ib, io = [], [], []
        for p in range(n):
            dp = ii[p] + jj[p]
            for q in range(n):
                dq = ii[q] + jj[q]
                if dp + dq > order:
                    continue
                ia.append(p)
                ib.append(q)
                io.append(coeff_index(ii[p] + ii[q], jj[p] + jj[q]))
        tab = (np.array(ia), np.array(ib), np.array(io))
        _MUL_TABLES[order] = tab
    return tab


@dataclass(frozen=True)
class Jet2:
    """Order-``order`` Taylor jet of a graph function at ``base``.

    ``coeff`` uses the scaled convention c[i,j] = partial^{i+j} f / (i! j!), so
    jet multiplication is plain truncated polynomial multiplication.  Raw
    partial derivatives come out of :meth:`partial`.
    """

    order: int
    base: tuple[float, float]
    coeff: np.ndarray

    def __post_init__(self):
        if self.coeff.shape != (ncoeff(self.order),):
            raise UsageError(
                f"jet of order {self.order} needs {ncoeff(self.order)} coefficients"
            )

    # -- accessors ---------------------------------------------------------

    def c(self, i: int, j: int) -> float:
        return float(self.coeff[coeff_index(i, j)])

    def partial(self, i: int, j: int) -> float:
        """Raw partial derivative d^{i+j} f / dx^i dy^j at the base point."""
        return self.c(i, j) * math.factorial(i) * math.factorial(j)

    @property
    def value(self) -> float:
        return float(self.coeff[0])

    def __call__(self, dx: float, dy: float) -> float:
        ii, jj = _degrees(self.order)
        return float(np.sum(self.coeff * dx**ii * dy**jj))

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: "Jet2") -> None:
        if other.order != self.order:
            raise UsageError("jet orders differ; truncate explicitly first")

    def __add__(self, other):
        if isinstance(other, Jet2):
            self._check(other)
            return Jet2(self.order, self.base, self.coeff + other.coeff)
        out = self.coeff.copy()
        out[0] += other
        return Jet2(self.order, self.base, out)

    __radd__ = __add__

    def __neg__(self):
        return Jet2(self.order, self.base, -self.coeff)

    def __sub__(self, other):
        return self + (-other if isinstance(other, Jet2) else -other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Jet2):
            self._check(other)
            ia, ib, io = _mul_table(self.order)
            out = np.zeros_like(self.coeff)
            np.add.at(out, io, self.coeff[ia] * other.coeff[ib])
            return Jet2(self.order, self.base, out)
        return Jet2(self.order, self.base, self.coeff * float(other))

    __rmul__ = __mul__

    def __pow__(self, e: int):
        if not isinstance(e, int) or e < 0:
            raise UsageError("jet powers must be non-negative integers")
        out = jet_constant(1.0, self.order, self.base)
        for _ in range(e):
            out = out * self
        return out

    # -- calculus -----------------------------------------------------------

    def dx(self) -> "Jet2":
        return self._derive(0)

    def dy(self) -> "Jet2":
        return self._derive(1)

    def _derive(self, axis: int) -> "Jet2":
        if self.order == 0:
            raise UsageError("cannot differentiate an order-0 jet")
        m = self.order - 1
        out = np.zeros(ncoeff(m))
        ii, jj = _degrees(self.order)
        for p in range(len(self.coeff)):
            i, j = int(ii[p]), int(jj[p])
            if axis == 0 and i > 0:
                out[coeff_index(i - 1, j)] = self.coeff[p] * i
            elif axis == 1 and j > 0:
                out[coeff_index(i, j - 1)] = self.coeff[p] * j
        return Jet2(m, self.base, out)

    def truncate(self, order: int) -> "Jet2":
        if order > self.order:
            raise UsageError("cannot raise jet order by truncation")
        return Jet2(order, self.base, self.coeff[: ncoeff(order)].copy())

    def homogeneous_part(self, d: int) -> np.ndarray:
        """Coefficients of total degree d, ordered by y-power."""
        start = d * (d + 1) // 2
        return self.coeff[start : start + d + 1].copy()


def jet_constant(value: float, order: int, base=(0.0, 0.0)) -> Jet2:
    c = np.zeros(ncoeff(order))
    c[0] = value
    return Jet2(order, tuple(base), c)


def jet_variable(which: int, order: int, base=(0.0, 0.0), offset: float = 0.0) -> Jet2:
    """The coordinate function u (which=0) or v (which=1), plus a constant."""
    c = np.zeros(ncoeff(order))
    c[0] = offset
    c[coeff_index(1 - which, which)] = 1.0
    return Jet2(order, tuple(base), c)


def jet_from_coeffs(pairs, order: int, base=(0.0, 0.0)) -> Jet2:
    """Build a jet from ((i, j), value) pairs of scaled coefficients."""
    c = np.zeros(ncoeff(order))
    for (i, j), v in pairs:
        if i + j <= order:
            c[coeff_index(i, j)] = v
    return Jet2(order, tuple(base), c)


def polyval_jets(terms, args: list[Jet2], order: int) -> Jet2:
    """Evaluate a sparse polynomial at jet arguments.

    ``terms``: iterable of (exponent tuple, coefficient); one exponent per arg.
    """
    powers = [{0: jet_constant(1.0, order)} for _ in args]

    def power(k, e):
        cache = powers[k]
        if e not in cache:
            cache[e] = power(k, e - 1) * args[k]
        return cache[e]

    acc = jet_constant(0.0, order)
    for exps, cf in terms:
        term = jet_constant(float(cf), order)
        for k, e in enumerate(exps):
            if e:
                term = term * power(k, e)
        acc = acc + term
    return acc


def _jet_terms(f: Jet2):
    ii, jj = _degrees(f.order)
    return [((int(i), int(j)), float(c)) for i, j, c in zip(ii, jj, f.coeff) if c != 0.0]


def compose_linear(f: Jet2, mat) -> Jet2:
    """Jet of f(M (u,v)) around the same base image."""
    m = np.asarray(mat, dtype=float)
    u = jet_variable(0, f.order)
    v = jet_variable(1, f.order)
    x = m[0, 0] * u + m[0, 1] * v
    y = m[1, 0] * u + m[1, 1] * v
    return polyval_jets(_jet_terms(f), [x, y], f.order)


def jet_rotate(f: Jet2, alpha: float) -> Jet2:
    """Jet of the chart rotated by alpha: f composed with R_alpha."""
    c, s = math.cos(alpha), math.sin(alpha)
    return compose_linear(f, [[c, -s], [s, c]])


def regraph_shear(f: Jet2, p: float, q: float) -> Jet2:
    """Graph jet after the ambient shear (x, y, z) -> (x + p z, y + q z, z).

    Solves W = f(X + p W, Y + q W) by fixed-point iteration; each pass gains
    one order because f has no constant or linear part at a normalized base.
    """
    if abs(f.value) > 1e-12 or abs(f.c(1, 0)) > 1e-9 or abs(f.c(0, 1)) > 1e-9:
        raise UsageError("regraph_shear expects a jet with vanishing 1-jet")
    order = f.order
    terms = _jet_terms(f)
    x = jet_variable(0, order)
    y = jet_variable(1, order)
    w = jet_constant(0.0, order)
    for _ in range(order + 1):
        w = polyval_jets(terms, [x + p * w, y + q * w], order)
    return w


# ---------------------------------------------------------------------------
# Chart domains and charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rect:
    xmin: float
    xmax: float
    ymin: float
    ymax: float

    def contains(self, p) -> bool:
        return self.xmin <= p[0] <= self.xmax and self.ymin <= p[1] <= self.ymax

    def grid(self, density: int) -> np.ndarray:
        xs = np.linspace(self.xmin, self.xmax, density)
        ys = np.linspace(self.ymin, self.ymax, density)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        return np.column_stack([gx.ravel(), gy.ravel()])


@dataclass(frozen=True)
class Disc:
    center: tuple[float, float]
    radius: float

    def contains(self, p) -> bool:
        return math.hypot(p[0] - self.center[0], p[1] - self.center[1]) <= self.radius

    def grid(self, density: int) -> np.ndarray:
        r = self.radius
        xs = np.linspace(-r, r, density)
        gx, gy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        pts = pts[np.hypot(pts[:, 0], pts[:, 1]) <= r]
        return pts + np.asarray(self.center)


@dataclass(frozen=True)
class SurfaceChart:
    """Graph chart of a surface patch: a deterministic jet evaluator over a domain."""

    evaluator: Callable[[tuple, int], Jet2]
    domain: Rect | Disc
    name: str = ""
    params: dict = field(default_factory=dict)
    eval_batch: Callable | None = None  # optional (pts, order) -> (coeffs, mask)


def jet_eval(chart: SurfaceChart, p, order: int) -> Jet2:
    """Taylor coefficients of the chart function at p, up to ``order``."""
    if order < 4:
        raise UsageError("jet_eval contract requires order >= 4")
    if not chart.domain.contains(p):
        raise ChartDomainError(f"{tuple(p)} outside domain of chart {chart.name!r}")
    jet = chart.evaluator(tuple(p), order)
    if jet.order != order:
        raise QuadraptError("chart evaluator returned wrong order")
    return jet


def graph_chart(coeffs, domain=None, name="graph", params=None) -> SurfaceChart:
    """Chart for a polynomial graph z = f(x,y); jets are exact re-expansions.

    ``coeffs``: {(i, j): c} or iterable of [i, j, c] rows.
    """
    if isinstance(coeffs, dict):
        items = [((int(i), int(j)), float(c)) for (i, j), c in coeffs.items()]
    else:
        items = [((int(i), int(j)), float(c)) for i, j, c in coeffs]
    dom = domain if domain is not None else Rect(-10.0, 10.0, -10.0, 10.0)

    def evaluator(p, order):
        x = jet_variable(0, order, base=p, offset=p[0])
        y = jet_variable(1, order, base=p, offset=p[1])
        jet = polyval_jets(items, [x, y], order)
        return Jet2(order, tuple(p), jet.coeff)

    def eval_batch(pts, order):
        pts = np.asarray(pts, dtype=float)
        npts = len(pts)
        x = _b_affine(pts[:, 0], order, which=0)
        y = _b_affine(pts[:, 1], order, which=1)
        out = _b_polyval(items, [x, y], order)
        return out, np.ones(npts, dtype=bool)

    return SurfaceChart(evaluator, dom, name=name, params=dict(params or {}),
                        eval_batch=eval_batch)


# ---------------------------------------------------------------------------
# Implicit surfaces and Monge charts
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ImplicitSurface:
    """Polynomial level set F(x, y, z) = 0 with a nondegeneracy threshold."""

    terms: tuple  # ((i, j, k, c), ...)
    grad_threshold: float = 1e-6
    name: str = ""
    params: dict = field(default_factory=dict)

    @staticmethod
    def from_terms(rows, grad_threshold=1e-6, name="", params=None):
        terms = tuple((int(i), int(j), int(k), float(c)) for i, j, k, c in rows)
        return ImplicitSurface(terms, grad_threshold, name, dict(params or {}))

    def value(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        out = np.zeros_like(x)
        for i, j, k, c in self.terms:
            out = out + c * x**i * y**j * z**k
        return out

    def gradient(self, pts):
        pts = np.asarray(pts, dtype=float)
        x, y, z = pts[..., 0], pts[..., 1], pts[..., 2]
        gx = np.zeros_like(x)
        gy = np.zeros_like(x)
        gz = np.zeros_like(x)
        for i, j, k, c in self.terms:
            if i:
                gx += c * i * x ** (i - 1) * y**j * z**k
            if j:
                gy += c * j * x**i * y ** (j - 1) * z**k
            if k:
                gz += c * k * x**i * y**j * z ** (k - 1)
        return np.stack([gx, gy, gz], axis=-1)


@dataclass(frozen=True)
class MongeChart:
    """Orthonormal tangent frame plus the graph chart over it."""

    chart: SurfaceChart
    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    normal: np.ndarray
    jet: Jet2  # jet at the chart origin

    def to_space(self, uv, w):
        uv = np.asarray(uv, dtype=float)
        w = np.asarray(w, dtype=float)
        return (self.origin + uv[..., :1] * self.e1 + uv[..., 1:2] * self.e2
                + w[..., None] * self.normal)


def _default_frame(n):
    for axis in np.eye(3):
        if abs(float(axis @ n)) < 0.9:
            e1 = axis - (axis @ n) * n
            e1 /= np.linalg.norm(e1)
            return e1, np.cross(n, e1)
    raise QuadraptError("no frame axis found")  # pragma: no cover


def _newton_w(surf, base3, n, w0=0.0, tol=1e-13, maxit=60):
    """Solve F(base3 + w n) = 0 for scalar w, Newton from w0."""
    w = w0
    for _ in range(maxit):
        p = base3 + w * n
        fv = float(surf.value(p))
        gw = float(surf.gradient(p) @ n)
        if abs(gw) < surf.grad_threshold:
            return None
        step = fv / gw
        w -= step
        if abs(step) <= tol * (1.0 + abs(w)):
            return w
    return None


def monge_chart(surf: ImplicitSurface, q, order: int, frame=None,
                domain_radius: float | None = None, tol=DEFAULT_TOL) -> MongeChart:
    """Monge chart of an implicit surface at q: tangent frame plus graph jet.

    The graph w(u, v) over the tangent plane is solved degree by degree; the
    returned jet satisfies w(0,0) = w_u = w_v = 0.
    """
    q = np.asarray(q, dtype=float)
    resid = float(surf.value(q))
    if abs(resid) > tol.monge_residual * (1.0 + float(q @ q)):
        raise OffSurfaceError(f"|F(q)| = {abs(resid):.3e} too large at {q.tolist()}")
    g = surf.gradient(q)
    gn = float(np.linalg.norm(g))
    if gn < surf.grad_threshold:
        raise DegenerateChartError(f"gradient norm {gn:.3e} below threshold at {q.tolist()}")
    n = g / gn
    # polish the base point along the normal
    w = _newton_w(surf, q, n)
    if w is None:
        raise DegenerateChartError("normal Newton failed at base point")
    origin = q + w * n
    if frame is None:
        e1, e2 = _default_frame(n)
    else:
        e1 = np.asarray(frame[0], dtype=float)
        e2 = np.asarray(frame[1], dtype=float)
        ortho = max(abs(float(e1 @ n)), abs(float(e2 @ n)), abs(float(e1 @ e2)),
                    abs(float(e1 @ e1) - 1.0), abs(float(e2 @ e2) - 1.0))
        if ortho > 1e-9:
            raise UsageError("frame is not an orthonormal tangent pair")

    rad = domain_radius if domain_radius is not None else 0.9 * (1.0 + float(np.linalg.norm(origin)))
    terms3 = [((i, j, k), c) for i, j, k, c in surf.terms]

    def evaluator(p, ordr):
        base3 = origin + p[0] * e1 + p[1] * e2
        w0 = _newton_w(surf, base3, n)
        if w0 is None:
            raise ChartDomainError(f"chart of {surf.name!r} does not reach {p}")
        pt = base3 + w0 * n
        g0 = float(surf.gradient(pt) @ n)
        if abs(g0) < surf.grad_threshold:
            raise DegenerateChartError("chart normal tangent to surface")
        u = jet_variable(0, ordr)
        v = jet_variable(1, ordr)
        wj = jet_constant(w0, ordr)
        for _ in range(ordr + 2):
            xyz = [pt[k] - w0 * n[k] + u * e1[k] + v * e2[k] + wj * n[k] for k in range(3)]
            gj = polyval_jets(terms3, xyz, ordr)
            wj = wj - (1.0 / g0) * gj
        if float(np.max(np.abs(gj.coeff))) > 1e-8 * (1.0 + abs(w0)):
            raise QuadraptError("Monge jet solve did not converge")
        return Jet2(ordr, tuple(p), wj.coeff)

    def eval_batch(pts, ordr):
        return _implicit_jets_batch(surf, origin, e1, e2, n, pts, ordr)

    chart = SurfaceChart(evaluator, Disc((0.0, 0.0), rad),
                         name=f"monge[{surf.name}]@{np.round(origin, 6).tolist()}",
                         params={"origin": origin.tolist()}, eval_batch=eval_batch)
    jet = chart.evaluator((0.0, 0.0), order)
    # the solved graph must be tangent at the origin
    if max(abs(jet.value), abs(jet.c(1, 0)), abs(jet.c(0, 1))) > 1e-9 * (1 + float(origin @ origin)):
        raise QuadraptError("Monge chart is not tangent at its origin")
    zero = np.zeros(ncoeff(order))
    zero[:] = jet.coeff
    zero[0] = 0.0
    zero[1] = 0.0
    zero[2] = 0.0
    return MongeChart(chart, origin, e1, e2, n, Jet2(order, (0.0, 0.0), zero))


# ---------------------------------------------------------------------------
# Batched jets (private): coefficient arrays of shape (npoints, ncoeff)
# ---------------------------------------------------------------------------


_SCATTER: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _scatter(order):
    if order not in _SCATTER:
        ia, ib, io = _mul_table(order)
        s = np.zeros((len(io), ncoeff(order)))
        s[np.arange(len(io)), io] = 1.0
        _SCATTER[order] = (ia, ib, s)
    return _SCATTER[order]


def _b_const(vals, order):
    vals = np.asarray(vals, dtype=float)
    out = np.zeros((len(vals), ncoeff(order)))
    out[:, 0] = vals
    return out


def _b_affine(vals, order, which):
    out = _b_const(vals, order)
    out[:, coeff_index(1 - which, which)] = 1.0
    return out


def _b_mul(a, b, order):
    ia, ib, s = _scatter(order)
    return (a[:, ia] * b[:, ib]) @ s


def _b_polyval(terms, args, order):
    npts = args[0].shape[0]
    caches = [{} for _ in args]

    def power(k, e):
        if e == 0:
            return None
        cache = caches[k]
        if e not in cache:
            cache[e] = args[k] if e == 1 else _b_mul(power(k, e - 1), args[k], order)
        return cache[e]

    acc = np.zeros((npts, ncoeff(order)))
    for exps, cf in terms:
        cur = None
        for k, e in enumerate(exps):
            pk = power(k, e)
            if pk is None:
                continue
            cur = pk if cur is None else _b_mul(cur, pk, order)
        if cur is None:
            acc[:, 0] += cf
        else:
            acc += cf * cur
    return acc


def _implicit_jets_batch(surf: ImplicitSurface, origin, e1, e2, n, pts, order):
    """Order-``order`` chart jets at many (u, v) points; returns (coeffs, valid)."""
    pts = np.asarray(pts, dtype=float)
    npts = len(pts)
    base3 = origin[None, :] + pts[:, :1] * e1[None, :] + pts[:, 1:2] * e2[None, :]
    w = np.zeros(npts)
    valid = np.ones(npts, dtype=bool)
    for _ in range(60):
        p3 = base3 + w[:, None] * n[None, :]
        fv = surf.value(p3)
        gw = surf.gradient(p3) @ n
        ok = np.abs(gw) > surf.grad_threshold
        valid &= ok
        step = np.where(ok, fv / np.where(ok, gw, 1.0), 0.0)
        w = w - step
        if not valid.any() or np.all(np.abs(step[valid]) <= 1e-13 * (1 + np.abs(w[valid]))):
            break
    p3 = base3 + w[:, None] * n[None, :]
    valid &= np.abs(surf.value(p3)) < 1e-9 * (1 + np.sum(p3 * p3, axis=1))
    g0 = surf.gradient(p3) @ n
    valid &= np.abs(g0) > surf.grad_threshold
    g0 = np.where(valid, g0, 1.0)

    terms3 = [((i, j, k), c) for i, j, k, c in surf.terms]
    wj = _b_const(w, order)
    tang = p3 - w[:, None] * n[None, :]
    for _ in range(order + 2):
        # coordinates tang + u e1 + v e2 + w(u,v) n as batched jets
        xyz = []
        for k in range(3):
            col = _b_const(tang[:, k], order)
            col[:, coeff_index(1, 0)] += e1[k]
            col[:, coeff_index(0, 1)] += e2[k]
            col = col + n[k] * wj
            xyz.append(col)
        gj = _b_polyval(terms3, xyz, order)
        wj = wj - gj / g0[:, None]
    valid &= np.max(np.abs(gj), axis=1) < 1e-8 * (1 + np.abs(w))
    return wj, valid
