"""Local models at quadratic points: coefficient extraction and classification.

At an elliptic quadratic point with normalized 2-jet (x^2+y^2)/2 and vanishing
3-jet, the quartic jet coefficients

    f = (x^2+y^2)/2 + (1/24)(a40 x^4 + 4 a31 x^3 y + 6 a22 x^2 y^2 + 4 a13 x y^3 + a04 y^4) + ...

determine the linear part of the cubic form through
a = a40-3a22, b = a31-3a13, c = a13-3a31, d = a04-3a22.  At hyperbolic points
(2-jet xy) the quartic coefficients (a, b, e, c, d) enter directly and the
linear part is (ax+by)dx^3 + (cx+dy)dy^3.  The singularity is *simple* iff
delta = ad - bc != 0.

Classification is by the signs of delta and of Delta = S^3 - 27 T^2, which is
the discriminant of the characteristic quartic P (Delta > 0: zero or four real
projective roots, Delta < 0: two).  Elliptic models normalize to the (a, h)
parameter plane (a+d=0, b-c=1): the astroid Delta=0 separates the two-root
regime (D1, outside) from the four-root one, and the inscribed circle
delta=0 of radius 1/2 separates D2 (index +1/3) from D3 (index -1/3).
Hyperbolic models normalize to bc = 16, bc = -16 or bc = 0 and follow the
corresponding region tables.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .config import DEFAULT_TOL
from .errors import (
    BoundaryCaseError,
    NonSimpleError,
    NormalizationRequiredError,
    NotQuadraticPointError,
    QuadraptError,
    UsageError,
)
from .jets import Jet2, compose_linear, regraph_shear

__all__ = [
    "EllipticModel",
    "HyperbolicModel",
    "CharPoly",
    "elliptic_model",
    "elliptic_model_from_ah",
    "hyperbolic_model",
    "extract_elliptic",
    "extract_hyperbolic",
    "normalize_quadratic_chart",
    "classify",
    "char_polys",
    "quartic_real_roots",
    "model_to_json",
    "model_from_json",
]


@dataclass(frozen=True)
class EllipticModel:
    a: float
    b: float
    c: float
    d: float
    S: float
    T: float
    Delta: float
    delta: float
    a_norm: float | None
    h_norm: float | None
    portrait: str              # 'D1' | 'D2' | 'D3' | 'NonSimple' | 'Boundary'
    root_count_pred: int | None
    index_pred: Fraction | None
    region = "elliptic"

    @property
    def abcd(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def simple(self) -> bool:
        return self.portrait not in ("NonSimple",)


@dataclass(frozen=True)
class HyperbolicModel:
    a: float
    b: float
    c: float
    d: float
    e: float
    S: float
    T: float
    Delta: float
    delta: float
    case_label: str            # 'BC16' | 'BCm16' | 'BC0'
    normalized: tuple | None   # (a', b', c', d') after projective scaling
    region_label: str          # proposition region, or 'NonSimple'/'Boundary'
    root_count_pred: int | None
    index_pred: int | None
    region = "hyperbolic"

    @property
    def abcd(self):
        return (self.a, self.b, self.c, self.d)

    @property
    def simple(self) -> bool:
        return self.region_label not in ("NonSimple",)


def _delta_tol(m, tol):
    return tol.boundary_rel * (1.0 + m) ** 2


def _Delta_tol(m, tol):
    # Delta is degree six in the coefficients
    return tol.boundary_rel * (1.0 + m) ** 6


def elliptic_model(a, b, c, d, tol=DEFAULT_TOL) -> EllipticModel:
    a, b, c, d = float(a), float(b), float(c), float(d)
    m = max(abs(a), abs(b), abs(c), abs(d))
    S = 0.25 * (10.0 * (a * d - b * c) + 3.0 * (a * a + b * b + c * c + d * d))
    T = 0.125 * ((a + d) * (a - d) ** 2 - 2 * b * c * (a + d)
                 + a * c * c + d * b * b - 3 * d * c * c - 3 * a * b * b)
    Delta = S**3 - 27.0 * T * T
    delta = a * d - b * c

    # normalized (a, h): rotate so a+d = 0, then scale b-c to 1
    alpha = complex(0.5 * (a + d), 0.5 * (c - b))
    beta = complex(0.5 * (a - d), 0.5 * (b + c))
    if abs(alpha) > 1e-12 * (1.0 + m):
        e4 = -1j * alpha.conjugate() / abs(alpha)
        e2 = cmath.sqrt(e4)
        bn = beta * e2 / (2.0 * abs(alpha))
        a_norm, h_norm = bn.real, bn.imag
    else:
        a_norm = h_norm = None

    if abs(delta) < _delta_tol(m, tol):
        portrait, roots, index = "NonSimple", None, None
    elif Delta < -_Delta_tol(m, tol):
        portrait, roots, index = "D1", 2, Fraction(1, 3)
    elif Delta > _Delta_tol(m, tol):
        if delta > 0:
            portrait, roots, index = "D3", 4, Fraction(-1, 3)
        else:
            portrait, roots, index = "D2", 4, Fraction(1, 3)
    else:
        portrait, roots, index = "Boundary", None, None
    return EllipticModel(a, b, c, d, S, T, Delta, delta, a_norm, h_norm,
                         portrait, roots, index)


def elliptic_model_from_ah(a, h, tol=DEFAULT_TOL) -> EllipticModel:
    """Model of the normalized family: (a, h+1/2, h-1/2, -a)."""
    return elliptic_model(a, h + 0.5, h - 0.5, -a, tol)


def _normalize_hyperbolic(a, b, c, d, tol):
    """Projective scaling to bc = 16, -16 or 0; returns (case, (a',b',c',d'))."""
    m = max(abs(a), abs(b), abs(c), abs(d), 1e-300)
    small = 1e-9 * (1.0 + m)
    if abs(b) > small and abs(c) > small:
        if b > 0 and c < 0:
            a, b, c, d = d, c, b, a  # swap x <-> y so that b < 0 < c
        s = math.sqrt(4.0 / abs(b))
        t = math.sqrt(4.0 / abs(c))
        an = a * s**3 / t
        bn = b * s * s
        cn = c * t * t
        dn = d * t**3 / s
        case = "BC16" if b * c > 0 else "BCm16"
        return case, (an, bn, cn, dn)
    if abs(c) <= small and abs(b) > small:
        a, b, c, d = d, c, b, a
    if abs(c) > small:
        if c < 0:
            a, b, c, d = -a, -b, -c, -d  # negate the form; same line field
        t = math.sqrt(4.0 / c)
        return "BC0", (a / t, 0.0, 4.0, d * t**3)
    return "BC0", (a, 0.0, 0.0, d)


def _hyperbolic_ST(a, b, c, d):
    S = a * d - b * c / 4.0
    T = -(a * c * c + d * b * b) / 16.0
    return S, T


def hyperbolic_model(a, b, c, d, e=0.0, tol=DEFAULT_TOL) -> HyperbolicModel:
    a, b, c, d, e = (float(v) for v in (a, b, c, d, e))
    m = max(abs(a), abs(b), abs(c), abs(d))
    S, T = _hyperbolic_ST(a, b, c, d)
    Delta = S**3 - 27.0 * T * T
    delta = a * d - b * c

    case, norm = _normalize_hyperbolic(a, b, c, d, tol)
    an, bn, cn, dn = norm
    Sn, Tn = _hyperbolic_ST(*norm)
    Dn = Sn**3 - 27.0 * Tn * Tn
    dln = an * dn - bn * cn
    mn = max(abs(v) for v in norm) + 1.0
    Dtol, dtol = _Delta_tol(mn - 1.0, tol), _delta_tol(mn - 1.0, tol)

    if abs(delta) < _delta_tol(m, tol):
        label, roots, index = "NonSimple", None, None
    elif case == "BC16":
        if Dn > Dtol:
            label, roots, index = "no-roots", 0, 1
        elif Dn < -Dtol:
            if dln > dtol:
                label, roots, index = "two-nodes", 2, 1
            elif dln < -dtol:
                label, roots, index = "two-saddles", 2, -1
            else:
                label, roots, index = "Boundary", None, None
        else:
            label, roots, index = "Boundary", None, None
    elif case == "BCm16":
        if Dn > Dtol:
            ad = an * dn
            if ad < 2.0 - 1e-9:
                label, roots, index = "I", 4, 1
            elif ad > 2.0 + 1e-9:
                label, roots, index = "II", 0, 1
            else:
                label, roots, index = "Boundary", None, None
        elif Dn < -Dtol:
            if dln > dtol:
                label, roots, index = "III-nodes", 2, 1
            elif dln < -dtol:
                label, roots, index = "III-saddles", 2, -1
            else:
                label, roots, index = "Boundary", None, None
        else:
            label, roots, index = "Boundary", None, None
    else:  # BC0
        if dln < -dtol:
            label, roots, index = "Q24-saddles", 2, -1
        elif dln > dtol:
            if Dn > Dtol:
                label, roots, index = "Q13-outer", 0, 1
            elif Dn < -Dtol:
                label, roots, index = "Q13-inner", 2, 1
            else:
                label, roots, index = "Boundary", None, None
        else:
            label, roots, index = "NonSimple", None, None

    return HyperbolicModel(a, b, c, d, e, S, T, Delta, delta, case, norm,
                           label, roots, index)


def classify(model):
    """Portrait (elliptic) or proposition-region (hyperbolic) label.

    Raises NonSimpleError when delta vanishes and BoundaryCaseError on the
    Delta = 0 strata; no classification is attempted there.
    """
    label = model.portrait if model.region == "elliptic" else model.region_label
    if label == "NonSimple":
        raise NonSimpleError("delta = ad - bc vanishes; singularity not simple")
    if label == "Boundary":
        raise BoundaryCaseError("discriminant within tolerance of zero")
    return label


# ---------------------------------------------------------------------------
# Characteristic polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CharPoly:
    """Homogeneous quartics P, Q with circle evaluators.

    Coefficient layout: [x^4, x^3 y, x^2 y^2, x y^3, y^4].  On the unit circle
    P + iQ = (A1 + iB1) e^{3it}, so the roots of P(t) locate the blow-up
    singularities and the winding of (Q, P) computes indices.
    """

    region: str
    abcd: tuple
    P: np.ndarray
    Q: np.ndarray
    boundary: bool  # discriminant of P within tolerance of zero

    def _eval(self, coeffs, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        out = np.zeros_like(c)
        for k in range(5):
            out = out + coeffs[k] * c ** (4 - k) * s**k
        return out

    def P_theta(self, t):
        return self._eval(self.P, t)

    def Q_theta(self, t):
        return self._eval(self.Q, t)

    def dP_theta(self, t):
        t = np.asarray(t, dtype=float)
        c, s = np.cos(t), np.sin(t)
        px = np.zeros_like(c)
        py = np.zeros_like(c)
        for k in range(5):
            if 4 - k:
                px = px + self.P[k] * (4 - k) * c ** (3 - k) * s**k
            if k:
                py = py + self.P[k] * k * c ** (4 - k) * s ** (k - 1)
        return -s * px + c * py


def char_polys(model) -> CharPoly:
    a, b, c, d = model.abcd
    if model.region == "elliptic":
        P = np.array([a, b - 3 * c, -3 * (a + d), c - 3 * b, d])
        Q = np.array([c, 3 * a + d, 3 * (b - c), -(a + 3 * d), -b])
    else:
        P = np.array([a, b, 0.0, c, d])
        Q = np.array([0.0, a, b - c, -d, 0.0])
    m = max(abs(v) for v in (a, b, c, d))
    boundary = abs(model.Delta) <= _Delta_tol(m, DEFAULT_TOL)
    return CharPoly(model.region, model.abcd, P, Q, boundary)


def _quartic_invariants(c):
    c0, c1, c2, c3, c4 = (float(v) for v in c)
    I = 12 * c0 * c4 - 3 * c1 * c3 + c2 * c2
    J = 72 * c0 * c2 * c4 - 27 * c0 * c3 * c3 - 27 * c1 * c1 * c4 + 9 * c1 * c2 * c3 - 2 * c2**3
    return I, J, (4 * I**3 - J * J) / 27.0


def quartic_real_roots(coeffs, tol=DEFAULT_TOL):
    """Projective real roots of a homogeneous quartic, as (angle, multiplicity).

    Roots come from a companion-matrix solve and must agree with the
    discriminant classification (Delta < 0: exactly two simple real roots;
    Delta > 0: zero or four).  Near Delta = 0 the boundary flag is returned
    instead of enforcing agreement.
    """
    c = np.asarray(coeffs, dtype=float)
    m = float(np.max(np.abs(c)))
    if m == 0.0:
        raise UsageError("quartic is identically zero")
    _, _, disc = _quartic_invariants(c)
    btol = 256.0 * _Delta_tol(m, tol)
    boundary = abs(disc) <= btol

    # roots of p(s) = sum c[k] s^k; vanished leading coefficients are roots at
    # infinity, i.e. the projective direction x = 0 (angle pi/2)
    poly = [c[4], c[3], c[2], c[1], c[0]]
    lead_tol = 1e-12 * m
    n_inf = 0
    while len(poly) > 1 and abs(poly[0]) <= lead_tol:
        poly.pop(0)
        n_inf += 1
    roots = np.roots(poly) if len(poly) > 1 else np.array([])
    real = []
    for r in roots:
        if abs(r.imag) <= 1e-7 * (1.0 + abs(r.real)):
            real.append(r.real)
    real.sort()
    groups: list[list[float]] = []
    for r in real:
        if groups and abs(r - groups[-1][-1]) <= 1e-7 * (1.0 + abs(r)):
            groups[-1].append(r)
        else:
            groups.append([r])
    out = [(math.atan(float(np.mean(g))) % math.pi, len(g)) for g in groups]
    if n_inf:
        out.append((math.pi / 2.0, n_inf))
    out.sort()

    if not boundary:
        simple = [r for r in out if r[1] == 1]
        count = sum(mult for _, mult in out)
        ok = (disc < 0 and count == 2 and len(simple) == 2) or (
            disc > 0 and count in (0, 4) and len(simple) == count
        )
        if not ok:
            raise QuadraptError(
                "companion roots disagree with discriminant classification"
            )
    return out, boundary


# ---------------------------------------------------------------------------
# Extraction from jets
# ---------------------------------------------------------------------------


def _check_2jet(j, kind):
    fxx, fxy, fyy = j.partial(2, 0), j.partial(1, 1), j.partial(0, 2)
    scale = 1.0 + max(abs(fxx), abs(fxy), abs(fyy))
    tol = 1e-8 * scale
    if kind == "elliptic":
        ok = abs(fxx - 1) < tol and abs(fyy - 1) < tol and abs(fxy) < tol
    else:
        ok = abs(fxx) < tol and abs(fyy) < tol and abs(fxy - 1) < tol
    if not ok:
        raise NormalizationRequiredError(f"2-jet is not the {kind} normal form")


def _check_3jet(j, cubic_tol=1e-7):
    thirds = [j.partial(3, 0), j.partial(2, 1), j.partial(1, 2), j.partial(0, 3)]
    scale = 1.0 + max(abs(j.partial(i, 4 - i)) for i in range(5))
    if max(abs(t) for t in thirds) > cubic_tol * scale:
        raise NotQuadraticPointError("3-jet does not vanish: not a quadratic point")


def extract_elliptic(j: Jet2, tol=DEFAULT_TOL) -> EllipticModel:
    """Elliptic model from a normalized quadratic-point jet of order >= 4."""
    if j.order < 4:
        raise UsageError("extraction needs a jet of order >= 4")
    _check_2jet(j, "elliptic")
    _check_3jet(j)
    a40, a31, a22 = j.partial(4, 0), j.partial(3, 1), j.partial(2, 2)
    a13, a04 = j.partial(1, 3), j.partial(0, 4)
    return elliptic_model(a40 - 3 * a22, a31 - 3 * a13, a13 - 3 * a31, a04 - 3 * a22, tol)


def extract_hyperbolic(j: Jet2, tol=DEFAULT_TOL) -> HyperbolicModel:
    """Hyperbolic model from a normalized quadratic-point jet of order >= 4."""
    if j.order < 4:
        raise UsageError("extraction needs a jet of order >= 4")
    _check_2jet(j, "hyperbolic")
    _check_3jet(j)
    a, b, e = j.partial(4, 0), j.partial(3, 1), j.partial(2, 2)
    c, d = j.partial(1, 3), j.partial(0, 4)
    return hyperbolic_model(a, b, c, d, e, tol)


def normalize_quadratic_chart(j: Jet2, cubic_tol=1e-6):
    """Normalize a jet at a candidate quadratic point to the model form.

    Subtracts the tangent plane, maps the 2-jet to (x^2+y^2)/2 or xy by a
    linear change, and removes the residual trace cubic by an ambient shear
    (the part a third-order osculating quadric absorbs).  A non-trace cubic
    residual means the point is not quadratic.

    Returns (normalized jet, region, linear map).
    """
    coeff = j.coeff.copy()
    coeff[0] = 0.0
    coeff[1] = 0.0
    coeff[2] = 0.0
    f = Jet2(j.order, j.base, coeff)
    fxx, fxy, fyy = f.partial(2, 0), f.partial(1, 1), f.partial(0, 2)
    hess = fxx * fyy - fxy * fxy
    if hess == 0.0:
        raise UsageError("parabolic 2-jet cannot be normalized")
    H = np.array([[fxx, fxy], [fxy, fyy]])
    region = "elliptic" if hess > 0 else "hyperbolic"
    if region == "elliptic" and fxx < 0:
        f = -f  # reflect z; numerators flip sign, directions and index do not
        H = -H
    w, R = np.linalg.eigh(H)
    if region == "elliptic":
        L = R @ np.diag(1.0 / np.sqrt(w))
    else:
        idx = np.argsort(w)  # negative first
        w = w[idx]
        R = R[:, idx]
        L0 = R @ np.diag([1.0 / math.sqrt(-w[0]), 1.0 / math.sqrt(w[1])])
        rot45 = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
        # order columns so the positive direction comes first in (u^2-v^2)/2
        L = L0[:, ::-1] @ rot45
    g = compose_linear(f, L)
    _check_2jet(g, region)

    c30, c21, c12, c03 = g.c(3, 0), g.c(2, 1), g.c(1, 2), g.c(0, 3)
    scale = 1.0 + max(abs(g.c(i, 4 - i)) for i in range(5))
    if region == "elliptic":
        A = (c30 - c12) / 4.0
        B = (c03 - c21) / 4.0
        if max(abs(A), abs(B)) > cubic_tol * scale:
            raise NotQuadraticPointError("cubic form does not vanish here")
        p = (3 * c30 + c12) / 4.0
        q = (c21 + 3 * c03) / 4.0
        g = regraph_shear(g, -2 * p, -2 * q)
    else:
        if max(abs(c30), abs(c03)) > cubic_tol * scale:
            raise NotQuadraticPointError("cubic form does not vanish here")
        g = regraph_shear(g, -c21, -c12)
    _check_3jet(g, 10 * cubic_tol)
    return g, region, L


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def model_to_json(m) -> dict:
    out = {"region": m.region, "abcd": list(m.abcd)}
    if m.region == "hyperbolic":
        out["e"] = m.e
    return out


def model_from_json(d: dict):
    region = d.get("region")
    abcd = d.get("abcd")
    if region not in ("elliptic", "hyperbolic") or not abcd or len(abcd) != 4:
        raise UsageError("model JSON needs region and abcd[4]")
    if region == "elliptic":
        return elliptic_model(*abcd)
    return hyperbolic_model(*abcd, e=float(d.get("e", 0.0)))
