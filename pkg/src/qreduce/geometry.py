"""Catalog curves and surfaces, their jets, curvatures and layer metrics.

Sign conventions
----------------
Plane curves carry the signed curvature ``k = (x'y'' - y'x'') / |r'|^3``
(counterclockwise circles are positive).  The layer coordinate ``q`` is the
distance along the left normal, i.e. towards the centre of curvature when
``k > 0``, so the layer metric is ``g = (1 - q k)^2``.

Surfaces use ``n = r_u x r_v / |r_u x r_v|``.  Principal curvatures are the
eigenvalues of the Weingarten map ``dn`` so that a sphere with outward
normal has ``k1 = k2 = +1/R``.  The layer point at offset ``q`` is
``r - q n`` and the normalized layer factor is ``(1 - q k1)(1 - q k2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Union

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .errors import (
    DegenerateMetricError,
    DegenerateParametrizationError,
    DomainError,
    LayerBreakdownError,
    SingularPointError,
    UsageError,
)

TWO_PI = 2.0 * math.pi

CURVE_KINDS = ("line", "circle", "ellipse", "parabola")
SURFACE_KINDS = ("plane", "sphere", "cylinder", "torus")


# ---------------------------------------------------------------------------
# Curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CurveSpec:
    """A plane curve from the built-in catalog.

    Use the constructors :meth:`line`, :meth:`circle`, :meth:`ellipse` and
    :meth:`parabola` rather than filling the fields by hand.
    """

    kind: str
    R: float | None = None
    a: float | None = None
    b: float | None = None
    c: float | None = None
    t0: float = 0.0
    t1: float = TWO_PI
    closed: bool = True

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise UsageError(f"unknown curve kind {self.kind!r}")
        if self.kind == "circle" and not (self.R is not None and self.R > 0):
            raise UsageError("circle needs R > 0")
        if self.kind == "ellipse" and not (
            self.a is not None and self.b is not None and self.a > 0 and self.b > 0
        ):
            raise UsageError("ellipse needs a > 0 and b > 0")
        if self.kind == "parabola" and self.c is None:
            raise UsageError("parabola needs c")
        if not self.t1 > self.t0:
            raise UsageError("empty parameter domain")

    @classmethod
    def line(cls, t0: float = 0.0, t1: float = 1.0) -> CurveSpec:
        return cls("line", t0=t0, t1=t1, closed=False)

    @classmethod
    def circle(cls, R: float = 1.0) -> CurveSpec:
        return cls("circle", R=R)

    @classmethod
    def ellipse(cls, a: float, b: float) -> CurveSpec:
        return cls("ellipse", a=a, b=b)

    @classmethod
    def parabola(cls, c: float = 0.5, t0: float = -1.0, t1: float = 1.0) -> CurveSpec:
        return cls("parabola", c=c, t0=t0, t1=t1, closed=False)

    @property
    def period(self) -> float:
        return self.t1 - self.t0

    def describe(self) -> str:
        if self.kind == "circle":
            return f"circle(R={self.R:g})"
        if self.kind == "ellipse":
            return f"ellipse(a={self.a:g}, b={self.b:g})"
        if self.kind == "parabola":
            return f"parabola(c={self.c:g})"
        return "line"


@dataclass(frozen=True)
class CurveJet:
    position: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray


def _check_param(t: float, lo: float, hi: float, closed: bool) -> float:
    if closed:
        return lo + math.fmod(t - lo, hi - lo) if not lo <= t <= hi else t
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if not (lo - slack <= t <= hi + slack):
        raise DomainError(f"parameter {t!r} outside [{lo}, {hi}]")
    return t


def curve_jet(curve: CurveSpec, t: float) -> CurveJet:
    """Position and first three parameter derivatives, in closed form."""
    t = _check_param(float(t), curve.t0, curve.t1, curve.closed)
    kind = curve.kind
    if kind == "line":
        z = np.zeros(2)
        return CurveJet(np.array([t, 0.0]), np.array([1.0, 0.0]), z, z.copy())
    if kind == "circle":
        a = b = curve.R
    elif kind == "ellipse":
        a, b = curve.a, curve.b
    else:
        c = curve.c
        return CurveJet(
            np.array([t, c * t * t]),
            np.array([1.0, 2.0 * c * t]),
            np.array([0.0, 2.0 * c]),
            np.zeros(2),
        )
    ct, st = math.cos(t), math.sin(t)
    return CurveJet(
        np.array([a * ct, b * st]),
        np.array([-a * st, b * ct]),
        np.array([-a * ct, -b * st]),
        np.array([a * st, -b * ct]),
    )


def plane_curvature(jet: CurveJet) -> float:
    """Signed curvature, counterclockwise positive."""
    speed = math.hypot(jet.d1[0], jet.d1[1])
    if speed == 0.0:
        raise SingularPointError("curve tangent vanishes")
    cross = jet.d1[0] * jet.d2[1] - jet.d1[1] * jet.d2[0]
    return cross / speed**3


def curve_speed(curve: CurveSpec, t: np.ndarray | float) -> np.ndarray:
    """|r'(t)|, vectorized over t (no domain check)."""
    t = np.asarray(t, dtype=float)
    kind = curve.kind
    if kind == "line":
        return np.ones_like(t)
    if kind == "circle":
        return np.full_like(t, curve.R)
    if kind == "ellipse":
        return np.hypot(curve.a * np.sin(t), curve.b * np.cos(t))
    return np.hypot(1.0, 2.0 * curve.c * t)


def curve_curvature(curve: CurveSpec, t: np.ndarray | float) -> np.ndarray:
    """Signed curvature at parameter values t, vectorized."""
    t = np.asarray(t, dtype=float)
    kind = curve.kind
    if kind == "line":
        return np.zeros_like(t)
    if kind == "circle":
        return np.full_like(t, 1.0 / curve.R)
    if kind == "ellipse":
        a, b = curve.a, curve.b
        return a * b / (a * a * np.sin(t) ** 2 + b * b * np.cos(t) ** 2) ** 1.5
    c = curve.c
    return 2.0 * c / (1.0 + 4.0 * c * c * t * t) ** 1.5


# Gauss-Legendre rules used for panel integration of the speed.
_GL8 = np.polynomial.legendre.leggauss(8)
_GL16 = np.polynomial.legendre.leggauss(16)


def _panel_integral(curve, lo, hi, rule):
    x, w = rule
    lo = np.asarray(lo, dtype=float)[..., None]
    hi = np.asarray(hi, dtype=float)[..., None]
    half = 0.5 * (hi - lo)
    nodes = lo + half * (x + 1.0)
    return np.sum(half * w * curve_speed(curve, nodes), axis=-1)


@dataclass(frozen=True)
class ArcLengthMap:
    """Monotone map between curve parameter t and arc length s."""

    curve: CurveSpec
    knots: np.ndarray = field(repr=False)
    s_knots: np.ndarray = field(repr=False)
    length: float
    _inverse: CubicHermiteSpline = field(repr=False, compare=False)

    def s_of_t(self, t):
        t = np.asarray(t, dtype=float)
        i = np.clip(np.searchsorted(self.knots, t, side="right") - 1, 0, len(self.knots) - 2)
        return self.s_knots[i] + _panel_integral(self.curve, self.knots[i], t, _GL16)

    def t_of_s(self, s):
        s = np.asarray(s, dtype=float)
        if self.curve.closed:
            s_red = np.mod(s, self.length)
            shift = s - s_red
        else:
            s_red, shift = s, 0.0
        t = self._inverse(s_red)
        # Newton polish on the exact forward map
        for _ in range(3):
            t = t - (self.s_of_t(t) - s_red) / curve_speed(self.curve, t)
        if self.curve.closed:
            t = t + shift / self.length * self.curve.period
        return t


def arc_length_reparam(curve: CurveSpec, tol: float = 1e-9) -> ArcLengthMap:
    """Arc-length map for ``curve`` with relative accuracy ``tol``.

    Panels are bisected until an 8-point and a 16-point Gauss-Legendre rule
    agree; the inverse starts from a cubic Hermite interpolant (monotone,
    since dt/ds > 0 at every knot) and is polished by Newton steps.
    """
    knots = np.linspace(curve.t0, curve.t1, 33)
    speed = curve_speed(curve, knots)
    if np.any(speed <= 0.0):
        raise SingularPointError("curve has a stationary point")
    for _ in range(40):
        lo, hi = knots[:-1], knots[1:]
        coarse = _panel_integral(curve, lo, hi, _GL8)
        fine = _panel_integral(curve, lo, hi, _GL16)
        total = float(fine.sum())
        bad = np.abs(fine - coarse) > tol * total / len(lo)
        if not bad.any():
            break
        mids = 0.5 * (lo[bad] + hi[bad])
        knots = np.sort(np.concatenate([knots, mids]))
    # dense knots so that the Hermite start value is already close
    while len(knots) < 257:
        knots = np.sort(np.concatenate([knots, 0.5 * (knots[:-1] + knots[1:])]))
    seg = _panel_integral(curve, knots[:-1], knots[1:], _GL16)
    s_knots = np.concatenate([[0.0], np.cumsum(seg)])
    speed = curve_speed(curve, knots)
    if np.any(speed <= 0.0):
        raise SingularPointError("curve has a stationary point")
    inverse = CubicHermiteSpline(s_knots, knots, 1.0 / speed)
    return ArcLengthMap(curve, knots, s_knots, float(s_knots[-1]), inverse)


@lru_cache(maxsize=64)
def _cached_arc_map(curve: CurveSpec) -> ArcLengthMap:
    return arc_length_reparam(curve)


def curvature_at_arclength(curve: CurveSpec, s):
    """Signed curvature as a function of arc length s measured from t0."""
    if curve.kind in ("line", "circle"):
        return curve_curvature(curve, np.asarray(s, dtype=float))
    return curve_curvature(curve, _cached_arc_map(curve).t_of_s(s))


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceSpec:
    """A surface in 3-space from the built-in catalog.

    Parametrizations: plane ``(u, v, 0)``; sphere ``R(sin u cos v, sin u sin v,
    cos u)`` with u the polar angle; cylinder ``(R cos u, R sin u, v)``; torus
    ``((R + r cos v) cos u, (R + r cos v) sin u, r sin v)``.
    """

    kind: str
    R: float | None = None
    r: float | None = None
    u0: float = 0.0
    u1: float = 1.0
    v0: float = 0.0
    v1: float = 1.0

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise UsageError(f"unknown surface kind {self.kind!r}")
        if self.kind in ("sphere", "cylinder", "torus") and not (
            self.R is not None and self.R > 0
        ):
            raise UsageError(f"{self.kind} needs R > 0")
        if self.kind == "torus" and not (self.r is not None and self.R > self.r > 0):
            raise UsageError("torus needs R > r > 0")

    @classmethod
    def plane(cls) -> SurfaceSpec:
        return cls("plane", u0=-1.0, u1=1.0, v0=-1.0, v1=1.0)

    @classmethod
    def sphere(cls, R: float = 1.0) -> SurfaceSpec:
        return cls("sphere", R=R, u0=0.0, u1=math.pi, v0=0.0, v1=TWO_PI)

    @classmethod
    def cylinder(cls, R: float = 1.0) -> SurfaceSpec:
        return cls("cylinder", R=R, u0=0.0, u1=TWO_PI, v0=-1.0, v1=1.0)

    @classmethod
    def torus(cls, R: float = 3.0, r: float = 1.0) -> SurfaceSpec:
        return cls("torus", R=R, r=r, u0=0.0, u1=TWO_PI, v0=0.0, v1=TWO_PI)

    def describe(self) -> str:
        if self.kind == "torus":
            return f"torus(R={self.R:g}, r={self.r:g})"
        if self.kind == "plane":
            return "plane"
        return f"{self.kind}(R={self.R:g})"


@dataclass(frozen=True)
class SurfaceJet:
    position: np.ndarray
    r_u: np.ndarray
    r_v: np.ndarray
    r_uu: np.ndarray
    r_uv: np.ndarray
    r_vv: np.ndarray


@dataclass(frozen=True)
class Forms:
    E: float
    F: float
    G1: float
    L: float
    M: float
    N: float
    normal: np.ndarray


@dataclass(frozen=True)
class Curvatures:
    H: float
    K: float
    k1: float
    k2: float


def surface_jet(surface: SurfaceSpec, u: float, v: float) -> SurfaceJet:
    """Position and partials up to second order, in closed form."""
    if surface.kind == "sphere" and not (-1e-12 <= u <= math.pi + 1e-12):
        raise DomainError(f"polar angle {u!r} outside [0, pi]")
    kind = surface.kind
    z = np.zeros(3)
    if kind == "plane":
        ex, ey = np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
        return SurfaceJet(np.array([u, v, 0.0]), ex, ey, z, z.copy(), z.copy())
    R = surface.R
    cu, su, cv, sv = math.cos(u), math.sin(u), math.cos(v), math.sin(v)
    if kind == "sphere":
        return SurfaceJet(
            R * np.array([su * cv, su * sv, cu]),
            R * np.array([cu * cv, cu * sv, -su]),
            R * np.array([-su * sv, su * cv, 0.0]),
            R * np.array([-su * cv, -su * sv, -cu]),
            R * np.array([-cu * sv, cu * cv, 0.0]),
            R * np.array([-su * cv, -su * sv, 0.0]),
        )
    if kind == "cylinder":
        return SurfaceJet(
            np.array([R * cu, R * su, v]),
            np.array([-R * su, R * cu, 0.0]),
            np.array([0.0, 0.0, 1.0]),
            np.array([-R * cu, -R * su, 0.0]),
            z,
            z.copy(),
        )
    r = surface.r
    rho = R + r * cv
    return SurfaceJet(
        np.array([rho * cu, rho * su, r * sv]),
        np.array([-rho * su, rho * cu, 0.0]),
        np.array([-r * sv * cu, -r * sv * su, r * cv]),
        np.array([-rho * cu, -rho * su, 0.0]),
        np.array([r * sv * su, -r * sv * cu, 0.0]),
        np.array([-r * cv * cu, -r * cv * su, -r * sv]),
    )


def fundamental_forms(jet: SurfaceJet) -> Forms:
    cross = np.cross(jet.r_u, jet.r_v)
    norm = float(np.linalg.norm(cross))
    scale = float(np.linalg.norm(jet.r_u) * np.linalg.norm(jet.r_v))
    if norm <= 1e-14 * max(scale, 1e-300):
        raise DegenerateParametrizationError("r_u x r_v vanishes")
    n = cross / norm
    return Forms(
        E=float(jet.r_u @ jet.r_u),
        F=float(jet.r_u @ jet.r_v),
        G1=float(jet.r_v @ jet.r_v),
        L=float(n @ jet.r_uu),
        M=float(n @ jet.r_uv),
        N=float(n @ jet.r_vv),
        normal=n,
    )


def curvatures(forms: Forms) -> Curvatures:
    """Mean, Gauss and principal curvatures (k1 >= k2).

    Signs follow the Weingarten map dn, which is minus the usual
    ``I^-1 II`` shape operator: an outward-oriented sphere is positive.
    """
    E, F, G1, L, M, N = forms.E, forms.F, forms.G1, forms.L, forms.M, forms.N
    det = E * G1 - F * F
    if not (E > 0 and G1 > 0 and det > 0):
        raise DegenerateMetricError("first fundamental form is not positive definite")
    K = (L * N - M * M) / det
    H = -(E * N + G1 * L - 2.0 * F * M) / (2.0 * det)
    # Weingarten matrix -I^{-1} II; its half-difference form avoids the
    # cancellation in sqrt(H^2 - K) at umbilic points
    w11 = -(G1 * L - F * M) / det
    w12 = -(G1 * M - F * N) / det
    w21 = -(E * M - F * L) / det
    w22 = -(E * N - F * M) / det
    half = 0.5 * (w11 - w22)
    disc = math.sqrt(max(half * half + w12 * w21, 0.0))
    k1, k2 = H + disc, H - disc
    if abs(k1) >= abs(k2) and k1 != 0.0:
        k2 = K / k1
    elif k2 != 0.0:
        k1 = K / k2
    if k2 > k1:
        k1, k2 = k2, k1
    return Curvatures(H=H, K=K, k1=k1, k2=k2)


def surface_curvatures(surface: SurfaceSpec, u: float, v: float) -> Curvatures:
    return curvatures(fundamental_forms(surface_jet(surface, u, v)))


# ---------------------------------------------------------------------------
# Layer (tubular) metrics
# ---------------------------------------------------------------------------

GeometrySpec = Union[CurveSpec, SurfaceSpec]


def layer_metric_curve(curve: CurveSpec, s: float, q2: float) -> float:
    """Layer metric g = (1 - q2 k(s))^2 at arc length s and normal offset q2."""
    k = float(curvature_at_arclength(curve, s))
    factor = 1.0 - q2 * k
    if abs(q2 * k) >= 1.0 or factor <= 0.0:
        raise LayerBreakdownError(f"|q k| = {abs(q2 * k):.3g} >= 1")
    return factor * factor


def layer_metric_surface(surface: SurfaceSpec, u: float, v: float, q3: float) -> float:
    """Normalized volume factor (1 - q3 k1)(1 - q3 k2) = 1 - 2 q3 H + K q3^2."""
    c = surface_curvatures(surface, u, v)
    if abs(q3) * max(abs(c.k1), abs(c.k2)) >= 1.0:
        raise LayerBreakdownError("normal offset beyond the focal distance")
    factor = (1.0 - q3 * c.k1) * (1.0 - q3 * c.k2)
    if factor <= 0.0:
        raise LayerBreakdownError("layer factor is not positive")
    return factor


def _curve_embedding(curve: CurveSpec, t: float, q: float) -> np.ndarray:
    jet = curve_jet(curve, t)
    speed = math.hypot(*jet.d1)
    left = np.array([-jet.d1[1], jet.d1[0]]) / speed
    return jet.position + q * left


def _surface_embedding(surface: SurfaceSpec, u: float, v: float, q: float) -> np.ndarray:
    jet = surface_jet(surface, u, v)
    n = np.cross(jet.r_u, jet.r_v)
    return jet.position - q * n / np.linalg.norm(n)


def _richardson_partial(fn, x: np.ndarray, i: int, h: float) -> np.ndarray:
    def central(step):
        e = np.zeros_like(x)
        e[i] = step
        return (fn(*(x + e)) - fn(*(x - e))) / (2.0 * step)

    return (4.0 * central(0.5 * h) - central(h)) / 3.0


def layer_metric_numeric(
    spec: GeometrySpec, point, q_n: float, h: float | None = None
) -> float:
    """Metric determinant of the layer coordinates from a numeric Jacobian.

    The embedding ``(tangential, q_n) -> ambient`` is differentiated by
    central differences with one Richardson step and ``det(J^T J)`` is
    returned.  For curves the tangential coordinate is arc length ``s``
    (so the result compares directly with :func:`layer_metric_curve`); for
    surfaces it is ``(u, v)`` and the result equals
    ``(E G1 - F^2) * layer_factor^2``.
    """
    if isinstance(spec, CurveSpec):
        s = float(point)
        if spec.kind == "circle":
            t = spec.t0 + s / spec.R
        else:
            t = float(_cached_arc_map(spec).t_of_s(s))
        k = abs(float(curve_curvature(spec, t)))
        if abs(q_n) * k >= 1.0:
            raise LayerBreakdownError("normal offset beyond the centre of curvature")
        radius = 1.0 / k if k > 0 else 1.0
        step = h if h is not None else 1e-4 * radius
        speed = float(curve_speed(spec, t))
        x = np.array([t, float(q_n)])
        fn = lambda tt, qq: _curve_embedding(spec, tt, qq)  # noqa: E731
        J = np.column_stack(
            [_richardson_partial(fn, x, 0, step / speed), _richardson_partial(fn, x, 1, step)]
        )
        det = float(np.linalg.det(J.T @ J)) / speed**2
    elif isinstance(spec, SurfaceSpec):
        u, v = map(float, point)
        c = surface_curvatures(spec, u, v)
        kmax = max(abs(c.k1), abs(c.k2))
        if abs(q_n) * kmax >= 1.0:
            raise LayerBreakdownError("normal offset beyond the focal distance")
        radius = 1.0 / kmax if kmax > 0 else 1.0
        step = h if h is not None else 1e-4 * radius
        jet = surface_jet(spec, u, v)
        x = np.array([u, v, float(q_n)])
        fn = lambda uu, vv, qq: _surface_embedding(spec, uu, vv, qq)  # noqa: E731
        J = np.column_stack(
            [
                _richardson_partial(fn, x, 0, step / np.linalg.norm(jet.r_u)),
                _richardson_partial(fn, x, 1, step / np.linalg.norm(jet.r_v)),
                _richardson_partial(fn, x, 2, step),
            ]
        )
        det = float(np.linalg.det(J.T @ J))
    else:
        raise UsageError(f"unsupported geometry {spec!r}")
    if not det > 0.0:
        raise LayerBreakdownError("numeric layer Jacobian is singular")
    return det
