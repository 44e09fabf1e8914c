"""Quantum potentials induced by confinement to curves and surfaces.

The reduced Hamiltonian on the constraint surface picks up

    V_q = -(hbar^2 / 2) G^{-1/4} d_n (G^{1/2} H_n^{-2} d_n G^{-1/4})

evaluated at the constraint value of the normal coordinate, where ``G`` is
the metric determinant of the adapted coordinates and ``H_n`` the metric
coefficient (lapse) of the normal coordinate.  With ``s = G^{1/4}`` this is
``(hbar^2 / 2) s^{-1} d_n(H_n^{-2} d_n s)``, which is what the numeric
operator differentiates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateLatitudeError, LayerBreakdownError, UsageError
from .geometry import (
    CurveSpec,
    Curvatures,
    SurfaceSpec,
    curvature_at_arclength,
    layer_metric_numeric,
    layer_metric_surface,
    surface_curvatures,
    surface_jet,
    fundamental_forms,
)

CLOSED_CURVE = "closed-form curve"
CLOSED_SURFACE = "closed-form surface"
PROFILE = "normal-profile numeric"
LATITUDE = "latitude formula"

# Relative differencing step for catalog profiles.  Sample roundoff enters
# V_q as eps/h^2, which at 1e-3 is already 1e-10 for an exact sphere.
CATALOG_STEP = 1e-2


@dataclass(frozen=True)
class PhysicsParams:
    """Physical constants; the mass is fixed at 1."""

    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise UsageError("hbar must be positive")


DEFAULT_PARAMS = PhysicsParams()


def _unit_lapse(q: float) -> float:
    return 1.0


@dataclass(frozen=True)
class NormalProfile:
    """Metric determinant along the normal coordinate at a fixed surface point.

    ``metric(q)`` returns G at normal coordinate q (any constant tangential
    factor is irrelevant), ``lapse(q)`` the normal metric coefficient, ``q0``
    the constraint value and ``radius`` the size of the neighbourhood in
    which G stays positive.  ``step`` overrides the default differencing
    step ``1e-3 * radius``; profiles sampled from a numeric metric carry
    roundoff that the second difference amplifies by 1/h^2 and need more.
    """

    metric: Callable[[float], float]
    lapse: Callable[[float], float] = _unit_lapse
    q0: float = 0.0
    radius: float = 1.0
    step: float | None = None


@dataclass(frozen=True)
class QuantumPotentialValue:
    value: float
    provenance: str
    plane_value: float | None = None

    def __float__(self):
        return float(self.value)


def vq_curve(k: float, params: PhysicsParams = DEFAULT_PARAMS) -> QuantumPotentialValue:
    return QuantumPotentialValue(-params.hbar**2 * k * k / 8.0, CLOSED_CURVE)


def vq_surface(c: Curvatures, params: PhysicsParams = DEFAULT_PARAMS) -> QuantumPotentialValue:
    # -(H^2 - K)/2 written as -(k1 - k2)^2 / 8 so umbilic points give exactly 0
    diff = c.k1 - c.k2
    return QuantumPotentialValue(-params.hbar**2 * diff * diff / 8.0, CLOSED_SURFACE)


def _profile_value(profile: NormalProfile, h: float) -> float:
    q0 = profile.q0
    qs = (q0 - h, q0, q0 + h)
    G = [profile.metric(q) for q in qs]
    if min(G) <= 0.0 or not all(map(math.isfinite, G)):
        raise LayerBreakdownError("profile metric is not positive inside the stencil")
    s_m, s_0, s_p = (g**0.25 for g in G)
    lapse_m = profile.lapse(q0 - 0.5 * h)
    lapse_p = profile.lapse(q0 + 0.5 * h)
    if lapse_m <= 0.0 or lapse_p <= 0.0:
        raise LayerBreakdownError("lapse is not positive inside the stencil")
    flux_p = (s_p - s_0) / (h * lapse_p**2)
    flux_m = (s_0 - s_m) / (h * lapse_m**2)
    return (flux_p - flux_m) / (h * s_0)


def vq_normal_profile(
    profile: NormalProfile, params: PhysicsParams = DEFAULT_PARAMS, h: float | None = None
) -> QuantumPotentialValue:
    """Quantum potential from a sampled normal profile.

    Second-order flux differences with step ``h`` (default
    ``profile.step`` or ``1e-3 * profile.radius``) and one Richardson
    refinement.
    """
    step = h if h is not None else profile.step or 1e-3 * profile.radius
    if not step > 0:
        raise UsageError("profile step must be positive")
    coarse = _profile_value(profile, step)
    fine = _profile_value(profile, 0.5 * step)
    return QuantumPotentialValue(
        0.5 * params.hbar**2 * (4.0 * fine - coarse) / 3.0, PROFILE
    )


def _check_latitude(theta: float) -> None:
    if not 0.0 < theta < math.pi:
        raise DegenerateLatitudeError(f"latitude angle {theta!r} must lie strictly in (0, pi)")


def vq_latitude_on_sphere(
    Rsphere: float, theta: float, params: PhysicsParams = DEFAULT_PARAMS
) -> QuantumPotentialValue:
    """V_q for the circle theta = const on a sphere, with the flat-plane
    value for a circle of the same radius R sin(theta) alongside."""
    if not Rsphere > 0:
        raise UsageError("sphere radius must be positive")
    _check_latitude(theta)
    hb2 = params.hbar**2
    sin2 = math.sin(theta) ** 2
    value = -hb2 / (8.0 * Rsphere**2) * (1.0 + 1.0 / sin2)
    plane = -hb2 / (8.0 * Rsphere**2 * sin2)
    return QuantumPotentialValue(value, LATITUDE, plane_value=plane)


# ---------------------------------------------------------------------------
# Profiles for the catalog
# ---------------------------------------------------------------------------


def curve_profile(curve: CurveSpec, s: float, numeric: bool = True, h_jac: float | None = None):
    """Normal profile of a plane curve at arc length ``s``."""
    k = abs(float(curvature_at_arclength(curve, s)))
    radius = 1.0 / k if k > 0 else 1.0
    if numeric:
        metric = lambda q: layer_metric_numeric(curve, s, q, h_jac)  # noqa: E731
    else:
        kk = float(curvature_at_arclength(curve, s))
        metric = lambda q: (1.0 - q * kk) ** 2  # noqa: E731
    return NormalProfile(metric=metric, radius=radius, step=CATALOG_STEP * radius)


def surface_profile(
    surface: SurfaceSpec, u: float, v: float, numeric: bool = False, h_jac: float | None = None
):
    """Normal profile of a catalog surface at ``(u, v)``.

    The closed form uses ``G^{1/2} = h1 h2 (1 - q k1)(1 - q k2)``; the
    numeric variant differentiates the embedding instead.
    """
    c = surface_curvatures(surface, u, v)
    kmax = max(abs(c.k1), abs(c.k2))
    radius = 1.0 / kmax if kmax > 0 else 1.0
    if numeric:
        metric = lambda q: layer_metric_numeric(surface, (u, v), q, h_jac)  # noqa: E731
    else:
        f = fundamental_forms(surface_jet(surface, u, v))
        area2 = f.E * f.G1 - f.F * f.F
        metric = lambda q: area2 * layer_metric_surface(surface, u, v, q) ** 2  # noqa: E731
    return NormalProfile(metric=metric, radius=radius, step=CATALOG_STEP * radius)


def latitude_profile(Rsphere: float, theta0: float) -> NormalProfile:
    """Polar angle as the normal coordinate: G = R^4 sin^2(theta), lapse R."""
    _check_latitude(theta0)
    return NormalProfile(
        metric=lambda th: Rsphere**4 * math.sin(th) ** 2,
        lapse=lambda th: Rsphere,
        q0=theta0,
        radius=min(theta0, math.pi - theta0),
    )


def constant_profile(value: float = 1.0) -> NormalProfile:
    return NormalProfile(metric=lambda q: value)


# ---------------------------------------------------------------------------
# Physical-state factorization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FactorizationCheck:
    residual: float
    psi_norm: float

    @property
    def relative(self) -> float:
        return self.residual / self.psi_norm if self.psi_norm else self.residual


def _diff_matrix(q: np.ndarray) -> np.ndarray:
    """Second-order first-derivative matrix on a uniform grid."""
    n = len(q)
    h = q[1] - q[0]
    D = np.zeros((n, n))
    idx = np.arange(1, n - 1)
    D[idx, idx - 1] = -0.5 / h
    D[idx, idx + 1] = 0.5 / h
    D[0, :3] = np.array([-1.5, 2.0, -0.5]) / h
    D[-1, -3:] = np.array([0.5, -2.0, 1.5]) / h
    return D


def normal_momentum_matrix(profile: NormalProfile, grid, params: PhysicsParams = DEFAULT_PARAMS):
    """Discrete (hbar/i) (d_n + G'/(4G)) on ``grid``, returned without the 1/i."""
    q = np.asarray(grid, dtype=float)
    if q.ndim != 1 or len(q) < 3 or not np.allclose(np.diff(q), q[1] - q[0]):
        raise UsageError("factorization grid must be uniform with at least 3 points")
    G = np.array([profile.metric(x) for x in q])
    if np.any(G <= 0):
        raise LayerBreakdownError("profile metric is not positive on the grid")
    D = _diff_matrix(q)
    log_slope = (D @ G) / G
    return params.hbar * (D + np.diag(0.25 * log_slope)), G


def factorization_residual(
    profile: NormalProfile, grid, params: PhysicsParams = DEFAULT_PARAMS
) -> FactorizationCheck:
    """Apply the discretized normal momentum to Psi = G^{-1/4}.

    The operator is expanded as ``d_n + G'/(4G)`` and both pieces are
    differenced independently, so the residual measures the discretization
    error of the identity rather than a trivial cancellation.
    """
    P, G = normal_momentum_matrix(profile, grid, params)
    psi = G**-0.25
    q = np.asarray(grid, dtype=float)
    w = math.sqrt(q[1] - q[0])
    return FactorizationCheck(
        residual=float(np.linalg.norm(P @ psi) * w), psi_norm=float(np.linalg.norm(psi) * w)
    )


def hypersphere_thin_layer_constant(n: int, R: float, params: PhysicsParams = DEFAULT_PARAMS):
    """Thin-layer constant for S^(n-1) in R^n: G^{1/4} = (1 - q/R)^((n-1)/2)
    gives hbar^2 (n-1)(n-3) / (8 R^2)."""
    return params.hbar**2 * (n - 1) * (n - 3) / (8.0 * R * R)
