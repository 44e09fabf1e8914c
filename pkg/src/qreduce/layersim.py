"""Thin-layer simulations: full Schrodinger spectra in a shrinking layer.

Each solve works with the symmetrized amplitude ``u = g^{1/4} psi`` so the
discretized operators are symmetric in the flat measure.  In proper normal
distance ``x`` the transverse operator is ``-(hbar^2/2) u'' + W(x) u`` plus
the confinement (Dirichlet walls at ``+-eps/2`` or ``gamma x^2 / 2`` with
``gamma = hbar^2 / eps^4``).

Renormalization subtracts the ground energy of the same transverse
discretization without curvature terms.  For walls this is the closed form
``(hbar^2/h^2)(1 - cos(pi/(N+1)))``; the continuum value
``hbar^2 pi^2 / (2 eps^2)`` is reported alongside but would leave an
``O(1/N^2)`` fraction of the divergent energy in the band.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateLatitudeError, LayerBreakdownError, UnsupportedDomainError, UsageError
from .geometry import CurveSpec
from .potential import DEFAULT_PARAMS, PhysicsParams
from .spectral import build_curve_hamiltonian, curve_grid, eigensolve_symmetric

log = logging.getLogger(__name__)

DEFAULT_EPS = (0.1, 0.05, 0.025)
GRID_BUDGET = 4096
HARMONIC_WIDTH = 6.0  # half-window in units of the oscillator length


@dataclass(frozen=True)
class LayerConfig:
    eps: tuple[float, ...] = DEFAULT_EPS
    confinement: str = "dirichlet"
    n_perp: int = 128
    m_max: int = 3

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        if not eps or any(not e > 0 for e in eps):
            raise UsageError("layer thicknesses must be positive")
        if self.confinement not in ("dirichlet", "harmonic"):
            raise UsageError(f"unknown confinement {self.confinement!r}")
        if self.n_perp < 32:
            raise UsageError("transverse grid needs at least 32 points")
        if self.m_max < 0:
            raise UsageError("m_max must be non-negative")

    def gamma(self, eps: float, params: PhysicsParams = DEFAULT_PARAMS) -> float:
        return params.hbar**2 / eps**4


@dataclass(frozen=True)
class BandResult:
    """Lowest layer eigenvalue per mode and thickness, renormalized and
    extrapolated to zero thickness.

    ``raw`` and ``renormalized`` have shape ``(len(modes), len(eps))``.
    """

    geometry: str
    modes: tuple[int, ...]
    eps: tuple[float, ...]
    raw: np.ndarray = field(repr=False)
    e_perp: np.ndarray = field(repr=False)
    e_perp_continuum: np.ndarray = field(repr=False)
    limit: np.ndarray
    fit_residual: np.ndarray

    @property
    def renormalized(self) -> np.ndarray:
        return self.raw - self.e_perp[None, :]

    def band(self, mode: int) -> float:
        return float(self.limit[self.modes.index(mode)])

    def rows(self):
        """CSV rows (geometry, m, eps, E_raw, E_perp, E_renormalized,
        E_extrapolated, fit_residual)."""
        ren = self.renormalized
        for i, m in enumerate(self.modes):
            for j, e in enumerate(self.eps):
                yield (
                    self.geometry, m, e, float(self.raw[i, j]), float(self.e_perp[j]),
                    float(ren[i, j]), float(self.limit[i]), float(self.fit_residual[i]),
                )


def band_extrapolate(samples, model: str = "quadratic"):
    """Least-squares fit E(eps) = E0 + c1 eps + c2 eps^2.

    Returns ``(E0, rms_residual, (c1, c2))``.
    """
    if model != "quadratic":
        raise UsageError(f"unknown extrapolation model {model!r}")
    pts = [(float(e), float(v)) for e, v in samples]
    if len({e for e, _ in pts}) < 3:
        raise UsageError("extrapolation needs at least 3 distinct thicknesses")
    eps = np.array([e for e, _ in pts])
    vals = np.array([v for _, v in pts])
    # scale the abscissa so the design matrix stays well conditioned
    scale = float(np.max(np.abs(eps)))
    X = np.vander(eps / scale, 3, increasing=True)
    coef, *_ = np.linalg.lstsq(X, vals, rcond=None)
    resid = vals - X @ coef
    rms = float(np.sqrt(np.mean(resid**2)))
    return float(coef[0]), rms, (float(coef[1] / scale), float(coef[2] / scale**2))


def convergence_exponent(samples, limit: float) -> float:
    """Slope of log|E(eps) - limit| against log eps (least squares)."""
    eps = np.array([e for e, _ in samples], dtype=float)
    err = np.abs(np.array([v for _, v in samples], dtype=float) - limit)
    keep = err > 0
    if keep.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(np.log(eps[keep]), np.log(err[keep]), 1)
    return float(slope)


# ---------------------------------------------------------------------------
# Transverse discretization
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Transverse:
    x: np.ndarray
    h: float
    confinement: np.ndarray
    e_perp: float
    e_perp_continuum: float


def _transverse_grid(eps: float, cfg: LayerConfig, params: PhysicsParams, max_half: float):
    """Grid in proper normal distance and the flat transverse ground energy."""
    n = cfg.n_perp
    hb2 = params.hbar**2
    if cfg.confinement == "dirichlet":
        half = 0.5 * eps
        if half >= max_half:
            raise LayerBreakdownError("layer reaches the centre of curvature")
        h = eps / (n + 1)
        x = -half + h * np.arange(1, n + 1)
        conf = np.zeros(n)
        e_perp = hb2 * (1.0 - math.cos(math.pi / (n + 1))) / (h * h)
        return _Transverse(x, h, conf, e_perp, hb2 * math.pi**2 / (2.0 * eps * eps))
    gamma = cfg.gamma(eps, params)
    half = min(HARMONIC_WIDTH * eps, 0.5 * max_half)
    h = 2.0 * half / (n + 1)
    x = -half + h * np.arange(1, n + 1)
    conf = 0.5 * gamma * x * x
    flat = _tridiagonal(h, conf, params)
    e_perp = float(eigensolve_symmetric(flat, 1).eigenvalues[0])
    return _Transverse(x, h, conf, e_perp, 0.5 * params.hbar * math.sqrt(gamma))


def _tridiagonal(h: float, diag: np.ndarray, params: PhysicsParams) -> np.ndarray:
    n = len(diag)
    k = 0.5 * params.hbar**2 / (h * h)
    A = np.diag(2.0 * k + diag)
    idx = np.arange(n - 1)
    A[idx, idx + 1] = -k
    A[idx + 1, idx] = -k
    return A


def _lowest(h: float, diag: np.ndarray, params: PhysicsParams) -> float:
    return float(eigensolve_symmetric(_tridiagonal(h, diag, params), 1).eigenvalues[0])


def _finish(geometry, modes, cfg, raw, e_perp, e_cont) -> BandResult:
    raw = np.asarray(raw)
    ren = raw - e_perp[None, :]
    limits, fits = [], []
    for row in ren:
        if len(cfg.eps) >= 3:
            lim, res, _ = band_extrapolate(list(zip(cfg.eps, row)))
        else:
            lim, res = float(row[-1]), math.nan
        limits.append(lim)
        fits.append(res)
    return BandResult(
        geometry=geometry,
        modes=tuple(modes),
        eps=cfg.eps,
        raw=raw,
        e_perp=np.asarray(e_perp),
        e_perp_continuum=np.asarray(e_cont),
        limit=np.array(limits),
        fit_residual=np.array(fits),
    )


# ---------------------------------------------------------------------------
# Circle in the plane and latitude circle on a sphere
# ---------------------------------------------------------------------------


def angular_eigenvalue(m: int, R: float, n_angular: int | None = None) -> float:
    """m^2/R^2, or its periodic second-difference counterpart on ``n_angular`` nodes."""
    if math.isinf(R):
        return 0.0
    if n_angular is None:
        return m * m / (R * R)
    h = 2.0 * math.pi * R / n_angular
    return (2.0 - 2.0 * math.cos(2.0 * math.pi * m / n_angular)) / (h * h)


def circle_band_spectrum(
    R: float,
    cfg: LayerConfig = LayerConfig(),
    params: PhysicsParams = DEFAULT_PARAMS,
    n_angular: int | None = None,
) -> BandResult:
    """Per-mode layer spectrum around a circle of radius R in the plane.

    ``R = inf`` gives a flat strip.  With ``n_angular`` the angular
    momentum uses the eigenvalue of a periodic second difference on that
    many nodes, matching the tangential discretization of the 2D solver.
    """
    if not R > 0:
        raise UsageError("radius must be positive")
    k = 0.0 if math.isinf(R) else 1.0 / R
    if max(cfg.eps) * k >= 0.5:
        raise LayerBreakdownError("eps * k must stay below 0.5")
    hb2 = params.hbar**2
    max_half = math.inf if k == 0 else 1.0 / k
    raw = np.zeros((cfg.m_max + 1, len(cfg.eps)))
    e_perp, e_cont = np.zeros(len(cfg.eps)), np.zeros(len(cfg.eps))
    for j, eps in enumerate(cfg.eps):
        tr = _transverse_grid(eps, cfg, params, max_half)
        e_perp[j], e_cont[j] = tr.e_perp, tr.e_perp_continuum
        g = (1.0 - tr.x * k) ** 2
        for m in range(cfg.m_max + 1):
            lam = angular_eigenvalue(m, R, n_angular)
            W = hb2 * (0.5 * lam / g - k * k / (8.0 * g)) + tr.confinement
            raw[m, j] = _lowest(tr.h, W, params)
    label = "line" if k == 0 else f"circle(R={R:g})"
    return _finish(label, range(cfg.m_max + 1), cfg, raw, e_perp, e_cont)


def latitude_band_spectrum(
    Rsphere: float,
    theta0: float,
    cfg: LayerConfig = LayerConfig(),
    params: PhysicsParams = DEFAULT_PARAMS,
) -> BandResult:
    """Per-azimuthal-mode layer spectrum around the circle theta = theta0 on
    a sphere; the layer is the band theta0 +- eps/(2R) of proper width eps."""
    if not Rsphere > 0:
        raise UsageError("sphere radius must be positive")
    if not 0.0 < theta0 < math.pi:
        raise DegenerateLatitudeError("latitude must lie strictly between the poles")
    edge = min(theta0, math.pi - theta0) * Rsphere
    hb2 = params.hbar**2
    raw = np.zeros((cfg.m_max + 1, len(cfg.eps)))
    e_perp, e_cont = np.zeros(len(cfg.eps)), np.zeros(len(cfg.eps))
    for j, eps in enumerate(cfg.eps):
        if 0.5 * eps >= edge:
            raise DegenerateLatitudeError("layer window touches a pole")
        tr = _transverse_grid(eps, cfg, params, edge)
        e_perp[j], e_cont[j] = tr.e_perp, tr.e_perp_continuum
        theta = theta0 + tr.x / Rsphere
        sin2 = np.sin(theta) ** 2
        cot2 = np.cos(theta) ** 2 / sin2
        for m in range(cfg.m_max + 1):
            W = hb2 / (2.0 * Rsphere**2) * (m * m / sin2 - 0.5 - 0.25 * cot2) + tr.confinement
            raw[m, j] = _lowest(tr.h, W, params)
    label = f"latitude(R={Rsphere:g}, theta={theta0:.6g})"
    return _finish(label, range(cfg.m_max + 1), cfg, raw, e_perp, e_cont)


# ---------------------------------------------------------------------------
# General closed curve: coupled 2D solve
# ---------------------------------------------------------------------------


def curve_layer_operator(
    curve: CurveSpec, eps: float, cfg: LayerConfig, params: PhysicsParams, n_tangential: int
):
    """Assemble the symmetrized 2D layer Hamiltonian around ``curve``.

    Returns the dense matrix and the transverse discretization.  Unknowns
    are ordered tangential-major: index ``i * n_perp + j``.
    """
    n1, n2 = n_tangential, cfg.n_perp
    s, length, k = curve_grid(curve, n1)
    h1 = length / n1
    _, _, k_mid = curve_grid(curve, 2 * n1)
    k_mid = k_mid[1::2]  # curvature at s_{i+1/2}
    kmax = float(np.max(np.abs(k)))
    if eps * kmax >= 0.5:
        raise LayerBreakdownError("eps * max|k| must stay below 0.5")
    tr = _transverse_grid(eps, cfg, params, math.inf if kmax == 0 else 1.0 / kmax)
    hb2 = params.hbar**2
    x = tr.x

    one_g = 1.0 - np.outer(k, x)  # sqrt(g) at nodes, shape (n1, n2)
    one_g_mid = 1.0 - np.outer(k_mid, x)
    if np.any(one_g <= 0) or np.any(one_g_mid <= 0):
        raise LayerBreakdownError("layer coordinates break down")
    w = one_g**-0.5  # g^{-1/4}
    a_mid = 1.0 / one_g_mid  # g^{-1/2} at tangential midpoints

    # transverse: -(hbar^2/2) u'' - hbar^2 k^2 / (8 g) + confinement
    diag = hb2 / (tr.h * tr.h) - hb2 * (k[:, None] ** 2) / (8.0 * one_g**2) + tr.confinement
    off2 = -0.5 * hb2 / (tr.h * tr.h)

    # tangential: -(hbar^2/2) w d1 (a d1 (w u)) in flux form
    c = 0.5 * hb2 / (h1 * h1)
    a_right = a_mid  # between i and i+1
    a_left = np.roll(a_mid, 1, axis=0)  # between i-1 and i
    diag = diag + c * w * w * (a_right + a_left)
    idx = np.arange(n1 * n2).reshape(n1, n2)
    nxt = np.roll(idx, -1, axis=0)
    off1 = -c * w * np.roll(w, -1, axis=0) * a_right

    rows = [idx.ravel(), idx[:, :-1].ravel(), idx[:, 1:].ravel(), idx.ravel(), nxt.ravel()]
    cols = [idx.ravel(), idx[:, 1:].ravel(), idx[:, :-1].ravel(), nxt.ravel(), idx.ravel()]
    vals = [
        diag.ravel(),
        np.full(n1 * (n2 - 1), off2),
        np.full(n1 * (n2 - 1), off2),
        off1.ravel(),
        off1.ravel(),
    ]
    size = n1 * n2
    H = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).toarray()
    H = 0.5 * (H + H.T)
    return H, tr


def curve_band_spectrum_2d(
    curve: CurveSpec,
    cfg: LayerConfig = LayerConfig(n_perp=32),
    params: PhysicsParams = DEFAULT_PARAMS,
    n_tangential: int | None = None,
    n_bands: int = 4,
) -> BandResult:
    """Lowest ``n_bands`` layer eigenvalues around a closed curve, from the
    coupled 2D operator in (arc length, normal distance) coordinates."""
    if not curve.closed:
        raise UnsupportedDomainError("the 2D layer solve needs a closed curve")
    n1 = n_tangential if n_tangential is not None else GRID_BUDGET // cfg.n_perp
    if n1 * cfg.n_perp > GRID_BUDGET:
        raise UsageError(
            f"grid {n1} x {cfg.n_perp} exceeds the budget of {GRID_BUDGET} unknowns"
        )
    if n1 < 8:
        raise UsageError("tangential grid needs at least 8 points")
    raw = np.zeros((n_bands, len(cfg.eps)))
    e_perp, e_cont = np.zeros(len(cfg.eps)), np.zeros(len(cfg.eps))
    for j, eps in enumerate(cfg.eps):
        H, tr = curve_layer_operator(curve, eps, cfg, params, n1)
        spec = eigensolve_symmetric(H, n_bands)
        raw[:, j] = spec.eigenvalues
        e_perp[j], e_cont[j] = tr.e_perp, tr.e_perp_continuum
        log.debug("2D layer eps=%g: %s", eps, spec.eigenvalues)
    return _finish(curve.describe(), range(n_bands), cfg, raw, e_perp, e_cont)


def reduced_reference(
    curve: CurveSpec, n_tangential: int, n_bands: int = 4,
    params: PhysicsParams = DEFAULT_PARAMS, with_vq: bool = True,
) -> np.ndarray:
    """Lowest levels of the 1D reduced Hamiltonian on the same tangential grid."""
    op = build_curve_hamiltonian(curve, n_tangential, params, with_vq=with_vq)
    return eigensolve_symmetric(op, n_bands).eigenvalues


def second_transverse_level(eps: float, cfg: LayerConfig, params: PhysicsParams = DEFAULT_PARAMS):
    """Second flat transverse level (walls only), the dominance threshold."""
    if cfg.confinement != "dirichlet":
        raise UsageError("threshold is defined for Dirichlet walls")
    n = cfg.n_perp
    h = eps / (n + 1)
    return params.hbar**2 * (1.0 - math.cos(2.0 * math.pi / (n + 1))) / (h * h)
