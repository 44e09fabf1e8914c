"""Discretized Hamiltonians on closed curves, a dense symmetric eigensolver,
analytic sphere spectra and the quantization-recipe comparison table."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import SolverError, UnsupportedDomainError, UsageError
from .geometry import CurveSpec, arc_length_reparam, curvature_at_arclength
from .potential import DEFAULT_PARAMS, PhysicsParams, hypersphere_thin_layer_constant

log = logging.getLogger(__name__)

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# orders above this go to LAPACK; parallel Jacobi costs O(N^3) per sweep in
# numpy vector ops and stops being interactive past a few hundred
JACOBI_MAX_ORDER = 256

RECIPES = ("Dirac", "AbelianConversion", "ThinLayer", "DeWittPathIntegral")


@dataclass(frozen=True)
class SymmetricOperator:
    matrix: np.ndarray = field(repr=False)
    h: float
    domain: str
    length: float

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise UsageError("operator matrix must be square")
        if not np.array_equal(m, m.T):
            raise UsageError("operator matrix is not exactly symmetric")
        object.__setattr__(self, "matrix", m)

    @property
    def order(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    degeneracies: tuple[int, ...] | None = None
    residual: float = 0.0
    vectors: np.ndarray | None = field(default=None, repr=False)
    sweeps: int = 0


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Disjoint (p, q) pairings covering every index pair once per sweep."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        P, Q = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                P.append(min(a, b))
                Q.append(max(a, b))
        rounds.append((np.array(P, dtype=int), np.array(Q, dtype=int)))
        players = [players[0]] + [players[-1]] + players[1:-1]
    return rounds


def jacobi_eigh(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a dense symmetric matrix.

    Rotations are applied in round-robin order, so each round annihilates
    ``n/2`` disjoint off-diagonal entries at once.  Stops when the
    off-diagonal Frobenius norm falls below ``tol * ||A||_F``.

    Returns ascending eigenvalues, the matching eigenvectors (columns) and
    the number of sweeps used.
    """
    A = np.array(a, dtype=float, copy=True)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V, 0
    total = np.linalg.norm(A)
    if total == 0.0:
        return np.zeros(n), V, 0
    rounds = _round_robin(n)
    for sweep in range(1, max_sweeps + 1):
        for P, Q in rounds:
            apq = A[P, Q]
            active = np.abs(apq) > 1e-300
            if not active.any():
                continue
            P, Q, apq = P[active], Q[active], apq[active]
            theta = (A[Q, Q] - A[P, P]) / (2.0 * apq)
            t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
            t[theta == 0.0] = 1.0
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            Ap, Aq = A[:, P].copy(), A[:, Q]
            A[:, P] = Ap * c - Aq * s
            A[:, Q] = Ap * s + Aq * c
            Ap, Aq = A[P, :].copy(), A[Q, :]
            A[P, :] = c[:, None] * Ap - s[:, None] * Aq
            A[Q, :] = s[:, None] * Ap + c[:, None] * Aq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            Vp, Vq = V[:, P].copy(), V[:, Q]
            V[:, P] = Vp * c - Vq * s
            V[:, Q] = Vp * s + Vq * c
        off = float(np.linalg.norm(A - np.diag(A.diagonal())))
        if off <= tol * total:
            w = A.diagonal().copy()
            order = np.argsort(w, kind="stable")
            return w[order], V[:, order], sweep
    raise SolverError(
        f"Jacobi did not converge in {max_sweeps} sweeps "
        f"(off-diagonal norm {off:.3e}, target {tol * total:.3e})"
    )


def eigensolve_symmetric(op, count: int | None = None, method: str = "auto") -> Spectrum:
    """Lowest ``count`` eigenpairs of a symmetric operator (or matrix).

    ``method`` is ``"jacobi"``, ``"lapack"`` or ``"auto"`` (Jacobi up to
    order 256).  The reported residual is ``max ||A v - lambda v||`` over the
    returned pairs.
    """
    A = op.matrix if isinstance(op, SymmetricOperator) else np.asarray(op, dtype=float)
    n = A.shape[0]
    count = n if count is None else count
    if not 1 <= count <= n:
        raise UsageError(f"count must lie in [1, {n}]")
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_ORDER else "lapack"
    sweeps = 0
    if method == "jacobi":
        w, V, sweeps = jacobi_eigh(A)
        w, V = w[:count], V[:, :count]
    elif method == "lapack":
        w, V = scipy.linalg.eigh(A, subset_by_index=[0, count - 1])
    else:
        raise UsageError(f"unknown eigensolver method {method!r}")
    residual = float(np.max(np.linalg.norm(A @ V - V * w, axis=0)))
    return Spectrum(eigenvalues=w, residual=residual, vectors=V, sweeps=sweeps)


def residual_bound(op, spectrum: Spectrum) -> float:
    """Residual relative to the Frobenius norm of the operator."""
    A = op.matrix if isinstance(op, SymmetricOperator) else np.asarray(op)
    return spectrum.residual / max(float(np.linalg.norm(A)), 1e-300)


# ---------------------------------------------------------------------------
# 1D Hamiltonians on closed curves
# ---------------------------------------------------------------------------


def periodic_laplacian(n: int, h: float) -> np.ndarray:
    """Second-order periodic second-difference matrix (without the sign)."""
    D = -2.0 * np.eye(n)
    idx = np.arange(n)
    D[idx, (idx + 1) % n] += 1.0
    D[idx, (idx - 1) % n] += 1.0
    return D / (h * h)


def curve_grid(curve: CurveSpec, n: int) -> tuple[np.ndarray, float, np.ndarray]:
    """Uniform arc-length grid, its spacing and the curvature at each node."""
    length = arc_length_reparam(curve).length
    s = np.arange(n) * (length / n)
    return s, length, np.asarray(curvature_at_arclength(curve, s), dtype=float)


def build_curve_hamiltonian(
    curve: CurveSpec, N: int, params: PhysicsParams = DEFAULT_PARAMS, with_vq: bool = True
) -> SymmetricOperator:
    """-(hbar^2/2) d_s^2 on a periodic arc-length grid, plus -hbar^2 k^2 / 8."""
    if not curve.closed:
        raise UnsupportedDomainError("the 1D Hamiltonian needs a closed curve")
    if N < 8:
        raise UsageError("grid size must be at least 8")
    s, length, k = curve_grid(curve, N)
    h = length / N
    H = -0.5 * params.hbar**2 * periodic_laplacian(N, h)
    if with_vq:
        H[np.diag_indices(N)] += -(params.hbar**2) * k * k / 8.0
    H = 0.5 * (H + H.T)
    return SymmetricOperator(H, h=h, domain="periodic", length=length)


def discrete_periodic_levels(N: int, length: float, params: PhysicsParams = DEFAULT_PARAMS):
    """Exact eigenvalues of -(hbar^2/2) times the periodic second difference."""
    h = length / N
    m = np.arange(N)
    return np.sort(params.hbar**2 * (1.0 - np.cos(2.0 * np.pi * m / N)) / (h * h))


def circle_levels(R: float, count: int, vq: float = 0.0, params: PhysicsParams = DEFAULT_PARAMS):
    """Lowest ``count`` levels m^2 hbar^2 / (2 R^2) + vq, counting +-m twice."""
    ms = [0]
    m = 1
    while len(ms) < count:
        ms += [m, m]
        m += 1
    ms = np.array(ms[:count], dtype=float)
    return params.hbar**2 * ms**2 / (2.0 * R * R) + vq


# ---------------------------------------------------------------------------
# Sphere spectra and the recipe table
# ---------------------------------------------------------------------------


def _harmonic_dimension(l: int, n: int) -> int:
    """Number of degree-l spherical harmonics on S^(n-1)."""
    top = math.comb(l + n - 1, n - 1)
    low = math.comb(l + n - 3, n - 1) if l >= 2 else 0
    return top - low


def sphere_spectrum_analytic(
    R: float, vq: float, l_max: int, params: PhysicsParams = DEFAULT_PARAMS, n: int = 3
) -> Spectrum:
    """Levels hbar^2 l(l + n - 2) / (2 R^2) + vq on S^(n-1), l = 0..l_max.

    For the ordinary sphere (n = 3) this is l(l+1) with degeneracy 2l + 1.
    """
    if l_max < 0:
        raise UsageError("l_max must be non-negative")
    if not R > 0:
        raise UsageError("radius must be positive")
    ls = np.arange(l_max + 1)
    levels = params.hbar**2 * ls * (ls + n - 2) / (2.0 * R * R) + vq
    degen = tuple(_harmonic_dimension(int(l), n) for l in ls)
    return Spectrum(eigenvalues=levels, degeneracies=degen)


@dataclass(frozen=True)
class RecipeTable:
    geometry: str
    constants: dict
    levels: dict

    def rows(self):
        """(recipe, level index, degeneracy, energy); absent recipes skipped."""
        for name in RECIPES:
            if self.constants.get(name) is None:
                continue
            for i, (deg, e) in enumerate(self.levels[name]):
                yield name, i, deg, e


def recipe_table(
    geometry: str,
    R: float = 1.0,
    l_max: int = 4,
    params: PhysicsParams = DEFAULT_PARAMS,
    n: int = 3,
) -> RecipeTable:
    """Quantum-potential constants and levels under the four recipes.

    ``geometry`` is ``"sphere"`` (S^(n-1) in R^n) or ``"circle"``.  The
    circle has no Dirac constant; it is reported as None.
    """
    if not R > 0:
        raise UsageError("radius must be positive")
    hb2 = params.hbar**2
    if geometry == "sphere":
        if n < 3:
            raise UsageError("sphere recipes need n >= 3 (use geometry=circle for n = 2)")
        scalar_curvature = (n - 1) * (n - 2) / (R * R)
        constants = {
            "Dirac": hb2 * n * n / (8.0 * R * R),
            "AbelianConversion": 0.0,
            "ThinLayer": hypersphere_thin_layer_constant(n, R, params),
            "DeWittPathIntegral": hb2 * scalar_curvature / 12.0,
        }
        kinetic = sphere_spectrum_analytic(R, 0.0, l_max, params, n)
        base = list(zip(kinetic.degeneracies, kinetic.eigenvalues.tolist()))
        label = f"sphere(n={n}, R={R:g})"
    elif geometry == "circle":
        constants = {
            "Dirac": None,
            "AbelianConversion": 0.0,
            "ThinLayer": -hb2 / (8.0 * R * R),
            "DeWittPathIntegral": 0.0,
        }
        base = [(1 if m == 0 else 2, hb2 * m * m / (2.0 * R * R)) for m in range(l_max + 1)]
        label = f"circle(R={R:g})"
    else:
        raise UsageError(f"unsupported recipe geometry {geometry!r}")
    levels = {
        name: None if c is None else [(d, e + c) for d, e in base] for name, c in constants.items()
    }
    return RecipeTable(geometry=label, constants=constants, levels=levels)
