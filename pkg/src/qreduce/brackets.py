"""Polynomials on canonical phase space, Poisson and Dirac brackets.

Variables are ``x1..xn, p1..pn`` plus one auxiliary canonical pair
``(Q, P)``.  Coefficients are :class:`fractions.Fraction`, so bracket
identities hold exactly; Dirac brackets need the inverse of the constraint
matrix and are therefore evaluated numerically at a phase-space point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import NotSecondClassError, UsageError

DET_TOL = 1e-10


@dataclass(frozen=True)
class PhaseSpace:
    """Variable layout for ``n`` configuration dimensions plus (Q, P)."""

    n: int

    def __post_init__(self):
        if self.n < 1:
            raise UsageError("phase space needs n >= 1")

    @property
    def size(self) -> int:
        return 2 * self.n + 2

    @property
    def names(self) -> tuple[str, ...]:
        xs = tuple(f"x{i}" for i in range(1, self.n + 1))
        ps = tuple(f"p{i}" for i in range(1, self.n + 1))
        return xs + ps + ("Q", "P")

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UsageError(f"no variable {name!r} in a space with n={self.n}") from None

    def conjugate(self, i: int) -> int:
        """Index of the canonical partner of variable ``i``."""
        n = self.n
        if i < n:
            return i + n
        if i < 2 * n:
            return i - n
        return 2 * n + 1 if i == 2 * n else 2 * n

    def pairs(self):
        """Canonical (coordinate, momentum) index pairs."""
        for i in range(self.n):
            yield i, i + self.n
        yield 2 * self.n, 2 * self.n + 1

    def var(self, name: str) -> PhasePoly:
        e = [0] * self.size
        e[self.index(name)] = 1
        return PhasePoly(self, {tuple(e): Fraction(1)})

    def const(self, c) -> PhasePoly:
        return PhasePoly(self, {(0,) * self.size: _frac(c)})

    def x(self, i: int) -> PhasePoly:
        return self.var(f"x{i}")

    def p(self, i: int) -> PhasePoly:
        return self.var(f"p{i}")


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, Rational)):
        return Fraction(c)
    return Fraction(float(c))


@dataclass(frozen=True, eq=False)
class PhasePoly:
    """Sparse polynomial: exponent tuple -> nonzero rational coefficient."""

    space: PhaseSpace
    terms: dict = field(default_factory=dict)

    def __post_init__(self):
        clean = {m: _frac(c) for m, c in self.terms.items() if c != 0}
        for m in clean:
            if len(m) != self.space.size:
                raise UsageError("monomial length does not match the phase space")
        object.__setattr__(self, "terms", clean)

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other) -> PhasePoly:
        if isinstance(other, PhasePoly):
            if other.space != self.space:
                raise UsageError("polynomials live on different phase spaces")
            return other
        return self.space.const(other)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, 0) + c
        return PhasePoly(self.space, out)

    __radd__ = __add__

    def __neg__(self):
        return PhasePoly(self.space, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for (m1, c1), (m2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            m = tuple(a + b for a, b in zip(m1, m2))
            out[m] = out.get(m, 0) + c1 * c2
        return PhasePoly(self.space, out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise UsageError("only non-negative integer powers are supported")
        out = self.space.const(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, PhasePoly):
            return self.space == other.space and self.terms == other.terms
        if isinstance(other, (int, float, Fraction)):
            return self == self.space.const(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.space, frozenset(self.terms.items())))

    # -- calculus and evaluation -----------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def diff(self, i: int) -> PhasePoly:
        out = {}
        for m, c in self.terms.items():
            if m[i]:
                dm = list(m)
                dm[i] -= 1
                out[tuple(dm)] = c * m[i]
        return PhasePoly(self.space, out)

    def __call__(self, point: PhasePoint) -> float:
        if point.space != self.space:
            raise UsageError("point and polynomial live on different phase spaces")
        vals = point.values
        total = 0.0
        for m, c in self.terms.items():
            term = float(c)
            for i, e in enumerate(m):
                if e:
                    term *= vals[i] ** e
            total += term
        return total

    # -- printing -----------------------------------------------------------

    def _sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: (-sum(mc[0]), tuple(-e for e in mc[0])))

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        names = self.space.names
        parts = []
        for m, c in self._sorted_terms():
            mono = "*".join(
                names[i] if e == 1 else f"{names[i]}^{e}" for i, e in enumerate(m) if e
            )
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            parts.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    __repr__ = __str__


@dataclass(frozen=True)
class PhasePoint:
    space: PhaseSpace
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.space.size,):
            raise UsageError(
                f"point has {vals.size} values, phase space needs {self.space.size}"
            )
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_parts(cls, x, p, Q: float = 0.0, P: float = 0.0) -> PhasePoint:
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        if x.shape != p.shape or x.ndim != 1:
            raise UsageError("x and p must be vectors of the same length")
        return cls(PhaseSpace(len(x)), np.concatenate([x, p, [Q, P]]))


def poisson_bracket(f: PhasePoly, g: PhasePoly) -> PhasePoly:
    """Canonical bracket summed over (x_i, p_i) and (Q, P)."""
    if f.space != g.space:
        raise UsageError("polynomials live on different phase spaces")
    out = PhasePoly(f.space)
    for qi, pi in f.space.pairs():
        out = out + f.diff(qi) * g.diff(pi) - f.diff(pi) * g.diff(qi)
    return out


def constraint_matrix(constraints, pt: PhasePoint) -> tuple[np.ndarray, float]:
    """Matrix C_ij = {phi_i, phi_j} at ``pt`` and its determinant."""
    k = len(constraints)
    C = np.zeros((k, k))
    for i in range(k):
        for j in range(i + 1, k):
            C[i, j] = poisson_bracket(constraints[i], constraints[j])(pt)
            C[j, i] = -C[i, j]
    det = float(np.linalg.det(C)) if k else 1.0
    return C, det


def dirac_bracket_at(f: PhasePoly, g: PhasePoly, constraints, pt: PhasePoint) -> float:
    """{f, g}_D = {f, g} - {f, phi_i} (C^-1)_ij {phi_j, g}, evaluated at pt."""
    C, det = constraint_matrix(constraints, pt)
    scale = max(1.0, float(np.max(np.abs(C)))) ** len(constraints) if len(constraints) else 1.0
    if abs(det) <= DET_TOL * scale:
        raise NotSecondClassError(f"constraint matrix is singular at this point (det={det:.3g})")
    a = np.array([poisson_bracket(f, phi)(pt) for phi in constraints])
    b = np.array([poisson_bracket(phi, g)(pt) for phi in constraints])
    return poisson_bracket(f, g)(pt) - a @ np.linalg.solve(C, b)


@dataclass(frozen=True)
class ConstraintClassification:
    kind: str  # "first class" | "second class" | "mixed/degenerate"
    determinants: tuple[float, ...]
    max_bracket: float
    witnesses: tuple[int, ...] = ()


def classify_constraints(constraints, points, tol: float = DET_TOL) -> ConstraintClassification:
    """First class if every mutual bracket vanishes at every sample, second
    class if det C is nonzero at every sample; otherwise the sample indices
    that break the pattern are returned as witnesses."""
    points = list(points)
    if not points:
        raise UsageError("classification needs at least one sample point")
    dets, maxes = [], []
    for pt in points:
        C, det = constraint_matrix(constraints, pt)
        dets.append(det)
        maxes.append(float(np.max(np.abs(C))) if C.size else 0.0)
    dets_arr = np.abs(np.array(dets))
    max_arr = np.array(maxes)
    if np.all(max_arr <= tol):
        kind, witnesses = "first class", ()
    elif np.all(dets_arr > tol):
        kind, witnesses = "second class", ()
    else:
        kind = "mixed/degenerate"
        witnesses = tuple(int(i) for i in np.flatnonzero(dets_arr <= tol))
    return ConstraintClassification(kind, tuple(dets), float(max_arr.max()), witnesses)


# ---------------------------------------------------------------------------
# Built-in constrained systems
# ---------------------------------------------------------------------------


def _square_norm_x(space: PhaseSpace) -> PhasePoly:
    return sum((space.x(i) ** 2 for i in range(1, space.n + 1)), space.const(0))


def sphere_constraints(space: PhaseSpace, R=1) -> list[PhasePoly]:
    """phi1 = x.x - R^2 and phi2 = p.x for a particle on a sphere."""
    r2 = _frac(R) ** 2
    phi1 = _square_norm_x(space) - r2
    phi2 = sum((space.p(i) * space.x(i) for i in range(1, space.n + 1)), space.const(0))
    return [phi1, phi2]


def abelian_constraints(space: PhaseSpace, R=1) -> list[PhasePoly]:
    """Converted pair sigma1 = phi1 + P, sigma2 = phi2 + 2 (x.x) Q."""
    phi1, phi2 = sphere_constraints(space, R)
    return [phi1 + space.var("P"), phi2 + 2 * _square_norm_x(space) * space.var("Q")]


SYSTEMS = {
    "sphere": sphere_constraints,
    "sphere-abelian": abelian_constraints,
}


def on_shell_points(system: str, space: PhaseSpace, R: float, count: int, rng) -> list[PhasePoint]:
    """Random points satisfying all constraints of ``system``."""
    if system not in SYSTEMS:
        raise UsageError(f"unknown system {system!r}")
    n = space.n
    out = []
    for _ in range(count):
        x = rng.normal(size=n)
        x *= R / np.linalg.norm(x)
        p = rng.normal(size=n)
        p -= (p @ x) / (x @ x) * x
        if system == "sphere":
            Q, P = rng.normal(size=2)
        else:
            # move off phi1 = phi2 = 0, then solve sigma1 = sigma2 = 0 for (P, Q)
            dx = 1.0 + 0.1 * rng.normal()
            x = x * dx
            p = p + 0.3 * rng.normal() * x
            P = -(x @ x - R * R)
            Q = -(p @ x) / (2.0 * (x @ x))
        out.append(PhasePoint(space, np.concatenate([x, p, [Q, P]])))
    return out


def bracket_table(constraints, names=None) -> list[tuple[str, str, PhasePoly]]:
    """All pairwise brackets {c_i, c_j} for i < j."""
    names = names or [f"c{i + 1}" for i in range(len(constraints))]
    rows = []
    for i, j in itertools.combinations(range(len(constraints)), 2):
        rows.append((names[i], names[j], poisson_bracket(constraints[i], constraints[j])))
    return rows


def random_poly(space: PhaseSpace, rng, max_degree: int = 3, n_terms: int = 4) -> PhasePoly:
    """Random polynomial with small integer-over-small-integer coefficients."""
    terms = {}
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        m = [0] * space.size
        for _ in range(deg):
            m[int(rng.integers(0, space.size))] += 1
        terms[tuple(m)] = Fraction(int(rng.integers(-5, 6)), int(rng.integers(1, 4)))
    return PhasePoly(space, terms)
