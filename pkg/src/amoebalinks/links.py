"""Torus links on the argument torus.

Two sources are covered:

* links of quasi-homogeneous singularities, where every branch of the curve
  is ``w = t z^mu`` and its argument image is a closed geodesic;
* the unit fiber ``|z| = |w| = 1`` of the Lee-Yang polynomial pulled back by
  a lattice matrix, traced numerically and compared with the gcd count.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .numeric import univariate_roots
from .poly import LatticeMatrix, LaurentPolynomial, apply_matrix

TWO_PI = 2 * math.pi
PHASE_TOL = 1e-8
STEPS_PER_LAP = 4096
CLOSURE_TOL = 1e-6
WINDING_TOL = 1e-6

KNOT_NAMES = {(2, 3): "trefoil", (2, 5): "cinquefoil"}


class NotQuasiHomogeneous(ValueError):
    pass


class UnsupportedOrientation(ValueError):
    """Support is collinear but not on a line ``i + mu j = c`` with ``mu > 0``."""


class LinkMismatch(RuntimeError):
    pass


@dataclass(frozen=True)
class RationalSlope:
    p: int
    q: int

    def __post_init__(self):
        if self.q == 0:
            raise ValueError("q must be nonzero")
        g = math.gcd(self.p, self.q)
        s = -1 if self.q < 0 else 1
        object.__setattr__(self, "p", s * self.p // g)
        object.__setattr__(self, "q", s * self.q // g)

    @classmethod
    def of(cls, x: Fraction) -> "RationalSlope":
        return cls(x.numerator, x.denominator)

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)

    def __str__(self):
        return f"{self.p}/{self.q}" if self.q != 1 else str(self.p)


def canonical_homology(m: int, n: int) -> tuple[int, int]:
    """Sign-normalised winding pair: ``m > 0``, or ``m == 0`` and ``n > 0``."""
    if m < 0 or (m == 0 and n < 0):
        return (-m, -n)
    return (m, n)


@dataclass(frozen=True)
class TorusGeodesic:
    """The closed line ``theta2 = offset + (n/m) theta1`` (``theta1 = offset``
    when ``m = 0``) with winding numbers ``(m, n)``.

    ``offset`` is the smallest nonnegative intercept over all lifts, so it
    lies in ``[0, 2pi/|m|)`` (``[0, 2pi/|n|)`` for vertical lines).
    """

    homology: tuple[int, int]
    offset: float
    multiplicity: int = 1

    def __post_init__(self):
        m, n = canonical_homology(*self.homology)
        if math.gcd(m, n) != 1:
            raise ValueError(f"homology {self.homology} is not primitive")
        period = TWO_PI / (m if m else abs(n))
        off = math.fmod(self.offset, period)
        if off < 0:
            off += period
        if period - off < PHASE_TOL:
            off = 0.0
        object.__setattr__(self, "homology", (m, n))
        object.__setattr__(self, "offset", off)

    def points(self, samples: int = 512) -> np.ndarray:
        """Points along one full period, reduced to ``[0, 2pi)^2``."""
        m, n = self.homology
        s = np.linspace(0.0, 1.0, samples, endpoint=False)
        if m == 0:
            pts = np.column_stack([np.full(samples, self.offset), TWO_PI * n * s])
        else:
            x = TWO_PI * m * s
            pts = np.column_stack([x, self.offset + x * n / m])
        return np.mod(pts, TWO_PI)


@dataclass
class TracedLoop:
    """One closed component of a traced link.

    ``lifted`` is the unreduced path in the plane; its total displacement
    divided by ``2pi`` is the homology class.
    """

    lifted: np.ndarray
    homology: tuple[int, int]
    laps: int
    closure_gap: float
    winding_error: float

    @property
    def points(self) -> np.ndarray:
        return np.mod(self.lifted, TWO_PI)


class LinkSource(enum.Enum):
    FORMULA = "formula"
    TRACED = "traced"


@dataclass
class TorusLink:
    components: list
    source: LinkSource
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.components)

    @property
    def homologies(self) -> list[tuple[int, int]]:
        return [c.homology for c in self.components]


# --------------------------------------------------------------------------
# Quasi-homogeneous singularities


@dataclass(frozen=True)
class QuasiHomogeneousData:
    """``f(z, t z^mu) = z^c h(t)`` with ``h(t) = sum h_coeffs[k] t^(j_min + k)``."""

    mu: RationalSlope
    c: Fraction
    h_coeffs: tuple[complex, ...]
    j_min: int = 0


def quasi_homogeneous_decompose(p: LaurentPolynomial) -> QuasiHomogeneousData:
    pts = p.support
    if len(pts) < 2:
        raise NotQuasiHomogeneous("need at least two monomials")
    (i0, j0), (i1, j1) = pts[0], pts[1]
    for i, j in pts[2:]:
        if (i1 - i0) * (j - j0) - (j1 - j0) * (i - i0) != 0:
            raise NotQuasiHomogeneous("support is not collinear")
    js = {j for _, j in pts}
    if len(js) == 1:
        raise UnsupportedOrientation("support line is horizontal (constant w-degree)")
    if len({i for i, _ in pts}) == 1:
        raise UnsupportedOrientation("support line is vertical (mu = 0)")
    mu = Fraction(i0 - i1, j1 - j0)
    if mu <= 0:
        raise UnsupportedOrientation(f"support line has mu = {mu} <= 0")
    c = i0 + mu * j0
    jmin, jmax = min(js), max(js)
    h = [0j] * (jmax - jmin + 1)
    for (i, j), a in p:
        h[j - jmin] = a
    return QuasiHomogeneousData(RationalSlope.of(mu), c, tuple(h), jmin)


def _merge_phases(phases: np.ndarray, period: float, tol: float = PHASE_TOL) -> list[tuple[float, int]]:
    """Group phases on the circle ``R / period Z``; returns ``(offset, size)``."""
    vals = np.mod(phases, period)
    vals = np.sort(np.where((vals < tol) | (period - vals < tol), 0.0, vals))
    groups: list[list[float]] = []
    for v in vals:
        if groups and v - groups[-1][-1] < tol:
            groups[-1].append(v)
        else:
            groups.append([v])
    if len(groups) > 1 and groups[0][0] + period - groups[-1][-1] < tol:
        groups[0].extend(groups.pop())
    return [(g[0], len(g)) for g in groups]


def singularity_link(p: LaurentPolynomial, seed: int = 0) -> TorusLink:
    """Argument image of the quasi-homogeneous curve ``p = 0`` near the origin.

    Each root ``t`` of ``h`` gives ``arg w = arg t + (P/Q) arg z``; roots whose
    phases agree modulo ``2pi/Q`` trace the same closed line of homology
    ``(Q, P)``.
    """
    qh = quasi_homogeneous_decompose(p)
    coeffs = np.array(qh.h_coeffs, dtype=complex)
    if not np.any(coeffs != 0):
        raise ValueError("h is identically zero")
    rs = univariate_roots(coeffs, seed=seed)
    if rs.constant or len(rs) == 0:
        raise ValueError("h is constant")
    P, Q = qh.mu.p, qh.mu.q
    phases = np.angle(rs.roots)
    comps = [TorusGeodesic((Q, P), off, mult) for off, mult in _merge_phases(phases, TWO_PI / Q)]
    meta = {"mu": str(qh.mu), "c": str(qh.c), "roots": len(rs)}
    return TorusLink(comps, LinkSource.FORMULA, meta)


def count_components_closed_form(pp: int, qq: int) -> int:
    if pp < 1 or qq < 1:
        raise ValueError("exponents must be positive")
    return math.gcd(pp, qq)


# --------------------------------------------------------------------------
# Lee-Yang unit fibers


class Regime(enum.Enum):
    TAU_LT_1 = "tau<1"
    TAU_GT_1 = "tau>1"

    @classmethod
    def of(cls, tau: float) -> "Regime":
        _check_tau(tau)
        return cls.TAU_LT_1 if tau < 1 else cls.TAU_GT_1


def _check_tau(tau: float):
    if not (tau > 0) or tau == 1:
        raise ValueError(f"tau must be positive and different from 1, got {tau}")


def lee_yang_polynomial(tau: float, L: LatticeMatrix | None = None) -> LaurentPolynomial:
    """``1 + tau z + tau w + z w``, optionally with exponents mapped by ``L``."""
    base = LaurentPolynomial({(0, 0): 1, (1, 0): tau, (0, 1): tau, (1, 1): 1})
    return base if L is None else apply_matrix(base, L)


def lee_yang_base_curve(tau: float, theta):
    """Argument of ``w = -(1 + tau z)/(tau + z)`` on ``z = exp(i theta)``, in ``[0, 2pi)``."""
    _check_tau(tau)
    z = np.exp(1j * np.asarray(theta, dtype=float))
    phi = np.mod(np.angle(-(1 + tau * z) / (tau + z)), TWO_PI)
    # mod of a tiny negative angle rounds up to 2pi
    phi = np.where(phi >= TWO_PI, 0.0, phi)
    return float(phi) if np.ndim(phi) == 0 else phi


def count_components_lee_yang(L: LatticeMatrix, regime: Regime) -> int:
    if L.det == 0:
        raise ValueError("singular matrix")
    if regime is Regime.TAU_GT_1:
        return abs(math.gcd(L.b - L.a, L.d - L.c))
    return abs(math.gcd(L.a + L.b, L.c + L.d))


def _base_lap(tau: float, steps: int) -> tuple[np.ndarray, int]:
    """Lifted ``(theta, phi)`` over one lap, ``steps + 1`` samples, and the
    number of turns ``phi`` makes."""
    theta = np.linspace(0.0, TWO_PI, steps + 1)
    phi = np.unwrap(lee_yang_base_curve(tau, theta))
    turns = (phi[-1] - phi[0]) / TWO_PI
    k = round(turns)
    if abs(turns - k) > WINDING_TOL:
        raise LinkMismatch(f"base curve lap is not closed: {turns} turns")
    phi = phi - phi[0] + lee_yang_base_curve(tau, 0.0)
    return np.column_stack([theta, phi]), k


def _class_key(Minv: tuple, n: tuple[int, int]) -> tuple[Fraction, Fraction]:
    (p00, p01), (p10, p11) = Minv
    x = p00 * n[0] + p01 * n[1]
    y = p10 * n[0] + p11 * n[1]
    return (x - math.floor(x), y - math.floor(y))


def _branch_reps(M: LatticeMatrix) -> list[tuple[int, int]]:
    """One integer vector per class of ``Z^2 / M Z^2`` (``|det M|`` of them)."""
    D = abs(M.det)
    Minv = M.inverse()
    reps, seen = [], set()
    for i in range(D):
        for j in range(D):
            key = _class_key(Minv, (i, j))
            if key not in seen:
                seen.add(key)
                reps.append((i, j))
    assert len(reps) == D
    return reps


def unit_fiber_link(L: LatticeMatrix, tau: float, steps: int = STEPS_PER_LAP) -> TorusLink:
    """Trace the solutions of ``f_L = 0`` on the unit torus.

    A torus point ``(alpha, beta)`` lies on the fiber when
    ``(a alpha + c beta, b alpha + d beta)`` lands on the base curve
    ``(theta, phi(theta))`` modulo ``2pi``.  Each of the ``|det L|``
    integer shifts of the lifted base curve pulls back to one branch; a
    branch continues into another after every lap of ``theta``, and loops
    close when the reduced point returns to its start.
    """
    _check_tau(tau)
    if L.det == 0:
        raise ValueError("singular matrix")
    M = L.transpose()
    Minv = M.inverse()
    Mf = np.array(M.rows, dtype=float)
    Mf_inv = np.linalg.inv(Mf)
    lap, turns = _base_lap(tau, steps)
    shift = (1, turns)

    reps = _branch_reps(M)
    visited: set = set()
    loops = []
    for rep in reps:
        if _class_key(Minv, rep) in visited:
            continue
        n = rep
        start = None
        pieces = []
        laps = 0
        while True:
            visited.add(_class_key(Minv, n))
            base = lap + TWO_PI * np.array(n, dtype=float)
            piece = base @ Mf_inv.T
            if start is None:
                start = piece[0]
            elif not np.allclose(piece[0], pieces[-1][-1], atol=CLOSURE_TOL):
                # shift this lift so the path stays continuous
                piece = piece + (pieces[-1][-1] - piece[0])
            pieces.append(piece if not pieces else piece[1:])
            laps += 1
            n = (n[0] + shift[0], n[1] + shift[1])
            end = pieces[-1][-1]
            d = np.mod(end - start + math.pi, TWO_PI) - math.pi
            gap = float(np.max(np.abs(d)))
            if gap < CLOSURE_TOL:
                break
            if laps > abs(L.det):
                raise LinkMismatch("branch did not close within |det L| laps")
        lifted = np.concatenate(pieces)
        wind = (lifted[-1] - lifted[0]) / TWO_PI
        hom = np.rint(wind).astype(int)
        err = float(np.max(np.abs(wind - hom)))
        if err > WINDING_TOL:
            raise LinkMismatch(f"non-integral winding {wind}")
        loops.append(TracedLoop(lifted, canonical_homology(int(hom[0]), int(hom[1])), laps, gap, err))
    if len(visited) != abs(L.det):
        raise LinkMismatch("not every branch was traced")
    meta = {"matrix": L, "tau": tau, "regime": Regime.of(tau).value, "base_turns": turns}
    return TorusLink(loops, LinkSource.TRACED, meta)


def corollary_pq_link(p: int, q: int, tau: float) -> TorusLink:
    """Unit fiber of ``1 + tau z^p + tau w^q + z^p w^q``; checks the gcd count."""
    if p < 1 or q < 1:
        raise ValueError("p and q must be positive")
    link = unit_fiber_link(LatticeMatrix.diag(p, q), tau)
    if len(link) != math.gcd(p, q):
        raise LinkMismatch(f"traced {len(link)} components, expected gcd({p},{q}) = {math.gcd(p, q)}")
    return link


# --------------------------------------------------------------------------
# Classification and reports


@dataclass(frozen=True)
class LinkClassification:
    count: int
    homologies: tuple[tuple[int, int], ...]
    label: str
    description: str
    torus_type: tuple[int, int] | None = None


def _slope_text(m: int, n: int) -> str:
    if m == 0:
        return "vertical"
    s = Fraction(n, m)
    return str(s)


def classify_link(link: TorusLink) -> LinkClassification:
    """Torus type ``T(c|n|, c|m|)`` when all ``c`` components share the class ``(m, n)``."""
    if len(link) == 0:
        raise ValueError("empty link")
    homs = tuple(canonical_homology(*h) for h in link.homologies)
    c = len(homs)
    if len(set(homs)) != 1:
        classes = ", ".join(f"({m},{n})" for m, n in homs)
        return LinkClassification(c, homs, "mixed link", f"{c}-component link with classes {classes}")
    m, n = homs[0]
    P, Q = c * abs(n), c * abs(m)
    trivial = min(abs(m), abs(n)) <= 1
    tname = f"T({P},{Q})"
    if c == 1:
        if trivial:
            return LinkClassification(1, homs, "unknot", f"{tname} torus knot (unknot)", (P, Q))
        name = KNOT_NAMES.get(tuple(sorted((abs(m), abs(n)))))
        label = f"{tname} {name}" if name else f"{tname} torus knot"
        desc = f"{tname} torus knot ({name})" if name else f"{tname} torus knot"
        return LinkClassification(1, homs, label, desc, (P, Q))
    if (abs(m), abs(n)) == (1, 1) and c == 2:
        return LinkClassification(c, homs, f"{tname} Hopf link", f"{tname} torus link (Hopf link)", (P, Q))
    knots = "each unknotted" if trivial else f"each a T({abs(n)},{abs(m)}) knot"
    desc = f"{tname} torus link: {c}-component link, {knots}, slope-{_slope_text(m, n)} geodesics"
    return LinkClassification(c, homs, f"{tname} torus link", desc, (P, Q))


def link_summary(cls: LinkClassification) -> str:
    homs = ", ".join(f"({m},{n})" for m, n in dict.fromkeys(cls.homologies))
    return f"components: {cls.count}, homology: {homs}, label: {cls.label}"


def link_report(link: TorusLink) -> str:
    """Summary line plus one table row per component."""
    cls = classify_link(link)
    lines = [link_summary(cls), f"description: {cls.description}"]
    lines.append(f"{'index':>5}  {'homology':<10}{'offset':>12}  {'mult':>4}  label")
    for k, comp in enumerate(link.components):
        m, n = comp.homology
        if isinstance(comp, TorusGeodesic):
            off, mult = f"{comp.offset:.8f}", comp.multiplicity
        else:
            off, mult = "-", 1
        one = classify_link(TorusLink([comp], link.source)).label
        lines.append(f"{k:>5}  {f'({m},{n})':<10}{off:>12}  {mult:>4}  {one}")
    return "\n".join(lines) + "\n"
