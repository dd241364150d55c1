"""Tropical polynomials in two variables, their corner locus and the dual
regular subdivision of the Newton polygon.

Conventions are max-plus: ``g(x) = max_a (v_a + <a, x>)`` and the
subdivision is read off the *upper* faces of the lifted support
``{(a, v_a)}``.  All geometry runs on :class:`fractions.Fraction`, so the
duality and balancing certificates below are exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .poly import Exponent, LatticeSegment, NewtonPolygon, convex_hull, integer_length

TIE_TOL = 1e-9
MAX_DENOMINATOR = 10**6

Point = tuple[Fraction, Fraction]


def to_rational(v) -> Fraction:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    return Fraction(v).limit_denominator(MAX_DENOMINATOR)


@dataclass(frozen=True)
class TropicalPolynomial:
    terms: tuple[tuple[Exponent, Fraction], ...]

    def __post_init__(self):
        clean = tuple(sorted(((int(a[0]), int(a[1])), to_rational(v)) for a, v in self.terms))
        exps = [a for a, _ in clean]
        if len(set(exps)) != len(exps):
            raise ValueError("repeated exponent in tropical polynomial")
        if not clean:
            raise ValueError("empty tropical polynomial")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Exponent, float]]) -> "TropicalPolynomial":
        return cls(tuple(pairs))

    @classmethod
    def parse(cls, text: str) -> "TropicalPolynomial":
        """Lines ``i j value``; blank lines and ``#`` comments ignored."""
        pairs = []
        for n, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {n}: expected 'i j value', got {line!r}")
            pairs.append(((int(parts[0]), int(parts[1])), Fraction(parts[2])))
        return cls(tuple(pairs))

    def format(self) -> str:
        return "\n".join(f"{a[0]} {a[1]} {v}" for a, v in self.terms) + "\n"

    @property
    def support(self) -> list[Exponent]:
        return [a for a, _ in self.terms]

    @property
    def values(self) -> dict[Exponent, Fraction]:
        return dict(self.terms)

    def shifted(self, c=0, v: Sequence = (0, 0)) -> "TropicalPolynomial":
        """Values ``v_a + c + <v, a>``."""
        c = to_rational(c)
        v0, v1 = to_rational(v[0]), to_rational(v[1])
        return TropicalPolynomial(tuple((a, val + c + v0 * a[0] + v1 * a[1]) for a, val in self.terms))


def trop_eval(tp: TropicalPolynomial, x: Sequence[float]) -> tuple[float, list[Exponent]]:
    """Maximum of ``v_a + <a, x>`` and every exponent within ``TIE_TOL`` of it."""
    vals = [(float(v) + a[0] * x[0] + a[1] * x[1], a) for a, v in tp.terms]
    best = max(v for v, _ in vals)
    return best, [a for v, a in vals if v >= best - TIE_TOL]


# --------------------------------------------------------------------------
# Subdivision


@dataclass(frozen=True)
class Cell:
    """A cell of the subdivision.

    ``vertices`` are CCW for 2-cells, the two endpoints for segments.
    ``dual_point`` is the corner-locus vertex of a 2-cell.
    """

    vertices: tuple[Exponent, ...]
    points: tuple[Exponent, ...]
    dual_point: Point | None = None

    @property
    def dimension(self) -> int:
        return min(len(self.vertices) - 1, 2)

    def edges(self) -> list[tuple[Exponent, Exponent]]:
        v = self.vertices
        if len(v) == 2:
            return [(v[0], v[1])]
        if len(v) < 2:
            return []
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]


@dataclass
class DualSubdivision:
    cells: list[Cell]
    support: frozenset
    polygon: NewtonPolygon

    @property
    def dimension(self) -> int:
        return self.polygon.dimension

    def edges(self) -> dict[frozenset, list[int]]:
        """Subdivision edges (as ``frozenset({a, b})``) and adjacent cells."""
        out: dict[frozenset, list[int]] = {}
        for k, cell in enumerate(self.cells):
            if cell.dimension == 2:
                for a, b in cell.edges():
                    out.setdefault(frozenset((a, b)), []).append(k)
            elif cell.dimension == 1:
                out.setdefault(frozenset(cell.vertices), []).append(k)
        return out


def _collinear(a, b, c) -> bool:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) == 0


def _upper_faces(values: dict[Exponent, Fraction]) -> list[tuple[tuple[Fraction, Fraction], Fraction, list[Exponent]]]:
    """Upper faces of the lifted points as ``(slope, offset, points)``.

    The face plane is ``v = offset + <slope, a>``; found by checking every
    non-degenerate triple, which is plenty for supports of a few dozen points.
    """
    pts = sorted(values)
    faces = {}
    for p0, p1, p2 in combinations(pts, 3):
        if _collinear(p0, p1, p2):
            continue
        (x0, y0), (x1, y1), (x2, y2) = p0, p1, p2
        v0, v1, v2 = values[p0], values[p1], values[p2]
        det = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
        s1 = ((v1 - v0) * (y2 - y0) - (v2 - v0) * (y1 - y0)) / det
        s2 = ((x1 - x0) * (v2 - v0) - (x2 - x0) * (v1 - v0)) / det
        off = v0 - s1 * x0 - s2 * y0
        key = (s1, s2, off)
        if key in faces:
            continue
        on = []
        for q in pts:
            plane = off + s1 * q[0] + s2 * q[1]
            if values[q] > plane:
                break
            if values[q] == plane:
                on.append(q)
        else:
            faces[key] = on
    return [((s1, s2), off, on) for (s1, s2, off), on in faces.items()]


def _primitive(v) -> tuple[int, int]:
    a, b = Fraction(v[0]), Fraction(v[1])
    den = math.lcm(a.denominator, b.denominator)
    ia, ib = int(a * den), int(b * den)
    g = math.gcd(ia, ib)
    if g == 0:
        raise ValueError("zero direction")
    return (ia // g, ib // g)


def _line_frame(points: list[Exponent]):
    """Base point and primitive direction of a collinear point set."""
    base = points[0]
    far = max(points, key=lambda q: abs(q[0] - base[0]) + abs(q[1] - base[1]))
    e = _primitive((far[0] - base[0], far[1] - base[1]))
    return base, e


def dual_subdivision(tp: TropicalPolynomial) -> DualSubdivision:
    values = tp.values
    support = sorted(values)
    polygon = NewtonPolygon(tuple(convex_hull(support)))
    if len(support) == 1:
        cells = [Cell((support[0],), (support[0],))]
    elif polygon.dimension == 1:
        base, e = _line_frame(support)
        coord = {a: (a[0] - base[0]) * e[0] + (a[1] - base[1]) * e[1] for a in support}
        # projection onto e is exact along the line up to the scale |e|^2
        order = sorted(support, key=lambda a: coord[a])
        hull: list[Exponent] = []
        for a in order:
            while len(hull) >= 2:
                p0, p1 = hull[-2], hull[-1]
                t0, t1, t2 = coord[p0], coord[p1], coord[a]
                # drop p1 if it lies on or below the chord p0 -> a
                if (values[p1] - values[p0]) * (t2 - t0) <= (values[a] - values[p0]) * (t1 - t0):
                    hull.pop()
                else:
                    break
            hull.append(a)
        cells = []
        for a, b in zip(hull, hull[1:]):
            lo, hi = coord[a], coord[b]
            inside = tuple(q for q in order if lo <= coord[q] <= hi and _on_chord(values, a, b, q, coord))
            cells.append(Cell((a, b), inside))
    else:
        cells = []
        for (s1, s2), _, on in sorted(_upper_faces(values), key=lambda f: sorted(f[2])):
            verts = tuple(convex_hull(on))
            cells.append(Cell(verts, tuple(sorted(on)), (-s1, -s2)))
    return DualSubdivision(cells, frozenset(support), polygon)


def _on_chord(values, a, b, q, coord) -> bool:
    ta, tb, tq = coord[a], coord[b], coord[q]
    return (values[q] - values[a]) * (tb - ta) == (values[b] - values[a]) * (tq - ta)


# --------------------------------------------------------------------------
# Corner locus


@dataclass(frozen=True)
class CurveEdge:
    """One edge of the tropical curve.

    ``tail``/``head`` index into the vertex list; ``None`` marks an end at
    infinity.  A ray has ``tail`` set and points along ``direction``; a
    full line (collinear support) has neither end and passes through
    ``anchor``.
    """

    tail: int | None
    head: int | None
    direction: tuple[int, int]
    weight: int
    dual: tuple[Exponent, Exponent]
    anchor: Point

    @property
    def kind(self) -> str:
        if self.tail is not None and self.head is not None:
            return "segment"
        if self.tail is not None:
            return "ray"
        return "line"


@dataclass
class TropicalCurve:
    vertices: list[Point]
    edges: list[CurveEdge]
    support: frozenset = field(default_factory=frozenset)

    def balancing(self) -> list[tuple[int, int]]:
        sums = [[0, 0] for _ in self.vertices]
        for e in self.edges:
            dx, dy = e.direction
            if e.tail is not None:
                sums[e.tail][0] += e.weight * dx
                sums[e.tail][1] += e.weight * dy
            if e.head is not None:
                sums[e.head][0] -= e.weight * dx
                sums[e.head][1] -= e.weight * dy
        return [tuple(s) for s in sums]

    def to_json(self) -> str:
        """JSON text with one vertex or edge per line; coordinates are exact
        rationals written as strings."""
        verts = [json.dumps([str(x), str(y)]) for x, y in self.vertices]
        edges = [
            json.dumps(
                {
                    "kind": e.kind,
                    "tail": e.tail,
                    "head": e.head,
                    "direction": list(e.direction),
                    "weight": e.weight,
                    "dual": [list(e.dual[0]), list(e.dual[1])],
                    "anchor": [str(e.anchor[0]), str(e.anchor[1])],
                }
            )
            for e in self.edges
        ]

        def block(items):
            return "[\n" + ",\n".join("    " + t for t in items) + "\n  ]" if items else "[]"

        return '{\n  "vertices": ' + block(verts) + ',\n  "edges": ' + block(edges) + "\n}"


def corner_locus(tp: TropicalPolynomial, subdiv: DualSubdivision | None = None) -> TropicalCurve:
    if len(tp.terms) < 2:
        raise ValueError("a tropical polynomial with one term has an empty corner locus")
    subdiv = subdiv or dual_subdivision(tp)
    values = tp.values
    if subdiv.dimension == 1:
        edges = []
        for cell in subdiv.cells:
            a, b = cell.vertices
            d = (b[0] - a[0], b[1] - a[1])
            n2 = d[0] * d[0] + d[1] * d[1]
            # point x on the line <a - b, x> = v_b - v_a, along a - b
            s = Fraction(values[b] - values[a], n2)
            anchor = (-s * d[0], -s * d[1])
            edges.append(
                CurveEdge(None, None, _primitive((-d[1], d[0])), integer_length(LatticeSegment(a, b)), (a, b), anchor)
            )
        return TropicalCurve([], edges, subdiv.support)

    vertices = [c.dual_point for c in subdiv.cells]
    edges = []
    for key, owners in sorted(subdiv.edges().items(), key=lambda kv: sorted(kv[0])):
        a, b = sorted(key)
        w = integer_length(LatticeSegment(a, b))
        if len(owners) == 2:
            t, h = owners
            x0, x1 = vertices[t], vertices[h]
            d = _primitive((x1[0] - x0[0], x1[1] - x0[1]))
            edges.append(CurveEdge(t, h, d, w, (a, b), x0))
        else:
            (t,) = owners
            cell = subdiv.cells[t]
            # orient the edge as it runs in the CCW cell, outward normal is to its right
            for p, q in cell.edges():
                if {p, q} == {a, b}:
                    break
            d = _primitive((q[1] - p[1], p[0] - q[0]))
            edges.append(CurveEdge(t, None, d, w, (a, b), vertices[t]))
    return TropicalCurve(vertices, edges, subdiv.support)


# --------------------------------------------------------------------------
# Certificates


@dataclass
class EdgeCheck:
    index: int
    orthogonal: bool
    weight_ok: bool
    dual_ok: bool
    on_tie: bool

    @property
    def ok(self) -> bool:
        return self.orthogonal and self.weight_ok and self.dual_ok and self.on_tie


@dataclass
class DualityReport:
    edges: list[EdgeCheck]
    bijective: bool
    vertices_ok: bool
    balancing: list[tuple[int, int]]

    @property
    def balanced(self) -> bool:
        return all(s == (0, 0) for s in self.balancing)

    @property
    def passed(self) -> bool:
        return self.bijective and self.vertices_ok and self.balanced and all(e.ok for e in self.edges)

    @property
    def failed_edges(self) -> list[int]:
        return [e.index for e in self.edges if not e.ok]


def check_duality(curve: TropicalCurve, subdiv: DualSubdivision, tp: TropicalPolynomial | None = None) -> DualityReport:
    """Exact edge-by-edge comparison of a corner locus with a subdivision.

    Every edge direction must be orthogonal to its dual pair, carry the
    integer length of that pair as weight, and the edge sets must match
    one to one.  With ``tp`` given, each edge anchor is also checked to be
    a tie ``v_a + <a, x> = v_b + <b, x>``.
    """
    if curve.support and curve.support != subdiv.support:
        raise ValueError("curve and subdivision come from different polynomials")
    sub_edges = subdiv.edges()
    values = tp.values if tp is not None else None
    checks = []
    seen: list[frozenset] = []
    for k, e in enumerate(curve.edges):
        a, b = e.dual
        diff = (a[0] - b[0], a[1] - b[1])
        orth = diff[0] * e.direction[0] + diff[1] * e.direction[1] == 0
        weight_ok = e.weight == integer_length(LatticeSegment(a, b))
        key = frozenset((a, b))
        dual_ok = key in sub_edges
        tie = True
        if values is not None:
            x = e.anchor
            tie = values[a] + a[0] * x[0] + a[1] * x[1] == values[b] + b[0] * x[0] + b[1] * x[1]
        checks.append(EdgeCheck(k, orth, weight_ok, dual_ok, tie))
        seen.append(key)
    bijective = len(seen) == len(set(seen)) and set(seen) == set(sub_edges)
    two_cells = [c for c in subdiv.cells if c.dimension == 2]
    vertices_ok = len(two_cells) == len(curve.vertices) and all(
        c.dual_point == v for c, v in zip(two_cells, curve.vertices)
    )
    return DualityReport(checks, bijective, vertices_ok, curve.balancing())
