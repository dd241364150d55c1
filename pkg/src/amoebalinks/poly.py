"""Sparse bivariate Laurent polynomials, their text format, Newton polygons
and integer lattice helpers.

Polynomials are immutable maps ``(i, j) -> complex`` standing for
``sum a_ij z^i w^j``.  The text grammar accepted by :func:`parse_polynomial`
is a sum of terms, each term being an optional coefficient followed by
powers of ``z`` and ``w``::

    1 + 2z + 2w + z*w
    w^2 - z^3
    1 + tau*z^2 + tau*w^3 + z^2*w^3
    (0.5,-1)*z^-1*w + 3

``z1``/``z2`` are accepted as aliases of ``z``/``w``.  Complex literals are
written ``(re,im)``; there is no imaginary-unit token.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

PRUNE_TOL = 1e-14

Exponent = tuple[int, int]


class PolynomialError(ValueError):
    """Raised for malformed or degenerate polynomial input."""


class ParseError(PolynomialError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# --------------------------------------------------------------------------
# Lattice types


@dataclass(frozen=True)
class LatticeMatrix:
    """Integer 2x2 matrix ``(a b; c d)`` acting on column exponent vectors."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for v in (self.a, self.b, self.c, self.d):
            if int(v) != v:
                raise PolynomialError("lattice matrix entries must be integers")
        if self.det == 0:
            raise PolynomialError(f"singular lattice matrix {self.entries}")

    @classmethod
    def parse(cls, text: str) -> "LatticeMatrix":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise PolynomialError(f"matrix needs four entries a,b,c,d, got {text!r}")
        try:
            return cls(*(int(p) for p in parts))
        except ValueError as exc:
            raise PolynomialError(f"bad matrix entries {text!r}") from exc

    @classmethod
    def diag(cls, p: int, q: int) -> "LatticeMatrix":
        return cls(p, 0, 0, q)

    @property
    def entries(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    @property
    def rows(self) -> tuple[tuple[int, int], tuple[int, int]]:
        return ((self.a, self.b), (self.c, self.d))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def apply(self, v: Exponent) -> Exponent:
        i, j = v
        return (self.a * i + self.b * j, self.c * i + self.d * j)

    def __matmul__(self, other: "LatticeMatrix") -> "LatticeMatrix":
        return LatticeMatrix(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def transpose(self) -> "LatticeMatrix":
        return LatticeMatrix(self.a, self.c, self.b, self.d)

    def inverse(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        """Exact rational inverse as nested row tuples."""
        det = self.det
        return (
            (Fraction(self.d, det), Fraction(-self.b, det)),
            (Fraction(-self.c, det), Fraction(self.a, det)),
        )


@dataclass(frozen=True)
class LatticeSegment:
    A: Exponent
    B: Exponent


def integer_length(s: LatticeSegment) -> int:
    """Number of lattice points on the segment minus one."""
    return math.gcd(abs(s.B[0] - s.A[0]), abs(s.B[1] - s.A[1]))


# --------------------------------------------------------------------------
# Polynomials


class LaurentPolynomial:
    """Immutable sparse Laurent polynomial in ``z`` and ``w``.

    Coefficients with modulus below ``PRUNE_TOL`` are dropped on
    construction.  The zero polynomial is representable (``is_zero``) so
    that derivatives of constants have somewhere to go, but the parser and
    most geometric operations reject it.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Exponent, complex] | Iterable[tuple[Exponent, complex]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, complex] = {}
        for (i, j), c in items:
            key = (int(i), int(j))
            acc[key] = acc.get(key, 0j) + complex(c)
        self._terms = {k: v for k, v in sorted(acc.items()) if abs(v) >= PRUNE_TOL}

    @property
    def terms(self) -> dict[Exponent, complex]:
        return dict(self._terms)

    @property
    def support(self) -> list[Exponent]:
        return list(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self):
        return iter(self._terms.items())

    def __getitem__(self, key: Exponent) -> complex:
        return self._terms.get(key, 0j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LaurentPolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(tuple(self._terms.items()))

    def __repr__(self) -> str:
        return f"LaurentPolynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)

    def scale(self, factor: complex) -> "LaurentPolynomial":
        return LaurentPolynomial({k: v * factor for k, v in self._terms.items()})

    @property
    def max_abs_coeff(self) -> float:
        return max((abs(v) for v in self._terms.values()), default=0.0)

    def w_degree_range(self) -> tuple[int, int]:
        js = [j for _, j in self._terms]
        return min(js), max(js)

    def has_negative_exponents(self) -> bool:
        return any(i < 0 or j < 0 for i, j in self._terms)


def evaluate(p: LaurentPolynomial, z: complex, w: complex) -> complex:
    """Value of ``p`` at ``(z, w)``; integer powers are exact products."""
    total = 0j
    for (i, j), c in p:
        if (z == 0 and i < 0) or (w == 0 and j < 0):
            raise ZeroDivisionError("zero base raised to a negative exponent")
        # complex ** int goes through binary exponentiation for moderate |n|
        total += c * (complex(z) ** i) * (complex(w) ** j)
    return total


def partial_derivative(p: LaurentPolynomial, var: str) -> LaurentPolynomial:
    """Term-wise derivative with respect to ``"z"`` or ``"w"``.

    The derivative of a polynomial free of ``var`` is the zero polynomial
    (``result.is_zero``).
    """
    var = var.lower()
    if var not in ("z", "w"):
        raise ValueError(f"unknown variable {var!r}")
    out = {}
    for (i, j), c in p:
        if var == "z" and i != 0:
            out[(i - 1, j)] = i * c
        elif var == "w" and j != 0:
            out[(i, j - 1)] = j * c
    return LaurentPolynomial(out)


def apply_matrix(p: LaurentPolynomial, L: LatticeMatrix) -> LaurentPolynomial:
    """Monomial change ``z^alpha -> z^(L alpha)`` with coefficients kept."""
    if L.det == 0:
        raise PolynomialError("apply_matrix needs an invertible matrix")
    return LaurentPolynomial({L.apply(k): v for k, v in p})


# --------------------------------------------------------------------------
# Newton polygon


@dataclass(frozen=True)
class NewtonPolygon:
    """Counter-clockwise vertices of the convex hull of a support."""

    vertices: tuple[Exponent, ...]

    @property
    def dimension(self) -> int:
        return min(len(self.vertices) - 1, 2)

    @property
    def twice_area(self) -> int:
        v = self.vertices
        if len(v) < 3:
            return 0
        s = 0
        for k in range(len(v)):
            x0, y0 = v[k]
            x1, y1 = v[(k + 1) % len(v)]
            s += x0 * y1 - x1 * y0
        return abs(s)

    def edges(self) -> list[tuple[Exponent, Exponent]]:
        v = self.vertices
        if len(v) < 2:
            return []
        if len(v) == 2:
            return [(v[0], v[1])]
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points: Iterable[tuple]) -> list[tuple]:
    """Monotone-chain hull, CCW, collinear points removed.

    Works with any exactly comparable coordinates (ints, Fractions).
    A collinear input returns its two extreme points, a single point itself.
    """
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def newton_polygon(p: LaurentPolynomial) -> NewtonPolygon:
    if p.is_zero:
        raise PolynomialError("the zero polynomial has no Newton polygon")
    return NewtonPolygon(tuple(convex_hull(p.support)))


# --------------------------------------------------------------------------
# Text format

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>tau|z1|z2|z|w)
  | (?P<op>[-+*^(),])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, tau: float | None):
        self.text = text
        self.tau = tau
        self.tokens = _tokenize(text)
        self.k = 0

    @property
    def tok(self):
        return self.tokens[self.k]

    def advance(self):
        t = self.tokens[self.k]
        self.k += 1
        return t

    def expect(self, value: str):
        kind, text, pos = self.tok
        if text != value:
            raise ParseError(f"expected {value!r}, found {text or 'end of input'!r}", pos)
        self.advance()

    def signed_number(self) -> float:
        sign = 1.0
        while self.tok[1] in ("+", "-"):
            if self.advance()[1] == "-":
                sign = -sign
        kind, text, pos = self.tok
        if kind != "num":
            raise ParseError("expected a number", pos)
        self.advance()
        return sign * float(text)

    def integer(self) -> int:
        sign = 1
        if self.tok[1] in ("+", "-"):
            sign = -1 if self.advance()[1] == "-" else 1
        kind, text, pos = self.tok
        if kind != "num" or not text.isdigit():
            raise ParseError("expected an integer exponent", pos)
        self.advance()
        return sign * int(text)

    def factor(self) -> tuple[complex, Exponent] | None:
        kind, text, pos = self.tok
        if kind == "num":
            self.advance()
            return complex(float(text)), (0, 0)
        if text == "(":
            self.advance()
            re_part = self.signed_number()
            self.expect(",")
            im_part = self.signed_number()
            self.expect(")")
            return complex(re_part, im_part), (0, 0)
        if kind == "name":
            self.advance()
            if text == "tau":
                if self.tau is None:
                    raise ParseError("'tau' used but no value supplied", pos)
                return complex(self.tau), (0, 0)
            power = 1
            if self.tok[1] == "^":
                self.advance()
                if self.tok[1] == "(":
                    self.advance()
                    power = self.integer()
                    self.expect(")")
                else:
                    power = self.integer()
            if text in ("z", "z1"):
                return 1 + 0j, (power, 0)
            return 1 + 0j, (0, power)
        return None

    def term(self) -> tuple[complex, Exponent]:
        coeff, (i, j) = 1 + 0j, (0, 0)
        got_any = False
        while True:
            start = self.tok[2]
            f = self.factor()
            if f is None:
                if not got_any:
                    raise ParseError("expected a term", start)
                if self.tok[1] == "*":
                    raise ParseError("dangling '*'", self.tok[2])
                return coeff, (i, j)
            got_any = True
            c, (di, dj) = f
            coeff *= c
            i, j = i + di, j + dj
            if self.tok[1] == "*":
                self.advance()
                if self.tok[0] == "end" or self.tok[1] in "+-)":
                    raise ParseError("dangling '*'", self.tok[2])

    def polynomial(self) -> dict[Exponent, complex]:
        acc: dict[Exponent, complex] = {}
        sign = 1.0
        if self.tok[1] in ("+", "-"):
            sign = -1.0 if self.advance()[1] == "-" else 1.0
        while True:
            c, key = self.term()
            acc[key] = acc.get(key, 0j) + sign * c
            kind, text, pos = self.tok
            if kind == "end":
                return acc
            if text not in ("+", "-"):
                raise ParseError(f"unexpected token {text!r}", pos)
            self.advance()
            sign = -1.0 if text == "-" else 1.0


def parse_polynomial(text: str, tau: float | None = None) -> LaurentPolynomial:
    """Parse the polynomial text format; see the module docstring."""
    terms = _Parser(text, tau).polynomial()
    p = LaurentPolynomial(terms)
    if p.is_zero:
        raise PolynomialError(f"all terms of {text!r} cancel")
    return p


def _fmt(x: float) -> str:
    return format(x, ".17g")


def format_polynomial(p: LaurentPolynomial) -> str:
    """Canonical text: lexicographic exponent order, 17 significant digits.

    ``parse_polynomial(format_polynomial(p)) == p`` holds exactly.
    """
    if p.is_zero:
        return "0"
    parts = []
    for (i, j), c in p:
        s = f"({_fmt(c.real)},{_fmt(c.imag)})"
        if i:
            s += "*z" if i == 1 else f"*z^{i}"
        if j:
            s += "*w" if j == 1 else f"*w^{j}"
        parts.append(s)
    return " + ".join(parts)
