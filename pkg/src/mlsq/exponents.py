"""Exact Lebesgue exponents and the exponent geometry of the multilinear Young bound.

Every quantity here is an exact rational (``fractions.Fraction``); floats never
enter.  Points of the reciprocal cube ``[0, 1]^m`` are plain tuples of
``Fraction`` and stand for ``(1/p_1, ..., 1/p_m)`` with ``1/inf = 0``.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

__all__ = [
    "Exponent",
    "INF",
    "ONE",
    "Regime",
    "RegimeLabel",
    "ReciprocalPoint",
    "dual",
    "holder_exponent",
    "young_exponent",
    "classify_regime",
    "vertices_V",
    "vertices_W",
    "vertices_U",
    "slice_vertices",
    "interpolation_parameter",
    "hull_decompose",
    "in_convex_hull",
    "format_rational",
]

ReciprocalPoint = tuple  # tuple[Fraction, ...]
Rational = Union[int, Fraction, str]


@dataclass(frozen=True, order=False)
class Exponent:
    """An exact exponent in (0, inf].

    ``infinite`` overrides numerator/denominator.  Finite values are stored in
    lowest terms.  Values below 1 are allowed because Hölder sums such as
    ``1/2 + 0 + 1`` produce them; :func:`dual` rejects them.
    """

    numerator: int = 1
    denominator: int = 1
    infinite: bool = False

    def __post_init__(self) -> None:
        if self.infinite:
            object.__setattr__(self, "numerator", 1)
            object.__setattr__(self, "denominator", 0)
            return
        if self.denominator <= 0:
            raise ValueError("denominator must be positive")
        if self.numerator <= 0:
            raise ValueError("exponent must be positive")
        g = math.gcd(self.numerator, self.denominator)
        object.__setattr__(self, "numerator", self.numerator // g)
        object.__setattr__(self, "denominator", self.denominator // g)

    @classmethod
    def of(cls, value: Union["Exponent", Rational, float]) -> "Exponent":
        """Coerce ints, Fractions, ``"3/2"``, ``"inf"`` and exactly-representable floats."""
        if isinstance(value, Exponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in {"inf", "infinity", "oo", "∞"}:
                return INF
            value = Fraction(text)
        elif isinstance(value, float):
            if math.isinf(value):
                return INF
            value = Fraction(value)
        value = Fraction(value)
        return cls(value.numerator, value.denominator)

    @classmethod
    def from_reciprocal(cls, recip: Fraction) -> "Exponent":
        recip = Fraction(recip)
        if recip < 0:
            raise ValueError(f"negative reciprocal {recip}")
        if recip == 0:
            return INF
        return cls.of(1 / recip)

    @property
    def value(self) -> Optional[Fraction]:
        return None if self.infinite else Fraction(self.numerator, self.denominator)

    @property
    def reciprocal(self) -> Fraction:
        return Fraction(0) if self.infinite else Fraction(self.denominator, self.numerator)

    def __float__(self) -> float:
        return math.inf if self.infinite else self.numerator / self.denominator

    def _key(self):
        return (1, Fraction(0)) if self.infinite else (0, self.value)

    def __lt__(self, other):
        return self._key() < Exponent.of(other)._key()

    def __le__(self, other):
        return self._key() <= Exponent.of(other)._key()

    def __gt__(self, other):
        return self._key() > Exponent.of(other)._key()

    def __ge__(self, other):
        return self._key() >= Exponent.of(other)._key()

    def __str__(self) -> str:
        if self.infinite:
            return "inf"
        return format_rational(self.value)

    def __repr__(self) -> str:
        return f"Exponent({self})"


INF = Exponent(infinite=True)
ONE = Exponent(1)


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def dual(p) -> Exponent:
    """Dual exponent p/(p-1), with 1' = inf and inf' = 1."""
    p = Exponent.of(p)
    if p.infinite:
        return ONE
    if p.value < 1:
        raise ValueError(f"dual exponent undefined for p = {p} < 1")
    if p.value == 1:
        return INF
    return Exponent.of(p.value / (p.value - 1))


def holder_exponent(ps: Sequence) -> Exponent:
    """p with 1/p = sum 1/p_j."""
    ps = [Exponent.of(p) for p in ps]
    if not ps:
        raise ValueError("empty exponent list")
    for p in ps:
        if p < 1:
            raise ValueError(f"Hölder inputs must be >= 1, got {p}")
    return Exponent.from_reciprocal(sum((p.reciprocal for p in ps), Fraction(0)))


def young_exponent(p, r) -> Exponent:
    """q with 1/q + 1 = 1/p + 1/r."""
    p, r = Exponent.of(p), Exponent.of(r)
    recip = p.reciprocal + r.reciprocal - 1
    if recip < 0:
        raise ValueError(f"1/p + 1/r < 1 for p={p}, r={r}: q would exceed infinity")
    return Exponent.from_reciprocal(recip)


class Regime(str, enum.Enum):
    CASE_A = "CASE_A"
    CASE_B = "CASE_B"
    OUT_OF_RANGE = "OUT_OF_RANGE"


@dataclass(frozen=True)
class RegimeLabel:
    tag: Regime
    q: Optional[Exponent]


def classify_regime(p, r) -> RegimeLabel:
    """Label (p, r) for the multilinear Young inequality.

    CASE_A (weak norm on g): 1 < p < r', open at both ends, needs r finite.
    CASE_B (strong norm on g): r'/(1 + r') <= p <= 1, closed.

    Note: the older weak-type statement of this inequality is often quoted
    on the range r'/(1 + r') <= p < r', which overlaps both labels above.
    That weak-type form is false on [r'/(1+r'), 1], so the split used here is
    (1, r') weak / [r'/(1+r'), 1] strong; p = r' (q = inf) is OUT_OF_RANGE.
    """
    p, r = Exponent.of(p), Exponent.of(r)
    if r <= 1:
        raise ValueError(f"classify_regime needs r > 1, got {r}")
    rp = dual(r)
    try:
        q = young_exponent(p, r)
    except ValueError:
        q = None
    pv = p.value
    if p.infinite:
        return RegimeLabel(Regime.OUT_OF_RANGE, q)
    if not r.infinite and 1 < pv and p < rp:
        return RegimeLabel(Regime.CASE_A, q)
    lower = rp.value / (1 + rp.value)
    if lower <= pv <= 1:
        return RegimeLabel(Regime.CASE_B, q)
    return RegimeLabel(Regime.OUT_OF_RANGE, q)


def _unit(m: int, j: int) -> tuple:
    return tuple(Fraction(1) if k == j else Fraction(0) for k in range(m))


def vertices_V(m: int, r) -> list:
    """The m(m-1) points with one coordinate 1, another 1/r', the rest 0.

    Ordered by (position of the 1/r' entry, position of the 1 entry).
    """
    r = Exponent.of(r)
    if m < 3:
        raise ValueError("vertices_V needs m >= 3")
    if r.infinite:
        raise ValueError("r = inf collapses the V vertices; use vertices_W")
    if r <= 1:
        raise ValueError("vertices_V needs 1 < r < inf")
    small = dual(r).reciprocal
    pts = []
    for a, b in itertools.permutations(range(m), 2):
        pt = [Fraction(0)] * m
        pt[a] = small
        pt[b] = Fraction(1)
        pts.append(tuple(pt))
    return pts


def vertices_W(m: int) -> list:
    """The m(m-1)/2 points with exactly two coordinates equal to 1."""
    if m < 3:
        raise ValueError("vertices_W needs m >= 3")
    pts = []
    for a, b in itertools.combinations(range(m), 2):
        pt = [Fraction(0)] * m
        pt[a] = pt[b] = Fraction(1)
        pts.append(tuple(pt))
    return pts


def vertices_U(m: int) -> list:
    if m < 2:
        raise ValueError("vertices_U needs m >= 2")
    return [_unit(m, j) for j in range(m)]


def slice_vertices(m: int, level) -> list:
    """Vertices of [0,1]^m ∩ {x_1 + ... + x_m = level}, exactly.

    A vertex of the slice lies on an edge of the cube, so all coordinates but
    at most one are 0 or 1.  Enumerates those points in lexicographic order.
    """
    level = Fraction(level)
    found = set()
    for frac_pos in range(m):
        others = [k for k in range(m) if k != frac_pos]
        for bits in itertools.product((0, 1), repeat=m - 1):
            rest = level - sum(bits)
            if 0 <= rest <= 1:
                pt = [Fraction(0)] * m
                for k, bit in zip(others, bits):
                    pt[k] = Fraction(bit)
                pt[frac_pos] = rest
                found.add(tuple(pt))
    return sorted(found)


def interpolation_parameter(q, r) -> Fraction:
    """θ = r' (1/q - 1/r) for 1 <= q <= r; 1 at q = 1 and 0 at q = r."""
    q, r = Exponent.of(q), Exponent.of(r)
    if r <= 1:
        raise ValueError("interpolation_parameter needs r > 1")
    if q < 1 or q > r:
        raise ValueError(f"q = {q} outside [1, r = {r}]")
    rp = dual(r)
    diff = q.reciprocal - r.reciprocal
    return rp.value * diff


def _point(point) -> tuple:
    return tuple(Fraction(x) for x in point)


def hull_decompose(point, q, r) -> Optional[tuple]:
    """Certify a slice vertex as (1 - θ) U_j + θ V_i (W_i when r = inf).

    Returns ``(j, i)`` indexing :func:`vertices_U` and :func:`vertices_V` /
    :func:`vertices_W`, or ``None`` when ``point`` is not a vertex of the slice
    at level 1/q + 1/r'.  Raises if ``point`` is off that hyperplane.
    """
    pt = _point(point)
    q, r = Exponent.of(q), Exponent.of(r)
    m = len(pt)
    level = q.reciprocal + dual(r).reciprocal
    if sum(pt) != level:
        raise ValueError(f"point sums to {sum(pt)}, expected {level}")
    if any(x < 0 or x > 1 for x in pt):
        raise ValueError("point outside [0, 1]^m")
    if sum(1 for x in pt if 0 < x < 1) > 1:
        return None
    theta = interpolation_parameter(q, r)
    outer = vertices_W(m) if r.infinite else vertices_V(m, r)
    for j, u in enumerate(vertices_U(m)):
        for i, v in enumerate(outer):
            if all((1 - theta) * a + theta * b == x for a, b, x in zip(u, v, pt)):
                return (j, i)
    return None


def _solve_exact(rows: list, rhs: list) -> Optional[list]:
    """Gauss-Jordan over Fractions; None when inconsistent or underdetermined."""
    n_rows, n_cols = len(rows), len(rows[0])
    aug = [list(row) + [b] for row, b in zip(rows, rhs)]
    pivots = []
    r = 0
    for c in range(n_cols):
        piv = next((k for k in range(r, n_rows) if aug[k][c] != 0), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        lead = aug[r][c]
        aug[r] = [x / lead for x in aug[r]]
        for k in range(n_rows):
            if k != r and aug[k][c] != 0:
                f = aug[k][c]
                aug[k] = [x - f * y for x, y in zip(aug[k], aug[r])]
        pivots.append(c)
        r += 1
        if r == n_rows:
            break
    for k in range(r, n_rows):
        if aug[k][-1] != 0:
            return None
    if len(pivots) < n_cols:
        return None
    sol = [Fraction(0)] * n_cols
    for k, c in enumerate(pivots):
        sol[c] = aug[k][-1]
    return sol


def in_convex_hull(point, vertices: Sequence) -> Optional[dict]:
    """Exact convex-combination feasibility for m <= 4.

    Searches affinely independent vertex subsets (Carathéodory) and returns
    ``{vertex_index: weight}`` with nonnegative weights summing to 1, or
    ``None`` if ``point`` is outside the hull.
    """
    pt = _point(point)
    m = len(pt)
    if m > 4:
        raise ValueError("exact hull membership is only supported for m <= 4")
    verts = [_point(v) for v in vertices]
    for size in range(1, min(len(verts), m + 1) + 1):
        for idx in itertools.combinations(range(len(verts)), size):
            rows = [[verts[i][k] for i in idx] for k in range(m)]
            rows.append([Fraction(1)] * size)
            sol = _solve_exact(rows, list(pt) + [Fraction(1)])
            if sol is not None and all(w >= 0 for w in sol):
                return {i: w for i, w in zip(idx, sol)}
    return None
