"""Closed points of tori and affine spaces over finite fields.

A closed point of X/F_q of degree f is a q-power Frobenius orbit of size
exactly f inside X(F_{q^f}).  Orbits are represented by their
lexicographically least coordinate tuple (integer element codes of the
common field realization over F_p), so enumeration order is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import gf
from .errors import DomainError, ResourceError, ShapeError
from .towers import PadicNumber, Tower, teichmuller, vp_int

ENUM_GUARD = 10_000_000

TORUS = "torus"
AFFINE = "affine-space"


@dataclass(frozen=True)
class BaseScheme:
    """G_m^n ('torus') or A^n ('affine-space') over F_q."""

    kind: str
    n: int
    q: int

    def __post_init__(self):
        if self.kind not in (TORUS, AFFINE):
            raise DomainError(f"unknown scheme kind {self.kind!r}")
        if self.n < 1:
            raise DomainError("dimension must be >= 1")
        p, f0 = _prime_power(self.q)
        object.__setattr__(self, "_p", p)
        object.__setattr__(self, "_f0", f0)

    @property
    def p(self) -> int:
        return self._p

    @property
    def f0(self) -> int:
        return self._f0

    def count_rational_points(self, m: int) -> int:
        """#X(F_{q^m}), exactly."""
        if self.kind == TORUS:
            return (self.q ** m - 1) ** self.n
        return self.q ** (m * self.n)

    def allows_exponent(self, expo) -> bool:
        if self.kind == AFFINE:
            return min(expo) >= 0
        return True


def _prime_power(q: int):
    for p in range(2, q + 1):
        if q % p == 0:
            f0 = vp_int(q, p)
            if p ** f0 != q:
                raise DomainError(f"{q} is not a prime power")
            return p, f0
    raise DomainError(f"{q} is not a prime power")


@dataclass(frozen=True)
class ClosedPoint:
    """A Frobenius orbit: degree and lex-least representative coordinates."""

    scheme: BaseScheme
    degree: int
    rep: tuple[int, ...]  # element codes in the field of definition

    @property
    def field(self) -> gf.GF:
        return gf.field(self.scheme.p, self.scheme.f0 * self.degree)

    def orbit(self) -> list[tuple[int, ...]]:
        F, q = self.field, self.scheme.q
        out = [self.rep]
        cur = self.rep
        for _ in range(self.degree - 1):
            cur = tuple(F.frobenius(a, q) for a in cur)
            out.append(cur)
        return out

    def __repr__(self):
        return f"<point deg={self.degree} rep={self.rep} over F_{self.scheme.q}>"


def enumerate_closed_points(X: BaseScheme, f_max: int) -> list[ClosedPoint]:
    """All closed points of degree <= f_max, sorted by (degree, rep)."""
    out = []
    for f in range(1, f_max + 1):
        out.extend(_points_of_degree(X, f))
    return out


@lru_cache(maxsize=None)
def _points_of_degree_cached(kind, n, q, f):
    return _points_of_degree_impl(BaseScheme(kind, n, q), f)


def _points_of_degree(X: BaseScheme, f: int) -> list[ClosedPoint]:
    return _points_of_degree_cached(X.kind, X.n, X.q, f)


def _points_of_degree_impl(X: BaseScheme, f: int) -> list[ClosedPoint]:
    if X.q ** (f * X.n) > ENUM_GUARD:
        raise ResourceError(
            f"enumeration of X(F_{X.q}^{f}) exceeds the desk-scale guard")
    F = gf.field(X.p, X.f0 * f)
    q = X.q
    if X.kind == TORUS:
        coords = [a for a in F.elements() if a != 0]
    else:
        coords = list(F.elements())
    seen = set()
    points = []
    for tup in _tuples(coords, X.n):
        if tup in seen:
            continue
        orbit = [tup]
        cur = tup
        while True:
            cur = tuple(F.frobenius(a, q) for a in cur)
            if cur == tup:
                break
            orbit.append(cur)
        if len(orbit) == f:
            rep = min(orbit)
            points.append(ClosedPoint(X, f, rep))
        for el in orbit:
            seen.add(el)
    points.sort(key=lambda pt: pt.rep)
    return points


def _tuples(coords, n):
    if n == 1:
        for a in coords:
            yield (a,)
        return
    import itertools
    yield from itertools.product(coords, repeat=n)


def zeta_point_count_check(X: BaseScheme, m_max: int) -> list[tuple[int, int, int]]:
    """Verify sum_{f | m} f * a_f = #X(F_{q^m}) for m <= m_max.

    Returns (m, lhs, rhs) triples; raises on any mismatch.
    """
    counts = {}
    rows = []
    for f in range(1, m_max + 1):
        counts[f] = len(_points_of_degree(X, f))
    for m in range(1, m_max + 1):
        lhs = sum(f * counts[f] for f in range(1, m + 1) if m % f == 0)
        rhs = X.count_rational_points(m)
        rows.append((m, lhs, rhs))
        if lhs != rhs:
            raise AssertionError(
                f"point-count consistency fails at m={m}: {lhs} != {rhs}")
    return rows


def teich_lift_point(pt: ClosedPoint, tower: Tower) -> list[PadicNumber]:
    """Coordinate-wise Teichmüller lift of a closed point into R_f.

    The tower must realize the residue field of the point: its unramified
    degree over F_p is f0 * degree, with the canonical defining polynomial.
    """
    need_f = pt.scheme.f0 * pt.degree
    if tower.p != pt.scheme.p:
        raise ShapeError("tower characteristic does not match the scheme")
    if tower.f != need_f:
        raise ShapeError(
            f"tower residue degree {tower.f} != point field degree {need_f}")
    if tuple(tower.upoly) != tuple(pt.field.modpoly):
        raise ShapeError("tower residue polynomial differs from the "
                         "canonical field realization")
    return [teichmuller(tower, a) for a in pt.rep]


def point_table(points: list[ClosedPoint]) -> str:
    """Plain-text table (degree, coordinate codes) for export."""
    lines = ["degree\tcoordinates"]
    for pt in points:
        lines.append(f"{pt.degree}\t{','.join(str(a) for a in pt.rep)}")
    return "\n".join(lines) + "\n"
