"""Finite-rank Frobenius-module matrices over the coordinate ring.

A SigmaMatrix is a square matrix of Laurent elements describing a
sigma-linear endomorphism phi in a fixed basis, with the column
convention phi(e_j) = sum_i a_{ij} e_i.  The distinguished index i0
marks the rank-one unit-root corner when one exists; normality flags
are always *verified*, never trusted.

Fibres at closed points are computed in factored form
x(M) x(sigma M) ... x(sigma^{f-1} M), which equals the evaluation of the
f-fold sigma-power because evaluation is a ring homomorphism; the
symbolic sigma-power is kept as an independent cross-check route.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import (ConvergenceError, DomainError, FlagError,
                     IntegralityError, ResourceError, ShapeError)
from .laurent import LaurentElement
from .points import BaseScheme, ClosedPoint, enumerate_closed_points, \
    teich_lift_point
from .series import TruncatedSeries
from .towers import PadicNumber, Tower, int_pow, ord_pi

DEFAULT_ENTRY_SUPPORT_CAP = 60_000


class SigmaMatrix:
    """Square matrix of LaurentElements with an optional unit-root corner."""

    def __init__(self, tower: Tower, scheme: BaseScheme, entries, i0=None):
        """entries: dict {(i, j): LaurentElement} or nested list."""
        self.tower = tower
        self.scheme = scheme
        if isinstance(entries, dict):
            n = 1 + max(max(i, j) for i, j in entries)
            table = {}
            for (i, j), a in entries.items():
                table[(i, j)] = self._adopt(a)
            self.n = n
            self.entries = table
        else:
            self.n = len(entries)
            self.entries = {}
            for i, row in enumerate(entries):
                for j, a in enumerate(row):
                    a = self._adopt(a)
                    if not a.is_zero():
                        self.entries[(i, j)] = a
        self.i0 = i0
        for (i, j), a in self.entries.items():
            for expo in a.coeffs:
                if not scheme.allows_exponent(expo):
                    raise ShapeError(
                        "negative exponents are not functions on affine space")

    def _adopt(self, a):
        if isinstance(a, LaurentElement):
            if a.nvars != self.scheme.n:
                raise ShapeError("entry arity does not match the scheme")
            return a
        return LaurentElement.constant(self.tower, self.scheme.n, a)

    def entry(self, i: int, j: int) -> LaurentElement:
        got = self.entries.get((i, j))
        if got is None:
            return LaurentElement(self.tower, self.scheme.n)
        return got

    def rows(self):
        return [[self.entry(i, j) for j in range(self.n)]
                for i in range(self.n)]

    def map_entries(self, fn) -> "SigmaMatrix":
        out = {}
        for (i, j), a in self.entries.items():
            b = fn(a)
            if not b.is_zero():
                out[(i, j)] = b
        m = SigmaMatrix.__new__(SigmaMatrix)
        m.tower, m.scheme, m.n, m.i0 = self.tower, self.scheme, self.n, self.i0
        m.entries = out
        return m

    def __mul__(self, other: "SigmaMatrix") -> "SigmaMatrix":
        if self.n != other.n:
            raise ShapeError("matrix size mismatch")
        prod = {}
        for (i, k), a in self.entries.items():
            for j in range(other.n):
                b = other.entries.get((k, j))
                if b is None:
                    continue
                term = a * b
                if (i, j) in prod:
                    prod[(i, j)] = prod[(i, j)] + term
                else:
                    prod[(i, j)] = term
        m = SigmaMatrix.__new__(SigmaMatrix)
        m.tower, m.scheme, m.n, m.i0 = self.tower, self.scheme, self.n, self.i0
        m.entries = {k: v for k, v in prod.items() if not v.is_zero()}
        return m

    def equal_mod(self, other: "SigmaMatrix", pi_digits: int) -> bool:
        for i in range(self.n):
            for j in range(self.n):
                d = self.entry(i, j) - other.entry(i, j)
                if not d.in_pi_power(pi_digits):
                    return False
        return True

    def max_support(self) -> int:
        return max((a.max_abs_exponent() for a in self.entries.values()),
                   default=0)

    def as_exact(self, tower2: Tower) -> "SigmaMatrix":
        m = SigmaMatrix.__new__(SigmaMatrix)
        m.tower, m.scheme, m.n, m.i0 = tower2, self.scheme, self.n, self.i0
        m.entries = {k: a.as_exact(tower2) for k, a in self.entries.items()}
        return m

    def project(self, tower2: Tower) -> "SigmaMatrix":
        m = SigmaMatrix.__new__(SigmaMatrix)
        m.tower, m.scheme, m.n, m.i0 = tower2, self.scheme, self.n, self.i0
        m.entries = {k: a.project(tower2) for k, a in self.entries.items()}
        return m

    # -- normality flags (verified on demand) --------------------------------

    def is_one_normal(self) -> bool:
        """Corner = 1 mod pi and every other entry in pi*A."""
        if self.i0 is None:
            return False
        one = LaurentElement.constant(self.tower, self.scheme.n, 1)
        for i in range(self.n):
            for j in range(self.n):
                a = self.entry(i, j)
                if (i, j) == (self.i0, self.i0):
                    if not (a - one).in_pi_power(1):
                        return False
                elif not a.in_pi_power(1):
                    return False
        return True

    def is_standard_normal(self) -> bool:
        """Zero column below an invertible corner, the rest in pi*A."""
        if self.i0 is None:
            return False
        for i in range(self.n):
            if i != self.i0 and not self.entry(i, self.i0).is_zero():
                return False
        corner = self.entry(self.i0, self.i0)
        try:
            corner.unit_monomial_split()
        except Exception:
            return False
        for i in range(self.n):
            for j in range(self.n):
                if j == self.i0 or (i, j) == (self.i0, self.i0):
                    continue
                if not self.entry(i, j).in_pi_power(1):
                    return False
        return True

    def is_standard_one_normal(self) -> bool:
        return self.is_one_normal() and self.is_standard_normal()

    def corner(self) -> LaurentElement:
        if self.i0 is None:
            raise FlagError("matrix has no distinguished corner index")
        return self.entry(self.i0, self.i0)

    def __repr__(self):
        return (f"<sigma-matrix {self.n}x{self.n} over {self.scheme.kind} "
                f"q={self.scheme.q}, i0={self.i0}>")


# -- sigma powers and fibres -------------------------------------------------------


def sigma_power(M: SigmaMatrix, f: int,
                support_cap: int = DEFAULT_ENTRY_SUPPORT_CAP) -> SigmaMatrix:
    """The product M sigma(M) ... sigma^{f-1}(M); support grows like q^f."""
    if f < 1:
        raise DomainError("sigma power needs f >= 1")
    q = M.scheme.q
    out = M
    for j in range(1, f):
        out = out * M.map_entries(lambda a: a.sigma(q, j))
        biggest = max((len(a.coeffs) for a in out.entries.values()),
                      default=0)
        if biggest > support_cap:
            raise ResourceError("sigma-power support cap exceeded")
    return out


@dataclass
class FibreMatrix:
    """A fibre of a SigmaMatrix: square over R_f, with the corner index."""

    tower: Tower              # extension tower R_f
    n: int
    entries: list             # nested list of PadicNumber
    i0: int = None
    point: ClosedPoint = None

    def entry(self, i, j) -> PadicNumber:
        return self.entries[i][j]

    def trace(self) -> PadicNumber:
        acc = self.tower.zero()
        for i in range(self.n):
            acc = acc + self.entries[i][i]
        return acc

    def is_standard_one_unit(self) -> bool:
        """Zero column below a one-unit corner, other entries in pi."""
        if self.i0 is None:
            return False
        t = self.tower
        for i in range(self.n):
            for j in range(self.n):
                a = self.entries[i][j]
                o = ord_pi(a)
                if (i, j) == (self.i0, self.i0):
                    if ord_pi(a - t.one()) == 0:
                        return False
                elif i != self.i0 and j == self.i0:
                    if not a.is_zero():
                        return False
                elif o is not None and o < 1:
                    return False
        return True


def point_tower(M_tower: Tower, pt: ClosedPoint) -> Tower:
    return M_tower.extension(pt.scheme.f0 * pt.degree)


def fibre(M: SigmaMatrix, pt: ClosedPoint) -> FibreMatrix:
    """x(M^(sigma^f)) at the Teichmüller lift of the point, in R_f.

    Computed as the product of the evaluated factors x(sigma^j M); equal to
    evaluating the symbolic sigma-power since evaluation is multiplicative.
    """
    ext = point_tower(M.tower, pt)
    coords = teich_lift_point(pt, ext)
    q = M.scheme.q
    f = pt.degree
    # coordinates of sigma^j of the point: q^j-th powers
    mats = []
    cur = coords
    for j in range(f):
        vals = [[M.entry(i, k).evaluate(cur) for k in range(M.n)]
                for i in range(M.n)]
        mats.append(vals)
        if j + 1 < f:
            cur = [int_pow(c, q) for c in cur]
    prod = mats[0]
    for nxt in mats[1:]:
        prod = _matmul(prod, nxt, ext)
    return FibreMatrix(ext, M.n, prod, M.i0, pt)


def _matmul(A, B, tower):
    n = len(A)
    m = len(B[0])
    k = len(B)
    out = [[tower.zero() for _ in range(m)] for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        for t in range(k):
            a = Ai[t]
            if a.is_zero():
                continue
            Bt = B[t]
            row = out[i]
            for j in range(m):
                row[j] = row[j] + a * Bt[j]
    return out


# -- tensor and exterior powers -----------------------------------------------------


def tensor(M: SigmaMatrix, M2: SigmaMatrix) -> SigmaMatrix:
    """Kronecker product on the lex-ordered pair basis."""
    if M.scheme != M2.scheme or not M.tower.same_field(M2.tower):
        raise ShapeError("tensor factors live over different bases")
    n2 = M2.n
    entries = {}
    for (i1, j1), a in M.entries.items():
        for (i2, j2), b in M2.entries.items():
            entries[(i1 * n2 + i2, j1 * n2 + j2)] = a * b
    i0 = None
    if M.i0 is not None and M2.i0 is not None:
        i0 = M.i0 * n2 + M2.i0
    m = SigmaMatrix.__new__(SigmaMatrix)
    m.tower, m.scheme, m.n, m.i0 = M.tower, M.scheme, M.n * n2, i0
    m.entries = {k: v for k, v in entries.items() if not v.is_zero()}
    return m


def wedge(M: SigmaMatrix, k: int) -> SigmaMatrix:
    """k-th exterior power on ascending k-subsets (entries are k-minors)."""
    if k < 0 or k > M.n:
        raise ShapeError("wedge index out of range")
    if k == 0:
        m = SigmaMatrix.__new__(SigmaMatrix)
        m.tower, m.scheme, m.n, m.i0 = M.tower, M.scheme, 1, None
        m.entries = {(0, 0): LaurentElement.constant(M.tower, M.scheme.n, 1)}
        return m
    subsets = list(itertools.combinations(range(M.n), k))
    index = {s: t for t, s in enumerate(subsets)}
    entries = {}
    for s1 in subsets:
        for s2 in subsets:
            minor = _laurent_minor(M, s1, s2)
            if not minor.is_zero():
                entries[(index[s1], index[s2])] = minor
    m = SigmaMatrix.__new__(SigmaMatrix)
    m.tower, m.scheme, m.n, m.i0 = M.tower, M.scheme, len(subsets), None
    m.entries = entries
    return m


def _laurent_minor(M: SigmaMatrix, rows, cols) -> LaurentElement:
    acc = LaurentElement(M.tower, M.scheme.n)
    for perm in itertools.permutations(range(len(rows))):
        term = LaurentElement.constant(M.tower, M.scheme.n, 1)
        for a, b in enumerate(perm):
            term = term * M.entry(rows[b], cols[a])
        sign = _perm_sign(perm)
        acc = acc + (term if sign > 0 else -term)
    return acc


def _perm_sign(perm):
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


# -- characteristic series (division-free Berkowitz) ---------------------------------


def det_one_minus_T(A: FibreMatrix) -> list[PadicNumber]:
    """Coefficients of det(1 - A*T), degree 0..n, exactly (Berkowitz)."""
    tower = A.tower
    n = A.n
    char = _berkowitz(A.entries, n, tower)  # det(tI - A) coefficients, c[n]=1
    # det(1 - TA) = sum_k c[n-k] * (-1)^k ... via det(tI-A) = prod(t - l):
    # det(1-TA) = prod(1 - lT) = T^n * det((1/T)I - A) = sum_i c[i] T^(n-i)
    return [char[n - k] for k in range(n + 1)]


def _berkowitz(A, n, tower):
    """Characteristic polynomial det(tI - A), little-endian in t."""
    one, zero = tower.one(), tower.zero()
    if n == 0:
        return [one]
    vec = [one, -A[0][0]]  # big-endian: leading coefficient first
    for r in range(1, n):
        row = [A[r][j] for j in range(r)]
        col = [A[i][r] for i in range(r)]
        block = [[A[i][j] for j in range(r)] for i in range(r)]
        # Toeplitz column: 1, -a_rr, -(R S), -(R B S), -(R B^2 S), ...
        toep = [one, -A[r][r]]
        cur = col
        for _ in range(r):
            dot = zero
            for a, b in zip(row, cur):
                dot = dot + a * b
            toep.append(-dot)
            cur = [_dotrow(block[i], cur, zero) for i in range(r)]
        new = [zero] * (r + 2)
        for i, t in enumerate(toep):
            if i > r + 1:
                break
            for j, v in enumerate(vec):
                if i + j <= r + 1:
                    new[i + j] = new[i + j] + t * v
        vec = new
    # Berkowitz vector is big-endian (leading coefficient first)
    return list(reversed(vec))


def _dotrow(row, vec, zero):
    acc = zero
    for a, b in zip(row, vec):
        acc = acc + a * b
    return acc


# -- Euler products ------------------------------------------------------------------


def euler_factor(M: SigmaMatrix, pt: ClosedPoint, trunc: int
                 ) -> TruncatedSeries:
    """1 / det(1 - M_x T^deg) as a base-tower series mod T^(trunc+1).

    The determinant coefficients are checked to descend to the base ring.
    """
    fib = fibre(M, pt)
    dets = det_one_minus_T(fib)
    f = pt.degree
    poly = TruncatedSeries(M.tower, ("T",), (trunc,))
    for k, c in enumerate(dets):
        if k * f > trunc:
            break
        try:
            base = c.descend()
        except IntegralityError:
            raise IntegralityError(
                f"Euler factor coefficient at {pt} does not lie in the "
                "base ring (convention bug)")
        poly._set((k * f,), base)
    return poly.inverse()


def euler_L(M: SigmaMatrix, X: BaseScheme, D: int) -> TruncatedSeries:
    """L(M, T) = prod over closed points of deg <= D of the Euler factors."""
    if D < 1:
        raise DomainError("truncation order must be >= 1")
    if X != M.scheme:
        raise ShapeError("matrix entries live on a different scheme")
    out = TruncatedSeries.one(M.tower, ("T",), (D,))
    for pt in enumerate_closed_points(X, D):
        out = out * euler_factor(M, pt, D)
    return out


# -- unit-root splitting (finite-precision successive approximation) -----------------


def unit_root_split(M: SigmaMatrix, support_cap: int = DEFAULT_ENTRY_SUPPORT_CAP):
    """Split off the rank-one unit root part of a 1-normal matrix.

    Returns (S, M_std) with S invertible over the completed ring and
    S^{-1} M sigma(S) = M_std modulo pi^N, M_std standard 1-normal.  The
    below-corner column is killed one pi-power at a time; 1-normality makes
    the defect contract.
    """
    if not M.is_one_normal():
        raise FlagError("unit_root_split needs a 1-normal input")
    t, q, i0 = M.tower, M.scheme.q, M.i0
    N = t.N
    cur = M
    S = _identity(M)
    for level in range(1, N):
        defect_ord = min(
            (cur.entry(i, i0).min_ord_pi() or N
             for i in range(M.n) if i != i0),
            default=N)
        if defect_ord >= N:
            break
        if defect_ord < level:
            raise ConvergenceError(
                "below-corner defect failed to contract (input not "
                "1-normal at working precision?)")
        corner_inv = cur.corner().inverse(support_cap)
        E = {}
        for i in range(M.n):
            if i == i0:
                continue
            d = cur.entry(i, i0)
            if not d.is_zero():
                E[(i, i0)] = d * corner_inv
        if not E:
            break
        Smat = _identity(M)
        for k, v in E.items():
            Smat.entries[k] = v
        Sinv = _identity(M)
        for k, v in E.items():
            Sinv.entries[k] = -v
        cur = Sinv * cur * Smat.map_entries(lambda a: a.sigma(q, 1))
        S = S * Smat
        if max((len(a.coeffs) for a in cur.entries.values()), default=0) \
                > support_cap:
            raise ResourceError("support cap exceeded during splitting")
    # freeze: entries below the corner are 0 mod pi^N, i.e. zero here
    entries = dict(cur.entries)
    for i in range(M.n):
        if i != i0:
            entries.pop((i, i0), None)
    M_std = SigmaMatrix.__new__(SigmaMatrix)
    M_std.tower, M_std.scheme, M_std.n, M_std.i0 = t, M.scheme, M.n, i0
    M_std.entries = entries
    if not M_std.is_standard_one_normal():
        raise ConvergenceError("splitting did not reach standard 1-normal "
                               "form")
    return S, M_std


def _identity(M: SigmaMatrix) -> SigmaMatrix:
    m = SigmaMatrix.__new__(SigmaMatrix)
    m.tower, m.scheme, m.n, m.i0 = M.tower, M.scheme, M.n, M.i0
    m.entries = {(i, i): LaurentElement.constant(M.tower, M.scheme.n, 1)
                 for i in range(M.n)}
    return m


def sigma_similar_check(M: SigmaMatrix, S: SigmaMatrix, M2: SigmaMatrix,
                        pi_digits: int) -> bool:
    """Whether S^{-1} M sigma(S) = M2, verified as M sigma(S) = S M2."""
    q = M.scheme.q
    lhs = M * S.map_entries(lambda a: a.sigma(q, 1))
    rhs = S * M2
    return lhs.equal_mod(rhs, pi_digits)


# -- block structure ------------------------------------------------------------------


def block_split(M: SigmaMatrix, cut: int):
    """Split a block-triangular matrix at the index cut.

    Requires the lower-left block to vanish; returns the two diagonal
    blocks (first indices [0, cut), then [cut, n)).
    """
    for i in range(cut, M.n):
        for j in range(cut):
            if not M.entry(i, j).is_zero():
                raise ShapeError("matrix is not block-triangular at the cut")
    top = SigmaMatrix.__new__(SigmaMatrix)
    top.tower, top.scheme, top.n = M.tower, M.scheme, cut
    top.i0 = M.i0 if (M.i0 is not None and M.i0 < cut) else None
    top.entries = {(i, j): a for (i, j), a in M.entries.items()
                   if i < cut and j < cut}
    bot = SigmaMatrix.__new__(SigmaMatrix)
    bot.tower, bot.scheme, bot.n = M.tower, M.scheme, M.n - cut
    bot.i0 = M.i0 - cut if (M.i0 is not None and M.i0 >= cut) else None
    bot.entries = {(i - cut, j - cut): a for (i, j), a in M.entries.items()
                   if i >= cut and j >= cut}
    return top, bot


def ordinary_block_report(M: SigmaMatrix, breaks: list[int]) -> dict:
    """Slope bookkeeping for a block-triangular ordinary filtration.

    breaks = ascending interior cut indices.  Checks that the matrix is
    block-triangular along the cuts and that the ell-th diagonal block
    (0-based) is divisible by pi^ell, mirroring a filtration whose ell-th
    graded piece is pi^ell times a unit-root part.
    """
    cuts = list(breaks) + [M.n]
    tri = True
    prev = 0
    for cut in cuts:
        for i in range(cut, M.n):
            for j in range(prev, cut):
                if not M.entry(i, j).is_zero():
                    tri = False
        prev = cut
    blocks = []
    ok = tri
    prev = 0
    for ell, cut in enumerate(cuts):
        got = min((M.entry(i, j).min_ord_pi()
                   for i in range(prev, cut) for j in range(prev, cut)
                   if M.entry(i, j).min_ord_pi() is not None),
                  default=M.tower.N)
        blocks.append({"block": ell, "pi_divisibility": int(got),
                       "required": ell, "ok": got >= ell})
        ok = ok and got >= ell
        prev = cut
    return {"block_triangular": tri, "blocks": blocks, "ok": ok}
