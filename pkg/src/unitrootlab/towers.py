"""Fixed-precision arithmetic in two-step local field towers.

A tower describes the ring of integers R_f of the unramified degree-f
extension of K = Q_p(pi), where pi is a root of a user-supplied Eisenstein
polynomial of degree e (default: pi = p).  All values are classes modulo
pi^N for a fixed absolute precision N, measured in pi-adic digits.

Representation.  An element is stored on the Z_p-basis
{pi^j * w^i : 0 <= j < e, 0 <= i < f}, where w lifts a generator of the
residue field F_{p^f}.  Coefficients are canonical integers modulo p^Np
with Np = ceil(N/e); since ord_pi(sum_j c_j pi^j) = min_j (e*ord_p(c_j) + j)
and the candidate values are pairwise distinct mod e, valuations and
congruences mod pi^k are exactly decidable from this data.

Every element carries its own absolute precision `prec` (pi-adic digits,
at most N).  Ring operations propagate the minimum; exact division by p^v
costs e*v digits and says so.  Series operations (exp, log, analytic
powers) internally lift representatives to a guard tower so the advertised
precision of the result is honest; the lift is legitimate because on the
convergence domain the result is insensitive to the representative at the
stated precision (e.g. exp(x + pi^k d) = exp(x) mod pi^k for k > e/(p-1)).
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from . import gf
from .errors import (ConvergenceError, DomainError, IntegralityError,
                     PrecisionError, UnitError)


def vp_int(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise DomainError("valuation of integer zero")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_factorial(n: int, p: int) -> int:
    """ord_p(n!) by Legendre's formula."""
    s, q = 0, p
    while q <= n:
        s += n // q
        q *= p
    return s


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


def _freeze(vec):
    return tuple(tuple(int(x) for x in row) for row in vec)


class Tower:
    """K = Q_p(pi), Eisenstein pi of degree e, unramified step of degree f."""

    def __init__(self, p: int, N: int, eisenstein: tuple[int, ...] = None,
                 f: int = 1, upoly: tuple[int, ...] = None):
        if N < 1:
            raise DomainError("precision N must be >= 1")
        self.p = p
        self.N = N
        if eisenstein is None:
            eisenstein = (-p,)
        self.eis = tuple(int(c) for c in eisenstein)
        self.e = len(self.eis)
        if vp_int(self.eis[0], p) != 1:
            raise DomainError("constant term of the Eisenstein polynomial "
                              "must have ord_p exactly 1")
        if any(c != 0 and vp_int(c, p) < 1 for c in self.eis[1:]):
            raise DomainError("non-constant Eisenstein coefficients must be "
                              "divisible by p")
        self.f = f
        self.residue = gf.field(p, f)
        if upoly is None:
            upoly = self.residue.modpoly
        self.upoly = tuple(int(c) % p for c in upoly)
        if len(self.upoly) != f:
            raise DomainError("unramified polynomial degree mismatch")
        if self.upoly != tuple(self.residue.modpoly):
            if not gf._is_irreducible(list(self.upoly) + [1], p):
                raise DomainError("unramified polynomial is reducible mod p")
            custom = gf.GF.__new__(gf.GF)
            custom.p, custom.m, custom.size = p, f, p ** f
            custom.modpoly = self.upoly
            self.residue = custom
        self.Np = -(-N // self.e)  # ceil(N / e)
        self.pM = p ** self.Np
        self._wred = self._w_reduction_rows()
        self._pired = self._pi_reduction_rows()
        u0 = self.eis[0] // p  # exact integer: ord_p(eis[0]) = 1
        if u0 % p == 0:
            raise DomainError("Eisenstein constant term / p must be a unit")
        self._u0_inv = pow(u0 % self.pM, -1, self.pM)

    def _w_reduction_rows(self):
        """w^(f+k) on the basis w^0..w^(f-1), k = 0..f-2, coefficients mod p^Np."""
        f, pM = self.f, self.pM
        if f == 1:
            return []
        rows = [[(-c) % pM for c in self.upoly]]
        for _ in range(f - 2):
            prev = rows[-1]
            nxt = [0] + prev[:-1]
            carry = prev[-1]
            if carry:
                for i in range(f):
                    nxt[i] = (nxt[i] - carry * self.upoly[i]) % pM
            rows.append([c % pM for c in nxt])
        return rows

    def _pi_reduction_rows(self):
        """pi^(e+k) on the basis pi^0..pi^(e-1), k = 0..e-2."""
        e, pM = self.e, self.pM
        if e == 1:
            return []
        rows = [[(-c) % pM for c in self.eis]]
        for _ in range(e - 2):
            prev = rows[-1]
            nxt = [0] + prev[:-1]
            carry = prev[-1]
            if carry:
                for i in range(e):
                    nxt[i] = (nxt[i] - carry * self.eis[i]) % pM
            rows.append([c % pM for c in nxt])
        return rows

    def __repr__(self):
        ram = "pi=p" if self.eis == (-self.p,) else f"eis={self.eis}"
        return f"Tower(p={self.p}, {ram}, f={self.f}, N={self.N})"

    def same_field(self, other: "Tower") -> bool:
        return (self.p == other.p and self.eis == other.eis
                and self.f == other.f and self.upoly == other.upoly)

    @lru_cache(maxsize=None)
    def raised(self, extra_p_digits: int) -> "Tower":
        """Same field, N + e*extra pi-digits of precision (guard tower)."""
        if extra_p_digits <= 0:
            return self
        return Tower(self.p, self.N + extra_p_digits * self.e, self.eis,
                     self.f, self.upoly)

    @lru_cache(maxsize=None)
    def extension(self, f: int) -> "Tower":
        """Tower for R_f over the same ramified base, canonical upoly."""
        if f == self.f:
            return self
        return Tower(self.p, self.N, self.eis, f)

    # -- element constructors --------------------------------------------

    def zero(self) -> "PadicNumber":
        return PadicNumber(self, ((0,) * self.f,) * self.e, self.N)

    def one(self) -> "PadicNumber":
        return self.integer(1)

    def integer(self, n: int) -> "PadicNumber":
        vec = [[0] * self.f for _ in range(self.e)]
        vec[0][0] = n % self.pM
        return PadicNumber(self, _freeze(vec), self.N)

    def pi(self) -> "PadicNumber":
        if self.e == 1:
            return self.integer(-self.eis[0])
        vec = [[0] * self.f for _ in range(self.e)]
        vec[1][0] = 1
        return PadicNumber(self, _freeze(vec), self.N)

    def from_residue(self, code: int) -> "PadicNumber":
        """Coefficient-wise lift of a residue-field element code."""
        vec = [[0] * self.f for _ in range(self.e)]
        for i, c in enumerate(self.residue.coeffs(code)):
            vec[0][i] = c
        return PadicNumber(self, _freeze(vec), self.N)

    # -- coefficient arithmetic -------------------------------------------

    def _wmul(self, u, v):
        f, pM = self.f, self.pM
        if f == 1:
            return ((u[0] * v[0]) % pM,)
        conv = [0] * (2 * f - 1)
        for i, ui in enumerate(u):
            if ui:
                for j, vj in enumerate(v):
                    conv[i + j] += ui * vj
        out = [c % pM for c in conv[:f]]
        for k in range(f, 2 * f - 1):
            c = conv[k] % pM
            if c:
                row = self._wred[k - f]
                for i in range(f):
                    out[i] = (out[i] + c * row[i]) % pM
        return tuple(out)

    def _mul_vecs(self, a, b):
        e, f, pM = self.e, self.f, self.pM
        if e == 1:
            return (self._wmul(a[0], b[0]),)
        conv = [[0] * f for _ in range(2 * e - 1)]
        for j1, c1 in enumerate(a):
            if any(c1):
                for j2, c2 in enumerate(b):
                    if any(c2):
                        prod = self._wmul(c1, c2)
                        tgt = conv[j1 + j2]
                        for i in range(f):
                            tgt[i] = (tgt[i] + prod[i]) % pM
        out = [list(conv[j]) for j in range(e)]
        for k in range(e, 2 * e - 1):
            if any(conv[k]):
                row = self._pired[k - e]
                for j in range(e):
                    rj = row[j]
                    if rj:
                        for i in range(f):
                            out[j][i] = (out[j][i] + rj * conv[k][i]) % pM
        return _freeze(out)


class PadicNumber:
    """An element of R_f known modulo pi^prec (prec <= tower.N)."""

    __slots__ = ("tower", "vec", "prec")
    __hash__ = None

    def __init__(self, tower: Tower, vec, prec: int):
        self.tower = tower
        self.vec = vec
        self.prec = min(prec, tower.N)

    # -- ring operations ----------------------------------------------------

    def _check(self, other):
        if not self.tower.same_field(other.tower):
            raise DomainError("mixed towers in arithmetic")

    def __add__(self, other):
        other = _coerce(self.tower, other)
        self._check(other)
        t = self.tower
        vec = _freeze([[(x + y) % t.pM for x, y in zip(r1, r2)]
                       for r1, r2 in zip(self.vec, other.vec)])
        return PadicNumber(t, vec, min(self.prec, other.prec))

    __radd__ = __add__

    def __neg__(self):
        t = self.tower
        vec = _freeze([[(-x) % t.pM for x in row] for row in self.vec])
        return PadicNumber(t, vec, self.prec)

    def __sub__(self, other):
        return self + (-_coerce(self.tower, other))

    def __rsub__(self, other):
        return _coerce(self.tower, other) - self

    def __mul__(self, other):
        other = _coerce(self.tower, other)
        self._check(other)
        vec = self.tower._mul_vecs(self.vec, other.vec)
        return PadicNumber(self.tower, vec, min(self.prec, other.prec))

    __rmul__ = __mul__

    def __eq__(self, other):
        try:
            other = _coerce(self.tower, other)
        except TypeError:
            return NotImplemented
        if not self.tower.same_field(other.tower):
            return False
        k = min(self.prec, other.prec)
        o = ord_pi(self - other)
        return o is None or o >= k

    def congruent(self, other, pi_digits: int) -> bool:
        """Exact congruence mod pi^pi_digits; demands enough known digits."""
        other = _coerce(self.tower, other)
        if min(self.prec, other.prec) < pi_digits:
            raise PrecisionError(
                f"comparison mod pi^{pi_digits} exceeds held precision")
        o = ord_pi(self - other)
        return o is None or o >= pi_digits

    def is_zero(self) -> bool:
        return ord_pi(self) is None

    def is_unit(self) -> bool:
        return ord_pi(self) == 0

    # -- representation plumbing ---------------------------------------------

    def lift_to(self, tower2: Tower) -> "PadicNumber":
        """Reinterpret the stored representative in a compatible tower.

        Only the representative is transported; the declared precision is
        carried over unchanged, so callers must justify any use of the
        extra digits (guard-tower computations do).
        """
        if not (tower2.p == self.tower.p and tower2.eis == self.tower.eis
                and tower2.upoly == self.tower.upoly):
            raise DomainError("incompatible towers for representative lift")
        return PadicNumber(tower2, self.vec, self.prec)

    def as_exact(self, tower2: Tower) -> "PadicNumber":
        """Lift the representative and declare it exact in tower2.

        For inputs that are known to be exact integer data (builtin
        matrices, integer weights); the caller asserts exactness.
        """
        out = self.lift_to(tower2)
        return PadicNumber(tower2, out.vec, tower2.N)

    def project(self, tower2: Tower, prec: int = None) -> "PadicNumber":
        """Reduce into a lower-precision tower over the same field."""
        vec = _freeze([[x % tower2.pM for x in row] for row in self.vec])
        return PadicNumber(tower2, vec,
                           prec if prec is not None else self.prec)

    def extend(self, tower2: Tower) -> "PadicNumber":
        """Embed a base element (f = 1) into a larger residue step."""
        if self.tower.f == tower2.f:
            return self if tower2 is self.tower else self.project(tower2)
        if self.tower.f != 1:
            raise DomainError("only base-tower elements embed canonically")
        vec = _freeze([[row[0] % tower2.pM] + [0] * (tower2.f - 1)
                       for row in self.vec])
        return PadicNumber(tower2, vec, self.prec)

    def descend(self) -> "PadicNumber":
        """Project an R_f element that actually lies in R down to f = 1."""
        t = self.tower
        if t.f == 1:
            return self
        base = t.extension(1)
        for j, row in enumerate(self.vec):
            need = max(0, -(-(self.prec - j) // t.e))
            mod = t.p ** min(need, t.Np)
            if mod > 1:
                for x in row[1:]:
                    if x % mod != 0:
                        raise IntegralityError(
                            "element does not descend to the base ring")
        vec = _freeze([[row[0] % base.pM] for row in self.vec])
        return PadicNumber(base, vec, self.prec)

    def residue_code(self) -> int:
        """Image in the residue field F_{p^f}, as an element code."""
        t = self.tower
        return t.residue.encode([x % t.p for x in self.vec[0]])

    def pi_digits(self, count: int = None) -> list[tuple[int, ...]]:
        """Little-endian base-pi digits over the residue basis w^0..w^{f-1}."""
        t = self.tower
        count = self.prec if count is None else min(count, self.prec)
        x = self
        digits = []
        for _ in range(count):
            code = x.residue_code()
            digits.append(tuple(t.residue.coeffs(code)))
            x = div_pi_exact(x - t.from_residue(code), 1)
        return digits

    def serialize(self) -> str:
        body = ";".join(",".join(str(d) for d in dig)
                        for dig in self.pi_digits())
        return f"pi[{body}]"

    def __repr__(self):
        return f"<{self.serialize()} prec={self.prec} {self.tower!r}>"


def _coerce(tower: Tower, x):
    if isinstance(x, PadicNumber):
        return x
    if isinstance(x, int):
        return tower.integer(x)
    raise TypeError(f"cannot coerce {type(x).__name__} into {tower!r}")


# -- valuations ----------------------------------------------------------------

def ord_pi(x: PadicNumber):
    """Exact pi-adic valuation if < x.prec, else None (meaning >= prec)."""
    t = x.tower
    best = None
    for j, row in enumerate(x.vec):
        for c in row:
            c %= t.pM
            if c:
                cand = t.e * vp_int(c, t.p) + j
                if best is None or cand < best:
                    best = cand
    if best is None or best >= x.prec:
        return None
    return best


def ord_p(x: PadicNumber):
    """ord_p = ord_pi / e as an exact Fraction, or None meaning >= prec."""
    o = ord_pi(x)
    return None if o is None else Fraction(o, x.tower.e)


def ord_lower_bound(x: PadicNumber) -> Fraction:
    """Certified lower bound on ord_p(x): exact value or prec/e."""
    o = ord_pi(x)
    return Fraction(x.prec, x.tower.e) if o is None else Fraction(o, x.tower.e)


def certify_ord_gt(x: PadicNumber, bound: Fraction) -> None:
    """Raise unless the held digits certify ord_p(x) > bound."""
    o = ord_pi(x)
    if o is not None:
        if Fraction(o, x.tower.e) <= bound:
            raise DomainError(
                f"ord_p = {Fraction(o, x.tower.e)} fails the bound > {bound}")
        return
    if Fraction(x.prec, x.tower.e) <= bound:
        raise PrecisionError(
            "held precision cannot certify the valuation bound")


# -- exact division -------------------------------------------------------------

def div_pi_exact(x: PadicNumber, k: int = 1) -> PadicNumber:
    """x / pi^k for pi^k | x; costs k digits of absolute precision."""
    t = x.tower
    out = x
    for _ in range(k):
        if out.prec < 1:
            raise PrecisionError("no digits left to divide by pi")
        rows = [list(r) for r in out.vec]
        c0 = rows[0]
        if any(c % t.p for c in c0):
            raise DomainError("element is not divisible by pi")
        d = [c // t.p for c in c0]
        res = [list(r) for r in rows[1:]] + [[0] * t.f]
        if any(d):
            # p/pi = -u0^{-1} (pi^{e-1} + a_{e-1} pi^{e-2} + ... + a_1)
            for j in range(t.e):
                coef = t.eis[j + 1] if j + 1 < t.e else 1
                scal = (-t._u0_inv * coef) % t.pM
                if scal:
                    for i in range(t.f):
                        res[j][i] = (res[j][i] + scal * d[i]) % t.pM
        out = PadicNumber(t, _freeze(res), out.prec - 1)
    return out


def div_int_exact(x: PadicNumber, n: int) -> PadicNumber:
    """x / n for an integer n dividing x exactly; loses e*vp(n) digits."""
    if n == 0:
        raise DomainError("division by zero")
    t = x.tower
    v = vp_int(n, t.p)
    u = n // t.p ** v
    if v:
        pv = t.p ** v
        for row in x.vec:
            if any(c % pv for c in row):
                raise DomainError(f"element is not divisible by p^{v}")
        vec = _freeze([[(c // pv) % t.pM for c in row] for row in x.vec])
        x = PadicNumber(t, vec, x.prec - t.e * v)
        if x.prec <= 0:
            raise PrecisionError("division by the p-part consumed all digits")
    uinv = pow(u % t.pM, -1, t.pM)
    return x * t.integer(uinv)


def invert_unit(x: PadicNumber) -> PadicNumber:
    """Inverse of a unit, by residue-field inversion plus Newton lifting."""
    t = x.tower
    if not x.is_unit():
        raise UnitError("not a unit")
    y = t.from_residue(t.residue.inv(x.residue_code()))
    two = t.integer(2)
    for _ in range((t.e * t.Np).bit_length() + 1):
        y = y * (two - x * y)
    return PadicNumber(t, y.vec, x.prec)


def int_pow(x: PadicNumber, k: int) -> PadicNumber:
    """x^k for k in Z (negative k demands a unit)."""
    if k < 0:
        x = invert_unit(x)
        k = -k
    out = PadicNumber(x.tower, x.tower.one().vec, x.prec)
    base = x
    while k:
        if k & 1:
            out = out * base
        base = base * base
        k >>= 1
    return out


# -- Teichmüller lifts ------------------------------------------------------------

def teichmuller(tower: Tower, code: int) -> PadicNumber:
    """The unique root of X^{p^f} = X lifting the residue element `code`."""
    if code == 0:
        return tower.zero()
    x = tower.from_residue(code)
    Q = tower.p ** tower.f
    for _ in range(tower.e * tower.Np + 2):
        nxt = int_pow(x, Q)
        if (nxt - x).is_zero():
            return nxt
        x = nxt
    raise ConvergenceError("Teichmüller iteration failed to stabilize")


# -- exp / log / analytic unit powers ----------------------------------------------

def p_exp(x: PadicNumber) -> PadicNumber:
    """exp(x) = sum x^n / n!, on the domain ord_p(x) > 1/(p-1).

    The number of summed terms comes from the exact tail estimate
    ord_pi(x^n/n!) >= n*(ord_pi(x) - e/(p-1)); divisions by n! run in a
    guard tower so the result is exact at the input's precision.
    """
    t = x.tower
    certify_ord_gt(x, Fraction(1, t.p - 1))
    o = ord_pi(x)
    target = min(x.prec, t.N)
    if o is None:
        return PadicNumber(t, t.one().vec, target)
    slack = Fraction(o) - Fraction(t.e, t.p - 1)
    nstop = int(Fraction(target) / slack) + 1
    guard = vp_factorial(nstop, t.p)
    big = t.raised(guard)
    xb = PadicNumber(big, x.vec, big.N)
    acc = big.one()
    term = big.one()
    for n in range(1, nstop):
        term = term * xb
        acc = acc + div_int_exact(term, _factorial(n))
    return acc.project(t, target)


def _log_terms_needed(o: int, t: Tower, target: int) -> int:
    """Largest n with n*o - e*vp(n) < target (all later terms are negligible)."""
    cap = 2 * target + 64 * t.e + 64
    worst = 1
    for n in range(1, cap + 1):
        if n * o - t.e * vp_int(n, t.p) < target:
            worst = n
    return worst


def p_log(x: PadicNumber) -> PadicNumber:
    """log(x) for a 1-unit x, via log(1+w) = sum (-1)^(n-1) w^n / n."""
    t = x.tower
    w = x - t.one()
    o = ord_pi(w)
    target = min(x.prec, t.N)
    if o is not None and o < 1:
        raise DomainError("log requires a 1-unit argument")
    if o is None:
        return PadicNumber(t, t.zero().vec, target)
    nstop = _log_terms_needed(o, t, target)
    guard = max(vp_int(n, t.p) for n in range(1, nstop + 1))
    big = t.raised(guard)
    wb = PadicNumber(big, w.vec, big.N)
    acc = big.zero()
    term = big.one()
    for n in range(1, nstop + 1):
        term = term * wb
        piece = div_int_exact(term, n)
        acc = acc + (piece if n % 2 == 1 else -piece)
    return acc.project(t, target)


def unit_pow(x: PadicNumber, y) -> PadicNumber:
    """exp(y * log x): the analytic power x^y of a 1-unit.

    Precondition: ord_p(y) + ord_p(log x) > 1/(p-1).  For integer y this
    agrees with repeated multiplication.
    """
    t = x.tower
    y = _coerce(t, y)
    lx = p_log(x)
    if ord_lower_bound(y) + ord_lower_bound(lx) <= Fraction(1, t.p - 1):
        raise DomainError("unit power outside its convergence domain")
    return p_exp(y * lx)


# -- Hensel lifting ------------------------------------------------------------------

def poly_eval(coeffs: list[PadicNumber], x: PadicNumber) -> PadicNumber:
    acc = x.tower.zero()
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def hensel_unit_root(coeffs: list[PadicNumber], residue_code: int
                     ) -> PadicNumber:
    """Lift a simple residue root with unit derivative to full precision."""
    t = coeffs[0].tower
    x = t.from_residue(residue_code)
    deriv = [c * (i + 1) for i, c in enumerate(coeffs[1:])]
    if not poly_eval(deriv, x).is_unit():
        raise UnitError("derivative at the starting root is not a unit")
    if ord_pi(poly_eval(coeffs, x)) == 0:
        raise DomainError("starting value is not an approximate root")
    for _ in range(t.e * t.Np + 2):
        fx = poly_eval(coeffs, x)
        if fx.is_zero():
            return x
        x = x - fx * invert_unit(poly_eval(deriv, x))
    if not poly_eval(coeffs, x).is_zero():
        raise ConvergenceError("Hensel iteration did not converge")
    return x
