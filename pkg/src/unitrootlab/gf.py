"""Finite fields F_{p^m} as explicit polynomial quotients over F_p.

Elements are encoded as integers in [0, p^m): the base-p digits of the
code are the coefficients of the residue polynomial in the generator w,
little-endian.  The defining polynomial is always the lowest-lexicographic
monic irreducible of the requested degree (lex order on the constant-first
coefficient tuple, i.e. ascending integer code), so element codes are
reproducible across runs and implementations.
"""

from __future__ import annotations

from functools import lru_cache

from .errors import DomainError


def _poly_trim(a):
    while a and a[-1] == 0:
        a = a[:-1]
    return a


def _poly_mulmod(a, b, g, p):
    """a*b mod (g, p) for little-endian coefficient lists; g monic."""
    m = len(g) - 1
    res = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    for k in range(len(res) - 1, m - 1, -1):
        c = res[k]
        if c:
            res[k] = 0
            for j in range(m):
                res[k - m + j] = (res[k - m + j] - c * g[j]) % p
    return _poly_trim(res[:m] + [0] * 0)


def _poly_powmod(a, e, g, p):
    res = [1]
    base = list(a)
    while e > 0:
        if e & 1:
            res = _poly_mulmod(res, base, g, p)
        base = _poly_mulmod(base, base, g, p)
        e >>= 1
    return res


def _poly_gcd(a, b, p):
    a, b = list(a), list(b)
    while _poly_trim(b):
        b = _poly_trim(b)
        # a mod b
        a = _poly_trim(a)
        while len(a) >= len(b) and _poly_trim(a):
            lead = (a[-1] * pow(b[-1], p - 2, p)) % p
            shift = len(a) - len(b)
            a = [(x - lead * (b[i - shift] if 0 <= i - shift < len(b) else 0)) % p
                 for i, x in enumerate(a)]
            a = _poly_trim(a)
        a, b = b, a
    return _poly_trim(a)


def _is_irreducible(g, p):
    """g monic over F_p, little-endian including leading 1."""
    m = len(g) - 1
    if m == 1:
        return True
    x = [0, 1]
    # x^(p^m) == x mod g
    t = x
    for _ in range(m):
        t = _poly_powmod(t, p, g, p)
    lhs = _poly_trim([(t[i] if i < len(t) else 0) - (x[i] if i < len(x) else 0)
                      for i in range(max(len(t), len(x)))])
    if _poly_trim([c % p for c in lhs]):
        return False
    # gcd(x^(p^(m/l)) - x, g) == 1 for prime divisors l of m
    for ell in _prime_divisors(m):
        t = x
        for _ in range(m // ell):
            t = _poly_powmod(t, p, g, p)
        diff = [( (t[i] if i < len(t) else 0) - (x[i] if i < len(x) else 0)) % p
                for i in range(max(len(t), len(x)))]
        d = _poly_gcd(g, diff, p)
        if len(d) != 1:
            return False
    return True


def _prime_divisors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def lowest_irreducible(p: int, m: int) -> tuple[int, ...]:
    """Lowest-lex monic irreducible of degree m over F_p.

    Returned little-endian *without* the leading coefficient: the tuple
    (c_0, ..., c_{m-1}) of X^m + c_{m-1}X^{m-1} + ... + c_0.
    """
    for code in range(p ** m):
        tail = [(code // p ** i) % p for i in range(m)]
        g = tail + [1]
        if _is_irreducible(g, p):
            return tuple(tail)
    raise DomainError(f"no irreducible polynomial of degree {m} over F_{p}")


class GF:
    """F_{p^m} with integer-coded elements."""

    def __init__(self, p: int, m: int):
        if not _is_prime(p):
            raise DomainError(f"{p} is not prime")
        self.p = p
        self.m = m
        self.size = p ** m
        self.modpoly = lowest_irreducible(p, m)  # tail coefficients

    def __repr__(self):
        return f"GF({self.p}^{self.m})"

    def coeffs(self, a: int) -> list[int]:
        return [(a // self.p ** i) % self.p for i in range(self.m)]

    def encode(self, coeffs) -> int:
        return sum((c % self.p) * self.p ** i for i, c in enumerate(coeffs))

    def add(self, a: int, b: int) -> int:
        ca, cb = self.coeffs(a), self.coeffs(b)
        return self.encode([x + y for x, y in zip(ca, cb)])

    def neg(self, a: int) -> int:
        return self.encode([-x for x in self.coeffs(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        g = list(self.modpoly) + [1]
        res = _poly_mulmod(_poly_trim(self.coeffs(a)), _poly_trim(self.coeffs(b)),
                           g, self.p)
        return self.encode(res + [0] * (self.m - len(res)))

    def pow(self, a: int, e: int) -> int:
        if e < 0:
            a = self.inv(a)
            e = -e
        g = list(self.modpoly) + [1]
        res = _poly_powmod(_poly_trim(self.coeffs(a)), e, g, self.p)
        return self.encode(res + [0] * (self.m - len(res)))

    def inv(self, a: int) -> int:
        if a == 0:
            raise DomainError("inverse of zero")
        return self.pow(a, self.size - 2)

    def frobenius(self, a: int, q: int) -> int:
        """a ↦ a^q."""
        return self.pow(a, q)

    def trace_to_prime(self, a: int) -> int:
        """Trace down to F_p, returned as an integer in [0, p)."""
        t = 0
        x = a
        for _ in range(self.m):
            t = self.add(t, x)
            x = self.pow(x, self.p)
        assert t < self.p, "trace landed outside the prime field"
        return t

    def elements(self):
        return range(self.size)

    def subfield_root(self, sub: "GF") -> int:
        """Image of sub's generator w under the lex-least embedding sub → self.

        Requires sub.m | self.m.  Scans element codes in ascending order and
        returns the first root of sub's defining polynomial.
        """
        if self.p != sub.p or self.m % sub.m != 0:
            raise DomainError("no embedding between these fields")
        if sub.m == 1:
            return 0
        tail = sub.modpoly
        for a in range(self.size):
            acc = self.encode([tail[0]])
            xp = 1
            for c in list(tail[1:]) + [1]:
                xp = self.mul(xp, a)
                if c:
                    acc = self.add(acc, self.mul(self.encode([c]), xp))
            if acc == 0:
                return a
        raise DomainError("embedding root not found")  # pragma: no cover

    def embed(self, sub: "GF", a: int) -> int:
        """Map an element code of sub into self along subfield_root."""
        root = self.subfield_root(sub)
        acc = 0
        xp = 1
        for c in sub.coeffs(a):
            if c:
                acc = self.add(acc, self.mul(self.encode([c]), xp))
            xp = self.mul(xp, root)
        return acc


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@lru_cache(maxsize=None)
def field(p: int, m: int) -> GF:
    return GF(p, m)
