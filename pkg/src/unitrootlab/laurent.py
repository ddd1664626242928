"""Coordinate-ring elements: Laurent polynomials with p-adic coefficients.

These model functions on a torus G_m^n (arbitrary integer exponents) or on
affine space A^n (non-negative exponents); the q-power Frobenius lift acts
by x_i -> x_i^q with coefficients untouched.  Supports are finite dicts,
zero coefficients are never stored.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import DomainError, ResourceError, UnitError
from .towers import (PadicNumber, Tower, _coerce, int_pow, invert_unit,
                     ord_pi)

# Hard cap on the number of stored monomials; configurable per call sites.
DEFAULT_SUPPORT_CAP = 200_000


class LaurentElement:
    """Finite map from exponent vectors to PadicNumber coefficients."""

    __slots__ = ("tower", "nvars", "coeffs")
    __hash__ = None

    def __init__(self, tower: Tower, nvars: int, coeffs=None):
        self.tower = tower
        self.nvars = nvars
        self.coeffs = {}
        if coeffs:
            for expo, c in coeffs.items():
                self._set(tuple(expo), c)

    def _set(self, expo, c):
        if len(expo) != self.nvars:
            raise DomainError("exponent arity mismatch")
        c = _coerce(self.tower, c)
        if not c.is_zero():
            self.coeffs[expo] = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, tower, nvars, value):
        return cls(tower, nvars, {(0,) * nvars: _coerce(tower, value)})

    @classmethod
    def monomial(cls, tower, nvars, expo, value=1):
        return cls(tower, nvars, {tuple(expo): _coerce(tower, value)})

    # -- ring structure ------------------------------------------------------

    def _compat(self, other):
        if self.nvars != other.nvars or not self.tower.same_field(other.tower):
            raise DomainError("incompatible Laurent elements")

    def __add__(self, other):
        other = self._as_laurent(other)
        self._compat(other)
        out = LaurentElement(self.tower, self.nvars)
        for expo, c in self.coeffs.items():
            out._set(expo, c)
        for expo, c in other.coeffs.items():
            if expo in out.coeffs:
                s = out.coeffs[expo] + c
                if s.is_zero():
                    del out.coeffs[expo]
                else:
                    out.coeffs[expo] = s
            else:
                out._set(expo, c)
        return out

    def __neg__(self):
        out = LaurentElement(self.tower, self.nvars)
        for expo, c in self.coeffs.items():
            out.coeffs[expo] = -c
        return out

    def __sub__(self, other):
        return self + (-self._as_laurent(other))

    def __mul__(self, other):
        other = self._as_laurent(other)
        self._compat(other)
        out = LaurentElement(self.tower, self.nvars)
        acc = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                prod = c1 * c2
                if expo in acc:
                    acc[expo] = acc[expo] + prod
                else:
                    acc[expo] = prod
        for expo, c in acc.items():
            if not c.is_zero():
                out.coeffs[expo] = c
        if len(out.coeffs) > DEFAULT_SUPPORT_CAP:
            raise ResourceError("Laurent support cap exceeded")
        return out

    def _as_laurent(self, other):
        if isinstance(other, LaurentElement):
            return other
        return LaurentElement.constant(self.tower, self.nvars, other)

    def __eq__(self, other):
        if not isinstance(other, LaurentElement):
            return NotImplemented
        return (self - other).is_zero()

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.coeffs.values())

    def scale(self, value) -> "LaurentElement":
        out = LaurentElement(self.tower, self.nvars)
        value = _coerce(self.tower, value)
        for expo, c in self.coeffs.items():
            out._set(expo, c * value)
        return out

    # -- structure queries -----------------------------------------------------

    def support(self):
        return sorted(self.coeffs)

    def max_abs_exponent(self) -> int:
        best = 0
        for expo in self.coeffs:
            best = max(best, max((abs(a) for a in expo), default=0))
        return best

    def constant_term(self) -> PadicNumber:
        return self.coeffs.get((0,) * self.nvars, self.tower.zero())

    def min_ord_pi(self):
        """min over coefficients of ord_pi; None for the zero element."""
        best = None
        for c in self.coeffs.values():
            o = ord_pi(c)
            if o is not None and (best is None or o < best):
                best = o
        return best

    def in_pi_power(self, k: int) -> bool:
        """Whether every coefficient has ord_pi >= k."""
        o = self.min_ord_pi()
        return o is None or o >= k

    def is_polynomial(self) -> bool:
        return all(min(expo) >= 0 for expo in self.coeffs) if self.coeffs \
            else True

    # -- Frobenius and evaluation ------------------------------------------------

    def sigma(self, q: int, iterations: int = 1) -> "LaurentElement":
        """Apply the Frobenius lift x_i -> x_i^{q^iterations}."""
        scalefac = q ** iterations
        out = LaurentElement(self.tower, self.nvars)
        for expo, c in self.coeffs.items():
            out.coeffs[tuple(a * scalefac for a in expo)] = c
        return out

    def evaluate(self, coords: list[PadicNumber]) -> PadicNumber:
        """Evaluate at a point with coordinates in some extension tower.

        Negative exponents require the corresponding coordinate to be a
        unit (always true on the torus).
        """
        if len(coords) != self.nvars:
            raise DomainError("coordinate arity mismatch")
        ext = coords[0].tower if coords else self.tower
        acc = ext.zero()
        powcache = [dict() for _ in range(self.nvars)]
        for expo, c in sorted(self.coeffs.items()):
            term = c if ext is self.tower else c.extend(ext)
            for i, a in enumerate(expo):
                if a == 0:
                    continue
                if a not in powcache[i]:
                    powcache[i][a] = int_pow(coords[i], a)
                term = term * powcache[i][a]
            acc = acc + term
        return acc

    def lift_to(self, tower2: Tower) -> "LaurentElement":
        out = LaurentElement(tower2, self.nvars)
        for expo, c in self.coeffs.items():
            out.coeffs[expo] = c.lift_to(tower2)
        return out

    def as_exact(self, tower2: Tower) -> "LaurentElement":
        out = LaurentElement(tower2, self.nvars)
        for expo, c in self.coeffs.items():
            out.coeffs[expo] = c.as_exact(tower2)
        return out

    def project(self, tower2: Tower) -> "LaurentElement":
        out = LaurentElement(tower2, self.nvars)
        for expo, c in self.coeffs.items():
            p = c.project(tower2)
            if not p.is_zero():
                out.coeffs[expo] = p
        return out

    # -- units -------------------------------------------------------------------

    def unit_monomial_split(self):
        """Write a unit of the completed ring as c*x^k*(1 + w), w in pi*A.

        The reduction mod pi of a unit must be a single monomial with unit
        coefficient; raises UnitError otherwise.
        """
        unit_terms = [(expo, c) for expo, c in self.coeffs.items()
                      if ord_pi(c) == 0]
        if len(unit_terms) != 1:
            raise UnitError("reduction mod pi is not a monomial")
        expo, c = unit_terms[0]
        rest = LaurentElement(self.tower, self.nvars)
        for e2, c2 in self.coeffs.items():
            if e2 != expo:
                rest.coeffs[e2] = c2
        return expo, c, rest

    def inverse(self, support_cap: int = DEFAULT_SUPPORT_CAP
                ) -> "LaurentElement":
        """Inverse in the pi-adically completed ring, truncated mod pi^N.

        Works for units whose reduction is a monomial: invert the monomial
        and sum the geometric series in the pi-divisible remainder.
        """
        expo, c, rest = self.unit_monomial_split()
        lead_inv = LaurentElement.monomial(
            self.tower, self.nvars, tuple(-a for a in expo), invert_unit(c))
        w = rest * lead_inv  # the unit is lead * (1 + w), w in pi*A
        prec = min((x.prec for x in self.coeffs.values()),
                   default=self.tower.N)
        acc = LaurentElement.constant(self.tower, self.nvars, 1)
        term = LaurentElement.constant(self.tower, self.nvars, 1)
        k = 0
        while True:
            term = -(term * w)
            k += 1
            if term.is_zero() or k >= prec:
                break
            acc = acc + term
            if len(acc.coeffs) > support_cap:
                raise ResourceError("support cap exceeded inverting a unit")
        return acc * lead_inv

    # -- display -------------------------------------------------------------------

    def __repr__(self):
        if not self.coeffs:
            return "<laurent 0>"
        bits = []
        for expo in self.support():
            mono = "*".join(f"x{i+1}^{a}" if self.nvars > 1 else f"x^{a}"
                            for i, a in enumerate(expo) if a != 0) or "1"
            bits.append(f"({self.coeffs[expo].serialize()})*{mono}")
        return "<laurent " + " + ".join(bits) + ">"


def sigma_apply(a: LaurentElement, q: int, iterations: int = 1
                ) -> LaurentElement:
    """Frobenius-lift substitution x_i -> x_i^{q^iterations}."""
    return a.sigma(q, iterations)


def norm_c_log(g: LaurentElement, c: int) -> Fraction:
    """The log-norm -ord of the weighted Gauss norm |.|_c on polynomials.

    Returns max over the support of ([|alpha|/c] - ord_pi(coeff)); the
    weighted norm itself is |pi|^(-returned value).  Requires non-negative
    exponents and exactly known coefficient valuations.
    """
    if not g.is_polynomial():
        raise DomainError("the weighted norm is defined for polynomials")
    if not g.coeffs:
        raise DomainError("log-norm of the zero element")
    best = None
    for expo, coeff in g.coeffs.items():
        o = ord_pi(coeff)
        if o is None:
            from .errors import PrecisionError
            raise PrecisionError("coefficient valuation beyond held digits")
        val = Fraction(sum(expo), c).__floor__() - o
        if best is None or val > best:
            best = val
    return Fraction(best)
