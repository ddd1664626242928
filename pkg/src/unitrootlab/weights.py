"""Locally analytic characters of the unit group and their L-series.

A character of R^x is coordinatized by a torsion component (s, t) and a
point z of the open unit disk: kappa(r) = u(r)^s * omega_z(u(r)) * v(r)^t,
where r = v(r) u(r) splits off the Teichmüller part and
omega_z(u) = 1 + F([pi^m log u])(z) through the formal-group bracket.

Only the Q_p model (multiplicative formal group, F(Z) = Z, bracket
[x](U) = (1+U)^x - 1) is implemented concretely; a descriptor dataclass
carries the constants so a ramified plug-in stays possible.  The
log-integrality exponent m and the torsion exponent a are computed from
the tower, not hardcoded.

Precision notes.  (1+z)^x is evaluated by the binomial series; the sum is
insensitive to lifting the representatives of x and z, so its precision
is min(prec x, prec z) even though individual binomial coefficients lose
digits.  The U-series coefficients C(x, n), by contrast, genuinely lose
ord_p(n!) digits and their precision fields say so; callers give their
towers headroom.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, IntegralityError, UnitError
from .laurent import LaurentElement
from .points import BaseScheme, ClosedPoint, enumerate_closed_points
from .series import TruncatedSeries
from .towers import (PadicNumber, Tower, _coerce, div_int_exact, int_pow,
                     invert_unit, ord_lower_bound, ord_pi, p_exp, p_log,
                     teichmuller, vp_factorial, vp_int)


@dataclass(frozen=True)
class FormalGroupDescriptor:
    """Constants of the Lubin-Tate model used for character evaluation.

    m: least integer >= -1 with pi^m log(1-units) integral.
    a: the 1-unit torsion is mu_{p^a}.
    kind: only "qp-multiplicative" evaluates; other kinds are accepted as
    data for plug-ins but have no bracket implementation here.
    """

    kind: str
    p: int
    m: int
    a: int

    def is_concrete(self) -> bool:
        return self.kind == "qp-multiplicative"


def qp_multiplicative_group(tower: Tower) -> FormalGroupDescriptor:
    """The multiplicative-group descriptor over Q_p, constants computed."""
    if tower.e != 1:
        raise DomainError("the concrete weight model needs an unramified "
                          "base (e = 1); supply a plug-in descriptor "
                          "otherwise")
    p = tower.p
    gen = 5 if p == 2 else 1 + p
    ell = ord_pi(p_log(tower.integer(gen)))
    m = max(-1, -int(ell))
    a = 1 if p == 2 else 0
    return FormalGroupDescriptor("qp-multiplicative", p, m, a)


@dataclass(frozen=True)
class CharacterPoint:
    """A character kappa_{(s,t,z)} or the integer-weight shortcut r -> r^k."""

    group: FormalGroupDescriptor
    s: int = 0
    t: int = 0
    z: PadicNumber = None
    weight: int = None

    def __post_init__(self):
        g = self.group
        if self.weight is not None:
            return
        if not (0 <= self.s < g.p ** g.a):
            raise DomainError(f"s out of range [0, {g.p ** g.a})")
        t_max = max(0, g.p - 2)
        if not (0 <= self.t <= t_max):
            raise DomainError(f"t out of range [0, {t_max}]")
        if self.z is not None and not _ord_positive(self.z):
            raise DomainError("disk coordinate must have ord_p > 0")


def _ord_positive(z: PadicNumber) -> bool:
    o = ord_pi(z)
    return o is None or o > 0


def trivial_character(tower: Tower) -> CharacterPoint:
    return CharacterPoint(qp_multiplicative_group(tower))


def weight_character(tower: Tower, k: int) -> CharacterPoint:
    return CharacterPoint(qp_multiplicative_group(tower), weight=k)


def weight_to_component(tower: Tower, k: int) -> CharacterPoint:
    """The component form (s, t, z = iota(k - s)) of r -> r^k."""
    g = qp_multiplicative_group(tower)
    s = k % (g.p ** g.a)
    t = k % (g.p - 1) if g.p > 2 else 0
    z = iota(tower, tower.integer(k - s), group=g)
    return CharacterPoint(g, s=s, t=t, z=z)


# -- unit decomposition ------------------------------------------------------------


def decompose_unit(r: PadicNumber):
    """r = v * u with v the Teichmüller (torsion) part and u a 1-unit."""
    if not r.is_unit():
        raise DomainError("only units decompose as torsion times 1-unit")
    t = r.tower
    v = teichmuller(t, r.residue_code())
    u = r * invert_unit(v)
    return v, u


# -- the disk embedding iota --------------------------------------------------------


def iota(tower: Tower, y, group: FormalGroupDescriptor = None
         ) -> PadicNumber:
    """The point iota(y) = exp(pi^{-m} y) - 1 of the open unit disk.

    Defined for ord_p(y) > m/e + 1/(p-1); the defining identity
    1 + [x](iota(y)) = exp(pi^{-m} x y) then holds for all integral x.
    """
    if group is None:
        group = qp_multiplicative_group(tower)
    if not group.is_concrete():
        raise DomainError("no bracket implementation for this descriptor")
    y = _coerce(tower, y)
    bound = Fraction(group.m, tower.e) + Fraction(1, tower.p - 1)
    if ord_lower_bound(y) <= bound:
        raise DomainError(
            f"iota needs ord_p(y) > {bound}; the input cannot certify it")
    if group.m >= 0:
        raise DomainError("the concrete model has m = -1")
    scale = int_pow(tower.integer(tower.p), -group.m)
    return p_exp(scale * y) - tower.one()


# -- binomial machinery for the bracket ----------------------------------------------


def binom_pow(x: PadicNumber, z: PadicNumber) -> PadicNumber:
    """(1+z)^x = sum_n C(x,n) z^n for ord_p(z) > 0 and integral x.

    The sum is stable under changes of representative of x and z, so the
    result's precision is min(x.prec, z.prec) despite internal divisions.
    """
    t = x.tower
    oz = ord_pi(z)
    out_prec = min(x.prec, z.prec)
    if oz is None:
        return PadicNumber(t, t.one().vec, out_prec)
    if oz <= 0:
        raise DomainError("binomial power needs ord(z) > 0")
    nstop = -(-t.N // oz) + 1
    guard = vp_factorial(nstop, t.p)
    big = t.raised(guard)
    xb = PadicNumber(big, x.vec, big.N)
    zb = PadicNumber(big, z.vec, big.N)
    acc = big.one()
    coef = big.one()
    zpow = big.one()
    for n in range(1, nstop + 1):
        coef = div_int_exact(coef * (xb - (n - 1)), n)
        zpow = zpow * zb
        acc = acc + coef * zpow
    return acc.project(t, out_prec)


def binom_series(x: PadicNumber, U_prec: int) -> list[PadicNumber]:
    """Coefficients C(x, n), n <= U_prec, of the U-series (1+U)^x.

    Coefficient n genuinely carries x.prec - e*ord_p(n!) digits.
    """
    t = x.tower
    guard = vp_factorial(U_prec, t.p)
    big = t.raised(guard)
    xb = x.lift_to(big)
    out = [t.one()]
    cur = big.one()
    for n in range(1, U_prec + 1):
        cur = div_int_exact(cur * (xb - (n - 1)), n)
        out.append(cur.project(t, min(cur.prec, t.N)))
    return out


def bracket_at(group: FormalGroupDescriptor, x: PadicNumber,
               z: PadicNumber) -> PadicNumber:
    """[x](z) = (1+z)^x - 1 in the multiplicative model."""
    if not group.is_concrete():
        raise DomainError("no bracket implementation for this descriptor")
    return binom_pow(x, z) - x.tower.one()


def log_over_pi_m(group: FormalGroupDescriptor, u: PadicNumber
                  ) -> PadicNumber:
    """pi^m log(u) for a 1-unit u; integral by the choice of m."""
    lu = p_log(u)
    if group.m == -1:
        return div_int_exact(lu, u.tower.p)
    if group.m == 0:
        return lu
    return lu * int_pow(u.tower.integer(u.tower.p), group.m)


# -- character evaluation --------------------------------------------------------------


def eval_character(kappa: CharacterPoint, r: PadicNumber) -> PadicNumber:
    """kappa(r) = u^s * omega_z(u) * v^t, or r^k for the weight shortcut."""
    if kappa.weight is not None:
        return int_pow(r, kappa.weight)
    if not r.is_unit():
        raise UnitError("characters evaluate on units")
    v, u = decompose_unit(r)
    out = int_pow(u, kappa.s)
    if kappa.t:
        out = out * int_pow(v, kappa.t)
    if kappa.z is not None and not kappa.z.is_zero():
        x = log_over_pi_m(kappa.group, u)
        out = out * (r.tower.one() + bracket_at(kappa.group, x, kappa.z))
    return out


def character_u_series(group: FormalGroupDescriptor, s: int, t: int,
                       r: PadicNumber, U_prec: int) -> list[PadicNumber]:
    """Coefficients of U |-> u^s v^t (1 + [pi^m log u](U)) at the unit r."""
    v, u = decompose_unit(r)
    x = log_over_pi_m(group, u)
    coeffs = binom_series(x, U_prec)
    scale = int_pow(u, s)
    if t:
        scale = scale * int_pow(v, t)
    return [scale * c for c in coeffs]


# -- twisted and two-variable L-series ---------------------------------------------------


def unit_fibres(alpha: LaurentElement, X: BaseScheme, D_T: int) -> dict:
    """alpha_x = x(alpha sigma(alpha) ... ) in R^x per closed point."""
    from .sigma import SigmaMatrix, fibre
    M = SigmaMatrix(alpha.tower, X, [[alpha]], i0=0)
    out = {}
    for pt in enumerate_closed_points(X, D_T):
        val = fibre(M, pt).entry(0, 0).descend()
        if not val.is_unit():
            raise UnitError(f"fibre at {pt} is not a unit")
        out[pt] = val
    return out


def twisted_L(alpha_fibres, kappa: CharacterPoint, X: BaseScheme,
              D_T: int, tower: Tower = None) -> TruncatedSeries:
    """prod over closed points of 1 / (1 - kappa(alpha_x) T^deg x)."""
    pts = enumerate_closed_points(X, D_T)
    fib = alpha_fibres if callable(alpha_fibres) else \
        (lambda pt: alpha_fibres[pt])
    if tower is None:
        tower = fib(pts[0]).tower
    out = TruncatedSeries.one(tower, ("T",), (D_T,))
    for pt in pts:
        val = eval_character(kappa, fib(pt))
        factor = TruncatedSeries(tower, ("T",), (D_T,))
        factor._set((0,), tower.one())
        factor._set((pt.degree,), -val)
        out = out * factor.inverse()
    return out


def two_variable_L(alpha: LaurentElement, s: int, t: int, X: BaseScheme,
                   D_T: int, U_prec: int):
    """H(T, U) = prod 1/(1 - v^t u^s (1 + [pi^m log u](U)) T^deg).

    Returns (H, g) where H is the two-variable series mod
    (T^{D_T+1}, U^{U_prec+1}) and g[m-1] is the power-sum U-polynomial
    g_m(U) = sum_{f | m} f * sum_{deg x = f} factor_x(U)^{m/f}, so that
    H = exp(-sum_m g_m(U)/m T^m) with manifestly integral g_m.
    """
    tower = alpha.tower
    group = qp_multiplicative_group(tower)
    fibres = unit_fibres(alpha, X, D_T)
    factors = {}
    for pt, val in fibres.items():
        factors[pt] = character_u_series(group, s, t, val, U_prec)
    H = TruncatedSeries.one(tower, ("T", "U"), (D_T, U_prec))
    for pt, cs in sorted(factors.items(), key=lambda kv: (kv[0].degree,
                                                          kv[0].rep)):
        factor = TruncatedSeries(tower, ("T", "U"), (D_T, U_prec))
        factor._set((0, 0), tower.one())
        for n, c in enumerate(cs):
            factor._set((pt.degree, n), -c)
        H = H * factor.inverse()
    gs = []
    by_deg = {}
    for pt, cs in factors.items():
        by_deg.setdefault(pt.degree, []).append(cs)
    for m in range(1, D_T + 1):
        gm = [tower.zero()] * (U_prec + 1)
        for f, entries in by_deg.items():
            if m % f:
                continue
            for cs in entries:
                powed = _upoly_pow(cs, m // f, U_prec, tower)
                for n, c in enumerate(powed):
                    gm[n] = gm[n] + c * f
        gs.append(gm)
    return H, gs


def _upoly_pow(cs, k, U_prec, tower):
    out = [tower.one()] + [tower.zero()] * U_prec
    base = list(cs) + [tower.zero()] * (U_prec + 1 - len(cs))
    while k:
        if k & 1:
            out = _upoly_mul(out, base, U_prec, tower)
        k >>= 1
        if k:
            base = _upoly_mul(base, base, U_prec, tower)
    return out


def _upoly_mul(a, b, U_prec, tower):
    out = [tower.zero()] * (U_prec + 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            if i + j > U_prec:
                break
            if not y.is_zero():
                out[i + j] = out[i + j] + x * y
    return out


def lubin_tate_identity_check(tower: Tower, x: PadicNumber, y: PadicNumber,
                              pi_digits: int) -> bool:
    """1 + [x](iota(y)) = exp(pi^{-m} x y), checked mod pi^pi_digits."""
    group = qp_multiplicative_group(tower)
    z = iota(tower, y, group)
    lhs = tower.one() + bracket_at(group, x, z)
    scale = int_pow(tower.integer(tower.p), -group.m)
    rhs = p_exp(scale * x * y)
    return lhs.congruent(rhs, pi_digits)
