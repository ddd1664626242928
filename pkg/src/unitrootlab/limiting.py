"""Limiting matrices: overconvergent resolutions of rank-one unit roots.

For a standard 1-normal matrix M with corner a and non-corner columns
lambda_i = a_{i0,i} + sum_{i'} a_{i',i} z_{i'} (linear forms in formal
variables indexed by the non-corner slots), the limiting matrix at level
r with weight specialization V = +/- y has columns

    b_{(q2)} = a^{+/-y} * a^{r - |q2|} * prod_i lambda_i^{q2(i)},

living in the polynomial ring on the z-variables truncated at total
degree Q.  Because M is standard normal, lambda at the corner slot is the
scalar a, and 1-normality puts every lambda_i coefficient in pi*A, which
certifies that the column at q2 is divisible by pi^{|q2|}: dropping
|q2| > Q is sound once Q clears the working precision.

The fibre-level construction replaces a^{+/-y} by the weight U-series
eta = (1 + U)^{pi^m log(corner fibre)}; substituting U = iota(y) must
reproduce the fibre of the global matrix, and the resolution identity
expresses L(a^{s+y}) through these matrices tensored with exterior powers.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import DomainError, FlagError, PrecisionError
from .laurent import LaurentElement
from .points import BaseScheme, ClosedPoint, enumerate_closed_points
from .series import TruncatedSeries
from .sigma import (FibreMatrix, SigmaMatrix, euler_L, fibre, tensor, wedge)
from .towers import (PadicNumber, Tower, _coerce, div_int_exact, int_pow,
                     invert_unit, ord_lower_bound, ord_pi, p_exp, p_log,
                     unit_pow, vp_factorial)
from .weights import binom_series, log_over_pi_m, qp_multiplicative_group

SIGN_PLUS = "+"
SIGN_MINUS = "-"


# -- Laurent-coefficient exp/log/powers ------------------------------------------------


def laurent_min_ord_p(a: LaurentElement) -> Fraction:
    """Certified lower bound on min coefficient ord_p."""
    return min((ord_lower_bound(c) for c in a.coeffs.values()),
               default=Fraction(a.tower.N, a.tower.e))


def laurent_log(a: LaurentElement) -> LaurentElement:
    """log of a 1-unit of the completed coordinate ring."""
    t = a.tower
    w = a - LaurentElement.constant(t, a.nvars, 1)
    if not w.in_pi_power(1):
        raise DomainError("log needs a 1-unit of the completed ring")
    o = w.min_ord_pi()
    if o is None:
        return LaurentElement(t, a.nvars)
    nstop = 1
    from .towers import vp_int
    cap = 2 * t.N + 64 * t.e + 64
    for n in range(1, cap + 1):
        if n * o - t.e * vp_int(n, t.p) < t.N:
            nstop = n
    guard = max(vp_int(n, t.p) for n in range(1, nstop + 1))
    big = t.raised(guard)
    wb = w.lift_to(big)
    acc = LaurentElement(big, a.nvars)
    term = LaurentElement.constant(big, a.nvars, 1)
    for n in range(1, nstop + 1):
        term = term * wb
        piece = LaurentElement(big, a.nvars)
        for expo, c in term.coeffs.items():
            piece.coeffs[expo] = div_int_exact(c, n)
        acc = acc + (piece if n % 2 == 1 else -piece)
    return acc.project(t)


def laurent_exp(s: LaurentElement) -> LaurentElement:
    """exp of a coordinate-ring element with min ord_p > 1/(p-1)."""
    t = s.tower
    o = s.min_ord_pi()
    if o is None:
        return LaurentElement.constant(t, s.nvars, 1)
    if Fraction(o, t.e) <= Fraction(1, t.p - 1):
        raise DomainError("exp needs min ord_p > 1/(p-1)")
    slack = Fraction(o) - Fraction(t.e, t.p - 1)
    nstop = int(Fraction(t.N) / slack) + 1
    guard = vp_factorial(nstop, t.p)
    big = t.raised(guard)
    sb = s.lift_to(big)
    acc = LaurentElement.constant(big, s.nvars, 1)
    term = LaurentElement.constant(big, s.nvars, 1)
    from .towers import _factorial
    for n in range(1, nstop):
        term = term * sb
        piece = LaurentElement(big, s.nvars)
        fact = _factorial(n)
        for expo, c in term.coeffs.items():
            piece.coeffs[expo] = div_int_exact(c, fact)
        acc = acc + piece
    return acc.project(t)


def laurent_unit_pow(a: LaurentElement, y: PadicNumber) -> LaurentElement:
    """exp(y log a): the analytic power a^y of a coordinate-ring 1-unit."""
    la = laurent_log(a)
    ymin = ord_lower_bound(y)
    if ymin + laurent_min_ord_p(la) <= Fraction(1, a.tower.p - 1):
        raise DomainError("unit power outside its convergence domain")
    return laurent_exp(la.scale(y))


def laurent_int_pow(a: LaurentElement, k: int) -> LaurentElement:
    if k < 0:
        a = a.inverse()
        k = -k
    out = LaurentElement.constant(a.tower, a.nvars, 1)
    while k:
        if k & 1:
            out = out * a
        a = a * a if k > 1 else a
        k >>= 1
    return out


# -- the index set J --------------------------------------------------------------------


def limiting_indices(n_slots: int, Q: int) -> list[tuple[int, ...]]:
    """Exponent maps q on the non-corner slots with |q| <= Q, graded lex."""
    out = []
    for total in range(Q + 1):
        out.extend(sorted(_compositions(total, n_slots)))
    return out


def _compositions(total, slots):
    if slots == 0:
        return [()] if total == 0 else []
    if slots == 1:
        return [(total,)]
    out = []
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            out.append((first,) + rest)
    return out


# -- convergence regimes -----------------------------------------------------------------


def normality_mu(M: SigmaMatrix) -> Fraction:
    """mu = min ord_p over (corner - 1) and all non-corner entries."""
    t = M.tower
    one = LaurentElement.constant(t, M.scheme.n, 1)
    vals = []
    for i in range(M.n):
        for j in range(M.n):
            a = M.entry(i, j) - one if (i, j) == (M.i0, M.i0) else \
                M.entry(i, j)
            vals.append(laurent_min_ord_p(a))
    return min(vals)


def disk_requirement(M: SigmaMatrix) -> Fraction:
    """Strict lower bound nu on ord_p(y) for the weight specialization.

    mu > 1/(p-1) allows nu > 1/(p-1) - mu; otherwise take the least b >= 0
    with mu >= 1/((p-1) p^b) and require nu > b.  (The borderline
    mu = 1/(p-1) is admitted through b = 0.)
    """
    t = M.tower
    mu = normality_mu(M)
    if mu <= 0:
        raise FlagError("matrix is not 1-normal at working precision")
    lim = Fraction(1, t.p - 1)
    if mu > lim:
        return lim - mu
    b = 0
    while mu < lim / t.p ** b:
        b += 1
    return Fraction(b)


def check_disk(M: SigmaMatrix, y: PadicNumber) -> None:
    nu = disk_requirement(M)
    if ord_lower_bound(y) <= nu:
        raise DomainError(
            f"weight point needs ord_p(y) > {nu}; input cannot certify it")


# -- the global construction ----------------------------------------------------------------


@dataclass
class LimitingMatrix:
    """A limiting matrix with its provenance and truncation certificate."""

    matrix: SigmaMatrix
    jindex: list
    source: SigmaMatrix
    level: int
    sign: str
    y: PadicNumber
    Q: int
    column_margins: list  # per column: min ord_pi minus |q2|


def default_Q(tower: Tower) -> int:
    return -(-tower.N // tower.e)


def build_limiting(M: SigmaMatrix, r: int, sign: str, y,
                   Q: int = None) -> LimitingMatrix:
    """The J x J limiting matrix of M at level r, weight V = sign*y."""
    if sign not in (SIGN_PLUS, SIGN_MINUS):
        raise DomainError("sign must be '+' or '-'")
    if not M.is_standard_one_normal():
        raise FlagError("limiting construction needs standard 1-normal "
                        "input")
    t = M.tower
    y = _coerce(t, y)
    check_disk(M, y)
    if Q is None:
        Q = default_Q(t)
    slots = [i for i in range(M.n) if i != M.i0]
    J = limiting_indices(len(slots), Q)
    jpos = {q: k for k, q in enumerate(J)}
    corner = M.corner()
    yy = y if sign == SIGN_PLUS else -y
    weight = laurent_unit_pow(corner, yy)
    # lambda_i as truncated polynomials in the slot variables
    lambdas = []
    for i in slots:
        lin = {(0,) * len(slots): M.entry(M.i0, i)}
        for k2, i2 in enumerate(slots):
            ent = M.entry(i2, i)
            if not ent.is_zero():
                key = tuple(1 if k3 == k2 else 0 for k3 in range(len(slots)))
                lin[key] = ent
        lambdas.append(lin)
    corner_pows = _corner_power_table(corner, r, Q)
    entries = {}
    margins = []
    for col, q2 in enumerate(J):
        scalar = weight * corner_pows[r - sum(q2)]
        poly = {(0,) * len(slots): LaurentElement.constant(t, M.scheme.n, 1)}
        for slot, mult in enumerate(q2):
            for _ in range(mult):
                poly = _zpoly_mul(poly, lambdas[slot], Q)
        colmin = None
        for q1, coeff in poly.items():
            val = coeff * scalar
            if val.is_zero():
                continue
            entries[(jpos[q1], col)] = val
            o = val.min_ord_pi()
            if o is not None and (colmin is None or o < colmin):
                colmin = o
        need = sum(q2)
        if colmin is not None and colmin < need:
            raise FlagError(
                f"column valuation certificate fails at q2={q2}: "
                f"ord {colmin} < |q2| = {need}")
        margins.append((colmin if colmin is not None else t.N) - need)
    mat = SigmaMatrix.__new__(SigmaMatrix)
    mat.tower, mat.scheme, mat.n, mat.i0 = t, M.scheme, len(J), 0
    mat.entries = entries
    return LimitingMatrix(mat, J, M, r, sign, y, Q, margins)


def _corner_power_table(corner: LaurentElement, r: int, Q: int) -> dict:
    """corner^(r - s) for s = 0..Q, sharing the inverse."""
    t = corner.tower
    out = {}
    lo, hi = r - Q, r
    inv = corner.inverse() if lo < 0 else None
    cur = laurent_int_pow(corner, lo) if lo >= 0 else \
        laurent_int_pow(inv, -lo)
    out[lo] = cur
    for k in range(lo + 1, hi + 1):
        cur = cur * corner
        out[k] = cur
    return out


def _zpoly_mul(a: dict, b: dict, Q: int) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            expo = tuple(x + y for x, y in zip(e1, e2))
            if sum(expo) > Q:
                continue
            prod = c1 * c2
            if expo in out:
                out[expo] = out[expo] + prod
            else:
                out[expo] = prod
    return {e: c for e, c in out.items() if not c.is_zero()}


# -- the fibre-level construction --------------------------------------------------------


def fibre_limiting(fib: FibreMatrix, r: int, sign: str, Q: int,
                   U_prec: int):
    """The J x J fibre limiting matrix with U-series entries.

    Entries are lists of PadicNumber (U-coefficients, length U_prec + 1)
    over the fibre's extension ring; the weight factor is the binomial
    series (1 + U)^{pi^m log(corner)} (inverted for the minus sign).
    """
    if not fib.is_standard_one_unit():
        raise FlagError("fibre limiting needs a standard fibre with a "
                        "1-unit corner")
    ext = fib.tower
    base_corner = fib.entry(fib.i0, fib.i0).descend()
    group = qp_multiplicative_group(ext.extension(1))
    x = log_over_pi_m(group, base_corner)
    eta = binom_series(x if sign == SIGN_PLUS else -x, U_prec)
    eta = [c.extend(ext) for c in eta]
    slots = [i for i in range(fib.n) if i != fib.i0]
    J = limiting_indices(len(slots), Q)
    jpos = {q: k for k, q in enumerate(J)}
    corner = fib.entry(fib.i0, fib.i0)
    lambdas = []
    for i in slots:
        lin = {(0,) * len(slots): fib.entry(fib.i0, i)}
        for k2, i2 in enumerate(slots):
            ent = fib.entry(i2, i)
            if not ent.is_zero():
                key = tuple(1 if k3 == k2 else 0 for k3 in range(len(slots)))
                lin[key] = ent
        lambdas.append(lin)
    inv = invert_unit(corner)
    size = len(J)
    zero_row = [ext.zero()] * (U_prec + 1)
    entries = [[list(zero_row) for _ in range(size)] for _ in range(size)]
    for col, q2 in enumerate(J):
        scalar = int_pow(corner, r - sum(q2)) if r - sum(q2) >= 0 else \
            int_pow(inv, sum(q2) - r)
        poly = {(0,) * len(slots): ext.one()}
        for slot, mult in enumerate(q2):
            for _ in range(mult):
                poly = _fibre_poly_mul(poly, lambdas[slot], Q, ext)
        for q1, coeff in poly.items():
            base = coeff * scalar
            entries[jpos[q1]][col] = [base * c for c in eta]
    return J, entries


def _fibre_poly_mul(a: dict, b: dict, Q: int, ext) -> dict:
    out = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            expo = tuple(x + y for x, y in zip(e1, e2))
            if sum(expo) > Q:
                continue
            prod = c1 * c2
            if expo in out:
                out[expo] = out[expo] + prod
            else:
                out[expo] = prod
    return {e: c for e, c in out.items() if not c.is_zero()}


def substitute_u(entries, value: PadicNumber):
    """Evaluate every U-series entry at U = value."""
    out = []
    pows = [value.tower.one()]
    depth = max(len(e) for row in entries for e in row)
    for _ in range(depth - 1):
        pows.append(pows[-1] * value)
    for row in entries:
        new = []
        for cs in row:
            acc = value.tower.zero()
            for c, zp in zip(cs, pows):
                acc = acc + c * zp
            new.append(acc)
        out.append(new)
    return out


def fibre_commutation_check(M: SigmaMatrix, pt: ClosedPoint, r: int,
                            sign: str, y, Q: int, U_prec: int,
                            pi_digits: int) -> dict:
    """Fibres commute with the limiting construction.

    Compares the fibre of the global limiting matrix at V = sign*y with
    the fibre-level matrix evaluated at U = iota(y), entrywise.
    """
    from .weights import iota
    t = M.tower
    y = _coerce(t, y)
    lim = build_limiting(M, r, sign, y, Q)
    lhs = fibre(lim.matrix, pt)
    fib = fibre(M, pt)
    J, entries = fibre_limiting(fib, r, sign, Q, U_prec)
    z = iota(t, y).extend(fib.tower)
    rhs = substitute_u(entries, z)
    worst = None
    witness = None
    for i in range(len(J)):
        for j in range(len(J)):
            diff = lhs.entry(i, j) - rhs[i][j]
            o = ord_pi(diff)
            if o is not None and o < pi_digits:
                if worst is None or o < worst:
                    worst = o
                    witness = (i, j, o)
    return {
        "point": repr(pt),
        "level": r,
        "sign": sign,
        "Q": Q,
        "U_prec": U_prec,
        "modulus_digits": pi_digits,
        "ok": witness is None,
        "witness": witness,
    }


# -- the resolution identity ----------------------------------------------------------------


def unit_root_L_direct(M: SigmaMatrix, s: int, sign: str, y,
                       X: BaseScheme, D_T: int) -> TruncatedSeries:
    """L of the rank-one twist: Euler factors 1/(1 - a_x^s a_x^{+/-y} T^f)."""
    t = M.tower
    y = _coerce(t, y)
    corner = M.corner()
    out = TruncatedSeries.one(t, ("T",), (D_T,))
    Mc = SigmaMatrix(t, X, [[corner]], i0=0)
    for pt in enumerate_closed_points(X, D_T):
        alpha = fibre(Mc, pt).entry(0, 0).descend()
        yy = y if sign == SIGN_PLUS else -y
        val = int_pow(alpha, s) * unit_pow(alpha, yy)
        factor = TruncatedSeries(t, ("T",), (D_T,))
        factor._set((0,), t.one())
        factor._set((pt.degree,), -val)
        out = out * factor.inverse()
    return out


def verify_rk1res(M: SigmaMatrix, s: int, y, D_T: int, Q: int = None,
                  sign: str = SIGN_PLUS) -> dict:
    """The resolution of the unit root as an identity of L-series.

    LHS: L of the rank-one family a^s a^{+/-y} (a = unit-root corner).
    RHS: prod_{r=1..rank} L(B^{s-r} (x) wedge^r M)^((-1)^(r-1) r),
    with B the limiting matrix at V = sign*y.  Both sides are compared
    mod (T^{D_T+1}, pi^N).
    """
    t = M.tower
    y = _coerce(t, y)
    lhs = unit_root_L_direct(M, s, sign, y, M.scheme, D_T)
    rhs = TruncatedSeries.one(t, ("T",), (D_T,))
    for r in range(1, M.n + 1):
        lim = build_limiting(M, s - r, sign, y, Q)
        wr = wedge(M, r)
        Lr = euler_L(tensor(lim.matrix, wr), M.scheme, D_T)
        exponent = r if r % 2 == 1 else -r
        rhs = rhs * Lr.pow_int(exponent)
    witness = lhs.agrees_with(rhs, (D_T,), t.N)
    return {
        "s": s,
        "sign": sign,
        "y": y.serialize(),
        "D_T": D_T,
        "Q": Q if Q is not None else default_Q(t),
        "ok": witness is None,
        "witness": list(witness) if witness else None,
        "lhs": lhs.serialize(),
        "rhs": rhs.serialize(),
    }
