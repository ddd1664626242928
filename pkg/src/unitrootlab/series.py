"""Truncated power series in T (and optionally U) over a tower.

Coefficient maps are sparse; truncation orders are carried explicitly and
every binary operation truncates to the componentwise minimum of its
operands' orders, so precision never silently inflates.  The exp/log
recursions divide only by the term index (never by factorials), and run
in a guard tower so results stay honest at the callers' precision.

The valuation-bound checker for exp(-sum g_m(U)/m T^m) works in exact
rational arithmetic instead: its inputs are integral by hypothesis and
its conclusion is a sharp inequality on ord_p, which Fraction coefficients
decide exactly.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import (BoundCheckError, DomainError, PrecisionError,
                     UnitError)
from .towers import (PadicNumber, Tower, _coerce, div_int_exact, int_pow,
                     invert_unit, ord_p, ord_pi, vp_factorial, vp_int)


class TruncatedSeries:
    """Sparse series in the given variables, truncated per variable."""

    __slots__ = ("tower", "vars", "trunc", "coeffs")
    __hash__ = None

    def __init__(self, tower: Tower, variables=("T",), trunc=(10,),
                 coeffs=None):
        self.tower = tower
        self.vars = tuple(variables)
        self.trunc = tuple(trunc)
        if len(self.vars) != len(self.trunc):
            raise DomainError("one truncation order per variable")
        self.coeffs = {}
        if coeffs:
            for expo, c in coeffs.items():
                self._set(tuple(expo), c)

    def _inside(self, expo):
        return all(0 <= a <= t for a, t in zip(expo, self.trunc))

    def _set(self, expo, c):
        if len(expo) != len(self.vars):
            raise DomainError("exponent arity mismatch")
        if not self._inside(expo):
            return
        c = _coerce(self.tower, c)
        if not c.is_zero():
            self.coeffs[expo] = c

    @classmethod
    def one(cls, tower, variables=("T",), trunc=(10,)):
        out = cls(tower, variables, trunc)
        out._set((0,) * len(out.vars), tower.one())
        return out

    @classmethod
    def zero(cls, tower, variables=("T",), trunc=(10,)):
        return cls(tower, variables, trunc)

    def clone(self):
        out = TruncatedSeries(self.tower, self.vars, self.trunc)
        out.coeffs = dict(self.coeffs)
        return out

    def coefficient(self, expo) -> PadicNumber:
        return self.coeffs.get(tuple(expo), self.tower.zero())

    # -- arithmetic -----------------------------------------------------------

    def _meet(self, other):
        if self.vars != other.vars or not self.tower.same_field(other.tower):
            raise DomainError("incompatible series")
        return tuple(min(a, b) for a, b in zip(self.trunc, other.trunc))

    def __add__(self, other):
        other = self._as_series(other)
        out = TruncatedSeries(self.tower, self.vars, self._meet(other))
        for expo, c in self.coeffs.items():
            out._set(expo, c)
        for expo, c in other.coeffs.items():
            cur = out.coeffs.get(expo)
            if cur is None:
                out._set(expo, c)
            else:
                s = cur + c
                if s.is_zero():
                    del out.coeffs[expo]
                else:
                    out.coeffs[expo] = s
        return out

    def __neg__(self):
        out = self.clone()
        out.coeffs = {e: -c for e, c in out.coeffs.items()}
        return out

    def __sub__(self, other):
        return self + (-self._as_series(other))

    def __mul__(self, other):
        other = self._as_series(other)
        out = TruncatedSeries(self.tower, self.vars, self._meet(other))
        acc = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in other.coeffs.items():
                expo = tuple(a + b for a, b in zip(e1, e2))
                if not out._inside(expo):
                    continue
                prod = c1 * c2
                if expo in acc:
                    acc[expo] = acc[expo] + prod
                else:
                    acc[expo] = prod
        for expo, c in acc.items():
            if not c.is_zero():
                out.coeffs[expo] = c
        return out

    def _as_series(self, other):
        if isinstance(other, TruncatedSeries):
            return other
        out = TruncatedSeries(self.tower, self.vars, self.trunc)
        out._set((0,) * len(self.vars), other)
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        d = self - other
        return all(c.is_zero() for c in d.coeffs.values())

    def inverse(self) -> "TruncatedSeries":
        """Multiplicative inverse; the constant term must be a unit."""
        c0 = self.coefficient((0,) * len(self.vars))
        if not c0.is_unit():
            raise UnitError("series inverse needs a unit constant term")
        c0inv = invert_unit(c0)
        # split as c0*(1 + w) with w topologically nilpotent in T,U-degree
        w = (self * c0inv) - self.tower.one()
        acc = TruncatedSeries.one(self.tower, self.vars, self.trunc)
        term = TruncatedSeries.one(self.tower, self.vars, self.trunc)
        total = sum(self.trunc)
        for _ in range(total):
            term = -(term * w)
            if not term.coeffs:
                break
            acc = acc + term
        return acc * c0inv

    def pow_int(self, k: int) -> "TruncatedSeries":
        base = self if k >= 0 else self.inverse()
        k = abs(k)
        out = TruncatedSeries.one(self.tower, self.vars, self.trunc)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- substitutions and reports --------------------------------------------

    def substitute_second(self, value: PadicNumber) -> "TruncatedSeries":
        """Specialize the second variable (U) to a point."""
        if len(self.vars) != 2:
            raise DomainError("substitute_second needs a two-variable series")
        out = TruncatedSeries(self.tower, (self.vars[0],), (self.trunc[0],))
        pows = {0: self.tower.one()}
        acc = {}
        for expo, c in sorted(self.coeffs.items()):
            j = expo[1]
            if j not in pows:
                pows[j] = int_pow(value, j)
            key = (expo[0],)
            term = c * pows[j]
            acc[key] = acc[key] + term if key in acc else term
        for key, c in acc.items():
            out._set(key, c)
        return out

    def agrees_with(self, other: "TruncatedSeries", orders, pi_digits: int):
        """First witness where the two differ mod pi^pi_digits, or None."""
        other = self._as_series(other)
        for expo in _box(orders):
            a = self.coefficient(expo)
            b = other.coefficient(expo)
            if not a.congruent(b, pi_digits):
                return expo
        return None

    def integral_coefficients(self) -> bool:
        return all(o is None or o >= 0
                   for o in (ord_pi(c) for c in self.coeffs.values()))

    def serialize(self) -> dict:
        return {
            "variables": list(self.vars),
            "truncation": list(self.trunc),
            "coefficients": [
                [list(expo), self.coeffs[expo].serialize()]
                for expo in sorted(self.coeffs)
            ],
        }

    def __repr__(self):
        terms = []
        for expo in sorted(self.coeffs):
            mono = "*".join(f"{v}^{a}" for v, a in zip(self.vars, expo)
                            if a) or "1"
            terms.append(f"({self.coeffs[expo].serialize()})*{mono}")
        return "<series " + (" + ".join(terms) or "0") + \
            f" mod {self.vars}^{tuple(t + 1 for t in self.trunc)}>"


def _box(orders):
    if isinstance(orders, int):
        orders = (orders,)
    import itertools
    ranges = [range(t + 1) for t in orders]
    return itertools.product(*ranges)


def _lift_series(s: TruncatedSeries, big: Tower, exact: bool):
    out = TruncatedSeries(big, s.vars, s.trunc)
    for expo, c in s.coeffs.items():
        out.coeffs[expo] = c.as_exact(big) if exact else c.lift_to(big)
    return out


def _project_series(s: TruncatedSeries, small: Tower):
    out = TruncatedSeries(small, s.vars, s.trunc)
    for expo, c in s.coeffs.items():
        pc = c.project(small, min(c.prec, small.N))
        if not pc.is_zero():
            out.coeffs[expo] = pc
    return out


# -- dlog inversion --------------------------------------------------------------


def series_from_dlog(power_sums, D: int, tower: Tower = None
                     ) -> TruncatedSeries:
    """The unique L with L(0) = 1 and T L'/L = sum_m power_sums[m-1] T^m.

    Recursion: m c_m = sum_{j=1..m} K_j c_{m-j}.  The division by m is
    exact whenever L has integral coefficients; a PrecisionError reports
    either a genuinely non-integral coefficient or exhausted digits.
    """
    if len(power_sums) < D:
        raise DomainError("need at least D power sums")
    if tower is None:
        tower = power_sums[0].tower
    Ks = [_coerce(tower, k) for k in power_sums]
    out = TruncatedSeries.one(tower, ("T",), (D,))
    cs = [tower.one()]
    for m in range(1, D + 1):
        acc = tower.zero()
        for j in range(1, m + 1):
            acc = acc + Ks[j - 1] * cs[m - j]
        try:
            cm = div_int_exact(acc, m)
        except DomainError:
            raise PrecisionError(
                f"coefficient {m} is not integral: the division by {m} "
                "does not stay in the ring of integers")
        if cm.prec <= 0:
            raise PrecisionError(
                f"division by {m} exhausted the input precision")
        cs.append(cm)
        out._set((m,), cm)
    return out


def t_dlog(series: TruncatedSeries) -> list[PadicNumber]:
    """Forward map: the power sums K_m with T L'/L = sum K_m T^m."""
    D = series.trunc[0]
    inv = series.inverse()
    deriv = TruncatedSeries(series.tower, series.vars, series.trunc)
    for expo, c in series.coeffs.items():
        if expo[0] >= 1:
            deriv._set(expo, c * expo[0])
    prod = deriv * inv
    return [prod.coefficient((m,) + (0,) * (len(series.vars) - 1))
            for m in range(1, D + 1)]


# -- Newton polygons ---------------------------------------------------------------


def newton_polygon(coefficients, up_to_degree: int = None):
    """Lower convex hull slopes of (i, ord_p(c_i)), with multiplicities.

    `coefficients` is a list of PadicNumber (index = degree) or a
    TruncatedSeries.  Slopes are exact Fractions in ord_p normalization.
    Coefficients that vanish at working precision are treated as +infinity,
    but a PrecisionError is raised if one of them could cut the hull.
    """
    if isinstance(coefficients, TruncatedSeries):
        D = coefficients.trunc[0]
        coefficients = [coefficients.coefficient((i,)) for i in range(D + 1)]
    if up_to_degree is not None:
        coefficients = coefficients[:up_to_degree + 1]
    pts = []
    unknown = []
    for i, c in enumerate(coefficients):
        o = ord_p(c)
        if o is None:
            unknown.append((i, Fraction(c.prec, c.tower.e)))
        else:
            pts.append((i, o))
    if not pts:
        raise PrecisionError("no coefficient has a known valuation")
    hull = _lower_hull(pts)
    for i, bound in unknown:
        if i < hull[-1][0] and _hull_value(hull, i) >= bound:
            raise PrecisionError(
                f"coefficient {i} vanishes at working precision but could "
                "support a hull vertex")
    slopes = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        slopes.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    merged = []
    for s, m in slopes:
        if merged and merged[-1][0] == s:
            merged[-1] = (s, merged[-1][1] + m)
        else:
            merged.append((s, m))
    return merged


def _lower_hull(pts):
    pts = sorted(pts)
    hull = []
    for pt in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point if it lies on or above the chord
            if (y2 - y1) * (pt[0] - x1) >= (pt[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(pt)
    return hull


def _hull_value(hull, x):
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        if x1 <= x <= x2:
            return y1 + Fraction(y2 - y1, x2 - x1) * (x - x1)
    return hull[-1][1]


# -- valuation bound for exp(-sum g_m/m T^m), in exact rationals ---------------------


def convext_bound_check(g_polys, m_max: int, p: int, u_trunc: int = None):
    """Expand f = exp(-sum_m g_m(U)/m T^m) and check ord_p >= -2m throughout.

    g_polys[m-1] is the coefficient list of g_m as a polynomial in U with
    *integer* coefficients (several U variables are accepted as dicts
    {exponent tuple: int}).  Returns a report dict with the worst margin;
    raises BoundCheckError with a witness on failure.
    """
    gs = []
    for g in g_polys[:m_max]:
        if isinstance(g, dict):
            gs.append({tuple(e): int(c) for e, c in g.items()})
        else:
            gs.append({(i,): int(c) for i, c in enumerate(g)})
    nu = max((len(next(iter(g))) for g in gs if g), default=1)
    gs = [{e if len(e) == nu else e + (0,) * (nu - len(e)): c
           for e, c in g.items()} for g in gs]
    if u_trunc is None:
        u_trunc = max((sum(e) for g in gs for e in g), default=0) * m_max
    # alpha_0 = 1;  m*alpha_m = -sum_{j=1..m} g_j * alpha_{m-j}
    alphas = [{(0,) * nu: Fraction(1)}]
    worst = None
    witness = None
    for m in range(1, m_max + 1):
        acc = {}
        for j in range(1, m + 1):
            gj = gs[j - 1] if j <= len(gs) else {}
            for e1, c1 in gj.items():
                if c1 == 0:
                    continue
                for e2, c2 in alphas[m - j].items():
                    expo = tuple(a + b for a, b in zip(e1, e2))
                    if sum(expo) > u_trunc:
                        continue
                    acc[expo] = acc.get(expo, Fraction(0)) - c1 * c2
        alpha_m = {e: c / m for e, c in acc.items() if c != 0}
        alphas.append(alpha_m)
        for e, c in alpha_m.items():
            o = _frac_ord_p(c, p)
            margin = o + 2 * m
            if worst is None or margin < worst:
                worst = margin
                witness = {"m": m, "u_exponent": list(e), "ord_p": str(o),
                           "margin": str(margin)}
    report = {
        "m_max": m_max,
        "p": p,
        "worst_margin": str(worst) if worst is not None else "+inf",
        "witness": witness,
        "ok": worst is None or worst >= 0,
    }
    if not report["ok"]:
        raise BoundCheckError("ord_p(beta_{m,l}) >= -2m fails", witness)
    return report


def _frac_ord_p(x: Fraction, p: int) -> int:
    num, den = x.numerator, x.denominator
    return vp_int(num, p) - vp_int(den, p)
