"""Rational functions in one variable over an exact coefficient field.

Supports local Laurent expansion at finite points (including generic roots
of a modulus, with coefficients in the quotient algebra) and summing
residues over all roots of a squarefree polynomial without ever factoring
past rational roots: the sum over conjugate roots is a field trace.
"""

from __future__ import annotations

from . import polys as P
from .scalars import NumberField, ZeroDivisorError, is_rational, rat
from .series import TruncSeries


class RationalFunction:
    """num/den with dense polynomial parts; reduced when gcds are computable."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce=True):
        num = P.p_trim(list(num))
        den = P.p_trim(list(den)) if den is not None else [rat(1)]
        if not den:
            raise ZeroDivisionError("zero denominator")
        if reduce and num:
            try:
                g = P.p_gcd(num, den)
                if len(g) > 1:
                    num, r1 = P.p_divmod(num, g)
                    den, r2 = P.p_divmod(den, g)
                    assert not r1 and not r2
            except (ZeroDivisorError, ZeroDivisionError):
                pass
        if not num:
            den = [rat(1)]
        else:
            try:
                lead_inv = _inv_scalar(den[-1])
                num = [c * lead_inv for c in num]
                den = [c * lead_inv for c in den]
            except (ZeroDivisorError, ZeroDivisionError):
                pass
        self.num = num
        self.den = den

    # -- constructors ---------------------------------------------------

    @staticmethod
    def from_poly(coeffs) -> RationalFunction:
        return RationalFunction(list(coeffs), [rat(1)], reduce=False)

    @staticmethod
    def const(c) -> RationalFunction:
        return RationalFunction([c], [rat(1)], reduce=False)

    @staticmethod
    def var() -> RationalFunction:
        return RationalFunction([rat(0), rat(1)], [rat(1)], reduce=False)

    # -- basics -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def is_poly(self) -> bool:
        return len(self.den) == 1

    def __repr__(self):
        if self.is_poly() and self.den == [rat(1)]:
            return f"RationalFunction({self.num})"
        return f"RationalFunction({self.num} / {self.den})"

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        lhs = P.p_mul(self.num, o.den)
        rhs = P.p_mul(o.num, self.den)
        return P.p_trim(P.p_sub(lhs, rhs)) == []

    __hash__ = None

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, int) or is_rational(other) or hasattr(other, "inverse"):
            if isinstance(other, TruncSeries):
                return None
            return RationalFunction.const(other)
        return None

    # -- arithmetic ---------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        num = P.p_add(P.p_mul(self.num, o.den), P.p_mul(o.num, self.den))
        return RationalFunction(num, P.p_mul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(P.p_neg(self.num), self.den, reduce=False)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.__add__(-o)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return RationalFunction(P.p_mul(self.num, o.num), P.p_mul(self.den, o.den))

    __rmul__ = __mul__

    def inverse(self) -> RationalFunction:
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return RationalFunction.const(rat(1))
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def deriv(self) -> RationalFunction:
        dn = P.p_deriv(self.num)
        dd = P.p_deriv(self.den)
        num = P.p_sub(P.p_mul(dn, self.den), P.p_mul(self.num, dd))
        return RationalFunction(num, P.p_mul(self.den, self.den))

    def eval(self, value):
        """Evaluate at a scalar (rational, algebraic, or dual)."""
        n = P.p_eval(self.num, value)
        d = P.p_eval(self.den, value)
        if isinstance(n, int):
            n = rat(n)
        return n * _inv_scalar(d) if not is_rational(d) else n / d

    # -- local analysis -------------------------------------------------

    def order_at(self, point) -> int:
        """Valuation at a finite point: pole order is negative."""
        if self.is_zero():
            raise ValueError("zero function has no finite valuation")
        vn = _val_at(self.num, point)
        vd = _val_at(self.den, point)
        return vn - vd

    def local_expand(self, point, order: int) -> TruncSeries:
        """Laurent expansion in t where z = point + t, to O(t^order)."""
        if self.is_zero():
            return TruncSeries.zero(order)
        pad = order + 2 * len(self.den) + 2
        ns = TruncSeries.from_poly(P.p_shift(self.num, point), pad)
        ds = TruncSeries.from_poly(P.p_shift(self.den, point), pad)
        return (ns / ds).truncate(order)

    def residue_at(self, point):
        """Residue of f dz at a finite point."""
        return self.local_expand(point, 0).coeff(-1)

    def expand_at_infinity(self, order: int) -> TruncSeries:
        """Expansion in t = 1/z of f(1/t), to O(t^order)."""
        if self.is_zero():
            return TruncSeries.zero(order)
        dn, dd = len(self.num) - 1, len(self.den) - 1
        pad = order + 2 * (dd + dn) + 2
        ns = TruncSeries.from_poly(list(reversed(self.num)), pad + dn, low=0).shift(-dn)
        ds = TruncSeries.from_poly(list(reversed(self.den)), pad + dd, low=0).shift(-dd)
        return (ns / ds).truncate(order)

    def residue_at_infinity(self):
        """Residue of f dz at infinity: -[1/z] coefficient of f."""
        s = self.expand_at_infinity(2)
        return -s.coeff(1)


def _inv_scalar(c):
    if isinstance(c, int):
        if not c:
            raise ZeroDivisionError("division by zero")
        return rat(1, c)
    if is_rational(c):
        return rat(1) / c
    return c.inverse()


def _val_at(poly, point) -> int:
    shifted = P.p_shift(poly, point)
    for k, c in enumerate(shifted):
        if c:
            return k
    return len(shifted)


def residues_sum(f: RationalFunction, modulus):
    """Sum of residues of f dz over all roots of a squarefree `modulus`.

    Rational roots are peeled off and handled directly; the residue at a
    generic root of the remaining cofactor is an element of Q[a]/(cofactor)
    and its sum over conjugates is the field trace. No root is ever
    approximated and no splitting field is built.
    """
    m = P.p_squarefree_part(P.p_trim(list(modulus)))
    if len(m) < 2:
        return rat(0)
    roots, cofactor = P.p_rational_roots(m)
    total = rat(0)
    for r in roots:
        total += _as_rat(f.residue_at(r))
    if len(cofactor) > 1:
        field = NumberField(cofactor)
        a = field.gen()
        res = f.residue_at(a)
        total += field.trace(res if not is_rational(res) else field.from_rat(res))
    return total


def _as_rat(x):
    if is_rational(x):
        return x
    return x.rational_part()
