"""Truncated Laurent series in one local variable with tracked windows.

A series knows coefficients for exponents low <= i < order (order is
exclusive). Binary operations intersect validity windows; the window only
narrows, never silently extends. Coefficients are exact scalars.
"""

from __future__ import annotations

import math

from ._backend import conv_slice
from .scalars import is_rational, rat


class InsufficientOrder(ArithmeticError):
    """An operation needed coefficients beyond the tracked window."""


def _inv(c):
    if isinstance(c, int):
        return rat(1, c)
    if is_rational(c):
        return rat(1) / c
    return c.inverse()


def _is_scalar(c):
    return isinstance(c, int) or is_rational(c) or hasattr(c, "inverse")


class TruncSeries:
    """sum_{i=low}^{order-1} coeffs[i-low] * t^i, truncated at `order`."""

    __slots__ = ("low", "coeffs", "order")

    def __init__(self, low: int, coeffs, order: int):
        coeffs = list(coeffs)
        if len(coeffs) != order - low:
            raise ValueError("coefficient count must equal order - low")
        while coeffs and not coeffs[0]:
            coeffs.pop(0)
            low += 1
        if not coeffs:
            low = order
        self.low = low
        self.coeffs = coeffs
        self.order = order

    # -- constructors -------------------------------------------------

    @staticmethod
    def zero(order: int) -> TruncSeries:
        return TruncSeries(order, [], order)

    @staticmethod
    def const(c, order: int) -> TruncSeries:
        if order <= 0 or not c:
            return TruncSeries.zero(order)
        return TruncSeries(0, [c] + [0] * (order - 1), order)

    @staticmethod
    def var(order: int) -> TruncSeries:
        if order <= 1:
            return TruncSeries.zero(order)
        return TruncSeries(1, [1] + [0] * (order - 2), order)

    @staticmethod
    def from_poly(coeffs, order: int, low: int = 0) -> TruncSeries:
        """Series with the given dense coefficients starting at exponent `low`."""
        out = []
        for i in range(low, order):
            j = i - low
            out.append(coeffs[j] if 0 <= j < len(coeffs) else 0)
        return TruncSeries(low, out, order)

    # -- basics -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def val(self) -> int:
        """Valuation; for the zero series this is the window edge."""
        return self.low

    def coeff(self, k: int):
        if k >= self.order:
            raise InsufficientOrder(f"coefficient t^{k} beyond window t^{self.order}")
        if k < self.low:
            return 0
        return self.coeffs[k - self.low]

    def __repr__(self):
        parts = [f"{c!r}*t^{self.low + i}" for i, c in enumerate(self.coeffs) if c]
        body = " + ".join(parts) if parts else "0"
        return f"<{body} + O(t^{self.order})>"

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        n = min(self.order, other.order)
        lo = min(self.low, other.low, n)
        return all(self.coeff(k) == other.coeff(k) for k in range(lo, n))

    __hash__ = None

    def map_coeffs(self, fn) -> TruncSeries:
        return TruncSeries(self.low, [fn(c) for c in self.coeffs], self.order)

    def truncate(self, order: int) -> TruncSeries:
        if order >= self.order:
            return self
        lo = min(self.low, order)
        return TruncSeries(lo, self.coeffs[: max(0, order - self.low)], order)

    def shift(self, k: int) -> TruncSeries:
        """Multiply by t^k."""
        return TruncSeries(self.low + k, list(self.coeffs), self.order + k)

    # -- ring ops -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, TruncSeries):
            return other
        if _is_scalar(other):
            return TruncSeries.const(other, self.order)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        order = min(self.order, o.order)
        low = min(self.low, o.low, order)
        out = [self.coeff(k) + o.coeff(k) for k in range(low, order)]
        return TruncSeries(low, out, order)

    __radd__ = __add__

    def __neg__(self):
        return TruncSeries(self.low, [-c for c in self.coeffs], self.order)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.__add__(-o)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, TruncSeries):
            order = min(self.order + other.low, other.order + self.low)
            low = self.low + other.low
            if self.is_zero() or other.is_zero() or order <= low:
                return TruncSeries.zero(min(order, self.order + other.order))
            out = conv_slice(self.coeffs, other.coeffs, 0, order - low)
            return TruncSeries(low, out, order)
        if not _is_scalar(other):
            return NotImplemented
        if not other:
            return TruncSeries.zero(self.order)
        return TruncSeries(self.low, [c * other for c in self.coeffs], self.order)

    __rmul__ = __mul__

    def inverse(self) -> TruncSeries:
        """Reciprocal; the lowest coefficient must be invertible."""
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero series")
        v = self.low
        n = self.order - v
        il = _inv(self.coeffs[0])
        out = [il] + [0] * (n - 1)
        for k in range(1, n):
            acc = 0
            for j in range(1, k + 1):
                cj = self.coeffs[j] if j < len(self.coeffs) else 0
                if cj:
                    oj = out[k - j]
                    if oj:
                        acc = acc + cj * oj
            if acc:
                out[k] = -(il * acc)
        return TruncSeries(-v, out, n - v)

    def __truediv__(self, other):
        if isinstance(other, TruncSeries):
            return self * other.inverse()
        if _is_scalar(other):
            return self * _inv(other)
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n == 0:
            return TruncSeries.const(1, self.order)
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    # -- calculus -----------------------------------------------------

    def deriv(self) -> TruncSeries:
        order = self.order - 1
        vals = {}
        for i, c in enumerate(self.coeffs):
            k = self.low + i
            if k != 0 and c:
                vals[k - 1] = k * c
        lo = min([order] + list(vals))
        return TruncSeries(lo, [vals.get(k, 0) for k in range(lo, order)], order)

    def integrate(self) -> TruncSeries:
        """Primitive with zero constant term; the t^-1 coefficient must vanish."""
        if self.low <= -1 and self.coeff(-1):
            raise ValueError("series has a residue; no Laurent primitive")
        order = self.order + 1
        vals = {}
        for i, c in enumerate(self.coeffs):
            k = self.low + i
            if k != -1 and c:
                vals[k + 1] = c * rat(1, k + 1)
        lo = min([order] + list(vals))
        return TruncSeries(lo, [vals.get(k, 0) for k in range(lo, order)], order)

    # -- composition and reversion --------------------------------------

    def compose(self, g: TruncSeries) -> TruncSeries:
        """self(g(t)); g must have valuation >= 1."""
        v = g.val()
        if not g.is_zero() and v < 1:
            raise ValueError("composition needs val(g) >= 1")
        # unknown self-part gives O(t^{order*v}); unknown g-part perturbs by
        # f'(g) = O(t^{(low-1)*v}) times O(t^{order_g})
        order = min(self.order * max(v, 1), g.order + (self.low - 1) * max(v, 1))
        if self.is_zero():
            return TruncSeries.zero(order)
        gw = g.truncate(min(order, g.order))
        head = _pow_window(gw, self.low, order)
        inner = TruncSeries.zero(order)
        for c in reversed(self.coeffs):
            inner = (inner * gw).truncate(order)
            if c:
                inner = inner + TruncSeries.const(c, order)
        return (head * inner).truncate(order)

    def revert(self) -> TruncSeries:
        """Compositional inverse of a series with valuation exactly 1."""
        if self.is_zero() or self.low != 1:
            raise ValueError("reversion needs valuation exactly 1")
        n = self.order
        ia1 = _inv(self.coeffs[0])
        g = TruncSeries(1, [ia1] + [0] * (n - 2), n)
        for k in range(2, n):
            d = self.compose(g).coeff(k)
            if d:
                g = g + TruncSeries(k, [-(ia1 * d)] + [0] * (n - 1 - k), n)
        return g

    def exp(self) -> TruncSeries:
        """exp of a series with valuation >= 1."""
        if not self.is_zero() and self.low < 1:
            raise ValueError("exp needs valuation >= 1")
        order = self.order
        out = TruncSeries.const(1, order)
        term = TruncSeries.const(1, order)
        k = 1
        while k < order + 1:
            term = (term * self).truncate(order)
            if term.is_zero():
                break
            out = out + term * rat(1, math.factorial(k))
            k += 1
        return out.truncate(order)

    def log(self) -> TruncSeries:
        """log of a series with constant term exactly 1."""
        if self.is_zero() or self.low != 0 or self.coeffs[0] != 1:
            raise ValueError("log needs constant term 1")
        u = self - 1
        order = self.order
        out = TruncSeries.zero(order)
        power = TruncSeries.const(1, order)
        for k in range(1, order + 1):
            power = (power * u).truncate(order)
            if power.is_zero():
                break
            sign = rat(1, k) if k % 2 else rat(-1, k)
            out = out + power * sign
        return out.truncate(order)


def _pow_window(g: TruncSeries, e: int, order: int) -> TruncSeries:
    if e == 0:
        return TruncSeries.const(1, order)
    base = g if e > 0 else g.inverse()
    out = base
    for _ in range(abs(e) - 1):
        out = (out * base).truncate(order)
    return out.truncate(min(order, out.order))
