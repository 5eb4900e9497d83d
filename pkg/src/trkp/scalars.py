"""Exact scalar arithmetic: rationals, algebraic numbers, dual numbers.

Rationals are gmpy2.mpq when available (fractions.Fraction otherwise); both
keep canonical reduced form and identical exact semantics. Algebraic numbers
live in a quotient algebra Q[a]/(m) with m squarefree; dual numbers adjoin
an infinitesimal with tau^2 = 0 over any base scalar. No floats anywhere.
"""

from __future__ import annotations

from fractions import Fraction

try:
    from gmpy2 import mpq as _mpq

    _RAT_TYPES = (int, type(_mpq(0)), Fraction)

    def rat(p=0, q=None):
        """Exact rational from int, string 'p/q', Fraction, or pair."""
        if q is not None:
            return _mpq(p, q)
        if isinstance(p, Fraction):
            return _mpq(p.numerator, p.denominator)
        return _mpq(p)

except ImportError:  # pragma: no cover - exercised only without gmpy2
    _RAT_TYPES = (int, Fraction)

    def rat(p=0, q=None):
        if q is not None:
            return Fraction(p, q)
        return Fraction(p)


def is_rational(x) -> bool:
    return isinstance(x, _RAT_TYPES)


def rat_str(x) -> str:
    """Canonical 'p' or 'p/q' rendering."""
    f = Fraction(int(x.numerator), int(x.denominator)) if not isinstance(x, int) else Fraction(x)
    if f.denominator == 1:
        return str(f.numerator)
    return f"{f.numerator}/{f.denominator}"


class ZeroDivisorError(ZeroDivisionError):
    """Division by a nonzero non-unit of an etale algebra Q[a]/(m)."""


class NumberField:
    """Quotient algebra Q[a]/(m(a)) with m squarefree (not necessarily irreducible).

    Elements are coefficient vectors in the power basis 1, a, ..., a^(deg-1).
    When m is reducible the algebra is a product of fields; arithmetic is
    still exact, and inversion fails with ZeroDivisorError exactly on the
    zero divisors.
    """

    def __init__(self, modulus, name: str = "a"):
        coeffs = [rat(c) if isinstance(c, (int, Fraction)) else c for c in modulus]
        while coeffs and not coeffs[-1]:
            coeffs.pop()
        if len(coeffs) < 2:
            raise ValueError("modulus must have degree >= 1")
        lead = coeffs[-1]
        self.monic = tuple(c / lead for c in coeffs)
        self.deg = len(self.monic) - 1
        self.name = name
        self._power_sums: list = []
        self._red_cache: dict[int, tuple] = {}
        if not _poly_is_squarefree(self.monic):
            raise ValueError("modulus must be squarefree")

    def __repr__(self):
        return f"NumberField(deg={self.deg}, {self.name})"

    def __eq__(self, other):
        return isinstance(other, NumberField) and self.monic == other.monic

    def __hash__(self):
        return hash(("NumberField", self.monic))

    def element(self, coeffs) -> AlgebraicNum:
        v = [rat(0)] * self.deg
        for i, c in enumerate(coeffs):
            if i >= self.deg:
                raise ValueError("coefficient vector too long")
            v[i] = rat(c) if isinstance(c, (int, Fraction)) else c
        return AlgebraicNum(self, tuple(v))

    def gen(self) -> AlgebraicNum:
        if self.deg == 1:
            return self.element([-self.monic[0]])
        return self.element([0, 1])

    def from_rat(self, x) -> AlgebraicNum:
        return self.element([x])

    def power_sum(self, k: int):
        """Sum of the k-th powers of all roots of m (Newton's identities)."""
        ps = self._power_sums
        d = self.deg
        a = self.monic
        while len(ps) <= k:
            j = len(ps)
            if j == 0:
                ps.append(rat(d))
                continue
            acc = rat(0)
            for i in range(1, min(j - 1, d) + 1):
                acc += a[d - i] * ps[j - i]
            if j <= d:
                acc += j * a[d - j]
            ps.append(-acc)
        return ps[k]

    def trace(self, x: AlgebraicNum):
        """Sum of x over all roots of the modulus; always rational."""
        if is_rational(x):
            return x * self.deg
        if x.field is not self and x.field != self:
            raise ValueError("element from a different field")
        acc = rat(0)
        for k, c in enumerate(x.coeffs):
            if c:
                acc += c * self.power_sum(k)
        return acc

    def reduce_power(self, k: int) -> tuple:
        """Coefficient vector of a^k mod m, cached."""
        got = self._red_cache.get(k)
        if got is not None:
            return got
        d = self.deg
        if k < d:
            v = tuple(rat(1) if i == k else rat(0) for i in range(d))
        else:
            prev = self.reduce_power(k - 1)
            shifted = [rat(0)] + list(prev)
            top = shifted.pop()
            if top:
                for i in range(d):
                    shifted[i] -= top * self.monic[i]
            v = tuple(shifted)
        self._red_cache[k] = v
        return v

    def roots_in_field(self) -> list[AlgebraicNum]:
        """All roots of the modulus as elements of this algebra, when they split.

        Supported for deg 1 and deg 2 (the only cases the recursion needs);
        raises ValueError otherwise.
        """
        if self.deg == 1:
            return [self.gen()]
        if self.deg == 2:
            a1 = self.monic[1]
            g = self.gen()
            return [g, self.from_rat(-a1) - g]
        raise ValueError(f"cannot split a degree-{self.deg} modulus inside itself")


class AlgebraicNum:
    """Element of a NumberField, stored as a power-basis coefficient tuple."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    def __repr__(self):
        name = self.field.name
        parts = []
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            if i == 0:
                parts.append(rat_str(c))
            elif i == 1:
                parts.append(f"{rat_str(c)}*{name}")
            else:
                parts.append(f"{rat_str(c)}*{name}^{i}")
        return " + ".join(parts) if parts else "0"

    def __bool__(self):
        return any(self.coeffs)

    def __hash__(self):
        return hash((self.field.monic, self.coeffs))

    def _coerce(self, other):
        if isinstance(other, AlgebraicNum):
            if other.field != self.field:
                raise ValueError("mixed number fields")
            return other
        if is_rational(other):
            return self.field.from_rat(rat(other) if isinstance(other, int) else other)
        return None

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.coeffs == o.coeffs

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __neg__(self):
        return AlgebraicNum(self.field, tuple(-c for c in self.coeffs))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNum(self.field, tuple(x + y for x, y in zip(self.coeffs, o.coeffs)))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return AlgebraicNum(self.field, tuple(x - y for x, y in zip(self.coeffs, o.coeffs)))

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if is_rational(other):
            return AlgebraicNum(self.field, tuple(c * other for c in self.coeffs))
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = self.field.deg
        prod = [rat(0)] * (2 * d - 1)
        for i, x in enumerate(self.coeffs):
            if not x:
                continue
            for j, y in enumerate(o.coeffs):
                if y:
                    prod[i + j] += x * y
        out = [rat(0)] * d
        for k, c in enumerate(prod):
            if c:
                red = self.field.reduce_power(k)
                for i in range(d):
                    if red[i]:
                        out[i] += c * red[i]
        return AlgebraicNum(self.field, tuple(out))

    __rmul__ = __mul__

    def inverse(self) -> AlgebraicNum:
        """Multiplicative inverse via extended Euclid against the modulus."""
        if not self:
            raise ZeroDivisionError("algebraic zero")
        m = list(self.field.monic)
        u = list(self.coeffs)
        while u and not u[-1]:
            u.pop()
        # extended Euclid in Q[x]: s*u + t*m = g
        r0, r1 = m, u
        s0, s1 = [], [rat(1)]
        while r1:
            q, r = _poly_divmod_field(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _poly_sub(s0, _poly_mul_small(q, s1))
        if len(r0) != 1:
            raise ZeroDivisorError(
                "non-invertible element; gcd with modulus has degree "
                f"{len(r0) - 1}"
            )
        inv_g = _invert(r0[0])
        res = [c * inv_g for c in s0]
        _, rem = _poly_divmod_field(res, list(self.field.monic))
        out = [rat(0)] * self.field.deg
        for i, c in enumerate(rem):
            out[i] = c
        return AlgebraicNum(self.field, tuple(out))

    def __truediv__(self, other):
        if is_rational(other):
            if not other:
                raise ZeroDivisionError("division by zero")
            inv = rat(1) / (rat(other) if isinstance(other, int) else other)
            return self * inv
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.from_rat(rat(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def substitute(self, value):
        """Evaluate the representing polynomial at `value` (e.g. another root)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * value + c
        return acc

    def rational_part(self):
        """The element as an exact rational; raises if it is not rational."""
        if any(self.coeffs[1:]):
            raise ValueError(f"not a rational element: {self!r}")
        return self.coeffs[0]

    def trace(self):
        return self.field.trace(self)


class Dual:
    """Dual number a + b*tau with tau^2 = 0 over any exact base scalar.

    Exact forward derivatives: f(a + tau) carries f'(a) in the tau part.
    Not a finite difference; there is no step size.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = a
        self.b = b

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def __hash__(self):
        return hash(("Dual", self.a, self.b))

    @staticmethod
    def _lift(x):
        if isinstance(x, Dual):
            return x
        if is_rational(x) or isinstance(x, AlgebraicNum):
            return Dual(x, 0)
        return None

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and (self.b == o.b or (not self.b and not o.b))

    def __ne__(self, other):
        r = self.__eq__(other)
        return r if r is NotImplemented else not r

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Dual(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Dual(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return Dual(self.a * o.a, self.a * o.b + self.b * o.a)

    __rmul__ = __mul__

    def inverse(self):
        if not self.a:
            raise ZeroDivisionError("dual number with zero finite part")
        ia = _invert(self.a)
        return Dual(ia, -(ia * ia) * self.b)

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self * o.inverse() if isinstance(o, Dual) else NotImplemented

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = Dual(_one_like(self.a), 0)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out


def _invert(x):
    if is_rational(x):
        return rat(1) / (rat(x) if isinstance(x, int) else x)
    return x.inverse()


def _one_like(x):
    if is_rational(x):
        return rat(1)
    if isinstance(x, AlgebraicNum):
        return x.field.from_rat(rat(1))
    return 1


def sc_div(x, y):
    """Division that tolerates int operands on either side."""
    if isinstance(x, int):
        x = rat(x)
    if isinstance(y, int):
        y = rat(y)
    return x / y


def dual_var(base=0) -> Dual:
    """base + tau: the generic dual lift of a parameter value."""
    return Dual(rat(base) if isinstance(base, int) else base, rat(1))


# -- small polynomial helpers used by the Euclid above (field coefficients) --


def _poly_sub(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else rat(0)
        y = b[i] if i < len(b) else rat(0)
        out.append(x - y)
    while out and not out[-1]:
        out.pop()
    return out


def _poly_mul_small(a: list, b: list) -> list:
    if not a or not b:
        return []
    out = [rat(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] += x * y
    while out and not out[-1]:
        out.pop()
    return out


def _poly_divmod_field(a: list, b: list):
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [rat(0)] * max(0, len(a) - len(b) + 1)
    inv_lead = _invert(b[-1])
    while len(a) >= len(b):
        c = a[-1] * inv_lead
        k = len(a) - len(b)
        if c:
            q[k] = c
            for i in range(len(b)):
                a[k + i] -= c * b[i]
        a.pop()
        while a and not a[-1]:
            a.pop()
    return q, a


def _poly_is_squarefree(m: tuple) -> bool:
    d = [i * c for i, c in enumerate(m)][1:]
    while d and not d[-1]:
        d.pop()
    r0, r1 = list(m), d
    while r1:
        _, r = _poly_divmod_field(r0, r1)
        r0, r1 = r1, r
    return len(r0) == 1
