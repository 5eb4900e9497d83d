"""Dense univariate polynomials over exact scalars.

A polynomial is a plain list with index = degree and no trailing zeros;
the zero polynomial is []. Coefficients are any exact scalar (rational,
algebraic, dual, rational function) supporting ring ops and truth testing.
"""

from __future__ import annotations

from fractions import Fraction

from ._backend import conv_slice
from .scalars import is_rational, rat


def p_trim(a: list) -> list:
    while a and not a[-1]:
        a.pop()
    return a


def p_add(a: list, b: list) -> list:
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else 0
        y = b[i] if i < len(b) else 0
        out.append(x + y)
    return p_trim(out)


def p_neg(a: list) -> list:
    return [-x for x in a]


def p_sub(a: list, b: list) -> list:
    return p_add(a, p_neg(b))


def p_scale(a: list, c) -> list:
    if not c:
        return []
    return [x * c for x in a]


def p_mul(a: list, b: list) -> list:
    if not a or not b:
        return []
    return p_trim(conv_slice(a, b, 0, len(a) + len(b) - 1))


def p_pow(a: list, n: int) -> list:
    out = [1]
    base = a
    while n:
        if n & 1:
            out = p_mul(out, base)
        base = p_mul(base, base)
        n >>= 1
    return out


def p_divmod(a: list, b: list):
    """Quotient and remainder; the leading coefficient of b must be a unit."""
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    q = [0] * max(0, len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b):
        c = a[-1] / lead if not isinstance(a[-1], int) else rat(a[-1]) / lead
        k = len(a) - len(b)
        if c:
            q[k] = c
            for i in range(len(b) - 1):
                a[k + i] = a[k + i] - c * b[i]
        a.pop()
        p_trim(a)
    return p_trim(q), a


def p_gcd(a: list, b: list) -> list:
    """Monic gcd over a field."""
    r0, r1 = list(a), list(b)
    while r1:
        _, r = p_divmod(r0, r1)
        r0, r1 = r1, r
    if r0:
        inv = 1 / r0[-1] if not isinstance(r0[-1], int) else rat(1, r0[-1])
        r0 = [c * inv for c in r0]
    return r0


def p_deriv(a: list) -> list:
    return p_trim([i * c for i, c in enumerate(a)][1:])


def p_eval(a: list, x):
    acc = 0
    for c in reversed(a):
        acc = acc * x + c
    return acc


def p_compose(a: list, b: list) -> list:
    out: list = []
    for c in reversed(a):
        out = p_mul(out, b)
        if c:
            out = p_add(out, [c])
    return out


def p_shift(a: list, c) -> list:
    """Coefficients of a(c + t) as a polynomial in t (repeated Horner)."""
    a = list(a)
    n = len(a)
    for i in range(n - 1):
        for j in range(n - 2, i - 1, -1):
            a[j] = a[j] + c * a[j + 1]
    return p_trim(a)


def p_squarefree_part(a: list) -> list:
    g = p_gcd(a, p_deriv(a))
    if len(g) == 1:
        return list(a)
    q, r = p_divmod(a, g)
    if r:
        raise ArithmeticError("gcd did not divide")
    return q


def p_is_squarefree(a: list) -> bool:
    return len(p_gcd(a, p_deriv(a))) == 1


def p_monic(a: list) -> list:
    if not a:
        return []
    inv = 1 / a[-1] if not isinstance(a[-1], int) else rat(1, a[-1])
    return [c * inv for c in a]


def _divisors(n: int) -> list[int]:
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            if i != n // i:
                out.append(n // i)
        i += 1
    return sorted(out)


def p_rational_roots(a: list) -> tuple[list, list]:
    """All rational roots (with multiplicity stripped) and the cofactor.

    Input coefficients must be rational. Returns (roots, cofactor) with
    a = cofactor * prod (z - root); assumes a squarefree for the cofactor
    to share no rational roots.
    """
    if not a:
        raise ValueError("zero polynomial")
    if not all(is_rational(c) for c in a):
        raise ValueError("rational coefficients required")
    work = list(a)
    roots = []
    while work and not work[0]:
        roots.append(rat(0))
        work = work[1:]
        break  # squarefree: z divides at most once
    fracs = [Fraction(int(c.numerator), int(c.denominator)) if not isinstance(c, int) else Fraction(c) for c in work]
    from math import lcm

    den = lcm(*(f.denominator for f in fracs)) if fracs else 1
    ints = [int(f * den) for f in fracs]
    if ints and ints[0] != 0:
        from math import gcd as _g

        g = 0
        for v in ints:
            g = _g(g, v)
        if g > 1:
            ints = [v // g for v in ints]
        cands = set()
        for pnum in _divisors(ints[0]):
            for pden in _divisors(ints[-1]):
                cands.add(rat(pnum, pden))
                cands.add(rat(-pnum, pden))
        for c in sorted(cands, key=lambda v: (v.numerator, v.denominator)):
            if not p_eval(work, c):
                roots.append(c)
                work, r = p_divmod(work, [-c, rat(1)])
                if r:
                    raise ArithmeticError("root division failed")
    return roots, work
