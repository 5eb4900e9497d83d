"""Sparse multivariate polynomials over exact scalars.

Terms map exponent tuples to coefficients. The algebra itself is exact;
truncation is always an explicit choice of the caller (weighted-degree cap
and per-variable exponent bounds passed to the *_truncated operations).
Coefficients are opaque: rationals, algebraic numbers, or dual numbers.
"""

from __future__ import annotations

import math

from ._backend import dict_mul
from .scalars import is_rational, rat


class MultiPoly:
    """Polynomial in named variables; terms: exponent tuple -> coefficient."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars, terms=None):
        self.vars = tuple(vars)
        t = {}
        if terms:
            n = len(self.vars)
            for e, c in terms.items():
                if c:
                    if len(e) != n:
                        raise ValueError("exponent tuple length mismatch")
                    t[tuple(e)] = c
        self.terms = t

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(vars) -> MultiPoly:
        return MultiPoly(vars)

    @staticmethod
    def const(vars, c) -> MultiPoly:
        vars = tuple(vars)
        return MultiPoly(vars, {(0,) * len(vars): c})

    @staticmethod
    def gen(vars, name, exp: int = 1) -> MultiPoly:
        vars = tuple(vars)
        i = vars.index(name)
        e = [0] * len(vars)
        e[i] = exp
        return MultiPoly(vars, {tuple(e): rat(1)})

    # -- basics -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        if not self.terms:
            return "MultiPoly(0)"
        bits = []
        for e in sorted(self.terms):
            mono = "*".join(
                f"{v}^{k}" if k != 1 else v
                for v, k in zip(self.vars, e) if k
            )
            c = self.terms[e]
            bits.append(f"({c})*{mono}" if mono else f"({c})")
        return "MultiPoly[" + " + ".join(bits) + "]"

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            a, b = self._aligned(other)
            return a.terms == b.terms
        if not other:
            return not self.terms
        return NotImplemented

    __hash__ = None

    def coeff(self, exps) -> object:
        """Coefficient of the full monomial given by the exponent tuple."""
        return self.terms.get(tuple(exps), rat(0))

    def constant_term(self):
        return self.terms.get((0,) * len(self.vars), rat(0))

    def total_degree(self, weights=None) -> int:
        """Max weighted degree over terms; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        if weights is None:
            weights = (1,) * len(self.vars)
        return max(sum(w * k for w, k in zip(weights, e)) for e in self.terms)

    def map_coeffs(self, fn) -> MultiPoly:
        return MultiPoly(self.vars, {e: fn(c) for e, c in self.terms.items()})

    # -- variable plumbing ------------------------------------------------

    def with_vars(self, vars) -> MultiPoly:
        """Reinterpret over a superset/reordering of the variables."""
        vars = tuple(vars)
        if vars == self.vars:
            return self
        pos = []
        for v in self.vars:
            if v not in vars:
                raise ValueError(f"variable {v} missing from target tuple")
            pos.append(vars.index(v))
        n = len(vars)
        out = {}
        for e, c in self.terms.items():
            ne = [0] * n
            for i, k in enumerate(e):
                ne[pos[i]] = k
            out[tuple(ne)] = c
        return MultiPoly(vars, out)

    def _aligned(self, other: MultiPoly):
        if self.vars == other.vars:
            return self, other
        union = list(self.vars) + [v for v in other.vars if v not in self.vars]
        return self.with_vars(union), other.with_vars(union)

    def rename_vars(self, mapping: dict) -> MultiPoly:
        return MultiPoly(tuple(mapping.get(v, v) for v in self.vars), self.terms)

    # -- ring ops -----------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, MultiPoly):
            return other
        if isinstance(other, int) or is_rational(other) or hasattr(other, "inverse"):
            return MultiPoly.const(self.vars, other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._aligned(o)
        out = dict(a.terms)
        for e, c in b.terms.items():
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = prev + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return MultiPoly(a.vars, out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

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
        a, b = self._aligned(o)
        n = len(a.vars)
        terms = dict_mul(a.terms, b.terms, (0,) * n, None, (None,) * n, (None,) * n)
        return MultiPoly(a.vars, terms)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, int):
            if not other:
                raise ZeroDivisionError
            return self * rat(1, other)
        if is_rational(other):
            return self * (rat(1) / other)
        if hasattr(other, "inverse") and not isinstance(other, MultiPoly):
            return self * other.inverse()
        return NotImplemented

    def mul_truncated(self, other, weights, wcap, locaps=None, hicaps=None) -> MultiPoly:
        """Product dropping monomials over the weighted cap or var bounds.

        weights: dict name -> weight (missing names weigh 0); wcap: bound on
        the weighted degree, or None; locaps/hicaps: dict name -> bound.
        """
        o = self._coerce(other)
        a, b = self._aligned(o)
        n = len(a.vars)
        w = tuple(weights.get(v, 0) for v in a.vars) if weights else (0,) * n
        lo = tuple((locaps or {}).get(v) for v in a.vars)
        hi = tuple((hicaps or {}).get(v) for v in a.vars)
        return MultiPoly(a.vars, dict_mul(a.terms, b.terms, w, wcap, lo, hi))

    def truncate(self, weights, wcap, locaps=None, hicaps=None) -> MultiPoly:
        w = tuple(weights.get(v, 0) for v in self.vars) if weights else None
        lo = {v: b for v, b in (locaps or {}).items()}
        hi = {v: b for v, b in (hicaps or {}).items()}
        out = {}
        for e, c in self.terms.items():
            if w is not None and wcap is not None:
                if sum(wi * k for wi, k in zip(w, e)) > wcap:
                    continue
            bad = False
            for i, v in enumerate(self.vars):
                b = lo.get(v)
                if b is not None and e[i] < b:
                    bad = True
                    break
                b = hi.get(v)
                if b is not None and e[i] > b:
                    bad = True
                    break
            if not bad:
                out[e] = c
        return MultiPoly(self.vars, out)

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = MultiPoly.const(self.vars, rat(1))
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base if n > 1 else base
            n >>= 1
        return out

    def pow_truncated(self, n: int, weights, wcap, locaps=None, hicaps=None) -> MultiPoly:
        out = MultiPoly.const(self.vars, rat(1))
        for _ in range(n):
            out = out.mul_truncated(self, weights, wcap, locaps, hicaps)
        return out

    # -- calculus and extraction ----------------------------------------

    def deriv(self, name, times: int = 1) -> MultiPoly:
        i = self.vars.index(name)
        cur = self.terms
        for _ in range(times):
            nxt = {}
            for e, c in cur.items():
                k = e[i]
                if k:
                    ne = e[:i] + (k - 1,) + e[i + 1:]
                    nc = c * k
                    prev = nxt.get(ne)
                    nxt[ne] = nc if prev is None else prev + nc
            cur = nxt
        return MultiPoly(self.vars, cur)

    def extract(self, assign: dict) -> MultiPoly:
        """Coefficient of prod v^assign[v], as a polynomial in the other vars."""
        idx = {self.vars.index(v): k for v, k in assign.items()}
        keep = [i for i in range(len(self.vars)) if i not in idx]
        nvars = tuple(self.vars[i] for i in keep)
        out = {}
        for e, c in self.terms.items():
            if all(e[i] == k for i, k in idx.items()):
                ne = tuple(e[i] for i in keep)
                prev = out.get(ne)
                out[ne] = c if prev is None else prev + c
        return MultiPoly(nvars, out)

    def subs_scalar(self, assign: dict) -> MultiPoly:
        """Substitute exact scalar values for some variables."""
        idx = {self.vars.index(v): val for v, val in assign.items()}
        keep = [i for i in range(len(self.vars)) if i not in idx]
        nvars = tuple(self.vars[i] for i in keep)
        out = {}
        for e, c in self.terms.items():
            f = c
            dead = False
            for i, val in idx.items():
                k = e[i]
                if k:
                    if not val:
                        dead = True
                        break
                    f = f * _pow_scalar(val, k)
            if dead:
                continue
            ne = tuple(e[i] for i in keep)
            prev = out.get(ne)
            if prev is None:
                out[ne] = f
            else:
                s = prev + f
                if s:
                    out[ne] = s
                else:
                    del out[ne]
        return MultiPoly(nvars, out)

    def scale_var(self, name, factor) -> MultiPoly:
        """v^k -> factor^k * v^k for one variable."""
        i = self.vars.index(name)
        out = {}
        for e, c in self.terms.items():
            k = e[i]
            out[e] = c * _pow_scalar(factor, k) if k else c
        return MultiPoly(self.vars, out)

    def subs_poly(self, name, repl: MultiPoly, weights=None, wcap=None,
                  locaps=None, hicaps=None) -> MultiPoly:
        """Substitute a polynomial for one variable (Horner, truncated)."""
        i = self.vars.index(name)
        union = list(self.vars) + [v for v in repl.vars if v not in self.vars]
        r = repl.with_vars(union)
        by_deg: dict[int, dict] = {}
        for e, c in self.terms.items():
            k = e[i]
            ne = e[:i] + (0,) + e[i + 1:]
            by_deg.setdefault(k, {})[ne] = c
        kmax = max(by_deg) if by_deg else 0
        acc = MultiPoly.zero(union)
        for k in range(kmax, -1, -1):
            acc = acc.mul_truncated(r, weights or {}, wcap, locaps, hicaps)
            layer = by_deg.get(k)
            if layer:
                acc = acc + MultiPoly(self.vars, layer).with_vars(union)
        return acc

    def exp_truncated(self, weights, wcap, locaps=None, hicaps=None) -> MultiPoly:
        """exp of a polynomial with zero constant term, truncated."""
        if self.constant_term():
            raise ValueError("exp needs zero constant term")
        out = MultiPoly.const(self.vars, rat(1))
        term = MultiPoly.const(self.vars, rat(1))
        k = 1
        while True:
            term = term.mul_truncated(self, weights, wcap, locaps, hicaps)
            if term.is_zero():
                break
            out = out + term.map_coeffs(lambda c: c * rat(1, math.factorial(k)))
            k += 1
        return out

    def log_truncated(self, weights, wcap, locaps=None, hicaps=None) -> MultiPoly:
        """log of a polynomial with constant term exactly 1, truncated."""
        if self.constant_term() != 1:
            raise ValueError("log needs constant term 1")
        u = self - MultiPoly.const(self.vars, rat(1))
        out = MultiPoly.zero(self.vars)
        power = MultiPoly.const(self.vars, rat(1))
        k = 1
        while True:
            power = power.mul_truncated(u, weights, wcap, locaps, hicaps)
            if power.is_zero():
                break
            sign = rat(1, k) if k % 2 else rat(-1, k)
            out = out + power.map_coeffs(lambda c, s=sign: c * s)
            k += 1
        return out

    def eval_all(self, assign: dict):
        """Full evaluation; every variable must be assigned."""
        res = self.subs_scalar({v: assign[v] for v in self.vars})
        return res.constant_term()


def _pow_scalar(val, k: int):
    out = None
    base = val
    while k:
        if k & 1:
            out = base if out is None else out * base
        k >>= 1
        if k:
            base = base * base
    return out if out is not None else rat(1)


def div_diag(f: MultiPoly, xname: str, yname: str, trust_cap=None) -> MultiPoly:
    """Exact quotient f / (x - y) for f divisible by (x - y).

    Uses x^a y^b = (x - y) * sum_i x^(a-1-i) y^(b+i) + y^(a+b); the summed
    remainder must vanish. When f is truncated in joint (x, y) total degree,
    pass that degree as trust_cap: remainder monomials above it are unknown
    and ignored, below it they must still cancel.
    """
    xi = f.vars.index(xname)
    yi = f.vars.index(yname)
    q: dict = {}
    rem: dict = {}
    for e, c in f.terms.items():
        a, b = e[xi], e[yi]
        for i in range(a):
            ne = list(e)
            ne[xi] = a - 1 - i
            ne[yi] = b + i
            ne = tuple(ne)
            prev = q.get(ne)
            if prev is None:
                q[ne] = c
            else:
                s = prev + c
                if s:
                    q[ne] = s
                else:
                    del q[ne]
        re = list(e)
        re[xi] = 0
        re[yi] = a + b
        re = tuple(re)
        prev = rem.get(re)
        if prev is None:
            rem[re] = c
        else:
            s = prev + c
            if s:
                rem[re] = s
            else:
                del rem[re]
    for e, c in rem.items():
        if trust_cap is not None and e[yi] > trust_cap:
            continue
        if c:
            raise ValueError("polynomial is not divisible by the diagonal factor")
    return MultiPoly(f.vars, q)
