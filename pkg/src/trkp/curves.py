"""Genus-zero spectral curves: ramification data and local involutions.

A curve is (x, y, B) on the Riemann sphere with B the standard kernel
dz1 dz2/(z1-z2)^2. Only dx (always rational) and local expansions enter the
recursion; x itself may contain a logarithmic part. Ramification points are
the simple zeros of dx; each carries the deck transformation sigma solved
order by order from x(sigma(t)) = x(t), branch sigma'(0) = -1.

Roots of the ramification modulus that are not rational are kept symbolic:
degree-2 cofactors split inside one quadratic extension, so every point is
an explicit element of a single field; higher-degree cofactors run in
validate-only mode over the quotient algebra (one generic root, traces for
totals, no factoring).
"""

from __future__ import annotations

import hashlib

from . import polys as P
from .ratfun import RationalFunction
from .scalars import Dual, NumberField, ZeroDivisorError, is_rational, rat, rat_str
from .series import TruncSeries


class NonSimpleRamification(Exception):
    """dx has a multiple zero; the recursion hypotheses fail."""


class RamificationPoint:
    """A simple zero of dx with its local frame cache."""

    __slots__ = ("index", "location", "generic")

    def __init__(self, index: int, location, generic: bool = False):
        self.index = index
        self.location = location
        # generic=True marks one symbolic root standing for all conjugates
        self.generic = generic

    def __repr__(self):
        tag = " generic" if self.generic else ""
        return f"RamificationPoint({self.index}, {self.location!r}{tag})"


class LocalFrame:
    """Series data at a ramification point, all in t = z - q.

    X: x(q+t) - x(q) (valuation 2); xp: dx/dz at q+t (valuation 1);
    y: y(q+t); sigma: the deck transformation.
    """

    __slots__ = ("X", "xp", "y", "sigma", "order")

    def __init__(self, X, xp, y, sigma, order):
        self.X = X
        self.xp = xp
        self.y = y
        self.sigma = sigma
        self.order = order


class RamData:
    """Output of find_ramification: locations plus the field they live in."""

    __slots__ = ("locations", "field", "modulus", "etale", "ignored_far_zeros")

    def __init__(self, locations, field, modulus, etale, ignored_far_zeros=0):
        self.locations = locations
        self.field = field
        self.modulus = modulus
        self.etale = etale
        self.ignored_far_zeros = ignored_far_zeros


def find_ramification(dx: RationalFunction) -> RamData:
    """Locate the zeros of dx, splitting off rational roots exactly.

    Over dual-number coefficients the zeros of the base (tau = 0) curve are
    lifted by one exact Newton step; extra zeros entering only at first
    order in tau (no base counterpart) are ignored and counted.
    """
    num = P.p_trim(list(dx.num))
    if not num:
        raise ValueError("dx is identically zero")
    dual_mode = any(isinstance(c, Dual) for c in num)
    if dual_mode:
        base = P.p_trim([c.a if isinstance(c, Dual) else c for c in num])
        ignored = (len(num) - 1) - (len(base) - 1)
        data = _split_roots(base)
        lifted = [_newton_lift(num, q) for q in data.locations]
        return RamData(lifted, data.field, data.modulus, data.etale, ignored)
    return _split_roots(num)


def _split_roots(num) -> RamData:
    if not P.p_is_squarefree(num):
        raise NonSimpleRamification("dx has a multiple zero")
    roots, cofactor = P.p_rational_roots(num)
    roots = sorted(roots)
    modulus = P.p_monic(num)
    if len(cofactor) <= 1:
        return RamData(list(roots), None, modulus, False)
    field = NumberField(cofactor)
    if field.deg == 2:
        locs = [field.from_rat(r) for r in roots] + field.roots_in_field()
        return RamData(locs, field, modulus, False)
    locs = [field.from_rat(r) for r in roots] + [field.gen()]
    return RamData(locs, field, modulus, True)


def _newton_lift(num, q):
    """One Newton step lifts a simple base root to a dual-number root."""
    dnum = P.p_deriv(num)
    fq = P.p_eval(num, Dual(q, 0) if not isinstance(q, Dual) else q)
    dfq = P.p_eval(dnum, Dual(q, 0) if not isinstance(q, Dual) else q)
    fq = fq if isinstance(fq, Dual) else Dual(fq, 0)
    return Dual(q, 0) - fq * dfq.inverse()


def local_involution(X: TruncSeries, order: int) -> TruncSeries:
    """sigma(t) = -t + c2 t^2 + ... with X(sigma(t)) = X(t) to O(t^order).

    X must have valuation exactly 2 (simple critical point) and window at
    least order + 1.
    """
    if X.is_zero() or X.val() != 2:
        raise NonSimpleRamification("x is not quadratic at the point")
    x2 = X.coeff(2)
    inv_2x2 = _scalar_inv(x2 + x2)
    n = order
    sigma = TruncSeries(1, [-1] + [0] * (n - 2), n) if n > 1 else TruncSeries.zero(n)
    for k in range(2, n):
        defect = X.compose(sigma) - X
        d = defect.coeff(k + 1)
        if d:
            ck = d * inv_2x2
            sigma = sigma + TruncSeries(k, [ck] + [0] * (n - 1 - k), n)
    return sigma


def _scalar_inv(c):
    if isinstance(c, int):
        return rat(1, c)
    if is_rational(c):
        return rat(1) / c
    return c.inverse()


class ValidationReport:
    """Per-condition pass/fail listing for a curve."""

    def __init__(self):
        self.checks: list[tuple[str, bool, str]] = []

    def add(self, name: str, ok: bool, detail: str = ""):
        self.checks.append((name, ok, detail))

    @property
    def ok(self) -> bool:
        return all(ok for _, ok, _ in self.checks)

    def lines(self):
        for name, ok, detail in self.checks:
            status = "pass" if ok else "FAIL"
            yield f"{status}  {name}" + (f": {detail}" if detail else "")

    def __repr__(self):
        return "\n".join(self.lines())


class SpectralCurve:
    """Spectral curve data on CP^1 with the standard Bergman kernel.

    dx is the rational coefficient of dz. x splits as x_rat + sum of
    c*log(z - p) terms; y is a global rational function, or per-point local
    series supplied through y_local (aligned with the ramification list).
    """

    def __init__(self, dx=None, y=None, x_rat=None, x_log=(), name="curve",
                 y_local=None, ram_data=None):
        if dx is None:
            if x_rat is None:
                raise ValueError("need dx or x_rat")
            dx = x_rat.deriv()
            z = RationalFunction.var()
            for c, p in x_log:
                dx = dx + RationalFunction.const(c) / (z - p)
        self.dx = dx
        self.x_rat = x_rat
        self.x_log = tuple(x_log)
        self.y = y
        self.y_local = y_local
        self.name = name
        data = ram_data if ram_data is not None else find_ramification(dx)
        self.ram_field = data.field
        self.modulus = data.modulus
        self.etale = data.etale
        self.ignored_far_zeros = data.ignored_far_zeros
        self.ram = [
            RamificationPoint(i, loc, generic=data.etale and not is_rational(loc))
            for i, loc in enumerate(data.locations)
        ]
        self._frames: dict[int, LocalFrame] = {}
        self._fingerprint = None

    # -- identity -------------------------------------------------------

    def fingerprint(self) -> str:
        """Stable content hash for cache keys and serialization headers."""
        if self._fingerprint is None:
            h = hashlib.sha256()
            for part in (self.dx.num, self.dx.den,
                         self.y.num if self.y is not None else [],
                         self.y.den if self.y is not None else [1]):
                h.update(b"|")
                for c in part:
                    h.update(_scalar_bytes(c))
            for c, p in self.x_log:
                h.update(b"L")
                h.update(_scalar_bytes(c))
                h.update(_scalar_bytes(p))
            self._fingerprint = h.hexdigest()[:16]
        return self._fingerprint

    def n_ram(self) -> int:
        return len(self.ram)

    # -- local data -------------------------------------------------------

    def frame(self, i: int, order: int) -> LocalFrame:
        """Local frame at ramification point i, window at least `order`.

        Frames are grown monotonically and cached; requesting a smaller
        order returns the cached larger frame (windows only overdeliver).
        """
        got = self._frames.get(i)
        if got is not None and got.order >= order:
            return got
        q = self.ram[i].location
        pad = order + 3
        xp = self.dx.local_expand(q, pad)
        if xp.is_zero() or xp.val() != 1:
            raise NonSimpleRamification(
                f"dx does not vanish to order exactly 1 at point {i}")
        X = xp.integrate().truncate(pad + 1)
        sigma = local_involution(X, order)
        if self.y is not None:
            ys = self.y.local_expand(q, order)
        else:
            ys = self.y_local[i].truncate(order)
        fr = LocalFrame(X, xp, ys, sigma, order)
        self._frames[i] = fr
        return fr

    # -- validation -------------------------------------------------------

    def validate(self, order: int = 8) -> ValidationReport:
        rep = ValidationReport()
        rep.add("dx nonzero", not self.dx.is_zero())
        try:
            sf = P.p_is_squarefree(self.dx.num)
        except (ZeroDivisorError, ZeroDivisionError):
            sf = False
        rep.add("zeros of dx simple", sf)
        locs = [p.location for p in self.ram]
        distinct = True
        for a in range(len(locs)):
            for b in range(a + 1, len(locs)):
                d = locs[a] - locs[b]
                if not d:
                    distinct = False
        rep.add("ramification points distinct", distinct)
        for pt in self.ram:
            label = f"q{pt.index}"
            try:
                fr = self.frame(pt.index, order)
            except (NonSimpleRamification, ZeroDivisorError) as e:
                rep.add(f"{label} local frame", False, str(e))
                continue
            yv = fr.y
            regular = yv.is_zero() or yv.val() >= 0
            rep.add(f"{label} y regular", regular)
            dy_ok = False
            if regular and not yv.is_zero():
                c1 = yv.coeff(1)
                dy_ok = bool(c1) and _invertible(c1)
            rep.add(f"{label} dy nonzero", dy_ok)
            sig = fr.sigma
            rep.add(f"{label} sigma'(0) = -1", sig.coeff(1) == -1)
            comp = sig.compose(sig)
            ident = TruncSeries.var(comp.order)
            rep.add(f"{label} sigma is an involution", comp == ident)
            xs = fr.X.compose(sig)
            rep.add(f"{label} x preserved by sigma",
                    xs == fr.X.truncate(xs.order))
            ydiff = yv.compose(sig) - yv.truncate(order - 1)
            odd_ok = (not ydiff.is_zero()) and ydiff.val() == 1
            rep.add(f"{label} y - y∘sigma vanishes to order 1", odd_ok)
        return rep


def _invertible(c) -> bool:
    if isinstance(c, int) or is_rational(c):
        return bool(c)
    try:
        c.inverse()
        return True
    except (ZeroDivisorError, ZeroDivisionError):
        return False


def _scalar_bytes(c) -> bytes:
    if isinstance(c, int) or is_rational(c):
        return rat_str(c).encode()
    if hasattr(c, "coeffs"):
        return b"[" + b",".join(_scalar_bytes(x) for x in c.coeffs) + b"]"
    if isinstance(c, Dual):
        return b"D(" + _scalar_bytes(c.a) + b";" + _scalar_bytes(c.b) + b")"
    raise TypeError(f"cannot fingerprint {type(c)}")


def airy_curve() -> SpectralCurve:
    """x = z^2/2, y = -z: the Witten-Kontsevich curve."""
    z = RationalFunction.var()
    return SpectralCurve(x_rat=z * z / 2, y=-z, name="airy")
