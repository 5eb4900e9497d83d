"""Two-point insertion operators and the symmetry test on the tau side.

Everything here is one object seen from three sides.  Near a regular
base point, script_T collects iterated integrals of the correlation
differentials between two nearby points z-, z+ in the local coordinate,
and omega_cap packages them into a normalized two-point insertion whose
singular prefactor is divided out exactly.  Globally, the same insertion
with z+- moved by exp(+-(u hbar / 2) d/dx) becomes, order by order in u,
a differential polynomial in the omegas; w_extract assembles it with the
shift-operator calculus S(v) = (e^(v/2) - e^(-v/2)) / v acting on exact
rational functions of z.  On the bosonic side, fock_kernel_apply builds
the corresponding deformation of the partition function: shift p_k by
z+^k - z-^k, multiply by the conjugate negative-mode exponential,
subtract one, divide by (z+ - z-).

kp_symmetry_test ties the sides together: coefficient specializations of
the kernel image are added to Z with a dual-number epsilon and pushed
through the Hirota residuals; the epsilon-linear parts must vanish, and
a sign-corrupted kernel must fail.  formalism_check compares the local
insertion against the connected current-correlator expansion of the
kernel image, monomial by monomial, on the window both sides certify.
"""

from __future__ import annotations

import itertools
import math

from .expansion import ExpansionPoint, NotRegular, TruncatedTau, p_weights
from .multipoly import MultiPoly, div_diag
from .ratfun import RationalFunction
from .recursion import Engine
from .scalars import rat
from .series import InsufficientOrder, TruncSeries


class FormalismMismatch(Exception):
    """The local insertion and the Fock-side correlator disagree."""


def _engine(source) -> Engine:
    return source if isinstance(source, Engine) else Engine(source)


def _set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


# -- series helpers ------------------------------------------------------


def _pair_log(s: TruncSeries, acap: int, bcap: int) -> dict:
    """Coefficients of log((s(u) - s(v)) / (c1 (u - v))) on a box.

    Returns {(a, b): coeff} for 1 <= a <= acap, 1 <= b <= bcap; entries
    with a zero index vanish under the difference evaluations this feeds,
    so they are dropped.  Needs s.order > acap + bcap + 1.
    """
    if s.order < acap + bcap + 2:
        raise InsufficientOrder("pair expansion needs more coordinate terms")
    c1 = s.coeff(1)
    if not c1:
        raise NotRegular("coordinate series has vanishing linear term")
    row = {}
    for m in range(1, acap + bcap + 2):
        cm = s.coeff(m)
        if cm:
            for a in range(m):
                b = m - 1 - a
                if a <= acap and b <= bcap:
                    row[(a, b)] = row.get((a, b), rat(0)) + cm
    dd = MultiPoly(("u", "v"), row) / c1
    log = dd.log_truncated({}, None, hicaps={"u": acap, "v": bcap})
    return {(a, b): c for (a, b), c in log.terms.items() if a >= 1 and b >= 1}


def _sqrt_unit(s: TruncSeries, order: int) -> list:
    """Coefficient list of sqrt(s) for a series with constant term 1."""
    if s.coeff(0) != 1:
        raise ValueError("square root needs constant term 1")
    out = [rat(1)]
    for m in range(1, order):
        acc = s.coeff(m) if m < s.order else rat(0)
        for i in range(1, m):
            acc = acc - out[i] * out[m - i]
        out.append(acc * rat(1, 2))
    return out


def _shift_var(poly: MultiPoly, name: str, delta: int) -> MultiPoly:
    i = poly.vars.index(name)
    return MultiPoly(poly.vars, {
        e[:i] + (e[i] + delta,) + e[i + 1:]: c for e, c in poly.terms.items()
    })


def _div_pm(poly: MultiPoly, xname: str = "zp", yname: str = "zm") -> MultiPoly:
    """Exact quotient by (zp - zm) on Laurent data; remainder must vanish."""
    xi = poly.vars.index(xname)
    yi = poly.vars.index(yname)
    low = 0
    for e in poly.terms:
        low = min(low, e[xi], e[yi])
    if low:
        poly = _shift_var(_shift_var(poly, xname, -low), yname, -low)
    q = div_diag(poly, xname, yname)
    if low:
        q = _shift_var(_shift_var(q, xname, low), yname, low)
    return q


# -- the local route: iterated integrals at a regular point --------------


class PairedPointSeries:
    """Truncated expansion in the paired points and the spectators.

    poly is the value divided by sqrt(dxi+ dxi-) and every spectator
    dxi_j, over variables (zp, zm, z1..zn, h).  Trust: monomials with
    each spectator exponent <= spec_deg, h <= hmax, and either both
    paired exponents <= zbox or total paired degree <= ttot, whichever
    the producing routine certifies.
    """

    def __init__(self, poly, n, spec_deg, hmax, zbox=None, ttot=None, lneg=0):
        self.poly = poly
        self.n = n
        self.spec_deg = spec_deg
        self.hmax = hmax
        self.zbox = zbox
        self.ttot = ttot
        self.lneg = lneg

    def coeff(self, alpha, beta, spec=(), hdeg=0):
        if len(spec) != self.n:
            raise ValueError("expected one exponent per spectator")
        return self.poly.coeff((alpha, beta) + tuple(spec) + (hdeg,))

    def trusted(self, alpha, beta, spec=(), hdeg=0) -> bool:
        if hdeg > self.hmax or any(a > self.spec_deg for a in spec):
            return False
        if self.zbox is not None and (alpha > self.zbox or beta > self.zbox):
            return False
        if self.ttot is not None and alpha + beta > self.ttot:
            return False
        return True


def _spec_names(n: int) -> tuple:
    return tuple(f"z{j + 1}" for j in range(n))


def script_T(source, n: int, point: ExpansionPoint, zdeg: int, hmax: int,
             spec_deg: int | None = None, x: TruncSeries | None = None,
             _vars: tuple | None = None) -> PairedPointSeries:
    """Sum of iterated integrals of the omegas from z- to z+.

    n spectator points stay free with exponents up to spec_deg; the
    paired endpoints get exponents up to zdeg.  x is the regularization
    coordinate as a series in xi (identity when omitted); it only enters
    the doubly integrated two-point subtraction.
    """
    from .expansion import _slot_series

    engine = _engine(source)
    if spec_deg is None:
        spec_deg = zdeg
    specs = _vars if _vars is not None else _spec_names(n)
    vars = ("zp", "zm") + specs + ("h",)
    nv = len(vars)
    hpos = nv - 1
    terms: dict = {}

    def put(exps, c):
        if c:
            prev = terms.get(exps)
            if prev is None:
                terms[exps] = c
            else:
                s = prev + c
                if s:
                    terms[exps] = s
                else:
                    del terms[exps]

    # two-point pieces at hbar^0; blocks with more insertions never see B
    if n == 0:
        s, _ = point.coordinate_series(2 * zdeg + 2)
        pair = _pair_log(s, zdeg, zdeg)
        if x is not None:
            for ab, c in _pair_log(x, zdeg, zdeg).items():
                pair[ab] = pair.get(ab, rat(0)) - c
        half = rat(1, 2)
        for (a, b), c in pair.items():
            if not c:
                continue
            c = c * half
            # (zp^a - zm^a)(zp^b - zm^b), entries over the paired box
            for ea, sa in (((a, 0), 1), ((0, a), -1)):
                for eb, sb in (((b, 0), 1), ((0, b), -1)):
                    ap, am = ea[0] + eb[0], ea[1] + eb[1]
                    if ap <= zdeg and am <= zdeg:
                        e = [0] * nv
                        e[0], e[1] = ap, am
                        put(tuple(e), c if sa * sb > 0 else -c)
    elif n == 1:
        s, _ = point.coordinate_series(zdeg + spec_deg + 3)
        pair = _pair_log(s, zdeg, spec_deg + 1)
        for j in range(spec_deg + 1):
            for col, sign in ((0, -1), (1, 1)):
                e = [0] * nv
                e[col] = -j - 1
                e[2] = j
                put(tuple(e), rat(sign))
        for (a, b), c in pair.items():
            if b - 1 > spec_deg or not c:
                continue
            cb = c * b
            for col, sign in ((0, 1), (1, -1)):
                e = [0] * nv
                e[col] = a
                e[2] = b - 1
                put(tuple(e), cb if sign > 0 else -cb)

    # stable blocks
    slot_cache: dict = {}
    order = max(zdeg, spec_deg + 1)

    def slot(sl):
        got = slot_cache.get(sl)
        if got is None:
            ser = _slot_series(engine.curve, point, sl[0], sl[1], order)
            prim = []
            for d in range(1, zdeg + 1):
                cd = ser.coeff(d - 1)
                if cd:
                    prim.append((d, cd * rat(1, d)))
            spect = []
            for a in range(spec_deg + 1):
                ca = ser.coeff(a)
                if ca:
                    spect.append((a, ca))
            got = (prim, spect)
            slot_cache[sl] = got
        return got

    for k in range(1, max(hmax + 3 - n, 1)):
        kfac = rat(1, math.factorial(k))
        for g in range((hmax + 2 - n - k) // 2 + 1):
            hh = 2 * g - 2 + n + k
            if hh < 0 or (g, n + k) in ((0, 1), (0, 2)):
                continue
            om = engine.omega(g, n + k)
            for key, c in om.entries.items():
                picks = []
                dead = False
                for sl in key[:k]:
                    pl = slot(sl)[0]
                    if not pl:
                        dead = True
                        break
                    picks.append(pl)
                if dead:
                    continue
                for j in range(n):
                    sp = slot(key[k + j])[1]
                    if not sp:
                        dead = True
                        break
                    picks.append(sp)
                if dead:
                    continue
                base = c * kfac
                for choice in itertools.product(*picks):
                    cc = base
                    for _, cv in choice:
                        cc = cc * cv
                    degs = [d for d, _ in choice[:k]]
                    for bits in itertools.product((0, 1), repeat=k):
                        ap = sum(d for d, b in zip(degs, bits) if not b)
                        am = sum(d for d, b in zip(degs, bits) if b)
                        if ap > zdeg or am > zdeg:
                            continue
                        e = [0] * nv
                        e[0], e[1] = ap, am
                        for j in range(n):
                            e[2 + j] = choice[k + j][0]
                        e[hpos] = hh
                        put(tuple(e), -cc if sum(bits) % 2 else cc)

    return PairedPointSeries(MultiPoly(vars, terms), n, spec_deg, hmax,
                             zbox=zdeg, lneg=(spec_deg + 1 if n == 1 else 0))


def omega_cap(source, n: int, point: ExpansionPoint, tmax: int, hmax: int,
              spec_deg: int | None = None, x: TruncSeries | None = None) -> PairedPointSeries:
    """Normalized two-point insertion with n spectators at a regular point.

    Returns the partition-sum package: singular prefactor times
    exp(script_T_0) times products of script_T blocks, divided exactly by
    (zp - zm).  For n = 0 the bare singular term is subtracted first, so
    the result matches the connected vacuum expectation directly.  Trust
    window: total paired degree <= tmax, spectators <= spec_deg, h <= hmax.
    """
    engine = _engine(source)
    if spec_deg is None:
        spec_deg = tmax
    lneg = n * (spec_deg + 1)
    zint = tmax + 1 + lneg
    specs = _spec_names(n)
    vars = ("zp", "zm") + specs + ("h",)
    hic = {"zp": zint, "zm": zint, "h": hmax}
    for v in specs:
        hic[v] = spec_deg
    wexp = {"zp": 1, "zm": 1, "h": 1}
    wcap = 2 * zint + hmax

    t0 = script_T(engine, 0, point, zint, hmax, spec_deg, x).poly.with_vars(vars)
    expt0 = t0.exp_truncated(wexp, wcap, hicaps=hic)

    if n == 0:
        partsum = MultiPoly.const(vars, rat(1))
    else:
        blocks: dict = {}
        partsum = MultiPoly.zero(vars)
        for part in _set_partitions(range(n)):
            prod = MultiPoly.const(vars, rat(1))
            for group in part:
                m = len(group)
                blk = blocks.get(m)
                if blk is None:
                    blk = script_T(engine, m, point, zint, hmax, spec_deg, x,
                                   _vars=tuple(f"w{i}" for i in range(m))).poly
                    blocks[m] = blk
                named = blk.rename_vars({
                    f"w{i}": specs[j] for i, j in enumerate(sorted(group))
                }).with_vars(vars)
                prod = prod.mul_truncated(named, {}, None, hicaps=hic)
            partsum = partsum + prod

    if x is None:
        numer = expt0.mul_truncated(partsum, {}, None, hicaps=hic) if n else expt0
    else:
        if x.order < 2 * zint + 2:
            raise InsufficientOrder("regularization series too short")
        c1 = x.coeff(1)
        if not c1:
            raise NotRegular("regularization coordinate is singular here")
        xp = TruncSeries(0, [x.coeff(m + 1) * (m + 1) for m in range(2 * zint)],
                         2 * zint)
        unit = _sqrt_unit(TruncSeries(0, [xp.coeff(m) / c1 for m in range(xp.order)],
                                      xp.order), zint + 1)
        hrow = {}
        for m in range(1, 2 * zint + 2):
            cm = x.coeff(m) if m < x.order else rat(0)
            if cm:
                for a in range(m):
                    b = m - 1 - a
                    if a <= zint and b <= zint:
                        hrow[(a, b, 0) + (0,) * n] = hrow.get(
                            (a, b, 0) + (0,) * n, rat(0)) + cm
        hpoly = MultiPoly(("zp", "zm", "h") + specs, hrow).with_vars(vars)
        w = hpoly / c1 - 1
        inv = MultiPoly.const(vars, rat(1))
        powr = MultiPoly.const(vars, rat(1))
        kk = 1
        while True:
            powr = powr.mul_truncated(-w, {"zp": 1, "zm": 1}, 2 * zint, hicaps=hic)
            if powr.is_zero():
                break
            inv = inv + powr
            kk += 1
        up = MultiPoly(vars, {
            tuple([m, 0] + [0] * n + [0]): cm for m, cm in enumerate(unit) if cm})
        um = MultiPoly(vars, {
            tuple([0, m] + [0] * n + [0]): cm for m, cm in enumerate(unit) if cm})
        pref = up.mul_truncated(um, {}, None, hicaps=hic)
        pref = pref.mul_truncated(inv, {}, None, hicaps=hic)
        numer = pref.mul_truncated(expt0, {}, None, hicaps=hic)
        if n:
            numer = numer.mul_truncated(partsum, {}, None, hicaps=hic)
    if n == 0:
        numer = numer - 1

    numer = numer.truncate({"zp": 1, "zm": 1}, tmax + 1)
    quot = _div_pm(numer)
    return PairedPointSeries(quot, n, spec_deg, hmax, ttot=tmax, lneg=lneg + 1)


# -- the global route: shift-operator calculus on rational functions -----


def _lin_pow(q, k: int) -> list:
    """Dense coefficients of (z - q)^k."""
    out = [rat(1)]
    for _ in range(k):
        nxt = [rat(0)] * (len(out) + 1)
        for i, c in enumerate(out):
            nxt[i + 1] = nxt[i + 1] + c
            nxt[i] = nxt[i] - c * q
        out = nxt
    return out


def _e2_add(A, B):
    out = dict(A)
    for e, c in B.items():
        prev = out.get(e)
        s = c if prev is None else prev + c
        if s.is_zero():
            out.pop(e, None)
        else:
            out[e] = s
    return out


def _e2_mul(A, B, cap):
    out = {}
    for (a1, b1), c1 in A.items():
        for (a2, b2), c2 in B.items():
            a, b = a1 + a2, b1 + b2
            if a + b > cap:
                continue
            c = c1 * c2
            e = (a, b)
            prev = out.get(e)
            s = c if prev is None else prev + c
            if s.is_zero():
                out.pop(e, None)
            else:
                out[e] = s
    return out


def _e2_inv(A, cap):
    c0 = A.get((0, 0))
    if c0 is None or c0.is_zero():
        raise ZeroDivisionError("series has no invertible constant term")
    inv0 = c0.inverse()
    w = {e: -(c * inv0) for e, c in A.items() if e != (0, 0)}
    out = {(0, 0): RationalFunction.const(rat(1))}
    powr = dict(out)
    while True:
        powr = _e2_mul(powr, w, cap)
        if not powr:
            break
        out = _e2_add(out, powr)
    return {e: c * inv0 for e, c in out.items()}


def _e2_div_diag(A):
    """Exact quotient of an eps-series by (eps1 - eps2)."""
    q: dict = {}
    rem: dict = {}
    for (a, b), c in A.items():
        for i in range(a):
            e = (a - 1 - i, b + i)
            prev = q.get(e)
            s = c if prev is None else prev + c
            if s.is_zero():
                q.pop(e, None)
            else:
                q[e] = s
        e = (0, a + b)
        prev = rem.get(e)
        s = c if prev is None else prev + c
        if s.is_zero():
            rem.pop(e, None)
        else:
            rem[e] = s
    if rem:
        raise ValueError("eps series not divisible by the diagonal factor")
    return q


def _e2_deriv(A, slot: int):
    out = {}
    for (a, b), c in A.items():
        k = (a, b)[slot]
        if k:
            e = (a - 1, b) if slot == 0 else (a, b - 1)
            nc = c * k
            prev = out.get(e)
            s = nc if prev is None else prev + nc
            if not s.is_zero():
                out[e] = s
            else:
                out.pop(e, None)
    return out


class _WCtx:
    """Shared derivative caches for one curve."""

    def __init__(self, curve):
        self.curve = curve
        self.xp = curve.dx
        self.inv_xp = curve.dx.inverse()
        self._xder = [None, curve.dx]
        self._slots: dict = {}
        self._breg: dict = {}

    def xder(self, m: int) -> RationalFunction:
        while len(self._xder) <= m:
            self._xder.append(self._xder[-1].deriv())
        return self._xder[m]

    def d_op(self, f: RationalFunction) -> RationalFunction:
        return self.inv_xp * f.deriv()

    def slot_d(self, marker, j2: int) -> RationalFunction:
        """D^j2 of the integrated slot value basis(marker)/dx."""
        got = self._slots.get((marker, j2))
        if got is None:
            if j2 == 0:
                i, k = marker
                q = self.curve.ram[i].location
                got = self.inv_xp * RationalFunction([rat(1)], _lin_pow(q, k))
            else:
                got = self.d_op(self.slot_d(marker, j2 - 1))
            self._slots[(marker, j2)] = got
        return got

    def breg_eps(self, cap: int) -> dict:
        """Regularized two-point diagonal as an eps-series of rationals."""
        got = self._breg.get(cap)
        if got is None:
            c2 = cap + 2
            one = RationalFunction.const(rat(1))
            p1 = {(m, 0): self.xder(m + 1) / rat(math.factorial(m))
                  for m in range(c2 + 1)}
            p2 = {(0, m): c for (m, _), c in p1.items()}
            a = _e2_inv(_e2_mul(p1, p2, c2), c2)
            # divided difference of x: coefficient of eps1^i eps2^j is
            # x^(i+j+1)(z) / (i+j+1)!
            h = {}
            for i in range(c2 + 1):
                for jj in range(c2 + 1 - i):
                    h[(i, jj)] = self.xder(i + jj + 1) / rat(
                        math.factorial(i + jj + 1))
            hi = _e2_inv(h, c2)
            g0 = _e2_add(a, {e: -c for e, c in _e2_mul(hi, hi, c2).items()})
            got = _e2_div_diag(_e2_div_diag(g0))
            self._breg[cap] = got
        return got

    def eps_unit_inv(self, slot: int, cap: int) -> dict:
        """1 / x'(z + eps) as an eps-series in one slot."""
        p = {((m, 0) if slot == 0 else (0, m)): self.xder(m + 1) / rat(math.factorial(m))
             for m in range(cap + 1)}
        return _e2_inv(p, cap)


_S_COEFF = {}


def _s_coeff(j: int):
    """Coefficient of v^(2j) in (e^(v/2) - e^(-v/2)) / v."""
    got = _S_COEFF.get(j)
    if got is None:
        got = rat(1, 4 ** j * math.factorial(2 * j + 1))
        _S_COEFF[j] = got
    return got


def _wp_mul(A, B, ucap, hcap):
    out: dict = {}
    for (u1, h1), t1 in A.items():
        for (u2, h2), t2 in B.items():
            u, hh = u1 + u2, h1 + h2
            if u > ucap or hh > hcap:
                continue
            dst = out.setdefault((u, hh), {})
            for k1, r1 in t1.items():
                for k2, r2 in t2.items():
                    key = tuple(sorted(k1 + k2))
                    prev = dst.get(key)
                    s = r1 * r2 if prev is None else prev + r1 * r2
                    if s.is_zero():
                        dst.pop(key, None)
                    else:
                        dst[key] = s
    return {uh: t for uh, t in out.items() if t}


def _wp_one():
    return {(0, 0): {(): RationalFunction.const(rat(1))}}


def _wp_exp(A, ucap, hcap):
    out = _wp_one()
    powr = _wp_one()
    k = 1
    while True:
        powr = _wp_mul(powr, A, ucap, hcap)
        if not powr:
            break
        scale = rat(1, math.factorial(k))
        out = _merge_wp(out, {
            uh: {key: r * scale for key, r in t.items()} for uh, t in powr.items()
        })
        k += 1
    return out


def _merge_wp(A, B):
    out = {uh: dict(t) for uh, t in A.items()}
    for uh, t in B.items():
        dst = out.setdefault(uh, {})
        for key, r in t.items():
            prev = dst.get(key)
            s = r if prev is None else prev + r
            if s.is_zero():
                dst.pop(key, None)
            else:
                dst[key] = s
    return out


def _j_vectors(budget: int, k: int):
    """All (j1..jk) with sum of 2j_i within the budget."""
    if k == 0:
        yield ()
        return
    for j in range(budget // 2 + 1):
        for rest in _j_vectors(budget - 2 * j, k - 1):
            yield (j,) + rest


def _w_block(engine, ctx: _WCtx, spec_idx: tuple, ucap: int, hcap: int) -> dict:
    """One insertion block over the given spectators, as {(u, h): tensor}."""
    m = len(spec_idx)
    out: dict = {}

    def add(u, hh, key, val):
        if val.is_zero():
            return
        dst = out.setdefault((u, hh), {})
        prev = dst.get(key)
        s = val if prev is None else prev + val
        if s.is_zero():
            dst.pop(key, None)
        else:
            dst[key] = s

    # regularized double integral, no spectators
    if m == 0 and ucap >= 2:
        cap = ucap - 2
        gser = ctx.breg_eps(cap)
        iu1 = ctx.eps_unit_inv(0, cap)
        iu2 = ctx.eps_unit_inv(1, cap)
        for j1 in range(cap // 2 + 1):
            for j2 in range((cap - 2 * j1) // 2 + 1):
                u = 2 + 2 * j1 + 2 * j2
                hh = u
                if u > ucap or hh > hcap:
                    continue
                cur = gser
                for _ in range(2 * j1):
                    cur = _e2_mul(iu1, _e2_deriv(cur, 0), cap)
                for _ in range(2 * j2):
                    cur = _e2_mul(iu2, _e2_deriv(cur, 1), cap)
                val = cur.get((0, 0))
                if val is not None:
                    add(u, hh, (),
                        val * (_s_coeff(j1) * _s_coeff(j2) * rat(1, 2)))

    # two-point block with one spectator: diagonal markers
    if m == 1:
        for j in range((ucap - 1) // 2 + 1):
            u = 1 + 2 * j
            hh = u
            if hh > hcap:
                continue
            fam = {2: ctx.inv_xp}
            for _ in range(2 * j):
                nxt: dict = {}
                for kk, r in fam.items():
                    dr = ctx.inv_xp * r.deriv()
                    if not dr.is_zero():
                        prev = nxt.get(kk)
                        nxt[kk] = dr if prev is None else prev + dr
                    down = ctx.inv_xp * r * rat(-kk)
                    prev = nxt.get(kk + 1)
                    nxt[kk + 1] = down if prev is None else prev + down
                fam = {kk: r for kk, r in nxt.items() if not r.is_zero()}
            sc = _s_coeff(j)
            for kk, r in fam.items():
                add(u, hh, ((spec_idx[0], ("diag", kk)),), r * sc)

    # stable blocks
    for k in range(1, ucap + 1):
        kfac = rat(1, math.factorial(k))
        for g in range((hcap + 2 - m - 2 * k) // 2 + 1):
            base_h = 2 * g - 2 + m + k
            if base_h < 0 or (g, m + k) in ((0, 1), (0, 2)):
                continue
            om = engine.omega(g, m + k)
            for key, c in om.entries.items():
                spec_key = tuple(sorted(zip(spec_idx, key[k:])))
                for jv in _j_vectors(min(ucap - k, hcap - base_h - k), k):
                    u = k + 2 * sum(jv)
                    hh = base_h + u
                    if u > ucap or hh > hcap:
                        continue
                    val = RationalFunction.const(c * kfac)
                    for sl, j in zip(key[:k], jv):
                        val = val * ctx.slot_d(sl, 2 * j)
                        if val.is_zero():
                            break
                    else:
                        coef = rat(1)
                        for j in jv:
                            coef = coef * _s_coeff(j)
                        add(u, hh, spec_key, val * coef)
    return out


class WExtraction:
    """One (u, hbar) coefficient of the global insertion.

    entries maps a tuple of (spectator index, marker) pairs to a rational
    function R(z); the represented differential is
    sum R(z) dz tensor prod basis(marker)(z_j), with basis((i, k)) the
    pole-basis form dz_j/(z_j - q_i)^k and basis(('diag', k)) the
    diagonal form dz_j/(z - z_j)^k.
    """

    def __init__(self, g, r, n, entries):
        self.g = g
        self.r = r
        self.n = n
        self.entries = {k: v for k, v in entries.items() if not v.is_zero()}

    def __eq__(self, other):
        if not isinstance(other, WExtraction):
            return NotImplemented
        return self.n == other.n and self.entries == other.entries

    def __repr__(self):
        bits = [f"W(g={self.g}, r={self.r}, n={self.n})"]
        for key in sorted(self.entries, key=repr):
            bits.append(f"  {key}: {self.entries[key]}")
        return "\n".join(bits)

    def is_zero(self) -> bool:
        return not self.entries


def w_extract(source, g: int, r: int, n: int) -> WExtraction:
    """Global insertion coefficient at u^r hbar^(2g - 1 + n)."""
    engine = _engine(source)
    ctx = _WCtx(engine.curve)
    ucap = r + 1
    hcap = 2 * g + n
    t0 = _w_block(engine, ctx, (), ucap, hcap)
    total = _wp_exp(t0, ucap, hcap)
    if n:
        partsum: dict = {}
        blocks = {}
        for part in _set_partitions(range(n)):
            prod = _wp_one()
            for group in part:
                key = tuple(sorted(group))
                blk = blocks.get(key)
                if blk is None:
                    blk = _w_block(engine, ctx, key, ucap, hcap)
                    blocks[key] = blk
                prod = _wp_mul(prod, blk, ucap, hcap)
                if not prod:
                    break
            partsum = _merge_wp(partsum, prod)
        total = _wp_mul(total, partsum, ucap, hcap)
    tensor = total.get((r + 1, 2 * g + n), {})
    return WExtraction(g, r, n, {k: ctx.xp * v for k, v in tensor.items()})


def omega_leading(source, g: int, n: int) -> WExtraction:
    """omega(g, n + 1) with its first point played by z, in insertion form."""
    engine = _engine(source)
    one = RationalFunction.const(rat(1))
    if (g, n + 1) == (0, 2):
        return WExtraction(g, 0, n, {((0, ("diag", 2)),): one})
    om = engine.omega(g, n + 1)
    q = [p.location for p in engine.curve.ram]
    entries: dict = {}
    for key, c in om.entries.items():
        i, k = key[0]
        val = RationalFunction([c], _lin_pow(q[i], k))
        mk = tuple(sorted(zip(range(n), key[1:])))
        prev = entries.get(mk)
        entries[mk] = val if prev is None else prev + val
    return WExtraction(g, 0, n, entries)


def _omega_markers(engine, q, g: int, idx: tuple) -> dict:
    """omega(g, len(idx) + 1)(z, z_idx) / dz over spectator markers."""
    one = RationalFunction.const(rat(1))
    if (g, len(idx)) == (0, 0):
        y = engine.curve.y
        if y is None:
            raise ValueError("needs a globally rational y")
        return {(): y * engine.curve.dx}
    if (g, len(idx)) == (0, 1):
        return {((idx[0], ("diag", 2)),): one}
    om = engine.omega(g, len(idx) + 1)
    entries: dict = {}
    for key, c in om.entries.items():
        i, k = key[0]
        val = RationalFunction([c], _lin_pow(q[i], k))
        mk = tuple(sorted(zip(idx, key[1:])))
        prev = entries.get(mk)
        entries[mk] = val if prev is None else prev + val
    return entries


def _w1_terms(source, g: int, n: int, restricted: bool) -> WExtraction:
    engine = _engine(source)
    ctx = _WCtx(engine.curve)
    q = [p.location for p in engine.curve.ram]
    entries: dict = {}

    def add(key, val):
        prev = entries.get(key)
        s = val if prev is None else prev + val
        if s.is_zero():
            entries.pop(key, None)
        else:
            entries[key] = s

    if g >= 1:
        if (g - 1, n + 2) == (0, 2):
            bd = ctx.breg_eps(0).get((0, 0))
            if bd is not None:
                add((), bd * ctx.xp * ctx.xp)
        else:
            om = engine.omega(g - 1, n + 2)
            for key, c in om.entries.items():
                i0, k0 = key[0]
                i1, k1 = key[1]
                val = RationalFunction([c], _lin_pow(q[i0], k0))
                val = val * RationalFunction([rat(1)], _lin_pow(q[i1], k1))
                add(tuple(sorted(zip(range(n), key[2:]))), val)

    for mask in range(1 << n):
        i1 = tuple(j for j in range(n) if mask & (1 << j))
        i2 = tuple(j for j in range(n) if not mask & (1 << j))
        for g1 in range(g + 1):
            g2 = g - g1
            if restricted and (2 * g1 - 1 + len(i1) < 0 or 2 * g2 - 1 + len(i2) < 0):
                continue
            t1 = _omega_markers(engine, q, g1, i1)
            t2 = _omega_markers(engine, q, g2, i2)
            for k1, v1 in t1.items():
                for k2, v2 in t2.items():
                    add(tuple(sorted(k1 + k2)), v1 * v2)

    half = ctx.inv_xp / rat(2)
    return WExtraction(g, 1, n, {k: half * v for k, v in entries.items()})


def w1_direct(source, g: int, n: int) -> WExtraction:
    """Contact-plus-splitting form of the u^1 insertion coefficient."""
    return _w1_terms(source, g, n, restricted=True)


def w_tilde1(source, g: int, n: int) -> WExtraction:
    """Same contact-plus-splitting sum without the stability restriction."""
    return _w1_terms(source, g, n, restricted=False)


# -- the Fock side --------------------------------------------------------


class FockVector:
    """Truncated vector in the boson algebra, graded by the paired points.

    poly lives over (h, p1.., zp, zm): the p-monomials are exact up to
    weight pcap relative to the source tau, but beyond that the paired
    exponents matter: a coefficient at zp^a zm^b is certified only to
    p-weight pcap - max(a + b + 1, 0), which trust() reports.
    """

    def __init__(self, poly, pcap, hcap, corrupt=False):
        self.poly = poly
        self.pcap = pcap
        self.hcap = hcap
        self.corrupt = corrupt

    def trust(self, a: int, b: int) -> int:
        return self.pcap - max(a + b + 1, 0)

    def component(self, a: int, b: int) -> MultiPoly:
        pw = p_weights(self.pcap)
        return self.poly.extract({"zp": a, "zm": b}).truncate(pw, self.trust(a, b))


def fock_kernel_apply(tau, corrupt: bool = False) -> FockVector:
    """Kernel image of a truncated tau vector.

    Shift every p_k by zp^k - zm^k, multiply by the negative-mode
    exponential in the same paired points, subtract the input, divide by
    (zp - zm).  corrupt flips the sign of the negative-mode exponent,
    leaving the same footprint but breaking the algebra element; it is
    the negative control for the symmetry test.
    """
    poly = tau.poly
    pcap, hcap = tau.pcap, tau.hcap
    pw = p_weights(pcap)
    union = tuple(poly.vars) + ("zp", "zm")
    shifted = poly.with_vars(union)
    for k in range(1, pcap + 1):
        name = f"p{k}"
        if name not in poly.vars:
            continue
        repl = (MultiPoly.gen(union, name)
                + MultiPoly.gen(union, "zp", k) - MultiPoly.gen(union, "zm", k))
        shifted = shifted.subs_poly(name, repl, weights=pw, wcap=pcap)
    gsign = rat(1) if corrupt else rat(-1)
    gterms = MultiPoly.zero(union)
    for k in range(1, pcap + 1):
        name = f"p{k}"
        if name not in poly.vars:
            continue
        ck = gsign * rat(1, k)
        gterms = gterms + (MultiPoly.gen(union, "zp", -k)
                           - MultiPoly.gen(union, "zm", -k)
                           ) * MultiPoly.gen(union, name) * ck
    pref = gterms.exp_truncated(pw, pcap)
    prod = pref.mul_truncated(shifted, pw, pcap, hicaps={"h": hcap})
    numer = prod - poly.with_vars(union)
    return FockVector(_div_pm(numer), pcap, hcap, corrupt)


def _j_insert(poly: MultiPoly, zname: str, amax: int, create: bool) -> MultiPoly:
    """One current insertion: annihilation and optional creation modes."""
    union = tuple(poly.vars) + ((zname,) if zname not in poly.vars else ())
    poly = poly.with_vars(union)
    out = MultiPoly.zero(union)
    for a in range(1, amax + 1):
        name = f"p{a}"
        if name not in union:
            continue
        d = poly.deriv(name)
        if not d.is_zero():
            out = out + MultiPoly.gen(union, zname, a) * d.map_coeffs(
                lambda c, a=a: c * a)
        if create:
            out = out + MultiPoly.gen(union, zname, -a) * (
                MultiPoly.gen(union, name) * poly)
    return out


def _vev(poly: MultiPoly) -> MultiPoly:
    return poly.extract({v: 0 for v in poly.vars if v[0] == "p" and v[1:].isdigit()})


def connected_correlator(tau, n: int, ker: FockVector | None = None,
                         amax: int | None = None, create: bool = True) -> MultiPoly:
    """Connected n-current correlator, kernel-rooted when ker is given.

    Currents act rightmost first, so the leftmost spectator carries the
    smallest radius; the result absorbs one 1/z_j per spectator to match
    the normalized insertion directly.
    """
    if amax is None:
        amax = tau.pcap
    names = _spec_names(n)

    def chain(base: MultiPoly, subset: tuple) -> MultiPoly:
        v = base
        for j in sorted(subset, reverse=True):
            v = _j_insert(v, names[j], amax, create)
        return _vev(v)

    subsets = []
    for r in range(n + 1):
        subsets.extend(itertools.combinations(range(n), r))
    cvals = {s: chain(tau.poly, s) for s in subsets}

    if ker is None:
        # plain cumulants of the current correlators
        conn: dict = {}
        for s in subsets:
            acc = cvals[s]
            for part in _set_partitions(list(s)):
                if len(part) <= 1:
                    continue
                prod = None
                for group in part:
                    f = conn[tuple(sorted(group))]
                    prod = f if prod is None else prod * f
                acc = acc - prod
            conn[s] = acc
        result = conn[tuple(range(n))]
    else:
        mvals = {s: chain(ker.poly, s) for s in subsets}
        kc: dict = {}
        for s in subsets:
            acc = mvals[s]
            items = set(s)
            for t in subsets:
                if len(t) < len(s) and set(t) <= items:
                    rest = tuple(sorted(items - set(t)))
                    acc = acc - kc[t] * cvals[rest]
            kc[s] = acc
        result = kc[tuple(range(n))]
    for name in names:
        if name in result.vars:
            result = _shift_var(result, name, -1)
        else:
            result = _shift_var(result.with_vars(tuple(result.vars) + (name,)),
                                name, -1)
    return result


def formalism_check(source, point: ExpansionPoint, tau, n: int, tmax: int,
                    hmax: int, spec_deg: int, ker: FockVector | None = None) -> int:
    """Monomialwise comparison of the two expansions of the insertion.

    Returns the number of window monomials compared; raises
    FormalismMismatch on the first disagreement.  The window is the
    intersection of what both sides certify: paired total degree tmax on
    the local side, annihilation weight within pcap on the Fock side.
    """
    if ker is None:
        ker = fock_kernel_apply(tau)
    om = omega_cap(source, n, point, tmax, hmax, spec_deg)
    fock = connected_correlator(tau, n, ker=ker, amax=spec_deg + 1, create=False)
    names = _spec_names(n)
    vars = ("zp", "zm") + names + ("h",)
    a = om.poly.with_vars(vars)
    b = fock.with_vars(vars)
    hwin = min(hmax, tau.hcap)
    count = 0
    seen = set(a.terms) | set(b.terms)
    for e in sorted(seen):
        alpha, beta = e[0], e[1]
        spec = e[2:2 + n]
        hdeg = e[2 + n]
        if hdeg > hwin or any(s > spec_deg or s < 0 for s in spec):
            continue
        if alpha + beta > tmax:
            continue
        if alpha + beta + 1 + sum(s + 1 for s in spec) > tau.pcap:
            continue
        ca = a.terms.get(e, rat(0))
        cb = b.terms.get(e, rat(0))
        if ca != cb:
            raise FormalismMismatch(
                f"insertion mismatch at zp^{alpha} zm^{beta} "
                f"spec={tuple(spec)} h^{hdeg}: local {ca} vs fock {cb}")
        count += 1
    return count


# -- the symmetry test ----------------------------------------------------


class SymmetryReport:
    def __init__(self, base, specials, control, compared):
        self.base = base
        self.specials = specials
        self.control = control
        self.compared = compared

    @property
    def verdict(self) -> str:
        if self.base.verdict != "PASS":
            return "FAIL"
        for rec in self.specials:
            if rec["report"].verdict != "PASS":
                return "FAIL"
        if self.control is not None and self.control["report"].verdict != "FAIL":
            return "FAIL"
        return "PASS"

    def lines(self):
        out = [f"kp-symmetry verdict={self.verdict}"]
        out.append(f"base tau: {self.base.verdict}")
        for rec in self.specials:
            tag = "nonzero" if rec["nonzero"] else "zero"
            out.append(
                f"component (a={rec['a']}, b={rec['b']}) trust p<={rec['trust']} "
                f"{tag}: {rec['report'].verdict}")
        if self.control is not None:
            out.append(
                f"corrupted control (a={self.control['a']}, b={self.control['b']}): "
                f"{self.control['report'].verdict} (FAIL expected)")
        if self.compared:
            out.append(f"correlator cross-check: {self.compared} monomials agree")
        return out

    def __repr__(self):
        return "\n".join(self.lines())


def _dual_tau(tau, delta: MultiPoly, pcap: int):
    from .scalars import Dual

    base = tau.poly.truncate(p_weights(tau.pcap), pcap)
    eps = base.map_coeffs(lambda c: Dual(c)) + \
        delta.with_vars(base.vars).map_coeffs(lambda c: Dual(0, c))
    return TruncatedTau(eps, pcap, tau.hcap)


def kp_symmetry_test(source, point: ExpansionPoint | None = None,
                     specializations=((1, 2), (0, 0), (-1, -1)),
                     max_n: int = 10, max_k: int = 10, max_g: int = 3,
                     max_weight: int = 6, cross_n: int = 1, cross_tmax: int = 6,
                     cross_hmax: int = 2, cross_spec_deg: int = 2) -> SymmetryReport:
    """Hirota residuals of tau plus epsilon times kernel specializations.

    Builds the partition function at the base point, checks it, then for
    each (a, b) checks tau + eps * component over the dual numbers; the
    epsilon-linear residual parts must vanish within the component trust.
    One corrupted component is kept as the negative control, and the
    local/Fock correlator comparison runs for spectator counts up to
    cross_n.
    """
    from .expansion import partition_function, potential
    from .hirota import kp_check

    engine = _engine(source)
    if point is None:
        point = ExpansionPoint(rat(1))
    F = potential(engine, point, max_n=max_n, max_k=max_k, max_g=max_g)
    tau = partition_function(F)
    base = kp_check(tau, max_weight=max_weight)

    ker = fock_kernel_apply(tau)
    specials = []
    for a, b in specializations:
        trust = ker.trust(a, b)
        delta = ker.component(a, b)
        rep = kp_check(_dual_tau(tau, delta, trust), max_weight=max_weight)
        specials.append({"a": a, "b": b, "trust": trust,
                         "nonzero": not delta.is_zero(), "report": rep})

    control = None
    bad = fock_kernel_apply(tau, corrupt=True)
    for a, b in sorted(specializations, key=lambda ab: -bad.trust(*ab)):
        delta = bad.component(a, b)
        if delta.is_zero():
            continue
        rep = kp_check(_dual_tau(tau, delta, bad.trust(a, b)),
                       max_weight=max_weight)
        control = {"a": a, "b": b, "report": rep}
        break

    compared = 0
    for nn in range(cross_n + 1):
        compared += formalism_check(engine, point, tau, nn, cross_tmax,
                                    cross_hmax, cross_spec_deg, ker=ker)
    return SymmetryReport(base, specials, control, compared)
