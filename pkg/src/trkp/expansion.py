"""Expansion of correlation differentials at a regular point.

A choice of base point o on CP^1 and local coordinate xi turns each
omega(g, n) into a coefficient tensor f^(g)_{k1..kn} against the basis
prod_i k_i xi_i^(k_i - 1) dxi_i.  Collecting those tensors with the
symmetry factor 1/n! and the genus weight hbar^(2g-2+n) gives the
potential F, and Z = exp(F) is the truncated partition function that
the Hirota layer consumes.

The (0,2) differential is special: only B minus the singular kernel
dxi1 dxi2/(xi1 - xi2)^2 is expanded.  Writing z = z(xi) for the inverse
of the coordinate, that regular part is d1 d2 log((z1 - z2)/(xi1 - xi2)),
so its coefficient tensor is read off a two-variable log series.
"""

from __future__ import annotations

from .multipoly import MultiPoly
from .recursion import CorrelationDifferential, Engine
from .scalars import AlgebraicNum, rat
from .series import InsufficientOrder, TruncSeries


class NotRegular(ValueError):
    """The chosen base point carries a pole of some correlation differential."""


def _demote(c):
    """Collapse field elements with zero non-rational part to plain rationals."""
    if isinstance(c, AlgebraicNum) and not any(c.coeffs[1:]):
        return c.coeffs[0]
    return c


class ExpansionPoint:
    """Base point and local coordinate for expanding differentials.

    location is an exact scalar, or None for the point at infinity.  The
    local parameter is s = z - o at a finite point and s = 1/z at
    infinity; xi is an invertible TruncSeries in s (valuation exactly 1),
    defaulting to xi = s.  All expansions are series in xi.
    """

    def __init__(self, location, xi: TruncSeries | None = None):
        if xi is not None and xi.low != 1:
            raise ValueError("local coordinate must have valuation exactly 1")
        self.location = location
        self.xi = xi
        self._cache = (0, None, None)  # order, s(xi), s'(xi)

    @property
    def at_infinity(self) -> bool:
        return self.location is None

    def label(self) -> str:
        if self.at_infinity:
            base = "oo"
        else:
            base = str(self.location)
        return base if self.xi is None else base + "+coord"

    def coordinate_series(self, order: int) -> tuple[TruncSeries, TruncSeries]:
        """Return (s(xi), ds/dxi) to the requested window."""
        cached_order, s, ds = self._cache
        if cached_order >= order:
            return s.truncate(order), ds.truncate(order - 1)
        if self.xi is None:
            s = TruncSeries.var(order)
        else:
            if self.xi.order < order:
                raise InsufficientOrder(
                    f"coordinate window {self.xi.order} < required {order}"
                )
            s = self.xi.truncate(order).revert()
        ds = s.deriv()
        self._cache = (order, s, ds)
        return s, ds


def _slot_series(curve, point: ExpansionPoint, i: int, k: int, order: int) -> TruncSeries:
    """Pullback of dz/(z - q_i)^k to the xi-coordinate, as a series times dxi."""
    s, ds = point.coordinate_series(order + 2)
    q = curve.ram[i].location
    if point.at_infinity:
        zq = s.inverse() - q
        dz = -ds * s.inverse() * s.inverse()
    else:
        zq = s + (point.location - q)
        dz = ds
    if zq.low > 0:
        raise NotRegular(f"expansion point coincides with ramification point {i}")
    out = zq.inverse() ** k * dz
    if out.low < 0:
        raise NotRegular(f"pole of slot ({i},{k}) at the expansion point")
    return out


def _slot_vector(curve, point, i, k, max_k):
    """Coefficients against the basis m xi^(m-1) dxi, m = 1..max_k."""
    ser = _slot_series(curve, point, i, k, max_k + 1)
    return [ser.coeff(m - 1) * rat(1, m) for m in range(1, max_k + 1)]


def expand_at(om: CorrelationDifferential, curve, point: ExpansionPoint,
              max_k: int, weight_cap: int | None = None) -> dict:
    """Coefficient tensor f_{k1..kn} of a stable correlation differential.

    Returns a dict over ordered index tuples (k1..kn), 1 <= k_i <= max_k,
    restricted to sum(k) <= weight_cap when given.  Storage is
    full-ordered, mirroring CorrelationDifferential.
    """
    vectors: dict = {}
    out: dict = {}
    for key, c in om.entries.items():
        vecs = []
        for slot in key:
            v = vectors.get(slot)
            if v is None:
                v = vectors[slot] = _slot_vector(curve, point, slot[0], slot[1], max_k)
            vecs.append(v)
        _accumulate(out, c, vecs, max_k, weight_cap)
    return {kk: _demote(v) for kk, v in out.items() if v}


def _accumulate(out, c, vecs, max_k, weight_cap):
    n = len(vecs)

    def rec(depth, prefix, budget, acc):
        if depth == n:
            key = tuple(prefix)
            cur = out.get(key)
            out[key] = acc if cur is None else cur + acc
            return
        v = vecs[depth]
        # each remaining slot costs at least 1
        top = min(max_k, budget - (n - depth - 1)) if budget is not None else max_k
        for m in range(1, top + 1):
            cm = v[m - 1]
            if not cm:
                continue
            prefix.append(m)
            rec(depth + 1, prefix, None if budget is None else budget - m, acc * cm)
            prefix.pop()

    rec(0, [], weight_cap, c)


def expand_pair_part(point: ExpansionPoint, max_k: int) -> dict:
    """Regular part of B at the base point, as a tensor over (k1, k2).

    f^(0)_{k1,k2} is the coefficient of xi1^k1 xi2^k2 in
    log((z(xi1) - z(xi2)) / (c1 (xi1 - xi2))), with c1 the linear
    coefficient of z(xi).  With xi = s the ratio is 1 and everything
    vanishes; that is the statement that B has no regular part in the
    coordinate it is written in.
    """
    s, _ = point.coordinate_series(2 * max_k + 2)
    c1 = s.coeff(1)
    caps = {"u": max_k, "v": max_k}
    row = {}
    for m in range(1, 2 * max_k + 2):
        cm = s.coeff(m)
        if cm:
            # divided difference of c_m s^m: sum_{a+b=m-1} u^a v^b
            for a in range(m):
                b = m - 1 - a
                if a <= max_k and b <= max_k:
                    row[(a, b)] = row.get((a, b), rat(0)) + cm
    dd = MultiPoly(("u", "v"), row)
    dd = dd / c1
    log = dd.log_truncated({}, None, hicaps=caps)
    out = {}
    for (a, b), c in log.terms.items():
        if a >= 1 and b >= 1 and c:
            out[(a, b)] = _demote(c)
    return out


class PotentialF:
    """Coefficients f^(g)_{k1..kn} with their truncation budgets.

    coeffs maps (g, (k1..kn)) to an exact scalar; storage over ordered
    tuples.  Budgets: n <= max_n, each k_i <= max_k, g <= max_g, and
    sum(k) <= weight_cap.  Includes the (0,2) regular part; excludes
    (0,1) entirely.
    """

    def __init__(self, coeffs, max_n, max_k, max_g, weight_cap, euler_cap):
        self.coeffs = coeffs
        self.max_n = max_n
        self.max_k = max_k
        self.max_g = max_g
        self.weight_cap = weight_cap
        self.euler_cap = euler_cap

    def coeff(self, g, kt):
        return self.coeffs.get((g, tuple(kt)), rat(0))

    def __repr__(self):
        return (f"PotentialF({len(self.coeffs)} coefficients, n<={self.max_n}, "
                f"k<={self.max_k}, g<={self.max_g})")


class TruncatedTau:
    """Partition function as a MultiPoly in h, p1..p_pcap.

    Trust window: all monomials with p-weight (sum k * deg p_k) <= pcap
    and h-degree <= hcap are exact coefficients of the untruncated Z.
    """

    def __init__(self, poly: MultiPoly, pcap: int, hcap: int):
        self.poly = poly
        self.pcap = pcap
        self.hcap = hcap

    def coeff(self, hdeg: int, pmono: dict):
        expo = {f"p{k}": e for k, e in pmono.items()}
        expo["h"] = hdeg
        return self.poly.coeff(tuple(expo.get(v, 0) for v in self.poly.vars))

    def constant_term(self):
        return self.poly.constant_term()

    def __repr__(self):
        return f"TruncatedTau(pcap={self.pcap}, hcap={self.hcap}, {len(self.poly.terms)} terms)"


def p_weights(pcap: int) -> dict:
    return {f"p{k}": k for k in range(1, pcap + 1)}


def potential(source, point: ExpansionPoint, max_n: int, max_k: int,
              max_g: int, weight_cap: int | None = None,
              max_euler: int | None = None) -> PotentialF:
    """Assemble f^(g)_{k...} for all (g, n) inside the budgets.

    source is an Engine or a SpectralCurve.  weight_cap defaults to
    min(max_k, max_n), the largest p-weight the resulting partition
    function can certify anyway.  max_euler bounds 2g-2+n; terms above
    it only feed hbar orders the partition function cannot certify, so
    by default they are skipped.
    """
    engine = source if isinstance(source, Engine) else Engine(source)
    if weight_cap is None:
        weight_cap = min(max_k, max_n)
    euler_cap = max(min(max_n - 2, 2 * max_g), 0)
    if max_euler is not None:
        euler_cap = min(euler_cap, max_euler)
    coeffs = {}
    if max_n >= 2:
        for kt, c in expand_pair_part(point, max_k).items():
            if sum(kt) <= weight_cap:
                coeffs[(0, kt)] = c
    wanted = [
        (g, n)
        for g in range(max_g + 1)
        for n in range(1, max_n + 1)
        if 1 <= 2 * g - 2 + n <= euler_cap
    ]
    engine.omega_many(wanted)
    for g, n in wanted:
        om = engine.omega(g, n)
        for kt, c in expand_at(om, engine.curve, point, max_k, weight_cap).items():
            coeffs[(g, kt)] = c
    return PotentialF(coeffs, max_n, max_k, max_g, weight_cap, euler_cap)


def potential_poly(F: PotentialF) -> MultiPoly:
    """F as a polynomial: sum hbar^(2g-2+n)/n! f^(g)_{k...} p_{k1}..p_{kn}."""
    pmax = min(F.max_k, F.weight_cap)
    names = ("h",) + tuple(f"p{k}" for k in range(1, pmax + 1))
    terms: dict = {}
    fact = [1]
    for i in range(1, F.max_n + 1):
        fact.append(fact[-1] * i)
    for (g, kt), c in F.coeffs.items():
        n = len(kt)
        expo = [0] * len(names)
        expo[0] = 2 * g - 2 + n
        for k in kt:
            expo[k] += 1
        expo = tuple(expo)
        add = c * rat(1, fact[n])
        cur = terms.get(expo)
        terms[expo] = add if cur is None else cur + add
    return MultiPoly(names, {e: c for e, c in terms.items() if c})


def partition_function(F: PotentialF) -> TruncatedTau:
    """Z = exp(F), truncated to its certified window."""
    pcap = min(F.max_k, F.max_n, F.weight_cap)
    hcap = F.euler_cap
    fpoly = potential_poly(F)
    z = fpoly.exp_truncated(p_weights(F.max_k), pcap, hicaps={"h": hcap})
    return TruncatedTau(z, pcap=pcap, hcap=hcap)
