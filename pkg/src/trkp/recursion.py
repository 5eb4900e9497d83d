"""Eynard-Orantin topological recursion over exact scalars.

Correlation differentials are stored as symmetric tensors over the pole
basis dz/(z - q_i)^k: a dict from ordered slot-key tuples ((i1,k1),...,
(in,kn)) to scalars. The recursion runs entirely in local coordinates at
each ramification point; the kernel enters through its t-expansion

    K(z0, q+t) = dz0 * sum_m kappa_m(t) / (z0 - q)^(m+1),
    kappa_m = (t^m - sigma(t)^m) / (2 (y - y∘sigma) x'),

so each residue Res_t kappa_m(t) W(t) dt lands directly on a pole-basis
coefficient. Windows are tracked by the series layer; if a residue needs a
coefficient outside its window the computation fails loudly rather than
returning a wrong value.
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor

from .curves import SpectralCurve
from .scalars import is_rational, rat
from .series import InsufficientOrder, TruncSeries

CONVENTION_TAG = "eo-k1-v1"


def kmax(g: int, n: int) -> int:
    """Pole-order bound 2(3g-3+n)+2 for stable (g,n)."""
    return 2 * (3 * g - 3 + n) + 2


class CorrelationDifferential:
    """Symmetric n-differential as a sparse pole-basis tensor."""

    __slots__ = ("g", "n", "entries")

    def __init__(self, g: int, n: int, entries=None):
        self.g = g
        self.n = n
        self.entries = dict(entries) if entries else {}

    def add(self, key, c):
        if not c:
            return
        prev = self.entries.get(key)
        if prev is None:
            self.entries[key] = c
        else:
            s = prev + c
            if s:
                self.entries[key] = s
            else:
                del self.entries[key]

    def coeff(self, key):
        return self.entries.get(tuple(key), rat(0))

    def __eq__(self, other):
        if not isinstance(other, CorrelationDifferential):
            return NotImplemented
        if (self.g, self.n) != (other.g, other.n):
            return False
        keys = set(self.entries) | set(other.entries)
        return all(self.coeff(k) == other.coeff(k) for k in keys)

    __hash__ = None

    def __repr__(self):
        return (f"CorrelationDifferential(g={self.g}, n={self.n}, "
                f"{len(self.entries)} entries)")

    def map_coeffs(self, fn) -> CorrelationDifferential:
        out = CorrelationDifferential(self.g, self.n)
        for k, c in self.entries.items():
            out.add(k, fn(c))
        return out

    def __add__(self, other):
        if not isinstance(other, CorrelationDifferential):
            return NotImplemented
        if (self.g, self.n) != (other.g, other.n):
            raise ValueError("mismatched (g,n)")
        out = CorrelationDifferential(self.g, self.n, self.entries)
        for k, c in other.entries.items():
            out.add(k, c)
        return out

    def __sub__(self, other):
        return self.__add__(other.map_coeffs(lambda c: -c))

    def scale(self, c) -> CorrelationDifferential:
        return self.map_coeffs(lambda x: x * c)

    def is_zero(self) -> bool:
        return not self.entries


def res_pair(a: TruncSeries, b: TruncSeries):
    """Residue of the product: [t^-1](a*b), verified inside both windows."""
    if a.is_zero() or b.is_zero():
        lo = a.low + b.low
        if lo > -1:
            return rat(0)
        # a zero series only certifies vanishing inside its window
        if min(a.order + b.low, b.order + a.low) <= -1:
            raise InsufficientOrder("residue outside product window")
        return rat(0)
    if min(a.order + b.low, b.order + a.low) <= -1:
        raise InsufficientOrder("residue outside product window")
    acc = 0
    for i in range(a.low, a.order):
        j = -1 - i
        if j < b.low or j >= b.order:
            continue
        ai = a.coeff(i)
        if ai:
            bj = b.coeff(j)
            if bj:
                acc = acc + ai * bj
    return acc if acc else rat(0)


class _PointContext:
    """Localization caches at one ramification point for one window size."""

    def __init__(self, curve: SpectralCurve, idx: int, order: int):
        self.curve = curve
        self.idx = idx
        self.order = order
        fr = curve.frame(idx, order)
        self.sigma = fr.sigma
        self.sigma_prime = fr.sigma.deriv()
        self.xp = fr.xp
        y = fr.y
        ydiff = y.truncate(self.sigma.order) - y.compose(self.sigma)
        den = (ydiff * self.xp) * 2
        self.killer = den.inverse()  # 1 / (2 (y - y∘sigma) x')
        self._t_pows: dict = {}
        self._s_pows: dict = {}
        self._loc_t: dict = {}
        self._loc_s: dict = {}
        self._kappa: list = [None]  # kappa[m], 1-based

    # 1/(z - q_i)^k with z = q + t
    def loc_t(self, key) -> TruncSeries:
        got = self._loc_t.get(key)
        if got is None:
            i, k = key
            got = self._base_t(i) ** k
            self._loc_t[key] = got
        return got

    # same, with z = q + sigma(t); jacobian NOT included
    def loc_s(self, key) -> TruncSeries:
        got = self._loc_s.get(key)
        if got is None:
            i, k = key
            got = self._base_s(i) ** k
            self._loc_s[key] = got
        return got

    def _base_t(self, i) -> TruncSeries:
        got = self._t_pows.get(i)
        if got is None:
            if i == self.idx:
                got = TruncSeries(-1, [1] + [0] * (self.order - 1), self.order - 1)
            else:
                c = self.curve.ram[self.idx].location - self.curve.ram[i].location
                base = TruncSeries.from_poly([c, 1], self.order)
                got = base.inverse()
            self._t_pows[i] = got
        return got

    def _base_s(self, i) -> TruncSeries:
        got = self._s_pows.get(i)
        if got is None:
            if i == self.idx:
                got = self.sigma.inverse()
            else:
                c = self.curve.ram[self.idx].location - self.curve.ram[i].location
                got = (self.sigma + c).inverse()
            self._s_pows[i] = got
        return got

    def sigma_pow(self, m: int) -> TruncSeries:
        key = ("sp", m)
        got = self._loc_t.get(key)
        if got is None:
            got = self.sigma if m == 1 else self.sigma_pow(m - 1) * self.sigma
            self._loc_t[key] = got
        return got

    def kappa(self, m: int) -> TruncSeries:
        """Kernel coefficient (t^m - sigma^m) / (2 (y - y∘sigma) x')."""
        while len(self._kappa) <= m:
            j = len(self._kappa)
            tm = TruncSeries(j, [1] + [0] * (self.order - j - 1), self.order)
            self._kappa.append((tm - self.sigma_pow(j)) * self.killer)
        return self._kappa[m]

    def b_diag(self) -> TruncSeries:
        """B(z, sigma z) both slots localized: sigma'/(t - sigma)^2."""
        d = TruncSeries.var(self.order) - self.sigma
        return d.inverse() ** 2 * self.sigma_prime


class _Factor:
    """One localized recursion factor: a t-series plus slot keys it pins."""

    __slots__ = ("series", "keys")

    def __init__(self, series, keys):
        self.series = series
        self.keys = keys  # tuple of (position, slotkey)


class Engine:
    """Memoized recursion over one validated curve."""

    def __init__(self, curve: SpectralCurve, cache_dir=None):
        if curve.etale:
            raise ValueError(
                "recursion needs explicit ramification points; "
                "degree >= 3 moduli support validation only")
        self.curve = curve
        self.cache_dir = cache_dir
        self._memo: dict = {}
        self._lock = threading.Lock()
        self._ctx: dict = {}

    # -- public -----------------------------------------------------------

    def omega(self, g: int, n: int) -> CorrelationDifferential:
        if g < 0 or n < 1 or 2 * g - 2 + n <= 0:
            raise ValueError(f"omega({g},{n}) is not a stable correlator")
        with self._lock:
            got = self._memo.get((g, n))
        if got is not None:
            return got
        if self.cache_dir is not None:
            got = self._load_cached(g, n)
            if got is not None:
                with self._lock:
                    self._memo[(g, n)] = got
                return got
        for gg, nn in _dependencies(g, n):
            self.omega(gg, nn)
        out = self._compute(g, n)
        with self._lock:
            prev = self._memo.get((g, n))
            if prev is not None:
                return prev
            self._memo[(g, n)] = out
        if self.cache_dir is not None:
            self._store_cached(out)
        return out

    def omega_many(self, requests, jobs: int = 1):
        """Compute a batch, optionally with a worker pool per antichain.

        Results are schedule-independent: exact arithmetic plus canonical
        merge ordering make the output identical for any jobs setting.
        """
        needed = set()
        stack = [(g, n) for g, n in requests]
        while stack:
            g, n = stack.pop()
            if (g, n) in needed:
                continue
            needed.add((g, n))
            stack.extend(_dependencies(g, n))
        levels: dict[int, list] = {}
        for g, n in needed:
            levels.setdefault(2 * g - 2 + n, []).append((g, n))
        for lvl in sorted(levels):
            batch = sorted(levels[lvl])
            if jobs > 1 and len(batch) > 1:
                with ThreadPoolExecutor(max_workers=jobs) as pool:
                    list(pool.map(lambda gn: self.omega(*gn), batch))
            else:
                for gn in batch:
                    self.omega(*gn)
        return {gn: self.omega(*gn) for gn in requests}

    # -- internals --------------------------------------------------------

    def _context(self, idx: int, order: int) -> _PointContext:
        got = self._ctx.get(idx)
        if got is None or got.order < order:
            got = _PointContext(self.curve, idx, order)
            self._ctx[idx] = got
        return got

    def _compute(self, g: int, n: int) -> CorrelationDifferential:
        out = CorrelationDifferential(g, n)
        order = 2 * kmax(g, n) + 6
        for pt in self.curve.ram:
            ctx = self._context(pt.index, order)
            w = self._assemble(ctx, g, n)
            for key, series in w.items():
                if series.is_zero():
                    continue
                # kappa_m has valuation >= m-2 (numerator >= m, killer = -2),
                # so residues vanish identically once m-2 > -1 - val(W)
                for m in range(1, 2 - series.low):
                    c = res_pair(ctx.kappa(m), series)
                    if c:
                        out.add(((pt.index, m + 1),) + key, c)
        return out

    def _assemble(self, ctx: _PointContext, g: int, n: int) -> dict:
        """W(t) per remaining-slot key: the bracketed recursion integrand."""
        positions = n - 1
        acc: dict = {}

        def put(key, series):
            prev = acc.get(key)
            acc[key] = series if prev is None else prev + series

        # omega_{n+1}^{(g-1)}(z, sigma z, rest)
        if g >= 1:
            if (g - 1, positions + 2) == (0, 2):
                put((), ctx.b_diag())
            elif 2 * (g - 1) - 2 + positions + 2 > 0:
                inner = self.omega(g - 1, positions + 2)
                sp = ctx.sigma_prime
                for e, c in inner.entries.items():
                    s = ctx.loc_t(e[0]) * ctx.loc_s(e[1]) * sp
                    put(e[2:], s * c)

        # splits: omega^{g1}(z, z_I) * omega^{g2}(sigma z, z_J)
        for bits in range(1 << positions):
            I = tuple(p for p in range(positions) if bits >> p & 1)
            J = tuple(p for p in range(positions) if not bits >> p & 1)
            for g1 in range(g + 1):
                g2 = g - g1
                if (g1 == 0 and not I) or (g2 == 0 and not J):
                    continue
                f2s = list(self._factors(ctx, g2, J, at_sigma=True))
                for f1 in self._factors(ctx, g1, I, at_sigma=False):
                    for f2 in f2s:
                        key = self._merge_keys(positions, f1.keys + f2.keys)
                        put(key, f1.series * f2.series)
        return acc

    def _factors(self, ctx: _PointContext, g: int, I: tuple, at_sigma: bool):
        """Localized factor omega^{(g)}(slot, z_I) at t or sigma(t)."""
        if g == 0 and len(I) == 1:
            # B(z, z_j): sum_l (l+1) t^l with slot key (cur, l+2) at j
            pos = I[0]
            lmax = ctx.order - 2
            if at_sigma:
                sp = ctx.sigma_prime
                for l in range(lmax):
                    s = (ctx.sigma_pow(l) if l else TruncSeries.const(1, ctx.order))
                    yield _Factor(s * sp * (l + 1),
                                  ((pos, (ctx.idx, l + 2)),))
            else:
                for l in range(lmax):
                    s = TruncSeries(l, [l + 1] + [0] * (ctx.order - l - 1),
                                    ctx.order)
                    yield _Factor(s, ((pos, (ctx.idx, l + 2)),))
            return
        inner = self.omega(g, 1 + len(I))
        loc = ctx.loc_s if at_sigma else ctx.loc_t
        sp = ctx.sigma_prime if at_sigma else None
        for e, c in inner.entries.items():
            s = loc(e[0]) * c
            if sp is not None:
                s = s * sp
            yield _Factor(s, tuple(zip(I, e[1:])))

    @staticmethod
    def _merge_keys(positions: int, pairs) -> tuple:
        key = [None] * positions
        for pos, sk in pairs:
            key[pos] = sk
        return tuple(key)

    # -- persistence --------------------------------------------------

    def _cache_path(self, g, n):
        import os

        tag = f"{self.curve.fingerprint()}-g{g}-n{n}.omega"
        return os.path.join(self.cache_dir, tag)

    def _load_cached(self, g, n):
        import os

        from .serialize import parse_omega

        path = self._cache_path(g, n)
        if not os.path.exists(path):
            return None
        with open(path) as fh:
            text = fh.read()
        try:
            return parse_omega(text, self.curve)
        except ValueError:
            return None

    def _store_cached(self, om):
        import os

        from .serialize import render_omega

        os.makedirs(self.cache_dir, exist_ok=True)
        path = self._cache_path(om.g, om.n)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(render_omega(om, self.curve))
        os.replace(tmp, path)


def _dependencies(g: int, n: int):
    """Stable (g', n') consumed by the omega(g, n) recursion step."""
    deps = []
    positions = n - 1
    if g >= 1 and 2 * (g - 1) - 2 + positions + 2 > 0:
        deps.append((g - 1, positions + 2))
    for m in range(positions + 1):
        for g1 in range(g + 1):
            if 2 * g1 - 2 + 1 + m > 0 and (g1, 1 + m) != (g, n):
                if 2 * (g - g1) - 2 + 1 + (positions - m) >= 0:
                    deps.append((g1, 1 + m))
    return sorted(set(deps))


class StructureReport:
    """check_structure output: named pass/fail conditions."""

    def __init__(self):
        self.checks: list[tuple[str, bool, str]] = []

    def add(self, name, ok, detail=""):
        self.checks.append((name, ok, detail))

    @property
    def ok(self):
        return all(ok for _, ok, _ in self.checks)

    def __repr__(self):
        return "\n".join(
            f"{'pass' if ok else 'FAIL'}  {name}" + (f": {d}" if d else "")
            for name, ok, d in self.checks)


def check_structure(om: CorrelationDifferential, curve: SpectralCurve) -> StructureReport:
    """Verify the structural theorems on a computed tensor.

    Pole bound k <= 2(3g-3+n)+2, absence of residues (k >= 2 by
    construction of the basis), full slot symmetry, and oddness of each
    principal part under the local involution.
    """
    rep = StructureReport()
    bound = kmax(om.g, om.n)
    ok = all(k <= bound for key in om.entries for _, k in key)
    rep.add(f"pole orders <= {bound}", ok)
    ok = all(k >= 2 for key in om.entries for _, k in key)
    rep.add("no residues (k >= 2)", ok)

    sym_ok = True
    for key, c in om.entries.items():
        for j in range(len(key) - 1):
            swapped = key[:j] + (key[j + 1], key[j]) + key[j + 2:]
            if om.coeff(swapped) != c:
                sym_ok = False
    rep.add("symmetric under slot permutations", sym_ok)

    # oddness: P(sigma(t)) sigma'(t) + P(t) regular at t=0, per slot/point
    w = bound + 4
    parity_ok = True
    for pt in curve.ram:
        ctx = _PointContext(curve, pt.index, w + 2)
        for slot in range(om.n):
            groups: dict = {}
            for key, c in om.entries.items():
                i, k = key[slot]
                if i != pt.index:
                    continue
                rest = key[:slot] + key[slot + 1:]
                groups.setdefault(rest, []).append((k, c))
            for rest, terms in groups.items():
                total = TruncSeries.zero(0)
                for k, c in terms:
                    pk = TruncSeries(-k, [c] + [0] * (k - 1), 0)
                    image = ctx.loc_s((pt.index, k)) * ctx.sigma_prime * c
                    total = total + pk + image.truncate(0)
                if not total.is_zero() and total.val() < 0:
                    parity_ok = False
    rep.add("principal parts odd under the deck transformation", parity_ok)
    return rep


def eval_tensor(om: CorrelationDifferential, curve: SpectralCurve, points):
    """Evaluate the stripped tensor sum at probe coordinates.

    Returns sum over entries of c * prod 1/(z_j - q_{i_j})^{k_j}: the value
    of omega / (dz_1 ... dz_n) at the probe tuple.
    """
    total = rat(0)
    locs = [p.location for p in curve.ram]
    for key, c in om.entries.items():
        v = c
        for z, (i, k) in zip(points, key):
            d = z - locs[i]
            v = v * _inv(d) ** k
        total = total + v
    return total


def _inv(c):
    if isinstance(c, int):
        return rat(1, c)
    if is_rational(c):
        return rat(1) / c
    return c.inverse()
