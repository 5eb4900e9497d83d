"""Hirota bilinear testing of truncated tau functions.

Equations are regenerated from the KP bilinear identity rather than
hard-coded: expanding

    sum_j S_j(-2y) S_{j+1}(Dtilde) exp(<y, D>) tau . tau = 0

in the auxiliary variables y and row-reducing each weight-homogeneous
block yields the classical hierarchy (weight 4: D1^4 + 3 D2^2 - 4 D1 D3,
weight 5: D1^3 D2 + 2 D2 D3 - 3 D1 D4, and so on).  Residuals of a
truncated tau are only meaningful inside a validity window: applying a
weight-w operator to inputs certified to p-weight P leaves residual
coefficients trustworthy up to weight P - w.  Verdicts are PASS, FAIL,
or INCONCLUSIVE; a window that is empty is not a failure.

Times convention: tau functions arrive as polynomials in p_k (and the
genus parameter h); Hirota derivatives D_k act in the Miwa times
t_k = p_k / k.
"""

from __future__ import annotations

import math
from itertools import combinations

from .multipoly import MultiPoly
from .scalars import rat, rat_str


class InvarianceViolation(AssertionError):
    """Two regular points produced different KP verdicts."""


# -- elementary Schur polynomials -------------------------------------


def schur_S(jmax: int, vars, arg_of_k) -> list[MultiPoly]:
    """S_0..S_jmax with sum_j S_j z^j = exp(sum_k t_k z^k), t_k = arg_of_k(k).

    Computed through j*S_j = sum_k k*t_k*S_{j-k}.
    """
    out = [MultiPoly.const(vars, rat(1))]
    for j in range(1, jmax + 1):
        acc = MultiPoly.zero(vars)
        for k in range(1, j + 1):
            tk = arg_of_k(k)
            if tk is not None:
                acc = acc + tk.map_coeffs(lambda c: c * k) * out[j - k]
        out.append(acc.map_coeffs(lambda c: c * rat(1, j)))
    return out


def schur_in_p(jmax: int) -> list[MultiPoly]:
    """S_j with t_k = p_k/k, so j*S_j = sum p_k S_{j-k}."""
    vars = tuple(f"p{k}" for k in range(1, max(jmax, 1) + 1))

    def arg(k):
        return MultiPoly.gen(vars, f"p{k}").map_coeffs(lambda c: c * rat(1, k))

    return schur_S(jmax, vars, arg)


def _det(rows):
    """Exact determinant by cofactor expansion with column-subset memo."""
    n = len(rows)
    memo: dict = {}

    def rec(r, cols):
        if r == n:
            return None  # empty product handled by caller
        key = (r, cols)
        got = memo.get(key)
        if got is not None:
            return got
        acc = None
        for pos, c in enumerate(cols):
            entry = rows[r][c]
            if entry is None or entry.is_zero():
                continue
            rest = cols[:pos] + cols[pos + 1 :]
            sub = rec(r + 1, rest)
            piece = entry if sub is None else entry * sub
            if pos % 2:
                piece = -piece
            acc = piece if acc is None else acc + piece
        if acc is None:
            acc = MultiPoly.zero(rows[0][0].vars)
        memo[key] = acc
        return acc

    return rec(0, tuple(range(n)))


def schur_tau(lam, pmax: int | None = None):
    """Schur polynomial s_lambda as a TruncatedTau in p-variables.

    Jacobi-Trudi: s_lambda = det(S_{lambda_i - i + j}).  Polynomial tau
    functions are exact, so the certified window is whatever the caller
    needs; default pcap = |lambda| + 8.
    """
    from .expansion import TruncatedTau

    lam = tuple(sorted((x for x in lam if x), reverse=True))
    size = sum(lam)
    pcap = pmax if pmax is not None else size + 8
    basis = schur_in_p(max(size, 1))
    zero = MultiPoly.zero(basis[0].vars)
    ell = len(lam)
    if ell == 0:
        poly = MultiPoly.const(("h",) + basis[0].vars, rat(1))
        return TruncatedTau(poly, pcap=pcap, hcap=0)
    rows = []
    for i in range(1, ell + 1):
        row = []
        for j in range(1, ell + 1):
            d = lam[i - 1] - i + j
            row.append(basis[d] if 0 <= d <= size else zero)
        rows.append(row)
    det = _det(rows)
    poly = det.with_vars(("h",) + det.vars)
    return TruncatedTau(poly, pcap=pcap, hcap=0)


# -- equation generation ----------------------------------------------


class HirotaOperator:
    """Weight-homogeneous polynomial in D_1..D_m with exact coefficients."""

    def __init__(self, terms: dict, weight: int):
        self.terms = {e: c for e, c in terms.items() if c}
        self.weight = weight

    def __repr__(self):
        return f"HirotaOperator({self.render()})"

    def render(self) -> str:
        if not self.terms:
            return "0"
        bits = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mono = "*".join(
                f"D{k+1}" + (f"^{m}" if m > 1 else "")
                for k, m in enumerate(e)
                if m
            )
            bits.append(f"{rat_str(c)}*{mono}" if mono else rat_str(c))
        return " + ".join(bits).replace("+ -", "- ")


def _row_reduce(rows):
    """Exact RREF over the rationals; rows are coefficient lists."""
    rows = [list(r) for r in rows]
    ncols = len(rows[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = rat(1) / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _primitive(row):
    """Scale a rational vector to a primitive integer vector, leading > 0."""
    den = 1
    for x in row:
        if x:
            den = den * int(x.denominator) // math.gcd(den, int(x.denominator))
    ints = [int(x * den) for x in row]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g:
        ints = [v // g for v in ints]
    lead = next((v for v in ints if v), 1)
    if lead < 0:
        ints = [-v for v in ints]
    return [rat(v) for v in ints]


def generate_kp_equations(max_weight: int) -> list[HirotaOperator]:
    """Independent KP Hirota equations of weight <= max_weight.

    Extracts the coefficient of each y-monomial from the bilinear
    identity, keeps the even-degree part (odd parts act trivially on
    tau.tau), and row-reduces each weight block to a canonical basis of
    primitive integer operators.
    """
    if max_weight < 2:
        return []
    ycap = max_weight - 1
    yv = tuple(f"y{k}" for k in range(1, ycap + 1))
    dv = tuple(f"d{k}" for k in range(1, max_weight + 1))
    union = yv + dv
    yw = {f"y{k}": k for k in range(1, ycap + 1)}

    def yarg(k):
        if k > ycap:
            return None
        return MultiPoly.gen(union, f"y{k}").map_coeffs(lambda c: c * rat(-2))

    def darg(k):
        return MultiPoly.gen(union, f"d{k}").map_coeffs(lambda c: c * rat(1, k))

    sy = schur_S(ycap, union, yarg)
    sd = schur_S(max_weight, union, darg)
    cross = MultiPoly.zero(union)
    for k in range(1, ycap + 1):
        cross = cross + MultiPoly.gen(union, f"y{k}") * MultiPoly.gen(union, f"d{k}")
    exp_yd = cross.exp_truncated(yw, ycap)
    total = MultiPoly.zero(union)
    for j in range(ycap + 1):
        total = total + sy[j].mul_truncated(sd[j + 1], yw, ycap).mul_truncated(
            exp_yd, yw, ycap
        )

    ny = len(yv)
    blocks: dict[int, dict] = {}
    for e, c in total.terms.items():
        ye, de = e[:ny], e[ny:]
        dweight = sum((k + 1) * m for k, m in enumerate(de))
        if sum(de) % 2:
            continue  # odd part annihilates tau.tau
        blocks.setdefault(dweight, {}).setdefault(ye, {})[de] = c

    equations = []
    for w in sorted(blocks):
        if w > max_weight:
            continue
        monos = sorted({de for ops in blocks[w].values() for de in ops}, reverse=True)
        col = {de: i for i, de in enumerate(monos)}
        rows = []
        for ops in blocks[w].values():
            row = [rat(0)] * len(monos)
            for de, c in ops.items():
                row[col[de]] = c
            rows.append(row)
        reduced, _ = _row_reduce(rows)
        for row in reduced:
            row = _primitive(row)
            terms = {monos[i]: c for i, c in enumerate(row) if c}
            if terms:
                equations.append(HirotaOperator(terms, w))
    return equations


# -- applying operators ------------------------------------------------


def hirota_apply(P: HirotaOperator, f: MultiPoly, g: MultiPoly,
                 weights=None, wcap=None, hicaps=None) -> MultiPoly:
    """P(D) f.g = P(d/da) f(t+a) g(t-a) at a = 0, on polynomials in t_k.

    Variables other than t1, t2, ... (the genus parameter h) ride along
    untouched.  Factor derivatives are truncated to the target window
    before multiplying; the result is only meaningful there anyway.
    """
    nd = max((len(e) for e in P.terms), default=0)
    names = [f"t{k}" for k in range(1, nd + 1)]
    union = list(f.vars)
    for v in list(g.vars) + names:
        if v not in union:
            union.append(v)
    union = tuple(union)
    fa = f.with_vars(union)
    ga = g.with_vars(union)
    share = fa.terms == ga.terms

    def window(poly):
        if weights is None and hicaps is None:
            return poly
        return poly.truncate(weights or {}, wcap, hicaps=hicaps)

    # cache exact derivatives: d/dt_k lowers weight by k, so truncating a
    # cached derivative would lose in-window terms of later derivatives
    dcache_f: dict = {(): fa}
    dcache_g = dcache_f if share else {(): ga}

    def dpoly(cache, beta):
        got = cache.get(beta)
        if got is not None:
            return got
        # peel one derivative off the last nonzero slot
        i = max(j for j, b in enumerate(beta) if b)
        prev = beta[:i] + (beta[i] - 1,) + beta[i + 1 :]
        prev = tuple(prev[: max((j + 1 for j, b in enumerate(prev) if b), default=0)])
        out = dpoly(cache, prev).deriv(f"t{i + 1}")
        cache[beta] = out
        return out

    acc = MultiPoly.zero(union)
    for alpha, coeff in P.terms.items():
        betas = [range(a + 1) for a in alpha]
        stack = [()]
        for r in betas:
            stack = [b + (x,) for b in stack for x in r]
        for beta in stack:
            sign = 1
            mult = 1
            for a, b in zip(alpha, beta):
                mult *= math.comb(a, b)
                if (a - b) % 2:
                    sign = -sign
            left = window(dpoly(dcache_f, tuple(beta[: _trimlen(beta)])))
            gamma = tuple(a - b for a, b in zip(alpha, beta))
            right = window(dpoly(dcache_g, gamma[: _trimlen(gamma)]))
            prod = left.mul_truncated(right, weights or {}, wcap, hicaps=hicaps)
            c = coeff * (mult * sign)
            acc = acc + prod.map_coeffs(lambda x, c=c: x * c)
    return acc


def _trimlen(t):
    n = len(t)
    while n and not t[n - 1]:
        n -= 1
    return n


# -- the decision procedure --------------------------------------------


class EquationResult:
    def __init__(self, op: HirotaOperator, window_p: int, window_h: int,
                 residual: MultiPoly | None, status: str):
        self.op = op
        self.window_p = window_p
        self.window_h = window_h
        self.residual = residual
        self.status = status

    def line(self) -> str:
        head = f"weight {self.op.weight:2d}  window p<={self.window_p} h<={self.window_h}  {self.status}"
        if self.status == "FAIL":
            head += f"  residual {render_poly(self.residual)}"
        return head


class HirotaReport:
    def __init__(self, results: list[EquationResult], mode: str = "hirota"):
        self.results = results
        self.mode = mode

    @property
    def verdict(self) -> str:
        if any(r.status == "FAIL" for r in self.results):
            return "FAIL"
        if all(r.status == "INCONCLUSIVE" for r in self.results):
            return "INCONCLUSIVE"
        return "PASS"

    def lines(self):
        out = [f"kp-check mode={self.mode} verdict={self.verdict}"]
        out.extend(r.line() for r in self.results)
        return out

    def __repr__(self):
        return "\n".join(self.lines())


def render_poly(poly: MultiPoly) -> str:
    if poly is None or poly.is_zero():
        return "0"
    bits = []
    for e in sorted(poly.terms, reverse=True):
        c = poly.terms[e]
        mono = "*".join(
            f"{v}" + (f"^{m}" if m > 1 else "")
            for v, m in zip(poly.vars, e)
            if m
        )
        bits.append(f"{rat_str(c)}*{mono}" if mono else rat_str(c))
    return " + ".join(bits).replace("+ -", "- ")


def tau_times_poly(tau) -> MultiPoly:
    """Tau as a polynomial in Miwa times t_k = p_k/k (h untouched)."""
    poly = tau.poly
    for v in poly.vars:
        if v.startswith("p"):
            k = int(v[1:])
            poly = poly.scale_var(v, rat(k))
    return poly.rename_vars({v: "t" + v[1:] for v in poly.vars if v.startswith("p")})


def kp_check(tau, max_weight: int = 8, max_hbar: int | None = None,
             mode: str = "hirota") -> HirotaReport:
    """Hirota residual test of a TruncatedTau within its certified windows.

    Partition functions arrive with constant term 1; polynomial tau
    functions (Schur) with constant term 0 are equally testable, so no
    normalization is imposed here.
    """
    if mode == "pluecker":
        return pluecker_check(tau)
    f = tau_times_poly(tau)
    hwin = tau.hcap if max_hbar is None else min(max_hbar, tau.hcap)
    tweights = {v: int(v[1:]) for v in f.vars if v.startswith("t")}
    results = []
    for op in generate_kp_equations(max_weight):
        wp = tau.pcap - op.weight
        if wp < 0:
            results.append(EquationResult(op, wp, hwin, None, "INCONCLUSIVE"))
            continue
        res = hirota_apply(op, f, f, weights=tweights, wcap=wp, hicaps={"h": hwin})
        res = res.truncate(tweights, wp, hicaps={"h": hwin})
        status = "PASS" if res.is_zero() else "FAIL"
        results.append(EquationResult(op, wp, hwin, res, status))
    return HirotaReport(results, mode="hirota")


def invariance_test(curve, point_a, point_b, max_n=6, max_k=6, max_g=2,
                    max_weight=6, max_hbar=None):
    """Theorem-level consistency: two regular points must agree on the verdict."""
    from .expansion import partition_function, potential
    from .recursion import Engine

    engine = Engine(curve) if not isinstance(curve, Engine) else curve
    reports = []
    for pt in (point_a, point_b):
        F = potential(engine, pt, max_n=max_n, max_k=max_k, max_g=max_g)
        Z = partition_function(F)
        reports.append(kp_check(Z, max_weight=max_weight, max_hbar=max_hbar))
    if reports[0].verdict != reports[1].verdict:
        raise InvarianceViolation(
            f"verdicts differ: {reports[0].verdict} vs {reports[1].verdict}"
        )
    return reports


# -- Pluecker cross-check ----------------------------------------------


def _zmu(e) -> int:
    """z_mu = prod k^{m_k} m_k! for the p-exponent tuple e."""
    z = 1
    for k, m in enumerate(e, start=1):
        if m:
            z *= k**m * math.factorial(m)
    return z


def schur_coefficients(tau, budget: int):
    """Hall-pairing coefficients c_lambda(h) = <tau, s_lambda>, |lambda| <= budget."""
    poly = tau.poly
    pv = [v for v in poly.vars if v.startswith("p")]
    pidx = {int(v[1:]): poly.vars.index(v) for v in pv}
    try:
        hpos = poly.vars.index("h")
    except ValueError:
        hpos = None
    coeffs = {}
    basis = schur_in_p(max(budget, 1))
    for lam in _partitions_upto(budget):
        s = _schur_poly_from_basis(lam, basis)
        acc = {}
        for e, c in s.terms.items():
            # match the p-monomial of s_lambda inside tau
            target = {k: e[k - 1] for k in range(1, len(e) + 1) if e[k - 1]}
            for te, tc in poly.terms.items():
                ok = all(
                    te[pidx[k]] == m if k in pidx else m == 0
                    for k, m in target.items()
                )
                if not ok:
                    continue
                extra = sum(
                    te[poly.vars.index(v)]
                    for v in pv
                    if int(v[1:]) not in target and te[poly.vars.index(v)]
                )
                if extra:
                    continue
                h = te[hpos] if hpos is not None else 0
                val = tc * c * _zmu(e)
                acc[h] = acc.get(h, rat(0)) + val
        coeffs[lam] = {h: v for h, v in acc.items() if v}
    return coeffs


def _schur_poly_from_basis(lam, basis):
    zero = MultiPoly.zero(basis[0].vars)
    if not lam:
        return MultiPoly.const(basis[0].vars, rat(1))
    ell = len(lam)
    rows = []
    for i in range(1, ell + 1):
        row = []
        for j in range(1, ell + 1):
            d = lam[i - 1] - i + j
            row.append(basis[d] if 0 <= d < len(basis) else zero)
        rows.append(row)
    return _det(rows)


def _partitions_upto(budget: int):
    out = [()]
    def rec(rest, maxpart, cur):
        for part in range(min(rest, maxpart), 0, -1):
            nxt = cur + (part,)
            out.append(nxt)
            rec(rest - part, part, nxt)
    rec(budget, budget, ())
    return out


def pluecker_check(tau, budget: int | None = None) -> HirotaReport:
    """Three-term Pluecker relations on the Schur coefficients of tau.

    Maya encoding: a partition with at most m rows inside an m x m box
    maps to the m-subset {lambda_i + m - i} of positions [0, 2m).  In
    sorted-subset coordinates the interleaving signs of the classical
    exchange relation cancel, leaving

        c(S+ab) c(S+cd) - c(S+ac) c(S+bd) + c(S+ad) c(S+bc) = 0

    for every (m-2)-subset S and a < b < c < d outside it.  Relations
    are weight-homogeneous, so every one with total weight <= budget
    only touches certified coefficients.
    """
    budget = min(budget if budget is not None else tau.pcap, tau.pcap)
    m = max(budget, 2)
    npos = 2 * m
    base = m * (m - 1) // 2
    coeffs = schur_coefficients(tau, budget)
    hcap = tau.hcap

    def cof(positions):
        rs = sorted(positions, reverse=True)
        lam = tuple(r - (m - 1 - i) for i, r in enumerate(rs))
        lam = tuple(x for x in lam if x)
        if any(x < 0 for x in lam):
            return None
        return coeffs.get(lam, {})

    def mulh(a, b):
        out = {}
        for ha, va in a.items():
            for hb, vb in b.items():
                h = ha + hb
                if h > hcap:
                    continue
                out[h] = out.get(h, rat(0)) + va * vb
        return {h: v for h, v in out.items() if v}

    checked = 0
    bad = None

    def min_tail(start, k):
        # k smallest positions at or above start
        return k * start + k * (k - 1) // 2

    def subsets(prefix, cur_sum, start, slots):
        # grow s0 keeping the cheapest completion inside the budget
        if slots == 0:
            yield tuple(prefix), cur_sum
            return
        p = start
        while p + slots + 4 <= npos:
            bound = (2 * (cur_sum + p + min_tail(p + 1, slots - 1))
                     + min_tail(p + slots, 4) - 2 * base)
            if bound > budget:
                break
            prefix.append(p)
            yield from subsets(prefix, cur_sum + p, p + 1, slots - 1)
            prefix.pop()
            p += 1

    for s0, s0_sum in subsets([], 0, 0, m - 2):
        rest = [p for p in range(npos) if p not in s0]
        for a, b, c, d in combinations(rest, 4):
            total = 2 * s0_sum + a + b + c + d - 2 * base
            if total > budget:
                continue
            terms = []
            for (x, y), (u, v), sign in (
                ((a, b), (c, d), 1),
                ((a, c), (b, d), -1),
                ((a, d), (b, c), 1),
            ):
                ca = cof(s0 + (x, y))
                cb = cof(s0 + (u, v))
                if ca is None or cb is None:
                    ca, cb = {}, {}
                prod = mulh(ca, cb)
                terms.append((sign, prod))
            acc: dict = {}
            for sign, prod in terms:
                for h, v in prod.items():
                    acc[h] = acc.get(h, rat(0)) + (v if sign > 0 else -v)
            acc = {h: v for h, v in acc.items() if v}
            checked += 1
            if acc and bad is None:
                bad = (s0, (a, b, c, d), acc)
    op = HirotaOperator({}, 0)
    if checked == 0:
        status = "INCONCLUSIVE"
    elif bad is None:
        status = "PASS"
    else:
        status = "FAIL"
    residual = None
    if bad is not None:
        names = ("h",)
        residual = MultiPoly(names, {(h,): v for h, v in bad[2].items()})
    result = EquationResult(op, budget, hcap, residual, status)
    return HirotaReport([result], mode="pluecker")
