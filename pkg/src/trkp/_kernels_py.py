"""Pure-Python twins of the compiled kernels.

Semantics here are the reference; `_kernels.pyx` must match them exactly.
Coefficients are opaque exact scalars: anything supporting +, *, and truth
testing (nonzero test). No floats enter these loops.
"""

from __future__ import annotations


def conv_slice(a, b, lo, hi):
    """Coefficients [lo, hi) of the product of two dense coefficient lists.

    a[i], b[j] are the coefficients of t^i, t^j; returns c with c[k - lo]
    the coefficient of t^k. Out-of-range indices read as zero.
    """
    la, lb = len(a), len(b)
    out = []
    for k in range(lo, hi):
        acc = 0
        imin = k - (lb - 1)
        if imin < 0:
            imin = 0
        imax = k if k < la - 1 else la - 1
        for i in range(imin, imax + 1):
            ai = a[i]
            if ai:
                bj = b[k - i]
                if bj:
                    acc = acc + ai * bj
        out.append(acc)
    return out


def dict_mul(A, B, weights, wcap, locaps, hicaps):
    """Sparse product of exponent-tuple dicts with truncation filters.

    weights: per-variable integer weights (0 for unweighted variables);
    wcap: bound on sum(weights[i]*e[i]), or None;
    locaps/hicaps: per-variable exponent bounds, entries may be None.
    Monomials violating any bound are dropped, not folded.
    """
    n = len(weights)
    out = {}
    for ea, ca in A.items():
        if not ca:
            continue
        for eb, cb in B.items():
            if not cb:
                continue
            e = tuple(ea[i] + eb[i] for i in range(n))
            if wcap is not None:
                w = 0
                for i in range(n):
                    wi = weights[i]
                    if wi:
                        w += wi * e[i]
                if w > wcap:
                    continue
            ok = True
            for i in range(n):
                lo = locaps[i]
                if lo is not None and e[i] < lo:
                    ok = False
                    break
                hi = hicaps[i]
                if hi is not None and e[i] > hi:
                    ok = False
                    break
            if not ok:
                continue
            c = ca * cb
            prev = out.get(e)
            if prev is None:
                out[e] = c
            else:
                s = prev + c
                if s:
                    out[e] = s
                else:
                    del out[e]
    return out
