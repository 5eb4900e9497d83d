# cython: language_level=3
"""Compiled twins of `_kernels_py`. Coefficient arithmetic stays on exact
Python objects; only loop and indexing overhead moves to C."""


def conv_slice(list a, list b, Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef Py_ssize_t k, i, imin, imax
    cdef object acc, ai, bj
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


def dict_mul(dict A, dict B, tuple weights, wcap, tuple locaps, tuple hicaps):
    cdef Py_ssize_t n = len(weights)
    cdef Py_ssize_t i
    cdef long w, wi
    cdef bint ok, use_wcap
    cdef long wcap_l = 0
    cdef object ca, cb, c, prev, s, lo, hi
    cdef tuple ea, eb, e
    use_wcap = wcap is not None
    if use_wcap:
        wcap_l = wcap
    out = {}
    for ea, ca in A.items():
        if not ca:
            continue
        for eb, cb in B.items():
            if not cb:
                continue
            e = tuple([ea[i] + eb[i] for i in range(n)])
            if use_wcap:
                w = 0
                for i in range(n):
                    wi = weights[i]
                    if wi:
                        w += wi * <long> e[i]
                if w > wcap_l:
                    continue
            ok = True
            for i in range(n):
                lo = locaps[i]
                if lo is not None and <long> e[i] < <long> lo:
                    ok = False
                    break
                hi = hicaps[i]
                if hi is not None and <long> e[i] > <long> hi:
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
