"""Curves x = log z - z^r, y = z^s and their expansions at the origin.

x itself diverges at z = 0, but X = exp(x) = z exp(-z^r) is an honest
power series with X'(0) = 1, so the origin is a regular expansion point
in the coordinate X.  Correlation differentials expand there as

    omega(g, n) = d_1 ... d_n sum_mu f^(g)_mu prod_j X_j^(mu_j)

and this module extracts the profile coefficients f^(g)_mu, checks the
divisibility constraint r | (2g-2+n)s + sum(mu) that forces most of them
to vanish, and assembles the partition function handed to the KP tests.

For (g, n) = (0, 3) the coefficient collapses to a closed form,

    f_mu = r^((s + sum mu)/r) / s
           * prod_j (mu_j/r)^floor(mu_j/r) / floor(mu_j/r)!

(zero when the exponent is not an integer), which gives an oracle for
the recursion output that shares no code with it.
"""

from __future__ import annotations

import math
from typing import NamedTuple

from .curves import SpectralCurve
from .expansion import ExpansionPoint, expand_at, partition_function, potential
from .ratfun import RationalFunction
from .recursion import Engine
from .scalars import rat
from .series import TruncSeries

_Z = RationalFunction.var()


def build_roots_curve(r: int, s: int) -> SpectralCurve:
    """The curve x = log z - z^r, y = z^s on the z-line.

    dx = ((1 - r z^r)/z) dz, so the ramification points are the r-th
    roots of 1/r; for r = 1 that is the single rational point z = 1.
    """
    if r < 1 or s < 1:
        raise ValueError("need integers r, s >= 1")
    return SpectralCurve(
        x_rat=-(_Z ** r),
        x_log=((rat(1), rat(0)),),
        y=_Z ** s,
        name=f"roots-r{r}-s{s}",
    )


def x_series(r: int, order: int) -> TruncSeries:
    """X(z) = z exp(-z^r) as a series in z with the given window."""
    t = TruncSeries.var(order + 1)
    return (t * (-(t ** r)).exp()).truncate(order)


def x_point(r: int, order: int) -> ExpansionPoint:
    """Expansion point at the origin in the coordinate X."""
    return ExpansionPoint(rat(0), xi=x_series(r, order))


def curve_params(curve: SpectralCurve) -> tuple[int, int]:
    """Recover (r, s) from a curve produced by build_roots_curve."""
    bad = ValueError(f"{curve.name}: not a roots curve")
    if curve.x_log != ((rat(1), rat(0)),) or curve.x_rat is None:
        raise bad
    if curve.y is None or curve.y.den != [rat(1)] or curve.x_rat.den != [rat(1)]:
        raise bad
    xr, yn = curve.x_rat.num, curve.y.num
    r, s = len(xr) - 1, len(yn) - 1
    if xr != [rat(0)] * r + [rat(-1)] or yn != [rat(0)] * s + [rat(1)]:
        raise bad
    return r, s


class ProfileCoefficient(NamedTuple):
    g: int
    mu: tuple
    value: object

    def line(self) -> str:
        tag = "" if self.value else "   (excluded)"
        return f"g={self.g} mu={','.join(map(str, self.mu))} -> {self.value}{tag}"


def admissible(r: int, s: int, g: int, mu: tuple) -> bool:
    """Divisibility constraint: r | (2g-2+n)s + sum(mu)."""
    return ((2 * g - 2 + len(mu)) * s + sum(mu)) % r == 0


def three_point_coefficient(r: int, s: int, mu: tuple):
    """Closed form for the genus-zero three-point profile coefficients.

    The underlying moduli integral is over a zero-dimensional space; it
    contributes the degree of the covering that forgets the r-th root
    structure, which in genus zero is 1/r (one root, mu_r automorphisms).
    The rest is elementary.
    """
    if len(mu) != 3 or any(m < 1 for m in mu):
        raise ValueError("profile must be three positive integers")
    if not admissible(r, s, 0, mu):
        return rat(0)
    v = rat(r) ** ((s + sum(mu)) // r) / rat(s)
    for m in mu:
        fl = m // r
        v = v * rat(m, r) ** fl / rat(math.factorial(fl))
    return v


def _profiles(n: int, budget: int):
    """Nondecreasing tuples (mu_1 <= ... <= mu_n) with entries in 1..budget."""
    def rec(depth, lo, prefix):
        if depth == n:
            yield tuple(prefix)
            return
        for m in range(lo, budget + 1):
            prefix.append(m)
            yield from rec(depth + 1, m, prefix)
            prefix.pop()

    yield from rec(0, 1, [])


def expand_in_X(source, g: int, n: int, mu_budget: int) -> list[ProfileCoefficient]:
    """Profile coefficients of omega(g, n), one row per nondecreasing profile.

    Rows with value 0 are kept: the excluded profiles are part of the
    statement being tested.
    """
    engine = source if isinstance(source, Engine) else Engine(source)
    r, _ = curve_params(engine.curve)
    om = engine.omega(g, n)
    point = x_point(r, mu_budget + 4)
    coeffs = expand_at(om, engine.curve, point, mu_budget)
    return [
        ProfileCoefficient(g, mu, coeffs.get(mu, rat(0)))
        for mu in _profiles(n, mu_budget)
    ]


def roots_partition_function(r: int, s: int, degree_budget: int,
                             hbar_budget: int):
    """Partition function of the (r, s) curve.

    Certified windows: total p-weight <= degree_budget and hbar exponent
    <= hbar_budget (the latter also clipped by what the p-window can
    support).  The (0, 2) term is the regular part of the Bergman kernel
    in the coordinate X, computed by the expansion module.
    """
    curve = build_roots_curve(r, s)
    # expand_pair_part reads the coordinate out to 2*max_k + 2
    point = x_point(r, 2 * degree_budget + 4)
    F = potential(curve, point, max_n=degree_budget, max_k=degree_budget,
                  max_g=(hbar_budget + 1) // 2, max_euler=hbar_budget)
    return partition_function(F)
