"""Curves x = log z - z^r, y = z^s: profile coefficients and tau function.

Two independent oracles pin the frozen values.  The (0, 3) coefficients
at (r, s) = (2, 1) were computed from the genus-zero three-point residue
formula (sum over the two ramification points, trivariate primitive
re-expanded in X = z exp(-z^2)): 4, 12, 32 for mu = (1,1,1), (1,1,3),
(1,2,4).  The r = 1 pair-part coefficients come from the tree function
S(X) = sum n^(n-1)/n! X^n: log((S(u)-S(v))/(u-v)) has coefficients
1/2, 2/3, 1, 9/8 at (1,1), (1,2), (2,2), (1,3).
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trkp.curves import airy_curve
from trkp.expansion import expand_pair_part
from trkp.hirota import kp_check
from trkp.multipoly import MultiPoly
from trkp.recursion import Engine
from trkp.roots import (ProfileCoefficient, admissible, build_roots_curve,
                        curve_params, expand_in_X, roots_partition_function,
                        three_point_coefficient, x_point, x_series)
from trkp.scalars import rat

ALL_RS = [(1, 1), (1, 2), (2, 1), (2, 2)]


# -- curve construction -------------------------------------------------


def test_x_series_r1_frozen():
    # z e^{-z} = z - z^2 + z^3/2 - z^4/6 + ...
    xs = x_series(1, 6)
    assert [xs.coeff(i) for i in range(5)] == [0, 1, rat(-1), rat(1, 2), rat(-1, 6)]


def test_x_series_is_a_coordinate():
    for r in (1, 2, 3):
        xs = x_series(r, 8)
        assert xs.low == 1 and xs.coeff(1) == 1


def test_r1_single_rational_ramification():
    c = build_roots_curve(1, 1)
    assert [p.location for p in c.ram] == [rat(1)]
    assert c.ram_field is None


def test_r2_ramification_modulus():
    # roots of 1 - 2z^2, i.e. z^2 - 1/2 after normalization
    c = build_roots_curve(2, 1)
    assert c.modulus == [rat(-1, 2), rat(0), rat(1)]
    assert c.n_ram() == 2
    assert c.ram_field is not None


def test_build_rejects_nonpositive_params():
    with pytest.raises(ValueError):
        build_roots_curve(0, 1)
    with pytest.raises(ValueError):
        build_roots_curve(1, -2)


@given(r=st.integers(1, 4), s=st.integers(1, 4))
@settings(max_examples=16, deadline=None)
def test_curve_params_roundtrip(r, s):
    assert curve_params(build_roots_curve(r, s)) == (r, s)


def test_curve_params_rejects_other_curves():
    with pytest.raises(ValueError):
        curve_params(airy_curve())


# -- closed form and admissibility --------------------------------------


def test_three_point_frozen_values():
    # residue-formula oracle at (r,s) = (2,1)
    assert three_point_coefficient(2, 1, (1, 1, 1)) == 4
    assert three_point_coefficient(2, 1, (1, 1, 3)) == 12
    assert three_point_coefficient(2, 1, (1, 2, 4)) == 32
    assert three_point_coefficient(1, 1, (1, 1, 1)) == 1
    # (1 + 4)/2 not an integer: excluded profile
    assert three_point_coefficient(2, 1, (1, 1, 2)) == 0


def test_three_point_input_guards():
    with pytest.raises(ValueError):
        three_point_coefficient(2, 1, (1, 1))
    with pytest.raises(ValueError):
        three_point_coefficient(2, 1, (1, 1, 0))


def test_admissible_truth_table():
    assert admissible(2, 1, 0, (1, 1, 1))
    assert not admissible(2, 1, 0, (1, 1, 2))
    assert admissible(2, 2, 1, (1, 1))  # (2g-2+n)s + sum = 4 + 2
    assert not admissible(3, 1, 0, (1, 1, 1))


@given(s=st.integers(1, 5), g=st.integers(0, 3),
       mu=st.lists(st.integers(1, 9), min_size=1, max_size=4))
@settings(max_examples=40, deadline=None)
def test_everything_admissible_at_r1(s, g, mu):
    assert admissible(1, s, g, tuple(mu))


# -- TR expansion vs closed form -----------------------------------------


@pytest.mark.parametrize("r,s", ALL_RS)
def test_expansion_matches_three_point_closed_form(r, s):
    rows = expand_in_X(build_roots_curve(r, s), 0, 3, 4)
    assert len(rows) == 20  # nondecreasing profiles in {1..4}^3
    for row in rows:
        assert row.value == three_point_coefficient(r, s, row.mu), row


@pytest.mark.parametrize("r,s", [(2, 1), (2, 2)])
def test_admissibility_vanishing_in_stable_range(r, s):
    engine = Engine(build_roots_curve(r, s))
    for g, n in [(0, 3), (1, 1), (0, 4), (1, 2)]:
        for row in expand_in_X(engine, g, n, 6):
            if not admissible(r, s, g, row.mu):
                assert row.value == 0, (g, n, row)


def test_excluded_rows_are_reported():
    rows = expand_in_X(build_roots_curve(2, 1), 0, 3, 3)
    zero = [r for r in rows if r.value == 0]
    assert zero and all(not admissible(2, 1, 0, r.mu) for r in zero)
    assert "(excluded)" in zero[0].line()
    assert "(excluded)" not in ProfileCoefficient(0, (1, 1, 1), rat(4)).line()


def test_expand_accepts_engine_or_curve():
    curve = build_roots_curve(1, 1)
    a = expand_in_X(curve, 1, 1, 3)
    b = expand_in_X(Engine(curve), 1, 1, 3)
    assert a == b


# -- pair part in the X coordinate ---------------------------------------


def test_pair_part_r1_frozen():
    # tree-function oracle
    pp = expand_pair_part(x_point(1, 12), 3)
    assert pp[(1, 1)] == rat(1, 2)
    assert pp[(1, 2)] == rat(2, 3) == pp[(2, 1)]
    assert pp[(2, 2)] == 1
    assert pp[(1, 3)] == rat(9, 8)


@pytest.mark.parametrize("r", [1, 2])
def test_pair_part_is_regular_part_of_bergman(r):
    # d_u d_v of the pair part must equal S'(u)S'(v)/(S(u)-S(v))^2 - 1/(u-v)^2
    # with S = z(X); multiply through by (u-v)^2 and compare on the box.
    K = 4
    point = x_point(r, 4 * K)
    s, ds = point.coordinate_series(2 * K + 4)
    pp = expand_pair_part(point, K + 1)
    caps = {"u": K + 2, "v": K + 2}
    u = MultiPoly.gen(("u", "v"), "u")
    v = MultiPoly.gen(("u", "v"), "v")

    def bivar(f):
        # f(w) -> f(u), f(v) as box polynomials
        fu = MultiPoly(("u", "v"), {(m, 0): f.coeff(m) for m in range(f.order)})
        return fu, fu.rename_vars({"u": "v", "v": "u"}).with_vars(("u", "v"))

    su, sv = bivar(s)
    dsu, dsv = bivar(ds)
    # divided difference (S(u) - S(v))/(u - v), constant term 1
    dd = MultiPoly(("u", "v"), {
        (a, m - 1 - a): s.coeff(m)
        for m in range(1, 2 * K + 4) for a in range(m)
    })
    inv2 = (rat(-2) * dd.log_truncated({}, None, hicaps=caps)) \
        .exp_truncated({}, None, hicaps=caps)
    rhs = (dsu * dsv).truncate({}, None, hicaps=caps) * inv2 - 1
    lhs = MultiPoly(("u", "v"), {
        (a - 1, b - 1): rat(a * b) * c for (a, b), c in pp.items()
    })
    diff = rhs - (u - v) * (u - v) * lhs
    for (a, b), c in diff.terms.items():
        if a <= K - 1 and b <= K - 1:
            assert not c, (a, b, c)


# -- partition function ---------------------------------------------------


def test_partition_function_windows():
    Z = roots_partition_function(1, 1, 4, 2)
    assert (Z.pcap, Z.hcap) == (4, 2)
    assert Z.coeff(0, {}) == 1


def test_hbar_zero_is_pair_exponential():
    Z = roots_partition_function(1, 1, 4, 0)
    assert Z.hcap == 0
    pp = expand_pair_part(x_point(1, 12), 4)
    assert Z.coeff(0, {1: 1, 3: 1}) == pp[(1, 3)] == rat(9, 8)
    assert Z.coeff(0, {2: 2}) == pp[(2, 2)] / 2 == rat(1, 2)
    assert Z.coeff(0, {1: 2}) == pp[(1, 1)] / 2
    # three p's cannot form from two-index pair terms; four can
    assert Z.coeff(0, {1: 2, 2: 1}) == 0
    assert Z.coeff(0, {1: 4}) == (pp[(1, 1)] / 2) ** 2 / 2


def test_exponent_carries_three_point_term():
    from trkp.expansion import potential
    curve = build_roots_curve(2, 1)
    F = potential(curve, x_point(2, 16), max_n=3, max_k=3, max_g=0)
    assert F.coeff(0, (1, 1, 1)) == 4


@pytest.mark.parametrize("r,s", [(1, 1), (1, 2)])
def test_kp_check_passes_small_budget(r, s):
    Z = roots_partition_function(r, s, 4, 2)
    assert kp_check(Z, max_weight=4).verdict == "PASS"


def test_kp_check_passes_r2_small_budget():
    Z = roots_partition_function(2, 1, 4, 2)
    assert kp_check(Z, max_weight=4).verdict == "PASS"
