"""Deformation flows against exact dual-number derivatives.

The y-flow comparisons are entry-wise on the pole-basis tensors (x fixed
means the basis does not move). The joint-flow comparisons evaluate both
sides at rational probe tuples, because there the ramification points
carry the basis with them. The moving-q family below is a translated Airy
curve, which gives one closed-form oracle no residue code touches:
omega(1,1) along x = z^2/2 + tau z is dz / (8 (z + tau)^4), so its
tau-derivative at 0 is -dz / (2 z^5).
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trkp.deform import (CurveFamily, FamilyDegenerate, flow_check,
                         omega_dual_eval, omega_stable2, omega_tau_derivative,
                         rhs_var_y, rhs_xy, xy_check)
from trkp.ratfun import RationalFunction
from trkp.recursion import Engine, eval_tensor
from trkp.scalars import rat

Z = RationalFunction.var()


def c(v):
    return RationalFunction.const(rat(v))


def airy_y_family():
    """x = z^2/2 fixed, y = -z + tau z^3."""
    return CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, Z ** 3))


def xy_family():
    """x = z^2/2 + tau z^3/3, y = -z: dx grows an extra zero at -1/tau."""
    return CurveFamily(x_tau=(Z * Z / 2, Z ** 3 / 3), y_tau=(-Z,))


def roots2_y_family():
    """x = log z - z^2 fixed, y = z + tau z^3; ramification in Q(sqrt 2)."""
    return CurveFamily(x_tau=(-Z * Z,), y_tau=(Z, Z ** 3),
                       x_log=((rat(1), rat(0)),))


# -- family plumbing -------------------------------------------------------


def test_fixed_x_flag():
    assert airy_y_family().fixed_x
    assert not xy_family().fixed_x


def test_curve_at_evaluates_tau_polynomials():
    fam = xy_family()
    cv = fam.curve_at(rat(3))
    assert cv.dx == Z + c(3) * Z * Z
    assert cv.y == -Z


@settings(max_examples=20, deadline=None)
@given(a=st.fractions(min_value=-3, max_value=3, max_denominator=4),
       b=st.fractions(min_value=-3, max_value=3, max_denominator=4))
def test_rebase_composes(a, b):
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, Z ** 3, Z * Z))
    once = fam.rebase(rat(a) + rat(b))
    twice = fam.rebase(rat(a)).rebase(rat(b))
    assert [f == g for f, g in zip(once.y_tau, twice.y_tau)] == [True] * 3


def test_dual_curve_carries_first_derivative():
    dual = airy_y_family().dual_curve()
    ys = dual.y.local_expand(rat(0), 5)
    # y(eps) = -z + eps z^3: the eps parts sit in the t^3 slot
    assert ys.coeff(1).a == -1 and not ys.coeff(1).b
    assert not ys.coeff(3).a and ys.coeff(3).b == 1


# -- y-flow ----------------------------------------------------------------


def test_airy_genus_one_flow_frozen():
    # residue side by hand: Lambda = int z^3 dx = z^5/5, and the only
    # omega(1,2) entry reaching t^4 is the (2,6) pair with weight 5/8
    got = rhs_var_y(airy_y_family(), 1, 1)
    assert got.entries == {((0, 2),): rat(1, 8)}


def test_airy_trifold_flow_vanishes():
    # Lambda starts at t^5 while omega(0,4) poles stop at order 4
    assert rhs_var_y(airy_y_family(), 0, 3).is_zero()


AIRY_PAIRS = [(0, 3), (1, 1), (0, 4), (1, 2), (0, 5), (1, 3), (2, 1)]


@pytest.mark.parametrize("g,n", AIRY_PAIRS)
def test_y_flow_matches_dual_derivative(g, n):
    fam = airy_y_family()
    assert rhs_var_y(fam, g, n) == omega_tau_derivative(fam, g, n)


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1)])
def test_y_flow_over_quadratic_field(g, n):
    fam = roots2_y_family()
    assert rhs_var_y(fam, g, n) == omega_tau_derivative(fam, g, n)


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (1, 2)])
def test_constant_shift_flow_vanishes(g, n):
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, c(5)))
    assert rhs_var_y(fam, g, n).is_zero()
    assert omega_tau_derivative(fam, g, n).is_zero()


def test_tau_independent_family_vanishes():
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z,))
    assert rhs_var_y(fam, 1, 1).is_zero()
    assert omega_tau_derivative(fam, 1, 1).is_zero()


def test_singular_dy_raises():
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, Z.inverse()))
    with pytest.raises(FamilyDegenerate):
        rhs_var_y(fam, 1, 1)


def test_y_flow_requires_fixed_x():
    with pytest.raises(ValueError):
        rhs_var_y(xy_family(), 1, 1)


@pytest.mark.parametrize("g,n", [(0, 1), (0, 2), (1, 0)])
def test_unstable_pairs_rejected(g, n):
    with pytest.raises(ValueError):
        rhs_var_y(airy_y_family(), g, n)


# -- joint flow ------------------------------------------------------------


def test_xy_genus_one_flow_frozen():
    assert rhs_xy(xy_family(), 1, 1).entries == {((0, 3),): rat(-1, 12)}


def test_xy_trifold_flow_vanishes():
    # x''(0) and y'(0) do not move at first order, so omega(0,3) is flat
    assert rhs_xy(xy_family(), 0, 3).is_zero()


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (0, 4), (1, 2)])
def test_xy_flow_matches_dual_at_probes(g, n):
    fam = xy_family()
    rhs = rhs_xy(fam, g, n)
    for probe in [(2, 3, 5, 7), (-3, 4, 9, 13)]:
        pts = tuple(rat(v) for v in probe[:n])
        assert eval_tensor(rhs, fam.base, pts) == omega_dual_eval(fam, g, n, pts)


def test_extra_dx_zero_reported_and_ignored():
    dual = xy_family().dual_curve()
    assert dual.ignored_far_zeros == 1
    assert [p.location.a for p in dual.ram] == [0]


def test_moving_ramification_closed_form():
    fam = CurveFamily(x_tau=(Z * Z / 2, Z), y_tau=(-Z,))
    assert rhs_xy(fam, 1, 1).entries == {((0, 5),): rat(-1, 2)}
    assert omega_dual_eval(fam, 1, 1, (rat(2),)) == rat(-1, 64)


@pytest.mark.parametrize("g,n", [(0, 3), (1, 1), (1, 2)])
def test_xy_flow_reduces_to_y_flow(g, n):
    fam = airy_y_family()
    eng = Engine(fam.base)
    assert rhs_xy(fam, g, n, engine=eng) == rhs_var_y(fam, g, n, engine=eng)


def test_mixed_family_checks_out():
    fam = CurveFamily(x_tau=(Z * Z / 2, Z ** 3 / 3), y_tau=(-Z, Z * Z))
    rep = xy_check(fam, 1)
    assert rep.ok
    assert any("ignored" in note for note in rep.notes)
    assert [label for label, _, _ in rep.checks] == [
        "(g,n)=(0,3)", "(g,n)=(1,1)"]


# -- flow_check ------------------------------------------------------------


def test_flow_check_line_family():
    # y = (1-tau)(-z) + tau z: nondegenerate except at tau = 1/2
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, 2 * Z))
    rep = flow_check(fam, 1, samples=(rat(0), rat(1, 4), rat(1)))
    assert rep.ok
    assert len(rep.checks) == 6
    assert all(line.startswith("pass") for line in rep.lines())


def test_flow_check_flags_degenerate_sample():
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z, 2 * Z))
    with pytest.raises(FamilyDegenerate) as err:
        flow_check(fam, 1, samples=(rat(0), rat(1, 2)))
    assert err.value.tau == rat(1, 2)


def test_flow_check_constant_family():
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z,))
    assert flow_check(fam, 1, samples=(rat(0), rat(1))).ok


# -- stable two-slot splitting sum ----------------------------------------


def test_stable2_small_cases_vanish():
    eng = Engine(CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z,)).base)
    assert omega_stable2(eng, 0, 0).is_zero()
    assert omega_stable2(eng, 1, 0).is_zero()


def test_stable2_one_spectator():
    fam = CurveFamily(x_tau=(Z * Z / 2,), y_tau=(-Z,))
    eng = Engine(fam.base)
    st2 = omega_stable2(eng, 1, 1)
    assert len(st2.terms) == 3
    zv, ztv, z1 = rat(2), rat(3), rat(5)
    want = (rat(1) / (zv * zv * ztv * ztv * z1 * z1)
            + rat(1, 8) / zv ** 4 / (ztv - z1) ** 2
            + rat(1, 8) / ztv ** 4 / (zv - z1) ** 2) / 2
    assert st2.eval_at(fam.base, zv, ztv, (z1,)) == want
