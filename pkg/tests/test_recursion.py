"""Correlation differentials: frozen milestones, structure, cross-checks.

The trifold test recomputes omega(0,3) from the classical genus-zero
residue formula using only RationalFunction residues, so the two sides
share no code beyond scalar arithmetic.
"""

import pytest

from trkp.curves import SpectralCurve, airy_curve
from trkp.ratfun import RationalFunction
from trkp.recursion import (CorrelationDifferential, Engine, check_structure,
                            eval_tensor, kmax)
from trkp.scalars import rat

Z = RationalFunction.var()


def c(v):
    return RationalFunction.const(rat(v))


def cubic_curve():
    return SpectralCurve(x_rat=Z * Z * rat(1, 2) + Z * Z * Z * rat(1, 3),
                         y=-Z, name="cubic")


def test_airy_trifold():
    assert Engine(airy_curve()).omega(0, 3).entries == {
        ((0, 2), (0, 2), (0, 2)): 1}


def test_airy_genus_one():
    assert Engine(airy_curve()).omega(1, 1).entries == {((0, 4),): rat(1, 8)}


def test_unstable_requests_rejected():
    E = Engine(airy_curve())
    with pytest.raises(ValueError):
        E.omega(0, 1)
    with pytest.raises(ValueError):
        E.omega(0, 2)


def test_trifold_matches_residue_formula():
    B = cubic_curve()
    o3 = Engine(B).omega(0, 3)
    pts = (rat(2), rat(3), rat(5))
    direct = eval_tensor(o3, B, pts)
    f = c(1) / (B.dx * B.y.deriv())
    for a in pts:
        f = f * ((Z - c(a)) * (Z - c(a))).inverse()
    indep = -(f.residue_at(rat(0)) + f.residue_at(rat(-1)))
    assert direct == indep == rat(119, 129600)


def test_cubic_genus_one_frozen():
    assert Engine(cubic_curve()).omega(1, 1).entries == {
        ((0, 2),): rat(-1, 12), ((0, 3),): rat(-1, 12), ((0, 4),): rat(-1, 8),
        ((1, 2),): rat(1, 12), ((1, 3),): rat(-1, 12), ((1, 4),): rat(1, 8)}


@pytest.mark.parametrize("g,n", [(0, 3), (0, 4), (1, 1), (1, 2), (2, 1)])
def test_structure_invariants(g, n):
    A = airy_curve()
    rep = check_structure(Engine(A).omega(g, n), A)
    assert rep.ok, [l for l in rep.lines()] if hasattr(rep, "lines") else rep


def test_structure_over_quadratic_field():
    R = SpectralCurve(x_rat=-(Z * Z), x_log=((rat(1), rat(0)),), y=Z)
    E = Engine(R)
    assert check_structure(E.omega(0, 3), R).ok
    assert check_structure(E.omega(1, 1), R).ok


def test_pole_order_bound_is_kmax():
    om = Engine(airy_curve()).omega(1, 2)
    worst = max(k for key in om.entries for (_, k) in key)
    assert worst <= kmax(1, 2)
    assert kmax(1, 2) == 2 * (3 * 1 - 3 + 2) + 2


def test_parallel_schedule_is_deterministic():
    B = cubic_curve()
    wanted = [(g, n) for g in range(2) for n in range(1, 4) if 2 * g - 2 + n > 0]
    E1, E2 = Engine(B), Engine(B)
    E1.omega_many(wanted, jobs=1)
    E2.omega_many(wanted, jobs=3)
    for g, n in wanted:
        assert E1.omega(g, n) == E2.omega(g, n)


def test_generic_ramification_blocks_recursion():
    C = SpectralCurve(dx=Z * Z * Z - c(2), y=-Z)
    with pytest.raises(ValueError):
        Engine(C).omega(0, 3)


def test_tensor_symmetry():
    om = Engine(airy_curve()).omega(0, 4)
    for key, val in om.entries.items():
        assert om.coeff(tuple(reversed(key))) == val


def test_tensor_algebra():
    a = CorrelationDifferential(0, 1, {((0, 2),): rat(1)})
    b = CorrelationDifferential(0, 1, {((0, 2),): rat(-1)})
    assert (a + b).is_zero()
    assert a.scale(rat(3)).coeff(((0, 2),)) == 3
