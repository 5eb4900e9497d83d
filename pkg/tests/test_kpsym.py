"""Two-point operator stack: T blocks, capped Omega, W extractions, Fock side.

Frozen values are hand-derived on the Airy curve at the regular point z = 1
(coordinate xi = z - 1).  The h^1 block of T_0 collects the primitive of
dz/(8 z^4) between the paired points plus the cube of the one-slot primitive
of the third correlation differential, so the frozen coefficients pin both
block families at once.
"""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trkp.curves import airy_curve
from trkp.expansion import (ExpansionPoint, partition_function, potential,
                            potential_poly)
from trkp.hirota import kp_check
from trkp.kpsym import (FormalismMismatch, _dual_tau, connected_correlator,
                        fock_kernel_apply, formalism_check, kp_symmetry_test,
                        omega_cap, omega_leading, script_T, w1_direct,
                        w_extract, w_tilde1)
from trkp.expansion import TruncatedTau
from trkp.multipoly import MultiPoly
from trkp.ratfun import RationalFunction
from trkp.scalars import rat
from trkp.series import InsufficientOrder, TruncSeries

CURVE = airy_curve()
PT = ExpansionPoint(rat(1))


def _tau(max_n=6, max_k=6, max_g=2):
    return partition_function(potential(CURVE, PT, max_n, max_k, max_g))


# -- T blocks -------------------------------------------------------------


def test_t1_base_order_is_kernel_primitive():
    # h^0 part of T_1 at a flat coordinate: the primitive of the standard
    # kernel between the paired points, expanded for small spectator.
    t1 = script_T(CURVE, 1, PT, zdeg=4, hmax=0, spec_deg=3)
    for j in range(4):
        assert t1.coeff(-j - 1, 0, (j,), 0) == -1
        assert t1.coeff(0, -j - 1, (j,), 0) == 1
    # no regular part: the coordinate is already the expansion variable
    assert t1.coeff(1, 0, (1,), 0) == 0
    assert t1.coeff(2, 1, (0,), 0) == 0


def test_t0_airy_first_hbar_order():
    t0 = script_T(CURVE, 0, PT, zdeg=4, hmax=1)
    # flat coordinate kills the h^0 regularized block
    for a in range(-4, 5):
        for b in range(-4, 5):
            assert t0.coeff(a, b, (), 0) == 0
    assert t0.coeff(1, 0, (), 1) == rat(1, 8)
    assert t0.coeff(2, 0, (), 1) == rat(-1, 4)
    assert t0.coeff(3, 0, (), 1) == rat(7, 12)
    assert t0.coeff(4, 0, (), 1) == rat(-9, 8)
    assert t0.coeff(2, 1, (), 1) == rat(-1, 2)


def test_t0_odd_under_point_swap():
    t0 = script_T(CURVE, 0, PT, zdeg=3, hmax=1)
    for a in range(4):
        for b in range(4):
            assert t0.coeff(a, b, (), 1) == -t0.coeff(b, a, (), 1)


# -- capped Omega ----------------------------------------------------------


def test_omega_cap_vacuum_normalizes_to_zero():
    # n = 0: after removing the bare 1/(zp - zm) pole nothing remains at h^0
    om = omega_cap(CURVE, 0, PT, tmax=3, hmax=1)
    for a in range(-4, 5):
        for b in range(-4, 5):
            assert om.coeff(a, b, (), 0) == 0


def test_omega_cap_single_spectator_leading():
    om = omega_cap(CURVE, 1, PT, tmax=3, hmax=1, spec_deg=2)
    assert om.coeff(-1, -1, (0,), 0) == 1
    assert om.coeff(-1, -2, (1,), 0) == 1
    assert om.coeff(-2, -1, (1,), 0) == 1
    assert om.coeff(-1, -3, (2,), 0) == 1
    assert om.coeff(-2, -2, (2,), 0) == 1


@settings(max_examples=10, deadline=None)
@given(c2=st.integers(-3, 3), c3=st.integers(-3, 3),
       d2=st.integers(1, 4), d3=st.integers(1, 4))
def test_omega_cap_independent_of_regularization(c2, c3, d2, d3):
    """Any admissible reparametrization used for the regularization cancels."""
    tmax, hmax = 3, 1
    order = 2 * (tmax + 1) + 2
    xs = TruncSeries(1, [rat(1), rat(c2, d2), rat(c3, d3)] + [0] * (order - 4),
                     order)
    base = omega_cap(CURVE, 0, PT, tmax, hmax)
    alt = omega_cap(CURVE, 0, PT, tmax, hmax, x=xs)
    for a in range(-4, 5):
        for b in range(-4, 5):
            for h in range(hmax + 1):
                assert alt.coeff(a, b, (), h) == base.coeff(a, b, (), h)


def test_omega_cap_regularization_needs_enough_terms():
    xs = TruncSeries(1, [rat(1), rat(1, 3)] + [0] * 5, 8)
    with pytest.raises(InsufficientOrder):
        omega_cap(CURVE, 0, PT, 3, 1, x=xs)


# -- W extractions ---------------------------------------------------------


W0_PAIRS = [(0, 2), (0, 3), (1, 0), (1, 1), (2, 0)]


@pytest.mark.parametrize("g,n", W0_PAIRS)
def test_leading_u_order_reproduces_next_differential(g, n):
    assert w_extract(CURVE, g, 0, n) == omega_leading(CURVE, g, n)


W1_PAIRS = [(0, 2), (0, 3), (1, 0), (1, 1)]


@pytest.mark.parametrize("g,n", W1_PAIRS)
def test_first_u_order_two_paths_agree(g, n):
    assert w_extract(CURVE, g, 1, n) == w1_direct(CURVE, g, n)


def test_first_u_order_vanishes_below_stability():
    assert w_extract(CURVE, 0, 1, 1).entries == {}
    assert w1_direct(CURVE, 0, 1).entries == {}


def test_first_u_order_genus_one_closed_form():
    # 1/(8 z^3) times dz, no spectators
    w = w_extract(CURVE, 1, 1, 0)
    assert w.entries == {(): RationalFunction([rat(1)], [0, 0, 0, rat(8)])}


def test_unrestricted_variant_adds_y_cross_term():
    # at (g,n) = (0,1) the restricted extraction is empty, so the variant
    # with the low terms kept equals y(z) against the double pole
    w = w_tilde1(CURVE, 0, 1)
    assert w.entries == {((0, ("diag", 2)),): RationalFunction([0, rat(-1)])}


def test_unrestricted_variant_genus_one_vanishes():
    assert w_tilde1(CURVE, 1, 0).entries == {}


# -- Fock dictionary -------------------------------------------------------


def test_mode_dictionary_heisenberg():
    """J_{-k} = p_k multiplication, J_k = k d/dp_k; commutator is central."""
    names = ("p1", "p2", "p3", "p4", "p5", "p6")
    mono = MultiPoly(names, {(1, 1, 1, 0, 0, 0): rat(1),
                             (0, 3, 0, 0, 0, 0): rat(2),
                             (2, 0, 0, 1, 0, 0): rat(-1)})

    def j(k, poly):
        if k < 0:
            return poly * MultiPoly.gen(names, f"p{-k}")
        return poly.deriv(f"p{k}") * rat(k)

    for a in (-3, -2, -1, 1, 2, 3):
        for b in (-3, -2, -1, 1, 2, 3):
            lhs = j(a, j(b, mono)) - j(b, j(a, mono))
            want = mono * rat(a) if a + b == 0 else MultiPoly.zero(names)
            assert lhs == want


def test_kernel_on_vacuum():
    triv = TruncatedTau(MultiPoly.const(("h", "p1", "p2"), rat(1)), 4, 0)
    ker = fock_kernel_apply(triv)
    c = ker.poly
    one = c.extract({"zp": -1, "zm": -1})
    assert one.coeff((0, 1, 0)) == 1 and len(one.terms) == 1
    a = c.extract({"zp": -1, "zm": -2})
    assert a.coeff((0, 0, 1)) == rat(1, 2)
    assert a.coeff((0, 2, 0)) == rat(1, 2)
    assert len(a.terms) == 2
    b = c.extract({"zp": -2, "zm": -1})
    assert b.coeff((0, 0, 1)) == rat(1, 2)
    assert b.coeff((0, 2, 0)) == rat(-1, 2)
    assert len(b.terms) == 2


def test_connected_one_point_reconstructs_potential():
    F = potential(CURVE, PT, 6, 6, 2)
    tau = partition_function(F)
    fp = potential_poly(F).with_vars(tau.poly.vars)
    c1 = connected_correlator(tau, 1, amax=6)
    for a in range(1, 7):
        for h in (1, 3):
            want = rat(a) * fp.coeff(
                tuple({"h": h, f"p{a}": 1}.get(v, 0) for v in fp.vars))
            got = c1.coeff(
                tuple({"z1": a - 1, "h": h}.get(v, 0) for v in c1.vars))
            assert got == want, (a, h)


def test_connected_two_point_reconstructs_potential():
    F = potential(CURVE, PT, 6, 6, 2)
    tau = partition_function(F)
    fp = potential_poly(F).with_vars(tau.poly.vars)
    c2 = connected_correlator(tau, 2, amax=6)
    for a in range(1, 6):
        for b in range(1, 6):
            if a + b > 6:
                continue
            for h in (0, 2):
                e = {"h": h}
                e[f"p{a}"] = e.get(f"p{a}", 0) + 1
                e[f"p{b}"] = e.get(f"p{b}", 0) + 1
                c = fp.coeff(tuple(e.get(v, 0) for v in fp.vars))
                want = rat(a * b) * c * (2 if a == b else 1)
                got = c2.coeff(tuple(
                    {"z1": a - 1, "z2": b - 1, "h": h}.get(v, 0)
                    for v in c2.vars))
                assert got == want, (a, b, h)


# -- formalism cross-check and the symmetry test ---------------------------


def test_formalism_agrees_both_insertion_counts():
    tau = _tau()
    assert formalism_check(CURVE, PT, tau, 0, 3, 2, 0) > 0
    assert formalism_check(CURVE, PT, tau, 1, 2, 1, 1) > 0


def test_formalism_rejects_corrupted_kernel():
    # the sign flip lives in the creation half, so it needs one insertion
    # to become visible
    tau = _tau()
    bad = fock_kernel_apply(tau, corrupt=True)
    with pytest.raises(FormalismMismatch):
        formalism_check(CURVE, PT, tau, 1, 2, 1, 1, ker=bad)


def test_symmetry_generator_on_vacuum():
    base = MultiPoly.const(("h",) + tuple(f"p{k}" for k in range(1, 7)),
                           rat(1))
    triv = TruncatedTau(base, 6, 0)
    ker = fock_kernel_apply(triv)
    for a, b in ((-1, -1), (-1, -2), (-2, -2)):
        delta = ker.component(a, b)
        assert not delta.is_zero()
        rep = kp_check(_dual_tau(triv, delta, ker.trust(a, b)), max_weight=4)
        assert rep.verdict == "PASS"


def test_symmetry_report_small_budget():
    rep = kp_symmetry_test(
        CURVE, point=PT,
        specializations=((0, 0), (-1, -1), (-1, -2)),
        max_n=6, max_k=6, max_g=2, max_weight=4,
        cross_n=1, cross_tmax=2, cross_hmax=1, cross_spec_deg=1)
    assert rep.verdict == "PASS"
    assert rep.control is not None
    assert rep.control["report"].verdict == "FAIL"
    assert rep.compared > 0
    assert any("corrupted control" in ln for ln in rep.lines())
