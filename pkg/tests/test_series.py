"""Window bookkeeping and classical identities for truncated Laurent series."""

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trkp.series import InsufficientOrder, TruncSeries
from trkp.scalars import rat

coeffs = st.lists(
    st.fractions(min_value=-9, max_value=9, max_denominator=6).map(
        lambda f: rat(f.numerator, f.denominator)),
    min_size=0, max_size=5)


def test_product_window_narrows():
    t = TruncSeries.var(4)
    sq = t * t
    assert sq.low == 2 and sq.order == 5
    assert sq.coeff(2) == 1
    with pytest.raises(InsufficientOrder):
        sq.coeff(5)


def test_geometric_inverse():
    g = TruncSeries(0, [rat(1), rat(-1), 0, 0, 0], 5)
    assert g.inverse().coeffs == [1] * 5


def test_laurent_inverse_shifts_low():
    # 1/(t^2 (1 + t)) starts at t^-2
    f = TruncSeries(2, [rat(1), rat(1), 0, 0], 6)
    inv = f.inverse()
    assert inv.low == -2
    assert inv.coeff(-2) == 1 and inv.coeff(-1) == -1 and inv.coeff(0) == 1


def test_reversion_catalan():
    s = TruncSeries(1, [rat(1), rat(-1), 0, 0, 0], 6)
    assert s.revert().coeffs == [1, 1, 2, 5, 14]


@settings(deadline=None)
@given(coeffs)
def test_reversion_is_compositional_inverse(cs):
    order = len(cs) + 2
    s = TruncSeries(1, [rat(1)] + cs, order)
    t = TruncSeries.var(order)
    back = s.revert().compose(s)
    for k in range(1, order):
        assert back.coeff(k) == t.coeff(k)


@given(coeffs)
def test_exp_log_roundtrip(cs):
    order = len(cs) + 1
    f = TruncSeries(1, cs, order) if cs else TruncSeries.zero(order)
    again = f.exp().log()
    for k in range(1, order):
        assert again.coeff(k) == f.coeff(k)


def test_exp_values():
    t = TruncSeries.var(4)
    e = t.exp()
    assert [e.coeff(k) for k in range(4)] == [1, 1, rat(1, 2), rat(1, 6)]


def test_integrate_deriv_roundtrip():
    f = TruncSeries(0, [rat(3), rat(-2), rat(5), 0], 4)
    g = f.integrate().deriv()
    for k in range(3):
        assert g.coeff(k) == f.coeff(k)


def test_integrate_refuses_residue():
    f = TruncSeries(-1, [rat(1), 0, 0], 2)
    with pytest.raises(ValueError):
        f.integrate()


def test_compose_needs_positive_valuation():
    t = TruncSeries.var(4)
    c = TruncSeries.const(rat(1), 4)
    with pytest.raises(ValueError):
        t.compose(c)


def test_shift_and_val():
    f = TruncSeries(1, [rat(2), rat(3)], 3)
    g = f.shift(-2)
    assert g.low == -1 and g.coeff(-1) == 2 and g.coeff(0) == 3
    assert f.val() == 1
