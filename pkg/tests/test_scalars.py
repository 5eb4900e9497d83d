"""Exact scalar tower: rationals, quadratic field elements, dual numbers."""

import pytest
from hypothesis import given
from hypothesis import strategies as st

from trkp.scalars import (Dual, NumberField, ZeroDivisorError, dual_var,
                          is_rational, rat, rat_str, sc_div)

rats = st.fractions(min_value=-50, max_value=50, max_denominator=12).map(
    lambda f: rat(f.numerator, f.denominator))


def test_rat_basics():
    assert rat(1, 3) + rat(1, 6) == rat(1, 2)
    assert rat(2, 4) == rat(1, 2)
    assert rat(-3) * rat(1, 3) == -1
    assert is_rational(rat(7, 2)) and is_rational(3)
    assert not is_rational("x")


def test_rat_str_exact():
    assert rat_str(rat(3, 4)) == "3/4"
    assert rat_str(rat(5)) == "5"
    assert rat_str(rat(-7, 2)) == "-7/2"


@given(rats, rats)
def test_sc_div_matches_field_division(a, b):
    if b == 0:
        return
    assert sc_div(a, b) * b == a


def test_dual_is_first_order_derivative():
    x = dual_var(rat(2))
    cube = x * x * x
    assert cube.a == 8 and cube.b == 12
    inv = x.inverse()
    assert inv.a == rat(1, 2) and inv.b == rat(-1, 4)
    # quotient rule through mixed int arithmetic
    y = (3 * x + 1) * inv
    assert y.a == rat(7, 2) and y.b == rat(-1, 4)


def test_dual_truthiness_and_lifting():
    assert not Dual(0, 0)
    assert Dual(0, rat(1, 2))
    assert 1 + Dual(rat(1)) == Dual(rat(2))
    assert 2 * Dual(0, rat(3)) == Dual(0, rat(6))


@given(rats, rats, rats, rats)
def test_dual_product_rule(a, b, c, d):
    left = Dual(a, b) * Dual(c, d)
    assert left.a == a * c and left.b == a * d + b * c


def test_quadratic_field():
    K = NumberField([rat(-2), 0, rat(1)])
    r2 = K.gen()
    assert (r2 * r2).rational_part() == 2
    assert r2.trace() == 0
    assert K.from_rat(rat(1)).trace() == 2
    inv = (K.from_rat(rat(1)) + r2).inverse()
    assert inv * (K.from_rat(rat(1)) + r2) == K.from_rat(rat(1))
    roots = K.roots_in_field()
    assert len(roots) == 2 and roots[0] == -roots[1]


def test_etale_algebra_flags_zero_divisors():
    E = NumberField([rat(-1), 0, rat(1)])  # reducible modulus
    with pytest.raises(ZeroDivisorError):
        (E.gen() - E.from_rat(rat(1))).inverse()


def test_field_power_reduction():
    K = NumberField([rat(-2), 0, rat(1)])
    r2 = K.gen()
    assert r2 * r2 * r2 == K.element([0, rat(2)])
