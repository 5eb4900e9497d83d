"""Sparse exact multivariate polynomials with weighted truncation."""

import pytest

from trkp.multipoly import MultiPoly, div_diag
from trkp.scalars import Dual, rat

N = ("x", "y")
X = MultiPoly.gen(N, "x")
Y = MultiPoly.gen(N, "y")
W = {"x": 1, "y": 1}


def test_mul_truncated_drops_heavy_terms():
    f = (X + Y).mul_truncated(X + Y, W, 1)
    assert f.is_zero()
    g = (X + Y).mul_truncated(X + Y, W, 2)
    assert g.coeff((2, 0)) == 1 and g.coeff((1, 1)) == 2


def test_hicaps_per_variable():
    f = (X + Y).mul_truncated(X + Y, W, 9, hicaps={"x": 1})
    assert f.coeff((2, 0)) == 0 and f.coeff((1, 1)) == 2 and f.coeff((0, 2)) == 1


def test_diagonal_division_exact():
    q = div_diag(X * X * X - Y * Y * Y, "x", "y")
    assert q == X * X + X * Y + Y * Y


def test_diagonal_division_strict():
    with pytest.raises(ValueError):
        div_diag(X + Y, "x", "y")


def test_exp_log_roundtrip():
    f = X + rat(2) * Y + X.mul_truncated(Y, W, 4)
    back = f.exp_truncated(W, 4).log_truncated(W, 4)
    assert back == f.truncate(W, 4)


def test_exp_needs_zero_constant():
    with pytest.raises(ValueError):
        (X + MultiPoly.const(N, rat(1))).exp_truncated(W, 3)


def test_subs_poly_matches_manual():
    f = X * X + rat(3) * X + Y
    r = f.subs_poly("x", X + Y, W, 5)
    manual = (X + Y) * (X + Y) + rat(3) * (X + Y) + Y
    assert r == manual.truncate(W, 5)


def test_extract_and_scale():
    f = X * X * Y + rat(2) * X
    part = f.extract({"x": 2})
    assert part == MultiPoly.gen(("y",), "y")
    g = f.scale_var("x", rat(3))
    assert g.coeff((2, 1)) == 9 and g.coeff((1, 0)) == 6


def test_negative_exponents_supported():
    inv = MultiPoly.gen(N, "x", -1)
    assert (inv * X) == MultiPoly.const(N, rat(1))
    assert inv.coeff((-1, 0)) == 1


def test_deriv_and_eval():
    f = X * X * Y
    assert f.deriv("x") == rat(2) * X * Y
    assert f.eval_all({"x": rat(2), "y": rat(3)}) == 12


def test_dual_coefficients_prune():
    # a zero dual coefficient must not linger as a stored term
    f = MultiPoly(N, {(1, 0): Dual(rat(1), rat(2))})
    g = f - MultiPoly(N, {(1, 0): Dual(rat(1), rat(2))})
    assert g.is_zero()


def test_rename_and_with_vars():
    f = X + rat(2) * Y
    g = f.rename_vars({"x": "u"})
    assert g.vars == ("u", "y") or sorted(g.vars) == ["u", "y"]
    h = f.with_vars(("x", "y", "z"))
    assert h.coeff((1, 0, 0)) == 1
