"""Ramification data, local frames, and the deck involution."""

import pytest

from trkp.curves import NonSimpleRamification, SpectralCurve, airy_curve
from trkp.ratfun import RationalFunction
from trkp.scalars import rat

Z = RationalFunction.var()


def c(v):
    return RationalFunction.const(rat(v))


def test_airy_frame():
    A = airy_curve()
    assert [(r.index, r.location) for r in A.ram] == [(0, 0)]
    fr = A.frame(0, 7)
    # sigma = -t exactly; X = t^2/2
    assert fr.sigma.low == 1 and fr.sigma.coeffs == [-1, 0, 0, 0, 0, 0]
    assert fr.X.low == 2 and fr.X.coeff(2) == rat(1, 2) and fr.X.coeff(3) == 0
    assert A.validate().ok


def test_cubic_term_involution_coefficients():
    # dx = z + z^2: simple zeros at -1 and 0 with opposite-signed quadratic
    # corrections to the involution
    B = SpectralCurve(x_rat=Z * Z * rat(1, 2) + Z * Z * Z * rat(1, 3), y=-Z)
    assert [(r.index, r.location) for r in B.ram] == [(0, -1), (1, 0)]
    s0 = B.frame(0, 5).sigma
    s1 = B.frame(1, 5).sigma
    assert s0.coeff(1) == -1 and s0.coeff(2) == rat(2, 3)
    assert s1.coeff(1) == -1 and s1.coeff(2) == rat(-2, 3)


@pytest.mark.parametrize("i", [0, 1])
def test_involution_is_exact(i):
    B = SpectralCurve(x_rat=Z * Z * rat(1, 2) + Z * Z * Z * rat(1, 3), y=-Z)
    order = 9
    fr = B.frame(i, order)
    sig = fr.sigma
    # sigma o sigma = id
    back = sig.compose(sig)
    for k in range(1, order - 1):
        assert back.coeff(k) == (1 if k == 1 else 0)
    # X o sigma = X
    comp = fr.X.compose(sig)
    for k in range(2, order - 1):
        assert comp.coeff(k) == fr.X.coeff(k)


def test_non_simple_zero_rejected():
    with pytest.raises(NonSimpleRamification):
        SpectralCurve(x_rat=Z * Z * Z * rat(1, 3), y=-Z)


def test_log_part_feeds_dx():
    # x = -z^2 + log z  =>  dx = (1 - 2 z^2)/z
    R = SpectralCurve(x_rat=-(Z * Z), x_log=((rat(1), rat(0)),), y=Z)
    assert R.dx == (c(1) - c(2) * Z * Z) / Z
    assert R.modulus == [rat(-1, 2), 0, 1]
    locs = sorted(str(r.location) for r in R.ram)
    assert len(locs) == 2
    assert R.validate().ok


def test_irreducible_cubic_goes_generic():
    C = SpectralCurve(dx=Z * Z * Z - c(2), y=-Z)
    assert C.etale
    assert len(C.ram) == 1 and C.ram[0].generic
    assert C.validate().ok


def test_fingerprint_distinguishes_curves():
    a = airy_curve().fingerprint()
    b = SpectralCurve(x_rat=Z * Z * rat(1, 2), y=-Z - Z * Z).fingerprint()
    assert a != b
    assert airy_curve().fingerprint() == a
