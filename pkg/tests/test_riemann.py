import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from steklov.errors import PoleAtOne
from steklov.riemann import riemann_zeta

# mpmath.zeta values, frozen
REFERENCE = {
    2.0: 1.6449340668482264,
    3.0: 1.2020569031595942,
    0.5: -1.4603545088095868,
    -0.5: -0.20788622497735457,
    -1.5: -0.025485201889833036,
    1.5: 2.6123753486854883,
    -7.3: 0.003936040865716961,
    12.0: 1.0002460865533080,
}


@pytest.mark.parametrize("s,expected", sorted(REFERENCE.items()))
def test_reference_values(s, expected):
    assert riemann_zeta(s) == pytest.approx(expected, rel=1e-13)


def test_integer_values():
    assert riemann_zeta(0) == -0.5
    assert riemann_zeta(-1) == pytest.approx(-1 / 12, rel=1e-14)
    assert riemann_zeta(-2) == 0.0
    assert riemann_zeta(-3) == pytest.approx(1 / 120, rel=1e-14)
    assert riemann_zeta(2) == pytest.approx(math.pi ** 2 / 6, rel=1e-15)


def test_pole():
    with pytest.raises(PoleAtOne):
        riemann_zeta(1.0)


@given(st.integers(1, 10))
def test_trivial_zeros(n):
    assert riemann_zeta(-2.0 * n) == 0.0


@given(st.floats(-1e-6, 1e-6))
def test_near_zero_follows_taylor(s):
    # zeta(s) = -1/2 - s log(2 pi) / 2 + O(s^2)
    assert riemann_zeta(s) == pytest.approx(-0.5 - 0.5 * s * math.log(2 * math.pi), abs=1e-11)


# mpmath itself trips over arguments within ~1e-200 of zero, so keep away from them
@given(st.floats(-20, 20).filter(lambda s: abs(s - 1) > 1e-3 and abs(s) > 1e-100))
def test_matches_mpmath(s):
    mpmath = pytest.importorskip("mpmath")
    ref = float(mpmath.zeta(s))
    assert riemann_zeta(s) == pytest.approx(ref, rel=1e-11, abs=1e-14)
