import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ranpoly._special import TWO_PI, clausen2, g, h, h_integral, wrap_signed


def test_h_values():
    assert h(math.pi) == pytest.approx(math.log(4), abs=1e-15)
    assert h(math.pi / 2) == pytest.approx(math.log(2), abs=1e-15)
    assert h(2 * math.pi / 3) == pytest.approx(math.log(3), abs=1e-15)
    assert h(0.0) == -np.inf
    assert h(TWO_PI) == -np.inf


def test_h_keeps_relative_precision_near_pole():
    t = 1e-9
    # h(2pi - t) and h(t) coincide; the naive 1 - cos form loses every digit
    assert h(TWO_PI - t) == pytest.approx(2 * math.log(t), rel=1e-7)
    assert h(t) == pytest.approx(2 * math.log(t), rel=1e-12)


def test_wrap_signed_range_and_exactness():
    x = np.array([0.0, 1.0, math.pi, -math.pi, 7.0, -7.0, 100.0, TWO_PI])
    r = wrap_signed(x)
    assert np.all(np.abs(r) <= math.pi)
    assert np.allclose(np.cos(r), np.cos(x), atol=1e-13)
    assert wrap_signed(TWO_PI) == 0.0


@given(st.floats(1e-3, TWO_PI - 1e-3))
def test_g_is_derivative_of_h(x):
    d = 1e-7
    fd = (h(x + d) - h(x - d)) / (2 * d)
    assert fd == pytest.approx(float(g(x)), rel=1e-5, abs=1e-5)


@pytest.mark.parametrize("x", [1e-8, 1e-3, 0.1, 0.5, 1.0, 2.0, 3.0, math.pi, 4.0, 6.0, TWO_PI - 1e-6])
def test_clausen_matches_mpmath(x):
    # angles are reduced against the float period, so compare at the same offset
    xm = mpmath.mpf(x) - (mpmath.mpf(TWO_PI) if x > math.pi else 0)
    ref = float(mpmath.clsin(2, xm))
    assert float(clausen2(x)) == pytest.approx(ref, abs=2e-15)


@settings(max_examples=50)
@given(st.floats(0.0, TWO_PI))
def test_h_integral_matches_quadrature(x):
    pts = [0, x] if x <= math.pi else [0, math.pi, x]
    ref = float(mpmath.quad(lambda t: 2 * mpmath.log(2 * mpmath.sin(t / 2)), pts))
    assert float(h_integral(x)) == pytest.approx(ref, abs=1e-12)


def test_h_has_zero_mean():
    assert float(h_integral(TWO_PI)) == pytest.approx(0.0, abs=1e-14)
