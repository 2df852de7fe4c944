"""Elementary special functions shared by the kernels.

All angles are reduced against the floating-point period ``TWO_PI`` so that
angles written as ``TWO_PI - t`` keep full relative precision in ``t``.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.special import zeta

TWO_PI = 2.0 * math.pi
LOG4 = math.log(4.0)


class SingularityError(ArithmeticError):
    """Raised when a logarithmic kernel is evaluated at (or at a root) its pole."""


def wrap_signed(x):
    """Reduce angles to ``[-pi, pi]`` exactly (fmod and Sterbenz subtraction)."""
    r = np.fmod(np.asarray(x, dtype=float), TWO_PI)
    r = np.where(r > math.pi, r - TWO_PI, r)
    return np.where(r < -math.pi, r + TWO_PI, r)


def h(x):
    """Vectorised ``log(2(1 - cos x))``; ``-inf`` at multiples of 2*pi.

    Evaluated as ``2 log|2 sin(x/2)|`` on the reduced angle to avoid the
    cancellation in ``1 - cos x`` near the pole.
    """
    r = wrap_signed(x)
    with np.errstate(divide="ignore"):
        return 2.0 * np.log(np.abs(2.0 * np.sin(0.5 * r)))


def g(x):
    """Derivative of :func:`h`: ``sin x / (1 - cos x) = cot(x/2)``."""
    r = wrap_signed(x)
    with np.errstate(divide="ignore"):
        return 1.0 / np.tan(0.5 * r)


# sum_{n>=1} zeta(2n) / ((2 pi)^{2n} n (2n+1)) x^{2n+1}: the regular part of Cl_2
_N_CLAUSEN = 34
_n = np.arange(1, _N_CLAUSEN + 1, dtype=float)
_CLAUSEN_COEF = zeta(2.0 * _n) / (TWO_PI ** (2.0 * _n) * _n * (2.0 * _n + 1.0))


def clausen2(x):
    """Clausen function ``Cl_2(x) = sum_k sin(kx)/k^2``, vectorised.

    Uses ``Cl_2(x) = x - x log|x| + sum_n c_n x^{2n+1}`` on ``[-pi, pi]``,
    where the series ratio is at most 1/4.
    """
    r = wrap_signed(x)
    a = np.abs(r)
    x2 = a * a
    acc = np.zeros_like(a)
    for c in _CLAUSEN_COEF[::-1]:
        acc = acc * x2 + c
    with np.errstate(divide="ignore", invalid="ignore"):
        core = a - a * np.log(a) + a * x2 * acc
    core = np.where(a == 0.0, 0.0, core)
    return np.sign(r) * core


def h_integral(x):
    """``int_0^x h(t) dt = -2 Cl_2(x)`` for any real ``x``."""
    return -2.0 * clausen2(x)
