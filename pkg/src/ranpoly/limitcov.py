"""Limit variance and covariance kernel of the scaled log modulus.

The defining integrals have integrable log / log^2 singularities; they are
computed with composite Gauss-Legendre rules on panels graded geometrically
toward every singular endpoint.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from ._special import TWO_PI, h, wrap_signed

GRADING_RATIO = 0.2
MAX_LEVEL = 10


class QuadratureError(ArithmeticError):
    """Requested tolerance not reached within the panel budget."""


@dataclass(frozen=True)
class QuadratureConfig:
    """``endpoint_split`` is the distance from a singular endpoint inside which
    panels shrink geometrically (ratio 0.2) instead of being uniform."""

    abs_tol: float = 1e-12
    max_panels: int = 20000
    endpoint_split: float = 0.5

    def __post_init__(self):
        if not self.abs_tol >= 100 * np.finfo(float).eps:
            raise ValueError("abs_tol must be at least 100 machine epsilons")
        if self.max_panels < 1 or not self.endpoint_split > 0:
            raise ValueError("max_panels and endpoint_split must be positive")


@lru_cache(maxsize=None)
def _gauss_legendre(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panels(a, b, split, layers, left, right):
    """Panels as (anchor, lo_offset, hi_offset) with offsets measured from anchor."""
    length = b - a
    nsing = int(left) + int(right)
    d = min(split, length / max(nsing, 1)) if nsing else 0.0
    out = []
    t = [d * GRADING_RATIO**k for k in range(layers + 1)] + [0.0]
    if left:
        out += [(a, t[k + 1], t[k]) for k in range(layers + 1)]
    if right:
        out += [(b, -t[k], -t[k + 1]) for k in range(layers + 1)]
    lo = d if left else 0.0
    hi = length - (d if right else 0.0)
    if hi - lo > 1e-15 * max(1.0, length):
        width = split if nsing else length
        m = max(1, math.ceil((hi - lo) / width))
        edges = lo + (hi - lo) * np.arange(m + 1) / m
        out += [(a, edges[i], edges[i + 1]) for i in range(m)]
    return out


def _rule(panels, n):
    x, w = _gauss_legendre(n)
    anchor = np.array([p[0] for p in panels])
    lo = np.array([p[1] for p in panels])
    hi = np.array([p[2] for p in panels])
    half = 0.5 * (hi - lo)
    offs = (0.5 * (hi + lo))[:, None] + half[:, None] * x[None, :]
    wts = half[:, None] * w[None, :]
    return np.repeat(anchor, n), offs.ravel(), wts.ravel()


def integrate(
    f: Callable[[np.ndarray, np.ndarray], np.ndarray],
    a: float,
    b: float,
    q: QuadratureConfig,
    left_singular: bool = True,
    right_singular: bool = True,
) -> float:
    """Integrate ``f`` over [a, b]; ``f(anchor, offset)`` is evaluated at ``anchor + offset``.

    Offsets are passed separately so integrands can place singular points
    exactly at offset zero. Levels add graded layers and nodes until two
    successive estimates agree to ``abs_tol``.
    """
    prev = None
    for level in range(MAX_LEVEL):
        layers = 14 + 8 * level
        n = 16 + 8 * level
        panels = _panels(a, b, q.endpoint_split, layers, left_singular, right_singular)
        if len(panels) > q.max_panels:
            break
        anchor, offs, wts = _rule(panels, n)
        val = float(np.dot(f(anchor, offs), wts))
        if prev is not None and abs(val - prev) < q.abs_tol:
            return val
        prev = val
    raise QuadratureError(
        f"no convergence to abs_tol={q.abs_tol} on [{a}, {b}] within {q.max_panels} panels"
    )


DEFAULT_QUAD = QuadratureConfig()


@lru_cache(maxsize=4096)
def _kernel_integral(theta: float, q: QuadratureConfig) -> float:
    shift = float(wrap_signed(theta))  # exact; second factor is h(x + theta)
    sing = sorted({0.0, TWO_PI, float(np.mod(TWO_PI - theta, TWO_PI))})
    if sing[0] != 0.0:
        sing.insert(0, 0.0)

    def f(anchor, offset):
        # both factors keep full relative precision near their poles: the pole
        # of h(x) sits at anchor in {0, 2pi}, that of h(x + theta) at anchor = 2pi - theta
        return h(wrap_signed(anchor) + offset) * h(wrap_signed(anchor + shift) + offset)

    total = 0.0
    for a, b in zip(sing, sing[1:]):
        if b > a:
            total += integrate(f, a, b, q)
    return total / TWO_PI


def covariance_kernel(theta: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``K(theta) = (1/2pi) int_0^{2pi} h(x) h(x + theta) dx`` for theta in [0, 2pi]."""
    theta = float(theta)
    if not 0.0 <= theta <= TWO_PI:
        raise ValueError("theta must lie in [0, 2pi]")
    return _kernel_integral(theta, q)


K = covariance_kernel


def sigma_sq(q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Limit variance ``(1/2pi) int h^2`` (same code path as ``K(0)``)."""
    return _kernel_integral(0.0, q)


def limit_cov_matrix(phis: Sequence[float], q: QuadratureConfig = DEFAULT_QUAD) -> np.ndarray:
    """``Sigma[k, l] = K(|phi_k - phi_l|)`` for angles in [0, 2pi]."""
    phis = np.asarray(phis, dtype=float)
    if phis.ndim != 1 or phis.size < 1:
        raise ValueError("need at least one angle")
    s = phis.size
    out = np.empty((s, s))
    for i in range(s):
        for j in range(i, s):
            out[i, j] = out[j, i] = covariance_kernel(abs(phis[i] - phis[j]), q)
    return out


def _near_root_moment(eps: float, power: int, q: QuadratureConfig) -> float:
    if not 0 < eps <= math.pi:
        raise ValueError("eps must lie in (0, pi]")
    return integrate(lambda a, t: h(t) ** power, 0.0, eps, q, True, False) / math.pi


def mu_eps(eps: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Mean contribution of a root within ``eps`` of the evaluation point:
    ``(1/pi) int_0^eps h``."""
    return _near_root_moment(eps, 1, q)


def sigma_sq_eps(eps: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Variance of one near-root summand: ``(1/pi) int_0^eps h^2 - mu_eps^2``."""
    return max(_near_root_moment(eps, 2, q) - mu_eps(eps, q) ** 2, 0.0)
