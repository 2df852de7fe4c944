"""Empirical-process form of ``T_N`` and its split into an eps-truncated
Stieltjes part and a near-root remainder.

Every root carries mass ``n_q / s_N``. With ``F_phi`` the cycled distribution
of these masses and ``W_phi(x) = F_phi(x) - (M_N/s_N) x/(2pi)``,
``T_N(phi) = int h dW_phi`` exactly, and

    T_N(phi) = t_eps_byparts(phi, eps) + z_near(phi, eps)

holds to rounding for every admissible eps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._special import TWO_PI, SingularityError, h
from .limitcov import DEFAULT_QUAD, QuadratureConfig, mu_eps
from .multiplicity import PrefixNorms
from .polycircle import COLLISION_TOL, PolySample, scaled_log_magnitude

BOUNDARY_TOL = 1e-12


class BoundaryError(ValueError):
    """A root sits on the truncation boundary, where the split is ambiguous."""


def _wrap(angles: np.ndarray, phi: float) -> np.ndarray:
    w = np.mod(angles - phi, TWO_PI)
    w[w >= TWO_PI] = 0.0
    return w


@dataclass(frozen=True)
class WeightedEcdf:
    """Right-continuous step function ``F(x) = sum_{w_q <= x} n_q / s_N`` on [0, 2pi)."""

    points: np.ndarray  # wrapped root angles, sorted
    masses: np.ndarray
    norms: PrefixNorms

    @property
    def total(self) -> float:
        # same summation order as __call__, so F(x) <= total holds exactly
        return float(np.cumsum(self.masses)[-1])

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        cum = np.concatenate([[0.0], np.cumsum(self.masses)])
        out = cum[np.searchsorted(self.points, x, side="right")]
        out = np.where(x >= TWO_PI, cum[-1], out)
        return float(out) if out.ndim == 0 else out


def cycled_ecdf(s: PolySample, phi: float = 0.0) -> WeightedEcdf:
    """Distribution of root masses re-based at ``phi`` (angles measured from phi, wrapped)."""
    w = _wrap(s.angles, phi)
    order = np.argsort(w, kind="stable")
    return WeightedEcdf(w[order], s.mults[order] / s.s_N, s.norms)


def centered_process(s: PolySample, phi: float, psi):
    """``W_phi(psi) = F_phi(psi) - (M_N/s_N) psi/(2pi)`` for psi in [0, 2pi]."""
    psi_arr = np.asarray(psi, dtype=float)
    if np.any(psi_arr < 0) or np.any(psi_arr > TWO_PI):
        raise ValueError("psi must lie in [0, 2pi]")
    F = cycled_ecdf(s, phi)
    out = F(psi_arr) - s.norms.mass * psi_arr / TWO_PI
    out = np.where(psi_arr >= TWO_PI, 0.0, out)
    return float(out) if out.ndim == 0 else out


def _check_eps(eps: float) -> None:
    if not 0 < eps < math.pi / 4:
        raise ValueError("eps must lie in (0, pi/4)")


def z_near(s: PolySample, phi: float, eps: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """Near-root sum ``sum_{|theta_q - phi| <= eps} (n_q/s_N) h(phi - theta_q) - (M_N/s_N) mu_eps``."""
    _check_eps(eps)
    w = _wrap(s.angles, phi)
    d = np.minimum(w, TWO_PI - w)
    if np.any(d < COLLISION_TOL):
        raise SingularityError(f"a root coincides with phi={phi!r}")
    near = d <= eps
    m = s.mults[near] / s.s_N
    return float(m @ h(d[near]) - s.norms.mass * mu_eps(eps, q))


def t_eps_byparts(s: PolySample, phi: float, eps: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``[h W_phi]_eps^{2pi-eps} - int_eps^{2pi-eps} W_phi cot(x/2) dx``, exactly.

    ``F_phi`` is constant between consecutive far roots, so its part of the
    integral is ``sum F_c (h(end) - h(start))``; the linear drift integrates in
    closed form to ``(M_N/s_N)((pi - eps)/pi h(eps) + mu_eps)``.
    """
    _check_eps(eps)
    F = cycled_ecdf(s, phi)
    pts = F.points
    lo, hi = eps, TWO_PI - eps
    if np.any(np.abs(pts - lo) < BOUNDARY_TOL) or np.any(np.abs(pts - hi) < BOUNDARY_TOL):
        raise BoundaryError(f"a root lies at distance eps={eps!r} from phi={phi!r}")
    far = (pts > lo) & (pts < hi)
    knots = np.concatenate([[lo], pts[far], [hi]])
    f_lo = F.masses[pts < lo].sum()
    f_steps = f_lo + np.concatenate([[0.0], np.cumsum(F.masses[far])])
    hk = h(knots)
    stieltjes = float(f_steps @ np.diff(hk))
    mass = s.norms.mass
    w_lo = f_lo - mass * lo / TWO_PI
    w_hi = f_steps[-1] - mass * hi / TWO_PI
    he = float(hk[0])
    boundary = he * w_hi - he * w_lo  # h(2pi - eps) = h(eps)
    drift = mass * ((math.pi - eps) / math.pi * he + mu_eps(eps, q))
    return boundary - stieltjes + drift


def decomposition_residual(s: PolySample, phi: float, eps: float, q: QuadratureConfig = DEFAULT_QUAD) -> float:
    """``T_N(phi) - t_eps_byparts - z_near`` (zero up to rounding)."""
    return scaled_log_magnitude(s, phi) - t_eps_byparts(s, phi, eps, q) - z_near(s, phi, eps, q)
