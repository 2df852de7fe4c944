"""Brownian bridges on [0, 2pi], their cyclic shifts, and the singular
functional ``I_phi = int W_phi(x) cot(x/2) dx`` with its maximum over phi.

Paths are piecewise linear between grid nodes ``x_j = 2 pi j / M`` and the
integral against ``g = cot(x/2)`` is evaluated exactly for that interpolant:
on each panel ``int g = h`` and ``int x g = x h - int h`` with
``int_0^x h = -2 Cl_2(x)``. The resulting node weights turn ``I_phi`` into a
cyclic correlation, so all M shifts cost one FFT pair.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from ._special import TWO_PI, h, h_integral
from .polycircle import make_rng

SCALINGS = ("unit_variance_normalized", "paper_bm_subtraction")
TAIL_POLICIES = ("drop", "asymptotic_bound")
DEFAULT_TRUNC = 2 * math.pi * 1e-4


class AlignmentError(ValueError):
    """A shift angle does not fall on the path grid."""


@dataclass(frozen=True)
class BridgePath:
    """Node values ``W(2 pi j / M)``, j = 0..M, with both endpoints exactly zero."""

    grid_size: int
    values: np.ndarray
    seed: dict | None = None
    scaling: str = "unit_variance_normalized"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if self.grid_size < 2 or v.shape != (self.grid_size + 1,):
            raise ValueError("values must have grid_size + 1 entries, grid_size >= 2")
        if v[0] != 0.0 or v[-1] != 0.0:
            raise ValueError("bridge paths vanish at 0 and 2pi")
        if self.scaling not in SCALINGS:
            raise ValueError(f"unknown scaling {self.scaling!r}")
        object.__setattr__(self, "values", v)

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.grid_size + 1) * (TWO_PI / self.grid_size)

    @classmethod
    def from_function(cls, f, grid_size: int, **kw) -> "BridgePath":
        x = np.arange(grid_size + 1) * (TWO_PI / grid_size)
        v = np.asarray(f(x), dtype=float)
        v[0] = v[-1] = 0.0
        return cls(grid_size, v, **kw)


@dataclass(frozen=True)
class IntegralConfig:
    """Endpoint truncation ``trunc_eps`` and what to do with the two tails.

    ``drop`` integrates over [eps, 2pi - eps] only. ``asymptotic_bound`` adds
    each tail assuming the path is linear between the pinned endpoint and its
    value at distance eps; for eps below the grid step this is the exact
    integral of the interpolant over the whole circle.
    """

    trunc_eps: float = DEFAULT_TRUNC
    tail_policy: str = "drop"

    def __post_init__(self):
        if not 0 < self.trunc_eps < math.pi / 4:
            raise ValueError("trunc_eps must lie in (0, pi/4)")
        if self.tail_policy not in TAIL_POLICIES:
            raise ValueError(f"unknown tail policy {self.tail_policy!r}")


def bridge_values(n_paths: int, grid_size: int, scaling: str, rng: np.random.Generator) -> np.ndarray:
    """``(n_paths, grid_size + 1)`` array of bridge node values."""
    if scaling not in SCALINGS:
        raise ValueError(f"unknown scaling {scaling!r}")
    m = grid_size
    # paper_bm_subtraction: B has Var B(x) = x on [0, 2pi]; normalized divides by sqrt(2pi)
    sd = math.sqrt(TWO_PI / m) if scaling == "paper_bm_subtraction" else math.sqrt(1.0 / m)
    out = np.zeros((n_paths, m + 1))
    steps = rng.standard_normal((n_paths, m)) * sd
    np.cumsum(steps, axis=1, out=out[:, 1:])
    frac = np.arange(m + 1) / m
    out -= frac[None, :] * out[:, -1:]
    out[:, 0] = 0.0
    out[:, -1] = 0.0
    return out


def sample_bridge(grid_size: int, scaling: str = "unit_variance_normalized", rng=0) -> BridgePath:
    """Brownian motion on the grid pinned by subtracting ``(x / 2pi) B(2pi)``."""
    if grid_size < 2:
        raise ValueError("grid_size must be >= 2")
    gen, record = make_rng(rng)
    return BridgePath(grid_size, bridge_values(1, grid_size, scaling, gen)[0], record, scaling)


def _index(grid_size: int, phi: float) -> int:
    x = phi * grid_size / TWO_PI
    j = round(x)
    if abs(x - j) > 1e-9 or not 0 <= j <= grid_size:
        raise AlignmentError(f"phi={phi!r} is not on the {grid_size}-point grid")
    return j % grid_size


def snap(grid_size: int, phi: float) -> float:
    """Nearest grid angle to ``phi``."""
    return (round(float(phi) * grid_size / TWO_PI) % grid_size) * (TWO_PI / grid_size)


def shift_path(p: BridgePath, phi: float) -> BridgePath:
    """Cyclic shift: ``W_phi(x) = W((phi + x) mod 2pi) - W(phi)``."""
    j = _index(p.grid_size, phi)
    base = p.values[:-1]
    shifted = np.empty_like(p.values)
    shifted[:-1] = np.roll(base, -j) - base[j]
    shifted[-1] = 0.0
    return replace(p, values=shifted)


def _panel_weights(m: int, lo: float, hi: float) -> np.ndarray:
    """Node weights of ``int_lo^hi W g`` for the piecewise-linear W on m panels."""
    step = TWO_PI / m
    left = np.arange(m) * step
    a = left
    u = np.clip(left, lo, hi)
    v = np.clip(left + step, lo, hi)
    live = v > u
    a, u, v = a[live], u[live], v[live]
    j = np.flatnonzero(live)
    hu, hv = h(u), h(v)
    # (x - a) h(x) -> 0 as x -> a even where h(a) = -inf
    au = np.where(u > a, (u - a) * hu, 0.0)
    j0 = hv - hu
    j1 = (v - a) * hv - au - (h_integral(v) - h_integral(u))
    w = np.zeros(m + 1)
    np.add.at(w, j, j0 - j1 / step)
    np.add.at(w, j + 1, j1 / step)
    w[0] = w[m] = 0.0  # the shifted path vanishes there; h is infinite there
    return w


def _interp_weights(m: int, x: float) -> np.ndarray:
    """Weights reproducing the linear interpolant at ``x``."""
    w = np.zeros(m + 1)
    t = x * m / TWO_PI
    i = min(int(math.floor(t)), m - 1)
    f = t - i
    w[i] += 1.0 - f
    w[i + 1] += f
    return w


@lru_cache(maxsize=64)
def integral_weights(m: int, trunc_eps: float, tail_policy: str) -> np.ndarray:
    """Weights ``w`` with ``I = w @ W_phi`` over the M + 1 nodes (read-only)."""
    eps = trunc_eps
    w = _panel_weights(m, eps, TWO_PI - eps)
    if tail_policy == "asymptotic_bound":
        # int_0^eps (x/eps) g = h(eps) - C(eps)/eps; the right tail mirrors with a sign flip
        c = float(h(eps) - h_integral(eps) / eps)
        w += c * (_interp_weights(m, eps) - _interp_weights(m, TWO_PI - eps))
        w[0] = w[m] = 0.0
    w.setflags(write=False)
    return w


def integral_I(p: BridgePath, phi: float = 0.0, c: IntegralConfig | None = None) -> float:
    """``I_phi`` for the piecewise-linear path, panel-exact."""
    c = c or IntegralConfig()
    w = integral_weights(p.grid_size, c.trunc_eps, c.tail_policy)
    return float(w @ shift_path(p, phi).values)


def integral_I_eps(p: BridgePath, phi: float, eps: float) -> float:
    """``[W_phi h]_eps^{2pi-eps} - int_eps^{2pi-eps} W_phi g``."""
    if not 0 < eps < math.pi / 4:
        raise ValueError("eps must lie in (0, pi/4)")
    q = shift_path(p, phi).values
    m = p.grid_size
    he = float(h(eps))
    boundary = he * (_interp_weights(m, TWO_PI - eps) @ q - _interp_weights(m, eps) @ q)
    return float(boundary - integral_weights(m, eps, "drop") @ q)


def i_profile(values: np.ndarray, c: IntegralConfig | None = None) -> np.ndarray:
    """``I_phi`` at every grid angle ``phi_j``, j = 0..M-1, via FFT.

    ``values`` is one path (M+1,) or a batch (n, M+1). Uses
    ``I_j = sum_m w_m W_{j+m} - W_j sum_m w_m`` (indices mod M).
    """
    c = c or IntegralConfig()
    v = np.atleast_2d(values)
    m = v.shape[1] - 1
    w = integral_weights(m, c.trunc_eps, c.tail_policy)
    base = v[:, :-1]
    corr = np.fft.irfft(np.fft.rfft(base, axis=1) * np.conj(np.fft.rfft(w[:-1]))[None, :], n=m, axis=1)
    out = corr - base * w.sum()
    return out[0] if np.ndim(values) == 1 else out


def maximize_I(p: BridgePath, c: IntegralConfig | None = None) -> tuple[float, float]:
    """``(phi*, I*)`` over the grid-aligned shifts."""
    prof = i_profile(p.values, c)
    j = int(np.argmax(prof))
    return j * (TWO_PI / p.grid_size), float(prof[j])
