"""Random polynomials ``P_N(z) = prod (z - z_k)^{n_k}`` with roots uniform on
the unit circle, the log squared modulus on the circle, and its maximum.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from . import kernels
from ._special import LOG4, TWO_PI, SingularityError, h, wrap_signed
from .multiplicity import MultiplicitySpec, PrefixNorms, prefix_norms

log = logging.getLogger(__name__)

# angular distance below which psi is treated as sitting on a root
COLLISION_TOL = 1e-13
INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def make_rng(seed) -> tuple[np.random.Generator, dict | None]:
    """Generator plus a JSON-able record of how it was seeded."""
    if isinstance(seed, np.random.Generator):
        ss = getattr(seed.bit_generator, "seed_seq", None)
        return seed, _seed_record(ss) if isinstance(ss, np.random.SeedSequence) else None
    if isinstance(seed, np.random.SeedSequence):
        return np.random.default_rng(seed), _seed_record(seed)
    ss = np.random.SeedSequence(int(seed))
    return np.random.default_rng(ss), _seed_record(ss)


def _seed_record(ss: np.random.SeedSequence) -> dict:
    return {"entropy": int(ss.entropy), "spawn_key": [int(k) for k in ss.spawn_key]}


@dataclass(frozen=True)
class PolySample:
    """Root angles ``theta_k`` in [0, 2pi) with multiplicities ``n_k``."""

    angles: np.ndarray
    mults: np.ndarray
    norms: PrefixNorms
    spec: MultiplicitySpec | None = None
    seed: dict | None = None

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        m = np.asarray(self.mults, dtype=float)
        if a.ndim != 1 or a.shape != m.shape or a.size == 0:
            raise ValueError("angles and mults must be equal-length nonempty 1-d arrays")
        if np.any(a < 0) or np.any(a >= TWO_PI):
            raise ValueError("angles must lie in [0, 2pi)")
        if np.any(m < 1) or np.any(m != np.round(m)):
            raise ValueError("multiplicities must be positive integers")
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "mults", m)

    @property
    def N(self) -> int:
        return self.angles.size

    @property
    def s_N(self) -> float:
        return self.norms.s_N

    @classmethod
    def from_arrays(cls, angles, mults=None, **kw) -> "PolySample":
        angles = np.asarray(angles, dtype=float)
        if mults is None:
            mults = np.ones_like(angles)
        ints = [int(v) for v in np.asarray(mults)]
        norms = PrefixNorms(N=len(ints), sumsq=sum(v * v for v in ints), total=sum(ints))
        return cls(angles=angles, mults=np.asarray(ints, dtype=float), norms=norms, **kw)

    def rotated(self, delta: float) -> "PolySample":
        a = np.mod(self.angles + delta, TWO_PI)
        a[a >= TWO_PI] = 0.0
        return replace(self, angles=a)

    def to_record(self) -> dict:
        return {
            "seed": self.seed,
            "N": self.N,
            "spec": self.spec.to_record() if self.spec else None,
            "angles": [float(x) for x in self.angles],
            "mults": [int(x) for x in self.mults],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "PolySample":
        spec = MultiplicitySpec.from_record(rec["spec"]) if rec.get("spec") else None
        mults = rec.get("mults")
        if mults is None:
            mults = spec.terms(int(rec["N"]))
        return cls.from_arrays(rec["angles"], mults, spec=spec, seed=rec.get("seed"))


def sample_poly(spec: MultiplicitySpec, n: int, rng=0) -> PolySample:
    """Draw N i.i.d. uniform root angles; ``rng`` is a seed, SeedSequence or Generator."""
    gen, record = make_rng(rng)
    angles = gen.random(n) * TWO_PI
    # u * 2pi can round up to 2pi for u within an ulp of 1
    angles[angles >= TWO_PI] = np.nextafter(TWO_PI, 0.0)
    return PolySample(
        angles=angles,
        mults=spec.mults(n),
        norms=prefix_norms(spec, n),
        spec=spec,
        seed=record,
    )


def log_kernel(psi: float) -> float:
    """Single-root term ``log(2(1 - cos psi))``; maximal value log 4 at psi = pi."""
    r = float(wrap_signed(psi))
    if abs(r) < COLLISION_TOL:
        raise SingularityError(f"log kernel is singular at psi={psi!r}")
    return float(h(r))


def _check_clear(s: PolySample, psi: np.ndarray) -> None:
    d = np.abs(wrap_signed(psi[:, None] - s.angles[None, :]))
    if np.any(d < COLLISION_TOL):
        bad = psi[np.any(d < COLLISION_TOL, axis=1)][0]
        raise SingularityError(f"psi={bad!r} coincides with a root")


def log_magnitude(s: PolySample, psi):
    """``L_N(psi) = log|P_N(e^{i psi})|^2``; scalar in, scalar out."""
    p = np.atleast_1d(np.asarray(psi, dtype=float))
    _check_clear(s, p)
    out = kernels.point_log_modulus(p, s.angles, s.mults)
    return float(out[0]) if np.ndim(psi) == 0 else out


def scaled_log_magnitude(s: PolySample, psi):
    """``T_N(psi) = L_N(psi) / s_N``."""
    return log_magnitude(s, psi) / s.s_N


def log_magnitude_curve(s: PolySample, n_points: int, offset: float = 0.0):
    """``(psi_j, L_N(psi_j))`` on a uniform grid; ``-inf`` where a grid point hits a root."""
    psi = offset + np.arange(n_points) * (TWO_PI / n_points)
    return psi, kernels.grid_log_modulus(psi, s.angles, s.mults)


@dataclass(frozen=True)
class GridConfig:
    """Uniform circle grid plus golden-section refinement of the best arcs.

    ``base_points`` defaults to max(4096, 8N); ``exclusion`` (the radius kept
    clear of roots during refinement) defaults to pi / base_points, its
    smallest permitted value.
    """

    base_points: int | None = None
    refine_iters: int = 40
    exclusion: float | None = None
    candidates: int = 8
    offset: float = 0.0

    def resolve(self, n: int) -> "GridConfig":
        b = self.base_points if self.base_points is not None else max(4096, 8 * n)
        ex = self.exclusion if self.exclusion is not None else math.pi / b
        cfg = replace(self, base_points=int(b), exclusion=float(ex))
        cfg.validate()
        if b < 4 * n:
            log.warning("base_points=%d < 4N=%d: arcs between roots may be unresolved", b, 4 * n)
        return cfg

    def validate(self) -> None:
        if self.base_points is None or self.base_points < 1024:
            raise ValueError("base_points must be >= 1024")
        if self.refine_iters < 0 or self.candidates < 1:
            raise ValueError("refine_iters must be >= 0 and candidates >= 1")
        if self.exclusion is None or not self.exclusion > 0:
            raise ValueError("exclusion must be positive")
        if self.exclusion < math.pi / self.base_points:
            raise ValueError("exclusion below pi/base_points is not allowed")


class Maximum(NamedTuple):
    psi: float
    t_star: float


def _brackets(s: PolySample, centers: np.ndarray, step: float, excl: float):
    roots = np.unique(s.angles)
    cw = np.mod(centers, TWO_PI)
    pos = np.searchsorted(roots, cw)
    n = roots.size
    above = roots[pos % n] + np.where(pos == n, TWO_PI, 0.0)
    below = roots[pos - 1] - np.where(pos == 0, TWO_PI, 0.0)
    lo = np.maximum(-step, below - cw + excl)
    hi = np.minimum(step, above - cw - excl)
    return lo, hi


def _golden(s: PolySample, centers, lo, hi, iters: int):
    """Vectorised golden-section ascent; returns best (offset, value) per bracket.

    Round 1 evaluates the two interior points, each later round one point, so
    the evaluations for ``iters`` are a prefix of those for ``iters + 1``.
    """
    a, b = lo.copy(), hi.copy()
    x1 = b - INV_PHI * (b - a)
    x2 = a + INV_PHI * (b - a)
    f = kernels.point_log_modulus(np.concatenate([centers + x1, centers + x2]), s.angles, s.mults)
    k = centers.size
    f1, f2 = f[:k], f[k:]
    best = np.where(f1 >= f2, f1, f2)
    arg = np.where(f1 >= f2, x1, x2)
    for _ in range(iters - 1):
        left = f1 > f2  # maximum lies in [a, x2]
        b = np.where(left, x2, b)
        a = np.where(left, a, x1)
        new_x = np.where(left, b - INV_PHI * (b - a), a + INV_PHI * (b - a))
        fn = kernels.point_log_modulus(centers + new_x, s.angles, s.mults)
        x2, f2, x1, f1 = (
            np.where(left, x1, new_x),
            np.where(left, f1, fn),
            np.where(left, new_x, x2),
            np.where(left, fn, f2),
        )
        better = fn > best
        best = np.where(better, fn, best)
        arg = np.where(better, new_x, arg)
    return arg, best


def maximize(s: PolySample, g: GridConfig | None = None) -> Maximum:
    """Locate ``T_N* = max_psi T_N(psi)``.

    ``L_N`` is strictly concave on each arc between consecutive roots, so every
    grid local maximum brackets one arc maximum. The ``candidates`` best are
    refined by golden section inside their arc, kept ``exclusion`` away from
    the roots; the result is the best value seen, grid included.
    """
    cfg = (g or GridConfig()).resolve(s.N)
    b = cfg.base_points
    step = TWO_PI / b
    psi, vals = log_magnitude_curve(s, b, cfg.offset)
    finite = np.isfinite(vals)
    if not finite.all():
        log.debug("skipped %d grid points sitting on roots", int((~finite).sum()))
    j = int(np.argmax(np.where(finite, vals, -np.inf)))
    best_psi, best_val = float(psi[j]), float(vals[j])
    if cfg.refine_iters > 0:
        peak = finite & (vals >= np.roll(vals, 1)) & (vals >= np.roll(vals, -1))
        idx = np.flatnonzero(peak)
        idx = idx[np.argsort(-vals[idx], kind="stable")[: cfg.candidates]]
        if idx.size:
            lo, hi = _brackets(s, psi[idx], step, cfg.exclusion)
            ok = lo < hi
            if ok.any():
                centers = psi[idx][ok]
                arg, val = _golden(s, centers, lo[ok], hi[ok], cfg.refine_iters)
                i = int(np.argmax(val))
                if val[i] > best_val:
                    best_psi, best_val = float(centers[i] + arg[i]), float(val[i])
    return Maximum(psi=float(np.mod(best_psi, TWO_PI)), t_star=best_val / s.s_N)


__all__ = [
    "COLLISION_TOL",
    "GridConfig",
    "LOG4",
    "Maximum",
    "PolySample",
    "SingularityError",
    "log_kernel",
    "log_magnitude",
    "log_magnitude_curve",
    "make_rng",
    "maximize",
    "sample_poly",
    "scaled_log_magnitude",
]
