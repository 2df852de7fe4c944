"""Monte Carlo campaigns and the small statistics toolbox they report with.

Replicate ``i`` of a campaign draws from
``SeedSequence(master_seed, spawn_key=(stream, ..., i))``, so samples depend
only on the configuration and master seed, never on thread count or
execution order.
"""
from __future__ import annotations

import hashlib
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, is_dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.special import ndtr

from . import bridge, limitcov
from .bridge import IntegralConfig
from .multiplicity import MultiplicitySpec
from .polycircle import GridConfig, maximize, sample_poly, scaled_log_magnitude

STREAMS = {
    "marginal_clt": 1,
    "joint_cov": 2,
    "istar": 3,
    "convergence": 4,
    "band": 5,
    "sample_poly": 6,
    "bridge_sim": 7,
}


def replicate_seed(master_seed: int, stream: str, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(STREAMS[stream], *map(int, key)))


def map_replicates(fn: Callable[[int], object], n: int, threads: int = 1) -> list:
    """``[fn(0), ..., fn(n-1)]``, optionally on a thread pool (results keep index order)."""
    if threads <= 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))


# --- statistics -------------------------------------------------------------


def ks_statistic(sample, reference) -> float:
    """Kolmogorov-Smirnov sup-distance.

    ``reference`` is either a vectorised CDF (one-sample statistic) or a
    second sample (two-sample statistic).
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n == 0:
        raise ValueError("empty sample")
    if callable(reference):
        cdf = np.asarray(reference(x), dtype=float)
        i = np.arange(1, n + 1)
        return float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    y = np.sort(np.asarray(reference, dtype=float).ravel())
    if y.size == 0:
        raise ValueError("empty reference sample")
    pooled = np.concatenate([x, y])
    fx = np.searchsorted(x, pooled, side="right") / n
    fy = np.searchsorted(y, pooled, side="right") / y.size
    return float(np.max(np.abs(fx - fy)))


def normal_cdf(var: float) -> Callable[[np.ndarray], np.ndarray]:
    sd = math.sqrt(var)
    return lambda x: ndtr(np.asarray(x) / sd)


@dataclass
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    total: int

    def rows(self):
        for lo, hi, c in zip(self.edges[:-1], self.edges[1:], self.counts):
            yield float(lo), float(hi), int(c)


def histogram(sample, bins: int, range: tuple[float, float] | None = None) -> Histogram:
    """Uniform-bin histogram; an all-equal sample lands in one bin."""
    x = np.asarray(sample, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty sample")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    counts, edges = np.histogram(x, bins=bins, range=range)
    if range is not None:
        # values outside an explicit range are not silently dropped
        inside = (x >= range[0]) & (x <= range[1])
        if not inside.all():
            raise ValueError("sample has values outside the histogram range")
    return Histogram(edges=edges, counts=counts, total=int(x.size))


def summary(x) -> dict:
    x = np.asarray(x, dtype=float)
    return {
        "n": int(x.size),
        "mean": float(x.mean()),
        "var": float(x.var(ddof=1)) if x.size > 1 else 0.0,
        "min": float(x.min()),
        "max": float(x.max()),
    }


# --- reports ----------------------------------------------------------------


def _jsonable(obj):
    if is_dataclass(obj):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, MultiplicitySpec):
        return obj.to_record()
    return obj


def config_hash(config: dict) -> str:
    blob = json.dumps(_jsonable(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass
class RunReport:
    experiment: str
    config: dict
    master_seed: int
    replicate_seeds: dict
    samples: dict[str, np.ndarray]
    summary: dict
    wall_clock: float = 0.0
    histogram: Histogram | None = None
    extra: dict = field(default_factory=dict)

    @property
    def config_hash(self) -> str:
        return config_hash(self.config)

    def to_dict(self, with_samples: bool = True) -> dict:
        out = {
            "experiment": self.experiment,
            "config": _jsonable(self.config),
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "replicate_seeds": self.replicate_seeds,
            "summary": _jsonable(self.summary),
            "wall_clock": self.wall_clock,
        }
        if with_samples:
            out["samples"] = _jsonable(self.samples)
        if self.histogram is not None:
            out["histogram"] = _jsonable(self.histogram)
        if self.extra:
            out["extra"] = _jsonable(self.extra)
        return out


def _seed_scheme(stream: str, key_desc: str, count: int) -> dict:
    return {
        "scheme": f"SeedSequence(master_seed, spawn_key=({STREAMS[stream]}, {key_desc}))",
        "stream": STREAMS[stream],
        "count": count,
    }


# --- campaigns --------------------------------------------------------------


def run_marginal_clt(
    spec: MultiplicitySpec,
    n: int,
    m: int,
    psi: float = 0.0,
    seed: int = 0,
    threads: int = 1,
    q: limitcov.QuadratureConfig = limitcov.DEFAULT_QUAD,
) -> RunReport:
    """M replicates of ``T_N(psi)`` and their KS distance to N(0, sigma^2)."""
    t0 = time.perf_counter()

    def one(i):
        s = sample_poly(spec, n, replicate_seed(seed, "marginal_clt", i))
        return scaled_log_magnitude(s, psi)

    t = np.array(map_replicates(one, m, threads))
    var = limitcov.sigma_sq(q)
    stats = summary(t)
    stats.update(sigma_sq=var, ks=ks_statistic(t, normal_cdf(var)))
    return RunReport(
        experiment="marginal_clt",
        config={"spec": spec, "N": n, "M": m, "psi": psi},
        master_seed=seed,
        replicate_seeds=_seed_scheme("marginal_clt", "i", m),
        samples={"T": t},
        summary=stats,
        wall_clock=time.perf_counter() - t0,
    )


def run_joint_cov(
    spec: MultiplicitySpec,
    n: int,
    m: int,
    phi_pair: tuple[float, float],
    seed: int = 0,
    threads: int = 1,
    q: limitcov.QuadratureConfig = limitcov.DEFAULT_QUAD,
) -> RunReport:
    """Empirical ``Cov(T_N(phi_1), T_N(phi_2))`` against ``K(|phi_1 - phi_2|)``.

    The standard error is the sample standard deviation of the centred
    products over sqrt(M).
    """
    t0 = time.perf_counter()
    p1, p2 = map(float, phi_pair)

    def one(i):
        s = sample_poly(spec, n, replicate_seed(seed, "joint_cov", i))
        v = scaled_log_magnitude(s, np.array([p1, p2]))
        return v[0], v[1]

    pairs = np.array(map_replicates(one, m, threads))
    a, b = pairs[:, 0], pairs[:, 1]
    prod = (a - a.mean()) * (b - b.mean())
    cov = float(prod.sum() / (m - 1))
    se = float(prod.std(ddof=1) / math.sqrt(m))
    target = limitcov.covariance_kernel(abs(p1 - p2), q)
    return RunReport(
        experiment="joint_cov",
        config={"spec": spec, "N": n, "M": m, "phi_pair": [p1, p2]},
        master_seed=seed,
        replicate_seeds=_seed_scheme("joint_cov", "i", m),
        samples={"T1": a, "T2": b},
        summary={
            "cov": cov,
            "se": se,
            "K": target,
            "z": (cov - target) / se if se > 0 else 0.0,
            "var1": float(a.var(ddof=1)),
            "var2": float(b.var(ddof=1)),
        },
        wall_clock=time.perf_counter() - t0,
    )


def istar_sample(
    n_paths: int,
    grid: int,
    scaling: str = "unit_variance_normalized",
    c: IntegralConfig | None = None,
    seed: int = 0,
    threads: int = 1,
    generation_grid: int | None = None,
    chunk: int = 128,
):
    """``(I*, phi*, fubini_ratio)`` arrays for ``n_paths`` bridges.

    Path ``i`` is drawn on ``generation_grid`` (default ``grid``) from its own
    seed and decimated to ``grid``; equal seeds with a common generation grid
    therefore give nested paths at different resolutions.
    """
    c = c or IntegralConfig()
    gen_grid = generation_grid or grid
    if gen_grid % grid:
        raise ValueError("generation_grid must be a multiple of grid")
    stride = gen_grid // grid

    def block(k):
        lo, hi = k * chunk, min(n_paths, (k + 1) * chunk)
        vals = np.vstack([
            bridge.bridge_values(1, gen_grid, scaling, np.random.default_rng(replicate_seed(seed, "istar", i)))
            for i in range(lo, hi)
        ])[:, ::stride]
        prof = bridge.i_profile(vals, c)
        j = np.argmax(prof, axis=1)
        top = prof[np.arange(prof.shape[0]), j]
        scale = np.abs(prof).max(axis=1)
        fub = np.abs(prof.mean(axis=1)) / np.where(scale > 0, scale, 1.0)
        return top, j * (2 * math.pi / grid), fub, prof[0] if k == 0 else None

    blocks = map_replicates(block, -(-n_paths // chunk), threads)
    istar = np.concatenate([b[0] for b in blocks])
    phi = np.concatenate([b[1] for b in blocks])
    fub = np.concatenate([b[2] for b in blocks])
    return istar, phi, fub, blocks[0][3]


def run_istar(
    n_paths: int,
    grid: int,
    scaling: str = "unit_variance_normalized",
    c: IntegralConfig | None = None,
    seed: int = 0,
    threads: int = 1,
    bins: int = 50,
    generation_grid: int | None = None,
) -> RunReport:
    """Distribution of ``I* = max_phi I_phi`` over simulated bridges."""
    c = c or IntegralConfig()
    t0 = time.perf_counter()
    istar, phi, fub, first_profile = istar_sample(
        n_paths, grid, scaling, c, seed, threads, generation_grid
    )
    stats = summary(istar)
    stats.update(min_istar=float(istar.min()), all_positive=bool(np.all(istar > 0)),
                 max_fubini_ratio=float(fub.max()))
    return RunReport(
        experiment="istar",
        config={"n_paths": n_paths, "grid": grid, "scaling": scaling, "integral": c,
                "generation_grid": generation_grid or grid},
        master_seed=seed,
        replicate_seeds=_seed_scheme("istar", "i", n_paths),
        samples={"istar": istar, "phi_star": phi, "fubini_ratio": fub},
        summary=stats,
        wall_clock=time.perf_counter() - t0,
        histogram=histogram(istar, bins),
        extra={"first_profile": first_profile},
    )


def tstar_sample(
    spec: MultiplicitySpec,
    n: int,
    m: int,
    seed: int,
    stream: str = "convergence",
    threads: int = 1,
    g: GridConfig | None = None,
) -> np.ndarray:
    """M replicates of ``T_N* = max_psi T_N(psi)``."""
    def one(i):
        s = sample_poly(spec, n, replicate_seed(seed, stream, n, i))
        return maximize(s, g).t_star

    return np.array(map_replicates(one, m, threads))


def run_convergence(
    spec: MultiplicitySpec,
    n_schedule: Sequence[int],
    m: int,
    reference: np.ndarray,
    seed: int = 0,
    threads: int = 1,
    g: GridConfig | None = None,
    band: tuple[float, float] = (1.0, 5.0),
) -> RunReport:
    """Two-sample KS distance of ``T_N*`` to a reference ``I*`` sample along N."""
    t0 = time.perf_counter()
    ref = np.asarray(reference, dtype=float)
    samples, rows = {}, []
    for n in n_schedule:
        t = tstar_sample(spec, n, m, seed, "convergence", threads, g)
        samples[f"N={n}"] = t
        rows.append({
            "N": int(n),
            "ks": ks_statistic(t, ref),
            "band_fraction": float(np.mean((t >= band[0]) & (t <= band[1]))),
            "min_tstar": float(t.min()),
            "mean_tstar": float(t.mean()),
        })
    ks = [r["ks"] for r in rows]
    return RunReport(
        experiment="convergence",
        config={"spec": spec, "N_schedule": list(map(int, n_schedule)), "M": m,
                "grid": g or GridConfig(), "reference_size": int(ref.size), "band": list(band)},
        master_seed=seed,
        replicate_seeds=_seed_scheme("convergence", "N, i", m * len(n_schedule)),
        samples=samples,
        summary={
            "per_N": rows,
            "ks_nonincreasing": bool(all(b <= a for a, b in zip(ks, ks[1:]))),
            "reference_mean": float(ref.mean()),
        },
        wall_clock=time.perf_counter() - t0,
    )


def run_band(
    spec: MultiplicitySpec,
    n_list: Sequence[int],
    m: int = 100,
    seed: int = 0,
    threads: int = 1,
    g: GridConfig | None = None,
) -> RunReport:
    """``log max |P_N|^2`` per N and replicate, with the fraction inside [s_N, 5 s_N]."""
    t0 = time.perf_counter()
    rows, inside = [], []
    for n in n_list:
        t = tstar_sample(spec, n, m, seed, "band", threads, g)
        s_n = sample_poly(spec, n, 0).s_N
        for i, v in enumerate(t):
            rows.append((int(n), i, float(v * s_n), s_n, 5 * s_n))
        inside.append((t >= 1.0) & (t <= 5.0))
    table = np.array(rows)
    frac = [float(x.mean()) for x in inside]
    return RunReport(
        experiment="band",
        config={"spec": spec, "N_list": list(map(int, n_list)), "M": m, "grid": g or GridConfig()},
        master_seed=seed,
        replicate_seeds=_seed_scheme("band", "N, i", m * len(n_list)),
        samples={"table": table},
        summary={
            "fraction_per_N": dict(zip(map(int, n_list), frac)),
            "fraction_overall": float(np.concatenate(inside).mean()),
        },
        wall_clock=time.perf_counter() - t0,
    )
