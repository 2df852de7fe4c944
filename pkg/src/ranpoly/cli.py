"""``ranpoly`` command line.

Each subcommand writes its tables to ``--out`` (atomically, with a ``#``
metadata header) and prints a JSON summary on stdout. Exit status: 0 on
success, 2 for usage/configuration errors, 3 for numerical failures; errors
are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import json
import math
import secrets
import sys
import time
from pathlib import Path

import numpy as np

from . import bridge, coupling, experiments, io, limitcov
from ._special import TWO_PI
from .bridge import IntegralConfig
from .kernels import BACKEND
from .multiplicity import MultiplicitySpec, NormOverflowError, lindberg_verdict
from .polycircle import GridConfig, log_magnitude_curve, maximize, sample_poly, scaled_log_magnitude

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3
U64 = 2**64
# settings that do not affect results and stay out of the config hash
_NOT_HASHED = {"out", "format", "threads", "config", "command", "handler"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> list[int]:
    try:
        return [int(float(x)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _seed(text: str) -> int:
    v = int(text)
    if not 0 <= v < U64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


# --- shared option groups ---------------------------------------------------


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=_seed, default=None, help="master seed (u64); generated if omitted")
    p.add_argument("--out", default="out", help="output directory")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--threads", type=_positive_int, default=1, help="worker threads for ensembles")
    p.add_argument("--config", default=None, help="flat key=value file; flags override it")


def _subcommand(sub, name: str, help: str) -> argparse.ArgumentParser:
    p = sub.add_parser(name, help=help)
    _add_common(p)
    return p


def _add_spec(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", choices=("constant", "power", "geometric", "explicit"), default="constant")
    p.add_argument("--c", type=int, default=1, help="constant multiplicity")
    p.add_argument("--p", default="1", help="power exponent (integer or fraction a/b)")
    p.add_argument("--b", type=int, default=2, help="geometric base")
    p.add_argument("--values", type=_ints, default=None, help="explicit multiplicities, comma separated")


def _add_grid(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base-points", type=int, default=None, help="default max(4096, 8N)")
    p.add_argument("--refine-iters", type=int, default=40)
    p.add_argument("--candidates", type=int, default=8)


def _add_integral(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scaling", choices=bridge.SCALINGS, default="unit_variance_normalized")
    p.add_argument("--trunc-eps", type=float, default=bridge.DEFAULT_TRUNC)
    p.add_argument("--tail-policy", choices=bridge.TAIL_POLICIES, default="drop")


def _spec(a) -> MultiplicitySpec:
    if a.kind == "constant":
        return MultiplicitySpec.constant(a.c)
    if a.kind == "power":
        return MultiplicitySpec.power(a.p)
    if a.kind == "geometric":
        return MultiplicitySpec.geometric(a.b)
    if not a.values:
        raise UsageError("--kind explicit needs --values")
    return MultiplicitySpec.explicit(a.values)


def _grid(a) -> GridConfig:
    return GridConfig(base_points=a.base_points, refine_iters=a.refine_iters, candidates=a.candidates)


def _integral(a) -> IntegralConfig:
    return IntegralConfig(trunc_eps=a.trunc_eps, tail_policy=a.tail_policy)


# --- output -----------------------------------------------------------------


class Writer:
    """Writes tables below ``out``; file names are fixed per subcommand."""

    def __init__(self, out: Path, fmt: str, meta: dict):
        self.out, self.fmt, self.meta = out, fmt, meta
        self.files: list[str] = []

    def table(self, name: str, columns, rows) -> None:
        rows = list(rows)
        if self.fmt == "csv":
            path = io.write_csv(self.out / f"{name}.csv", columns, rows, self.meta)
        else:
            payload = {"columns": list(columns), "rows": [list(r) for r in rows]}
            path = io.write_json(self.out / f"{name}.json", experiments._jsonable(payload), self.meta)
        self.files.append(path.name)

    def report(self, name: str, payload: dict) -> None:
        path = io.write_json(self.out / f"{name}.report.json", experiments._jsonable(payload), self.meta)
        self.files.append(path.name)


# --- subcommands ------------------------------------------------------------


def cmd_lindberg(a, w: Writer) -> dict:
    spec = _spec(a)
    v = lindberg_verdict(spec, a.eps, a.n_schedule, a.tol)
    w.table(
        "lindberg",
        ("eps", "N", "margin", "eps_verdict"),
        [(eps, n, m, v.per_eps[eps]) for eps, row in v.trace.items() for n, m in row],
    )
    return {"spec": str(spec), "verdict": v.verdict, "per_eps": v.per_eps, "trace": v.trace}


def cmd_covariance(a, w: Writer) -> dict:
    if a.points < 2:
        raise UsageError("--points must be >= 2")
    q = limitcov.QuadratureConfig(abs_tol=a.abs_tol)
    theta = np.linspace(0.0, TWO_PI, a.points)
    k = [limitcov.covariance_kernel(float(t), q) for t in theta]
    w.table("covariance", ("theta", "K"), zip(theta.tolist(), k))
    return {"points": a.points, "sigma_sq": limitcov.sigma_sq(q), "K_pi": limitcov.covariance_kernel(math.pi, q)}


def cmd_sample_poly(a, w: Writer) -> dict:
    spec = _spec(a)
    s = sample_poly(spec, a.n, experiments.replicate_seed(a.seed, "sample_poly", 0))
    w.table("roots", ("k", "theta", "mult"), ((k + 1, float(t), int(m)) for k, (t, m) in enumerate(zip(s.angles, s.mults))))
    if a.curve_points:
        psi, L = log_magnitude_curve(s, a.curve_points)
        w.table("curve", ("psi", "L"), zip(psi.tolist(), L.tolist()))
    mx = maximize(s, _grid(a))
    out = {"N": s.N, "s_N": s.s_N, "psi_star": mx.psi, "t_star": mx.t_star, "log_max": mx.t_star * s.s_N}
    if a.coupling_eps is not None:
        phi = a.phi
        t = float(scaled_log_magnitude(s, phi))
        te = coupling.t_eps_byparts(s, phi, a.coupling_eps)
        z = coupling.z_near(s, phi, a.coupling_eps)
        out["coupling"] = {"T": t, "T_eps": te, "Z_eps": z, "residual": t - te - z}
    return out


def cmd_bridge_sim(a, w: Writer) -> dict:
    c = _integral(a)
    vals = np.vstack([
        bridge.bridge_values(1, a.grid, a.scaling, np.random.default_rng(experiments.replicate_seed(a.seed, "bridge_sim", i)))
        for i in range(a.paths)
    ])
    grid = np.arange(a.grid + 1) * (TWO_PI / a.grid)
    w.table("bridge_path", ("psi", "W"), zip(grid.tolist(), vals[0].tolist()))
    prof = bridge.i_profile(vals[0], c)
    w.table("i_profile", ("phi", "I"), zip(grid[:-1].tolist(), prof.tolist()))
    j = int(np.argmax(prof))
    out = {"grid": a.grid, "paths": a.paths, "scaling": a.scaling, "phi_star": float(grid[j]), "istar": float(prof[j])}
    if a.paths > 1 and a.grid % 2 == 0:
        mid = vals[:, a.grid // 2]
        out["var_W_pi"] = float(mid.var(ddof=1))
        out["var_W_pi_se"] = float(np.std((mid - mid.mean()) ** 2, ddof=1) / math.sqrt(a.paths))
    return out


def cmd_istar_dist(a, w: Writer) -> dict:
    r = experiments.run_istar(a.paths, a.grid, a.scaling, _integral(a), a.seed, a.threads, a.bins)
    w.table("istar_hist", ("lo", "hi", "count"), r.histogram.rows())
    w.table("istar_samples", ("path", "istar", "phi_star"),
            zip(range(a.paths), r.samples["istar"].tolist(), r.samples["phi_star"].tolist()))
    return r.summary


def cmd_marginal_clt(a, w: Writer) -> dict:
    r = experiments.run_marginal_clt(_spec(a), a.n, a.m, a.psi, a.seed, a.threads)
    w.table("marginal_clt", ("replicate", "T"), enumerate(r.samples["T"].tolist()))
    return r.summary


def cmd_joint_cov(a, w: Writer) -> dict:
    r = experiments.run_joint_cov(_spec(a), a.n, a.m, (a.phi1, a.phi2), a.seed, a.threads)
    w.table("joint_cov", ("replicate", "T1", "T2"),
            zip(range(a.m), r.samples["T1"].tolist(), r.samples["T2"].tolist()))
    return r.summary


def cmd_convergence(a, w: Writer) -> dict:
    spec = _spec(a)
    ref, _, _, _ = experiments.istar_sample(a.ref_paths, a.ref_grid, "unit_variance_normalized", _integral(a),
                                            a.seed, a.threads)
    g = _grid(a)
    r = experiments.run_convergence(spec, a.n_schedule, a.m, ref, a.seed, a.threads, g)
    w.table("convergence", ("N", "ks", "band_fraction", "min_tstar", "mean_tstar"),
            ((row["N"], row["ks"], row["band_fraction"], row["min_tstar"], row["mean_tstar"]) for row in r.summary["per_N"]))
    rows = []
    for n in a.n_schedule:
        s_n = sample_poly(spec, n, 0).s_N
        rows += [(n, i, float(t * s_n), s_n, 5 * s_n) for i, t in enumerate(r.samples[f"N={n}"])]
    w.table("logmax_band", ("N", "replicate", "log_max", "s_N", "five_s_N"), rows)
    return r.summary


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ranpoly", description="Random circle polynomials and bridge functionals.")
    parser.add_argument("--version", action="version", version=f"ranpoly (kernels: {BACKEND})")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = _subcommand(sub, "lindberg", help="decide the exponential Lindeberg-type condition")
    _add_spec(p)
    p.add_argument("--eps", type=_floats, default=[0.1, 1.0])
    p.add_argument("--n-schedule", type=_ints, default=[100, 1000, 10_000, 100_000, 1_000_000])
    p.add_argument("--tol", type=float, default=1e-6)
    p.set_defaults(handler=cmd_lindberg)

    p = _subcommand(sub, "covariance", help="tabulate the covariance kernel K on [0, 2pi]")
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.set_defaults(handler=cmd_covariance)

    p = _subcommand(sub, "sample-poly", help="one polynomial: roots, log-modulus curve, maximum")
    _add_spec(p)
    _add_grid(p)
    p.add_argument("--n", type=_positive_int, default=500)
    p.add_argument("--curve-points", type=int, default=4096)
    p.add_argument("--coupling-eps", type=float, default=None, help="also report the eps-decomposition at --phi")
    p.add_argument("--phi", type=float, default=0.0)
    p.set_defaults(handler=cmd_sample_poly)

    p = _subcommand(sub, "bridge-sim", help="bridge paths and their I_phi profile")
    _add_integral(p)
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--paths", type=_positive_int, default=1)
    p.set_defaults(handler=cmd_bridge_sim)

    p = _subcommand(sub, "istar-dist", help="distribution of I* over simulated bridges")
    _add_integral(p)
    p.add_argument("--grid", type=int, default=2048)
    p.add_argument("--paths", type=_positive_int, default=10_000)
    p.add_argument("--bins", type=_positive_int, default=50)
    p.set_defaults(handler=cmd_istar_dist)

    p = _subcommand(sub, "marginal-clt", help="replicates of T_N(psi) against the normal limit")
    _add_spec(p)
    p.add_argument("--n", type=_positive_int, default=4000)
    p.add_argument("--m", type=_positive_int, default=2000)
    p.add_argument("--psi", type=float, default=0.0)
    p.set_defaults(handler=cmd_marginal_clt)

    p = _subcommand(sub, "joint-cov", help="empirical covariance of T_N at two angles")
    _add_spec(p)
    p.add_argument("--n", type=_positive_int, default=4000)
    p.add_argument("--m", type=_positive_int, default=4000)
    p.add_argument("--phi1", type=float, default=0.0)
    p.add_argument("--phi2", type=float, default=1.0)
    p.set_defaults(handler=cmd_joint_cov)

    p = _subcommand(sub, "convergence", help="KS distance of T_N* to a reference I* sample")
    _add_spec(p)
    _add_grid(p)
    _add_integral(p)
    p.add_argument("--n-schedule", type=_ints, default=[250, 500, 1000, 2000])
    p.add_argument("--m", type=_positive_int, default=1000)
    p.add_argument("--ref-paths", type=_positive_int, default=10_000)
    p.add_argument("--ref-grid", type=int, default=4096)
    p.set_defaults(handler=cmd_convergence)
    return parser


def _read_config(path: str) -> dict[str, str]:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as e:
        raise UsageError(f"cannot read config file: {e}")
    for num, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{num}: expected key=value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        raise UsageError("a subcommand is required")
    if args.config:
        values = _read_config(args.config)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        actions = {a.dest: a for a in sub._actions}
        defaults = {}
        for key, value in values.items():
            if key not in actions or key in ("config", "help"):
                raise UsageError(f"unknown config key {key!r} for {args.command}")
            act = actions[key]
            try:
                defaults[key] = act.type(value) if act.type else value
            except (argparse.ArgumentTypeError, ValueError) as e:
                raise UsageError(f"config key {key!r}: {e}")
            if act.choices is not None and defaults[key] not in act.choices:
                raise UsageError(f"config key {key!r}: {value!r} not in {list(act.choices)}")
        sub.set_defaults(**defaults)
        args = parser.parse_args(argv)
    return args


def _fail(code: int, kind: str, message: str, **ctx) -> int:
    print(json.dumps({"error": kind, "message": message, **ctx}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parse(argv)
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e))
    generated = args.seed is None
    if generated:
        args.seed = secrets.randbits(64)
    config = {k: v for k, v in vars(args).items() if k not in _NOT_HASHED}
    chash = experiments.config_hash({"command": args.command, **config})
    meta = {"command": args.command, "config_hash": chash, "master_seed": args.seed}
    t0 = time.perf_counter()
    try:
        writer = Writer(Path(args.out), args.format, meta)
        summary = args.handler(args, writer)
        writer.report(args.command, {"config": config, "summary": summary, **meta})
    except UsageError as e:
        return _fail(EXIT_USAGE, "usage", str(e), command=args.command)
    except (ArithmeticError, coupling.BoundaryError, NormOverflowError) as e:
        return _fail(EXIT_NUMERIC, type(e).__name__, str(e), command=args.command)
    except ValueError as e:
        return _fail(EXIT_USAGE, "invalid_config", str(e), command=args.command)
    except OSError as e:
        return _fail(EXIT_USAGE, "io", str(e), command=args.command)
    elapsed = time.perf_counter() - t0
    print(json.dumps(experiments._jsonable({
        **meta, "seed_generated": generated, "files": writer.files, "summary": summary,
    }), sort_keys=True))
    print(f"{args.command}: {len(writer.files)} files in {args.out} ({elapsed:.2f}s)", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
