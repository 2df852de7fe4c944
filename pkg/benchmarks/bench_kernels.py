"""Compare the compiled and numpy log-modulus kernels.

    python3 benchmarks/bench_kernels.py --sizes 250,1000,4000 --repeat 5
"""
import argparse
import time

import numpy as np

from ranpoly import kernels
from ranpoly.kernels import available_backends
from ranpoly.multiplicity import MultiplicitySpec
from ranpoly.polycircle import maximize, sample_poly


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="250,1000,4000")
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    backends = available_backends()
    if "cython" not in backends:
        print("compiled backend not built; only the numpy kernels are timed")
    print(f"{'N':>6} {'op':<10} " + " ".join(f"{b + ' [ms]':>14}" for b in backends) + "  speedup")
    for n in (int(x) for x in args.sizes.split(",")):
        s = sample_poly(MultiplicitySpec.constant(1), n, args.seed)
        grid = np.arange(max(4096, 8 * n)) * (2 * np.pi / max(4096, 8 * n))
        pts = np.random.default_rng(args.seed).random(64) * 2 * np.pi
        ops = {
            "grid": lambda mod: mod.grid_log_modulus(grid, s.angles, s.mults),
            "point": lambda mod: mod.point_log_modulus(pts, s.angles, s.mults),
        }
        for name, op in ops.items():
            t = {b: best_of(lambda: op(mod), args.repeat) for b, mod in backends.items()}
            ratio = t["python"] / t["cython"] if "cython" in t else float("nan")
            print(f"{n:>6} {name:<10} " + " ".join(f"{1e3 * v:>14.3f}" for v in t.values()) + f"  {ratio:6.1f}x")
        # end-to-end maximize with each backend patched in
        t = {}
        for b, mod in backends.items():
            saved = kernels.grid_log_modulus, kernels.point_log_modulus
            kernels.grid_log_modulus, kernels.point_log_modulus = mod.grid_log_modulus, mod.point_log_modulus
            try:
                t[b] = best_of(lambda: maximize(s), args.repeat)
            finally:
                kernels.grid_log_modulus, kernels.point_log_modulus = saved
        ratio = t["python"] / t["cython"] if "cython" in t else float("nan")
        print(f"{n:>6} {'maximize':<10} " + " ".join(f"{1e3 * v:>14.3f}" for v in t.values()) + f"  {ratio:6.1f}x")


if __name__ == "__main__":
    main()
