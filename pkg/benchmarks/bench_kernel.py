"""Compare the compiled and pure-Python simulation kernels.

    python benchmarks/bench_kernel.py [--individuals N] [--repeat R]

Both kernels run the same seeds; the script checks the traces are
bit-identical before reporting time per event.
"""

import argparse
import time

from epicluster import _backend, model
from epicluster.sim import StopCondition, simulate

WORKLOADS = {
    "default (2, 0.5, 0.5)": (2.0, 0.5, 0.5),
    "fast growth (3, 0.3, 0.7)": (3.0, 0.3, 0.7),
    "no detection (1, 0.5, 0)": (1.0, 0.5, 0.0),
}


def surviving_seed(params, stop):
    for seed in range(1000):
        if simulate(params, seed, stop).survived:
            return seed
    raise RuntimeError("no surviving seed found")


def time_run(params, seed, stop, backend, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        trace = simulate(params, seed, stop, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--individuals", type=int, default=50_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    if "cython" not in _backend.backends:
        print("compiled kernel not built; only the Python kernel is available")
        return 1
    stop = StopCondition(max_individuals=args.individuals)
    print(f"{'workload':28s} {'events':>9s} {'cython us/ev':>13s} {'python us/ev':>13s} {'speedup':>8s}")
    for name, gpd in WORKLOADS.items():
        params = model.validate(*gpd, detection_free=gpd[2] == 0.0)
        seed = surviving_seed(params, StopCondition(max_individuals=200))
        tc, a = time_run(params, seed, stop, "cython", args.repeat)
        tp, b = time_run(params, seed, stop, "python", max(1, args.repeat // 3))
        if not a.same_as(b):
            raise SystemExit(f"{name}: kernels disagree")
        n = a.n_events
        print(f"{name:28s} {n:9d} {1e6 * tc / n:13.3f} {1e6 * tp / n:13.3f} {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
