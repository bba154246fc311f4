"""Compiled kernels versus the numpy fallback.

Times the raw kernels on synthetic inputs and then the end-to-end workloads
that lean on them (one solve, one sampling run), switching backends by
rebinding the module-level kernel functions.

Usage: python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import timeit
from contextlib import contextmanager

import numpy as np

from klminimax import _kernels, densities, saddle, verify
from klminimax._kernels import _pykernels


@contextmanager
def backend(module):
    saved = (_kernels.gk21_reduce, _kernels.pchip_slopes, _kernels.pchip_eval)
    _kernels.gk21_reduce = module.gk21_reduce
    _kernels.pchip_slopes = module.pchip_slopes
    _kernels.pchip_eval = module.pchip_eval
    try:
        yield
    finally:
        _kernels.gk21_reduce, _kernels.pchip_slopes, _kernels.pchip_eval = saved


def workloads():
    rng = np.random.default_rng(0)
    fvals = rng.standard_normal((4000, 21))
    half = rng.uniform(1e-3, 1.0, 4000)
    x = np.cumsum(rng.uniform(0.1, 1.0, 4000))
    y = np.cumsum(rng.uniform(0.0, 1.0, 4000))
    t = rng.uniform(x[0], x[-1], 1_000_000)
    pair = densities.gaussian_pair(1.0)
    sp = saddle.solve(pair, 0.1)

    def pchip():
        d = _kernels.pchip_slopes(x, y)
        _kernels.pchip_eval(x, y, d, t)

    return {
        "gk21_reduce (4000 panels)": lambda: _kernels.gk21_reduce(fvals, half),
        "pchip slopes+eval (1e6 points)": pchip,
        "solve gaussian eps=0.1": lambda: saddle.solve(pair, 0.1),
        "sample_density g0L (1e6)": lambda: verify.sample_density(sp.g0L, 1_000_000, seed=0),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    if _kernels.compiled_backend is None:
        print("compiled extension not built; only the numpy fallback is timed")
    modules = [("python", _pykernels)]
    if _kernels.compiled_backend is not None:
        modules.append(("cython", _kernels.compiled_backend))

    jobs = workloads()
    best = {}
    for name, module in modules:
        with backend(module):
            for label, job in jobs.items():
                best[label, name] = min(timeit.repeat(job, number=1, repeat=args.repeat))

    print(f"{'workload':34s} {'python':>10s} {'cython':>10s} {'speedup':>8s}")
    for label in jobs:
        py = best[label, "python"]
        cy = best.get((label, "cython"))
        cy_text = f"{cy * 1e3:8.2f}ms" if cy is not None else f"{'-':>10s}"
        ratio = f"{py / cy:7.2f}x" if cy else f"{'-':>8s}"
        print(f"{label:34s} {py * 1e3:8.2f}ms {cy_text} {ratio}")


if __name__ == "__main__":
    main()
