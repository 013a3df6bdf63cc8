"""Time the compiled kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel and size with the best wall time of each backend,
their ratio, and the largest absolute difference between their outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from qffsample import _fallback
from qffsample.chain import random_walk_chain
from qffsample.families import FamilySpec, gen_family
from qffsample.walkspace import coin_vectors

try:
    from qffsample import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_of(fn, repeat):
    best, out = float("inf"), None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n, rng):
    u = coin_vectors(random_walk_chain(gen_family(FamilySpec("cycle", n)), lazy=True))
    state = rng.normal(size=(n, n, 8)) + 1j * rng.normal(size=(n, n, 8))
    counter = rng.normal(size=(n, n, 32, 2)) + 0j
    weights = np.abs(rng.normal(size=32))
    sym = rng.normal(size=(n, n))
    sym = sym + sym.T
    yield "jacobi_eigh", lambda m: m.jacobi_eigh(sym)[0].copy()
    yield "walk_apply x16", lambda m: (lambda a: (m.walk_apply(a, u, 16, False), a)[1])(state.copy())
    yield "wctrl_apply T=32", lambda m: (lambda a: (m.wctrl_apply(a, u, 32, False), a)[1])(counter.copy())
    stacked = np.ascontiguousarray(np.moveaxis(counter[..., 0:1], 2, 0))
    yield "walk_horner P=32", lambda m: m.walk_horner(stacked, u, weights, False)
    yield "walk_powers P=32", lambda m: m.walk_powers(np.ascontiguousarray(state[..., :2]), u, weights, True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", default="8,16,32")
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled extension not available; run `pip install -e . --no-build-isolation` first")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':<20}{'n':>5}{'cython s':>12}{'numpy s':>12}{'speedup':>10}{'max diff':>11}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, fn in cases(n, rng):
            tc, oc = best_of(lambda: fn(_kernels), args.repeat)
            tp, op = best_of(lambda: fn(_fallback), args.repeat)
            if name == "jacobi_eigh":
                oc, op = np.sort(oc), np.sort(op)
            diff = float(np.abs(np.asarray(oc) - np.asarray(op)).max())
            print(f"{name:<20}{n:>5}{tc:>12.2e}{tp:>12.2e}{tp / tc:>10.1f}{diff:>11.1e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
