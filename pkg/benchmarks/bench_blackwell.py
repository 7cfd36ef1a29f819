"""Time the Blackwell filter kernel: compiled extension vs pure-Python fallback.

    python3 benchmarks/bench_blackwell.py --samples 1000000 --repeat 3
"""
import argparse
import time

import numpy as np

from qproc import _backend
from qproc.hmm import random_hmm
from qproc.rng import substream


def bench(kern, E, p0, uniforms, burn_in, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = kern.blackwell_filter(E, p0, uniforms, burn_in)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--hidden", type=int, default=4)
    ap.add_argument("--symbols", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    spec = random_hmm(args.hidden, args.symbols, substream(args.seed, "bench/hmm"))
    uniforms = substream(args.seed, "bench/uniforms").random(args.samples)
    E, p0 = spec.E, np.ascontiguousarray(spec.mu)

    rows = []
    for name in ("cython", "python"):
        try:
            kern = _backend.get_kernels(name)
        except ImportError:
            print(f"{name:>7}: not available")
            continue
        rows.append((name, *bench(kern, E, p0, uniforms, 1000, args.repeat if name == "cython" else 1)))
    for name, t, (hvals, restarts, _) in rows:
        print(f"{name:>7}: {t:8.3f} s  h={hvals.mean():.12f}  restarts={restarts}")
    if len(rows) == 2:
        (_, tc, oc), (_, tp, op) = rows
        print(f"speedup: {tp / tc:.1f}x, max |diff| = {np.abs(oc[0] - op[0]).max():.1e}")


if __name__ == "__main__":
    main()
