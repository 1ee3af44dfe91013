"""Compare the compiled kernels against the numpy fallback.

    python benchmarks/bench_backends.py [--repeat 3]

Each row reports the best-of-N wall time for both backends and checks that
their outputs agree before timing anything.
"""
import argparse
import math
import time

import numpy as np

from gapslab import _backend, engine


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def cases():
    base, length = 10**9, engine.SEGMENT_LEN
    ps = engine._sieving_primes(base + length)
    yield "sieve_flags 2^22 @1e9", lambda k: k.sieve_flags(base, length, ps)
    yield "spf_table 2^22 @1e9", lambda k: k.spf_table(base, length, ps)

    tab = engine.small_table(2 * 10**6 + 64)
    yield "count_pairs_window N=1e6 h=20", lambda k: k.count_pairs_window(tab.pi, 10**6, 2 * 10**6, 20)
    i0, i1 = int(tab.pi[10**5]), int(tab.pi[2 * 10**6])
    yield "gaps_le_count 1e5..2e6 h=20", lambda k: k.gaps_le_count(tab.primes, i0, i1, 20)

    R = 10**7 ** 0.25
    offs = np.array([0, 2], dtype=np.int64)
    rps = engine.base_primes(int(R))
    yield "lambda_block 2^20 H={0,2} R=N^1/4", lambda k: k.lambda_block(
        10**7, 2**20, offs, R, 3, rps)
    offs3 = np.array([0, 2, 6], dtype=np.int64)
    rps3 = engine.base_primes(1000)
    yield "lambda_block 2^18 H={0,2,6} R=1000", lambda k: k.lambda_block(
        10**8, 2**18, offs3, 1000.0, 4, rps3)


def agree(a, b):
    if isinstance(a, tuple):
        return all(agree(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) and a.dtype.kind == "f":
        return np.allclose(a, b, rtol=1e-10, atol=1e-10)
    return np.array_equal(a, b)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if "compiled" not in _backend.available():
        raise SystemExit("compiled backend not built; run: pip install -e . --no-build-isolation")
    comp, py = _backend.get("compiled"), _backend.get("python")
    print(f"{'kernel':38s} {'compiled':>10s} {'python':>10s} {'speedup':>8s}")
    for name, fn in cases():
        if not agree(fn(comp), fn(py)):
            raise SystemExit(f"backends disagree on {name}")
        tc, tp = best_of(lambda: fn(comp), args.repeat), best_of(lambda: fn(py), args.repeat)
        print(f"{name:38s} {tc * 1e3:9.1f}ms {tp * 1e3:9.1f}ms {tp / tc:7.1f}x")


if __name__ == "__main__":
    main()
