"""Acceptance criteria, one test each.

Every test records a PASS/FAIL line (criterion number, measured values,
runtime) which is printed at the end of the pytest run and when the module
is executed directly.  Runtime limits are part of each criterion.
"""
import json
import math
import os
import random
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest

from gapslab import census, gpy, hl, rational, singular
from gapslab.gpy import WeightParams

import oracles

RESULTS = {}


def record(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num:2d}: {detail}"
    RESULTS[num] = line
    print(line)
    assert ok, line


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def test_criterion_01_q_count_oracle():
    flags = oracles.sieve_bytes(2 * 10**4 + 21)
    # indicator[h][n] = 1 when (n, n+h] holds at least two primes, by direct loop
    prefix = {}
    for h in range(2, 21):
        ind = [0] * (2 * 10**4 + 1)
        for n in range(1, 2 * 10**4 + 1):
            c = 0
            for m in range(n + 1, n + h + 1):
                c += flags[m]
            ind[n] = 1 if c >= 2 else 0
        acc = [0]
        for v in ind:
            acc.append(acc[-1] + v)
        prefix[h] = acc
    mismatches = 0
    with Timer() as t:
        got = {(N, h): census.q_count(N, h) for N in range(10, 10**4 + 1) for h in range(2, 21)}
    for (N, h), q in got.items():
        if q != prefix[h][2 * N] - prefix[h][N]:
            mismatches += 1
    ok = mismatches == 0 and got[(10, 5)] == 6 and t.elapsed < 10
    record(1, ok, f"q_count mismatches={mismatches} over {len(got)} pairs, "
                  f"q_count(10,5)={got[(10, 5)]}, {t.elapsed:.2f}s (<10s)")


def test_criterion_02_lambda_oracle():
    rng = random.Random(20240601)
    cases = []
    for _ in range(1000):
        k = rng.randint(1, 3)
        H = sorted(rng.sample(range(0, 30), k))
        cases.append((rng.randint(1, 10**4), H, rng.uniform(2.0, 1000.0), rng.randint(0, 2)))
    worst = 0.0
    with Timer() as t:
        got = [gpy.lambda_R(n, H, WeightParams(R=R, k=len(H), ell=ell)) for n, H, R, ell in cases]
        fifteen = gpy.lambda_R(15, (0,), WeightParams(R=10, k=1))
    for v, (n, H, R, ell) in zip(got, cases):
        want = oracles.lambda_naive(n, H, R, len(H) + ell)
        scale = max(abs(want), math.log(R) ** (len(H) + ell) * 1e-6)
        worst = max(worst, abs(v - want) / scale)
    ok = worst <= 1e-9 and abs(fifteen - math.log(1.5)) <= 1e-12 and t.elapsed < 10
    record(2, ok, f"max rel err={worst:.2e} on 1000 instances, "
                  f"Lambda_10(15)={fifteen:.12f} (log 1.5={math.log(1.5):.12f}), {t.elapsed:.2f}s (<10s)")


def test_criterion_03_s1_identity():
    N, R = 10**6, 1000.0
    flags = oracles.sieve_bytes(2 * N)
    want = math.log(R) ** 2 * math.fsum(math.log(p) for p in range(N, 2 * N) if flags[p])
    with Timer() as t:
        rep = gpy.s1((0,), 0, N, WeightParams(R=R, k=1))
    rel = abs(rep.value - want) / want
    ok = rel <= 1e-9 and t.elapsed < 5
    record(3, ok, f"s1={rep.value:.10e} vs (log R)^2*theta-sum={want:.10e}, "
                  f"rel={rel:.1e}, {t.elapsed:.2f}s (<5s)")


def test_criterion_04_singular_series():
    with Timer() as t:
        a = singular.singular_series((0, 2), 10**7)
        b = singular.singular_series((0, 2), 10**8)
    ok = (abs(a.value - 1.3203236316) <= 1e-6 and a.error_radius < 1e-6
          and a.contains(b.value) and t.elapsed < 30)
    record(4, ok, f"S(0,2)@1e7={a.value:.10f}+-{a.error_radius:.1e}, "
                  f"@1e8={b.value:.10f} contained={a.contains(b.value)}, {t.elapsed:.2f}s (<30s)")


def test_criterion_05_gallagher():
    with Timer() as t:
        g200 = singular.gallagher_average(200, 2, ordered=True)
        g1000 = singular.gallagher_average(1000, 2, ordered=True)
        u200 = singular.gallagher_average(200, 2, ordered=False)
        u1000 = singular.gallagher_average(1000, 2, ordered=False)
    identity = g200 == 2 * u200 and g1000 == 2 * u1000
    ok = 0.90 <= g200 <= 1.00 and 0.97 <= g1000 <= 1.005 and identity and t.elapsed < 60
    record(5, ok, f"ordered avg h=200: {g200:.6f} in [0.90,1.00], h=1000: {g1000:.6f} "
                  f"in [0.97,1.005], k! identity exact={identity}, {t.elapsed:.2f}s (<60s)")


def test_criterion_06_rational_certificate():
    with Timer() as t:
        good = rational.verify_params(1880, 21, "157/300", 0, 0)
        bad = rational.verify_params(2, 1, "157/300", 0, 0)
    ok = (good.to_dict()["lhs"] == "50767520/50767200" and good.passes
          and bad.lhs == Fraction(157, 500) and not bad.passes and t.elapsed < 1)
    record(6, ok, f"lhs(1880,21)={good.to_dict()['lhs']} passes={good.passes}; "
                  f"lhs(2,1)={bad.lhs} passes={bad.passes}, {t.elapsed:.3f}s (<1s)")


def test_criterion_07_optimizer():
    with Timer() as t:
        a = rational.optimize_k("3/4", 50)
        k, ell = rational.optimize_k("157/300", 200)
        cert = rational.verify_params(k, ell, "157/300")
    ok = a == (21, 2) and k <= 1880 and cert.passes and t.elapsed < 30
    record(7, ok, f"optimize_k(3/4,50)={a}, optimize_k(157/300,200)=({k},{ell}) "
                  f"passes={cert.passes}, {t.elapsed:.2f}s (<30s)")


@pytest.mark.slow
def test_criterion_08_gap_cdf():
    lams = [0.25, 0.5, 1.0, 1.5, 2.0]
    with Timer() as t:
        cdf = hl.gap_cdf(10**8, lams, workers=8)
    frac = dict(cdf.points)
    fr = [f for _, f in cdf.points]
    monotone = all(a <= b for a, b in zip(fr, fr[1:]))
    ok = (0.55 <= frac[1.0] <= 0.70 and 0.15 <= frac[0.25] <= 0.30 and monotone
          and t.elapsed < 120)
    alt = hl.gap_cdf(10**8, [0.25], use_log_x=True, workers=8).points[0][1]
    record(8, ok, f"x=1e8 fraction(lambda=1)={frac[1.0]:.4f} in [0.55,0.70], "
                  f"fraction(lambda=0.25)={frac[0.25]:.4f} in [0.15,0.30], monotone={monotone}, "
                  f"{t.elapsed:.2f}s (<120s); with log x scaling lambda=0.25 gives {alt:.4f}")


@pytest.mark.slow
def test_criterion_09_poisson_histogram():
    x = 10**7
    h = math.log(x)
    with Timer() as t:
        hist = hl.interval_histogram(x, h)
    H = int(math.floor(h))
    flags = oracles.sieve_bytes(x + H)
    # sum_n (pi(n+H) - pi(n)) counts each prime p once per n in [p-H, p-1] within [1, x]
    incidences = sum(min(x, p - 1) - max(1, p - H) + 1
                     for p in range(2, x + H + 1) if flags[p])
    lhs = sum(j * c for j, c in hist.counts.items())
    ratios = [hist.counts.get(j, 0) / x / (math.exp(-1) / math.factorial(j)) for j in range(3)]
    ok = all(abs(r - 1) <= 0.25 for r in ratios) and lhs == incidences and t.elapsed < 60
    record(9, ok, "counts[j]/x over e^-1/j! for j=0,1,2: "
                  + ", ".join(f"{r:.3f}" for r in ratios)
                  + f" (within 25%); double counting {lhs}=={incidences}, {t.elapsed:.2f}s (<60s)")


@pytest.mark.slow
def test_criterion_10_s0_ratio():
    N = 10**7
    R = N ** 0.25
    with Timer() as t:
        full = gpy.s0((0, 2), N, WeightParams(R=R, k=2, ell=1))
        diffs = []
        for delta in (0.02, 0.05, 0.1):
            r = gpy.s0((0, 2), N, WeightParams(R=R, k=2, ell=1, delta=delta), restricted=True)
            diffs.append(full.value - r.value)
    ok = (0.4 <= full.ratio <= 2.5 and all(d >= 0 for d in diffs)
          and diffs[0] <= diffs[1] <= diffs[2] and t.elapsed < 300)
    record(10, ok, f"s0 ratio={full.ratio:.4f} in [0.4,2.5]; excluded mass for delta="
                   f"0.02,0.05,0.1: {diffs} (non-negative, non-decreasing), {t.elapsed:.2f}s (<300s)")


def test_criterion_11_inequality_sweep():
    with Timer() as t:
        failures = [(N, h) for N in range(1, 10**4 + 1) for h in range(0, 21)
                    if not census.gap_inequality_check(N, h)]
    ok = not failures and t.elapsed < 30
    record(11, ok, f"finite gap inequality failures={len(failures)} over N<=1e4, h<=20, "
                   f"{t.elapsed:.2f}s (<30s)")


_HIST_SCRIPT = """
import json, resource, sys, time
from gapslab.census import gap_histogram
t0 = time.perf_counter()
h = gap_histogram(10**9, workers=int(sys.argv[1]))
el = time.perf_counter() - t0
rss = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
print(json.dumps({"counts": {str(k): v for k, v in sorted(h.counts.items())},
                  "total": h.total, "elapsed": el, "rss_kb": rss}, sort_keys=True))
"""


@pytest.mark.slow
def test_criterion_12_gap_histogram_performance():
    runs = {}
    for w in (8, 1):
        out = subprocess.run([sys.executable, "-c", _HIST_SCRIPT, str(w)],
                             capture_output=True, text=True, check=True)
        runs[w] = json.loads(out.stdout)
    a, b = runs[8], runs[1]
    same = a["counts"] == b["counts"]
    mem_gb = a["rss_kb"] / 2**20
    ok = a["elapsed"] <= 60 and mem_gb <= 2 and same
    record(12, ok, f"gap histogram N=1e9: {a['total']} primes, {a['elapsed']:.2f}s with 8 workers "
                   f"(<=60s; {os.cpu_count()} CPU available), peak RSS {mem_gb:.2f} GB (<=2GB), "
                   f"identical to 1-worker run={same}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
