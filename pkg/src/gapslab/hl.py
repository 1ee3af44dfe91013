"""Empirical Hardy-Littlewood counts and the conditional baselines they are
compared against: tuple counts, short-interval histograms, the
normalized-gap CDF and a smooth-moduli discrepancy probe."""
import math
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .errors import BudgetExceeded, ValidationError
from .stats import bump
from .tuples import as_tuple

BV_MAX_X = 10**7
BV_MAX_RESIDUES = 10**6


@dataclass
class IntervalHistogram:
    x: int
    h: float
    counts: dict
    poisson_ref: dict = field(default_factory=dict)

    @property
    def lam(self):
        return self.h / math.log(self.x)


@dataclass
class GapCdf:
    x: int
    points: list  # (lambda, fraction)
    reference: list = field(default_factory=list)  # 1 - exp(-lambda)
    prime_count: int = 0


def _chunks(lo, hi, size=engine.SEGMENT_LEN):
    for s in range(lo, hi, size):
        yield s, min(s + size, hi)


def count_tuple(H, x):
    """Number of n <= x with every n + h_i prime."""
    H = as_tuple(H)
    if x < 1:
        raise ValidationError("x must be >= 1")
    top = H.offsets[-1]
    engine._check_hi(x + top + 1)
    total = 0
    for s, e in _chunks(1, x + 1):
        flags = engine.prime_flags(s, e + top)
        ok = np.ones(e - s, dtype=bool)
        for h in H:
            ok &= flags[h:h + e - s]
        total += int(np.count_nonzero(ok))
    return total


def interval_counts(x, h):
    """Per-n prime counts in (n, n+h] for n = 1..x, as an int array."""
    H = int(math.floor(h))
    out = np.empty(x, dtype=np.int32)
    for s, e in _chunks(1, x + 1):
        flags = engine.prime_flags(s + 1, e + H)
        c = np.concatenate(([0], np.cumsum(flags, dtype=np.int32)))
        out[s - 1:e - 1] = c[H:H + e - s] - c[:e - s]
    return out


def interval_histogram(x, h):
    """#{n <= x : exactly j primes in (n, n+h]} for every j, with the
    Poisson reference x e^(-lam) lam^j / j!, lam = h / log x."""
    if x < 2 or h < 1:
        raise ValidationError("need x >= 2 and h >= 1")
    engine._check_hi(x + int(h) + 1)
    per_n = interval_counts(x, h)
    bins = np.bincount(per_n)
    counts = {j: int(c) for j, c in enumerate(bins) if c}
    lam = h / math.log(x)
    ref = {j: x * math.exp(-lam) * lam**j / math.factorial(j) for j in range(len(bins))}
    return IntervalHistogram(x, h, counts, ref)


def iter_prime_gaps(lo, hi, workers=None):
    """Yield (p, gap) array pairs for primes lo <= p < hi, each paired with
    its true successor (which may lie at or beyond hi)."""
    prev = None
    for block in engine.iter_prime_blocks(lo, hi, workers):
        if block.size == 0:
            continue
        if prev is not None:
            ps = np.concatenate(([prev], block[:-1]))
            yield ps, np.diff(np.concatenate(([prev], block)))
        elif block.size > 1:
            yield block[:-1], np.diff(block)
        prev = int(block[-1])
    if prev is not None:
        yield np.array([prev], dtype=np.int64), np.array([engine.next_prime(prev) - prev])


def gap_cdf(x, lambdas, use_log_x=False, workers=None):
    """Fraction of primes p <= x with p' - p <= lam log p, for each lam.

    The denominator is pi(x); the last prime uses its true successor.
    """
    if x < 3:
        raise ValidationError("x must be >= 3")
    lambdas = [float(v) for v in lambdas]
    if any(v <= 0 for v in lambdas):
        raise ValidationError("lambdas must be positive")
    engine._check_hi(x + 1)
    hits = [0] * len(lambdas)
    total = 0
    logx = math.log(x)
    for ps, gaps in iter_prime_gaps(0, x + 1, workers):
        total += ps.size
        scale = np.full(ps.size, logx) if use_log_x else np.log(ps.astype(np.float64))
        for i, lam in enumerate(lambdas):
            hits[i] += int(np.count_nonzero(gaps <= lam * scale))
    points = [(lam, c / total) for lam, c in zip(lambdas, hits)]
    ref = [-math.expm1(-lam) for lam in lambdas]
    return GapCdf(x, points, ref, total)


def _coprime_roots(H, p):
    return sorted({(-h) % p for h in H} - {0})


def _smooth_squarefree(primes, bound):
    """Squarefree products of the given primes up to bound, with factor lists."""
    out = [(1, ())]
    stack = [(1, 0, ())]
    while stack:
        q, start, fs = stack.pop()
        for j in range(start, len(primes)):
            nq = q * primes[j]
            if nq > bound:
                break
            nfs = fs + (primes[j],)
            out.append((nq, nfs))
            stack.append((nq, j + 1, nfs))
    out.sort()
    return out


def _crt(fs, roots):
    classes, mod = [0], 1
    for p in fs:
        inv = pow(mod, -1, p)
        classes = [c + mod * (((r - c) * inv) % p) for c in classes for r in roots[p]]
        mod *= p
    return classes


def bv_terms(x, theta_exp, smooth_delta, H, max_residues=BV_MAX_RESIDUES):
    """(q, max_a |psi(x; q, a) - x/phi(q)|) for each qualifying modulus q.

    q runs over squarefree x^smooth_delta-smooth q <= x^theta_exp; a over
    residues coprime to q with P_H(a) = 0 (mod q), built prime by prime via
    CRT.  Moduli with no such residue are skipped.
    """
    H = as_tuple(H)
    if x > BV_MAX_X:
        raise BudgetExceeded(f"x={x} exceeds the discrepancy cost guard {BV_MAX_X}")
    if x < 2:
        raise ValidationError("x must be >= 2")
    if not 0 < theta_exp < 0.6 or not 0 < smooth_delta <= 0.2:
        raise ValidationError("need 0 < theta_exp < 0.6 and 0 < smooth_delta <= 0.2")
    qmax = int(math.floor(x**theta_exp + 1e-9))
    z = x**smooth_delta
    primes = [int(p) for p in engine.base_primes(int(math.floor(z + 1e-9)))]
    roots = {p: _coprime_roots(H, p) for p in primes}
    moduli = _smooth_squarefree(primes, qmax)
    if sum(math.prod(len(roots[p]) for p in fs) for _, fs in moduli) > max_residues:
        raise BudgetExceeded("residue count exceeds cost guard")
    n, w = engine.mangoldt_support(x)
    out = []
    bump("moduli_scanned", len(moduli))
    for q, fs in moduli:
        if q == 1:
            out.append((1, abs(math.fsum(w.tolist()) - x)))
            continue
        if any(not roots[p] for p in fs):
            continue
        sums = np.bincount(n % q, weights=w, minlength=q)
        phi = math.prod(p - 1 for p in fs)
        best = max(abs(sums[a] - x / phi) for a in _crt(fs, roots))
        out.append((q, float(best)))
    return out


def bv_discrepancy(x, theta_exp, smooth_delta, H, max_residues=BV_MAX_RESIDUES):
    """Sum of the per-modulus discrepancies, divided by x."""
    terms = bv_terms(x, theta_exp, smooth_delta, H, max_residues)
    return math.fsum(t for _, t in terms) / x
