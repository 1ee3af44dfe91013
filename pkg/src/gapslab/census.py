"""Gap counting: Q(N, h), threshold counts, gap histograms, and reciprocal
sums over primes followed by a small gap."""
import math
from dataclasses import dataclass

import numpy as np

from . import engine
from ._backend import kernels
from .errors import DomainError, ValidationError
from .hl import iter_prime_gaps


@dataclass
class GapHistogram:
    """Gaps p' - p for primes p in (N, 2N]; p' is the true successor."""

    N: int
    counts: dict
    normalized: tuple | None = None  # (p array, (p'-p)/log p array)

    @property
    def total(self):
        return sum(self.counts.values())


def _int_h(h):
    if h < 0:
        raise ValidationError("h must be >= 0")
    return int(math.floor(h))


def q_count(N, h):
    """#{n in [N, 2N) : pi(n+h) - pi(n) > 1}."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    H = _int_h(h)
    if H < 2:
        return 0
    engine._check_hi(2 * N + H)
    if 2 * N + H <= engine.SMALL_TABLE_MAX:
        tab = engine.small_table(2 * N + H)
        return int(kernels.count_pairs_window(tab.pi, N, 2 * N, H))
    total = 0
    for s in range(N, 2 * N, engine.SEGMENT_LEN):
        e = min(s + engine.SEGMENT_LEN, 2 * N)
        flags = engine.prime_flags(s + 1, e + H)
        c = np.concatenate(([0], np.cumsum(flags, dtype=np.int64)))
        total += int(np.count_nonzero(c[H:H + e - s] - c[:e - s] >= 2))
    return total


def theta_window(n, h):
    """Theta(n, h) = sum_{j=1..h} theta(n + j)."""
    H = _int_h(h)
    if H == 0:
        return 0.0
    ps = engine.primes_between(n + 1, n + H + 1)
    return math.fsum(math.log(int(p)) for p in ps)


def gap_count_threshold(N, eta, workers=None):
    """#{p in [N, 2N) : p' - p <= eta log N}."""
    if N < 2:
        raise ValidationError("N must be >= 2")
    if eta <= 0:
        raise ValidationError("eta must be positive")
    bound = eta * math.log(N)
    return sum(int(np.count_nonzero(g <= bound))
               for _, g in iter_prime_gaps(N, 2 * N, workers))


def gap_histogram(N, with_normalized=False, workers=None):
    if N < 1:
        raise ValidationError("N must be >= 1")
    engine._check_hi(2 * N + 1)
    counts = np.zeros(0, dtype=np.int64)
    ps_all, norm_all = [], []
    for ps, gaps in iter_prime_gaps(N + 1, 2 * N + 1, workers):
        b = np.bincount(gaps)
        if b.size > counts.size:
            b[:counts.size] += counts
            counts = b
        else:
            counts[:b.size] += b
        if with_normalized:
            ps_all.append(ps)
            norm_all.append(gaps / np.log(ps.astype(np.float64)))
    hist = {g: int(c) for g, c in enumerate(counts) if c}
    normalized = None
    if with_normalized:
        normalized = (np.concatenate(ps_all) if ps_all else np.zeros(0, np.int64),
                      np.concatenate(norm_all) if norm_all else np.zeros(0))
    return GapHistogram(N, hist, normalized)


def gaps_near_range(N, h):
    """#{p_j in (N - h, 2N] : p_{j+1} - p_j <= h}, successor taken past 2N."""
    H = _int_h(h)
    lo = max(int(math.floor(N - h)), 0)
    top = 2 * N
    if 2 * top + 64 <= engine.SMALL_TABLE_MAX:
        tab = engine.small_table(2 * top + 64)
        i0, i1 = int(tab.pi[lo]), int(tab.pi[top])
        return int(kernels.gaps_le_count(tab.primes, i0, i1, H))
    return sum(int(np.count_nonzero(g <= H)) for _, g in iter_prime_gaps(lo + 1, top + 1))


def gap_inequality_terms(N, h):
    """(Q(N, h), floor(h), gap count) for the finite counting inequality."""
    return q_count(N, h), _int_h(h), gaps_near_range(N, h)


def gap_inequality_check(N, h):
    """Q(N, h) <= floor(h) * #{gaps <= h starting in (N - h, 2N]}, exactly."""
    q, H, g = gap_inequality_terms(N, h)
    return q <= H * g


def _iterated_logs(x, k):
    logs = []
    v = x
    for _ in range(k):
        if v <= 0:
            raise DomainError(f"iterated logarithm undefined at x={x}")
        v = math.log(v)
        if v <= 0:
            raise DomainError(f"iterated logarithm of {x} is <= 0 by depth {len(logs) + 1}")
        logs.append(v)
    return logs


def logorial(x, k):
    """Log_k x = prod_{2 <= j <= k} log_j x, with log_1 = log."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    return math.prod(_iterated_logs(x, k)[1:])


def iterated_log(x, k):
    """log_k x (log_1 x = log x)."""
    return _iterated_logs(x, k)[-1]


@dataclass(frozen=True)
class FixedGap:
    K: float

    def threshold(self, p):
        return np.full(p.size, float(self.K)), np.ones(p.size, dtype=bool)


@dataclass(frozen=True)
class LambdaConst:
    lam: float

    def threshold(self, p):
        return self.lam * np.log(p.astype(np.float64)), np.ones(p.size, dtype=bool)


@dataclass(frozen=True)
class LogorialRule:
    """lambda(p) = scale / ((Log_k p)^power * (log_k p)^epsilon)."""

    k: int
    epsilon: float = 0.0
    power: float = 1.0
    scale: float = 1.0

    def threshold(self, p):
        v = p.astype(np.float64)
        logs = []
        valid = np.ones(p.size, dtype=bool)
        with np.errstate(invalid="ignore", divide="ignore"):
            for _ in range(self.k):
                v = np.where(valid, np.log(np.where(valid, v, 1.0)), 1.0)
                valid &= v > 0
                logs.append(v)
            prod = np.ones(p.size)
            for lv in logs[1:]:
                prod *= lv
            lam = self.scale / (prod ** self.power * logs[-1] ** self.epsilon)
            y = np.where(valid, lam * logs[0], 0.0)
        return y, valid


@dataclass(frozen=True)
class ReciprocalSum:
    value: float
    terms: int
    skipped: int


def reciprocal_sum(x, rule, workers=None):
    """Sum of 1/p over primes p <= x with p' - p <= y(p); primes where the
    rule's threshold is undefined are skipped and counted."""
    if x < 2:
        return ReciprocalSum(0.0, 0, 0)
    engine._check_hi(x + 1)
    partials, terms, skipped = [], 0, 0
    for ps, gaps in iter_prime_gaps(0, x + 1, workers):
        y, valid = rule.threshold(ps)
        skipped += int(np.count_nonzero(~valid))
        take = valid & (gaps <= y)
        sel = ps[take]
        terms += int(sel.size)
        partials.append(math.fsum((1.0 / sel.astype(np.float64)).tolist()))
    return ReciprocalSum(math.fsum(partials), terms, skipped)


def parse_rule(name, K=None, lam=None, k=None, epsilon=0.0, power=1.0, scale=1.0):
    if name == "fixed_gap":
        return FixedGap(K)
    if name == "lambda_const":
        return LambdaConst(lam)
    if name == "logorial":
        return LogorialRule(k, epsilon, power, scale)
    raise ValidationError(f"unknown rule {name!r}")
