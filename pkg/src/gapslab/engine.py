"""Segmented sieve of Eratosthenes with a windowed smallest-prime-factor table.

Everything above this module asks it three things: is n prime, what are
the primes in [lo, hi), and what is the least prime factor of n.  Small
ranges are answered from a lazily grown table starting at 0; anything
else is sieved segment by segment.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ._backend import kernels
from .errors import BudgetExceeded, InvalidResidue, LimitExceeded, ValidationError
from .parallel import ordered_map
from .stats import bump

SIEVE_LIMIT = 2**40
SEGMENT_LEN = 2**22
MAX_SEGMENT_LEN = 2**28
SMALL_TABLE_MAX = 2**22


@dataclass(frozen=True, eq=False)
class SieveSegment:
    """Primality bitmap and smallest-prime-factor table over [base, base+length).

    ``spf`` is uint32.  A prime is its own spf; 0 marks a prime too large to
    store (only possible at or above 2**32).  Entries for 0 and 1 are 1.
    """

    base: int
    length: int
    is_prime: np.ndarray
    spf: np.ndarray

    @property
    def end(self):
        return self.base + self.length

    def covers(self, n):
        return self.base <= n < self.end

    def spf_at(self, n):
        v = int(self.spf[n - self.base])
        return n if v == 0 else v

    def primes(self):
        return np.flatnonzero(self.is_prime).astype(np.int64) + self.base

    def __eq__(self, other):
        if not isinstance(other, SieveSegment):
            return NotImplemented
        return (self.base == other.base and self.length == other.length
                and np.array_equal(self.is_prime, other.is_prime)
                and np.array_equal(self.spf, other.spf))


@dataclass(frozen=True)
class ChebyshevTable:
    x: int
    psi: float
    theta_sum: float
    pi: int


def _check_hi(hi, limit=None):
    limit = SIEVE_LIMIT if limit is None else limit
    if hi > limit:
        raise LimitExceeded(f"range end {hi} exceeds sieve limit {limit}")


@lru_cache(maxsize=8)
def _simple_primes(limit):
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


def base_primes(limit):
    """All primes <= limit (limit grows by doubling so the cache stays small)."""
    cap = 1024
    while cap < limit:
        cap *= 2
    ps = _simple_primes(cap)
    return ps[:np.searchsorted(ps, limit, side="right")]


def _sieving_primes(hi):
    return base_primes(math.isqrt(max(hi - 1, 0)) + 1)


def build_segment(base, length, limit=None, max_len=None):
    if base < 0:
        raise ValidationError("base must be non-negative")
    if length < 1:
        raise ValidationError("segment length must be >= 1")
    max_len = MAX_SEGMENT_LEN if max_len is None else max_len
    if length > max_len:
        raise BudgetExceeded(f"segment length {length} exceeds cap {max_len}")
    _check_hi(base + length, limit)
    bump("segments_built")
    ps = _sieving_primes(base + length)
    flags = kernels.sieve_flags(base, length, ps).astype(bool)
    spf = kernels.spf_table(base, length, ps)
    return SieveSegment(base, length, flags, spf)


def prime_flags(lo, hi):
    """Boolean primality of every n in [lo, hi)."""
    lo = max(lo, 0)
    if hi <= lo:
        return np.zeros(0, dtype=bool)
    _check_hi(hi)
    tab = _small(hi)
    if tab is not None:
        return tab.flags[lo:hi].astype(bool)
    out = np.empty(hi - lo, dtype=bool)
    ps = _sieving_primes(hi)
    for s in range(lo, hi, SEGMENT_LEN):
        e = min(s + SEGMENT_LEN, hi)
        bump("segments_built")
        out[s - lo:e - lo] = kernels.sieve_flags(s, e - s, ps).astype(bool)
    return out


def primes_between(lo, hi):
    """Primes p with lo <= p < hi, ascending int64."""
    lo = max(lo, 0)
    if hi <= lo:
        return np.zeros(0, dtype=np.int64)
    return np.flatnonzero(prime_flags(lo, hi)).astype(np.int64) + lo


def _block_primes(span):
    s, e = span
    bump("segments_built")
    ps = _sieving_primes(e)
    return np.flatnonzero(kernels.sieve_flags(s, e - s, ps)).astype(np.int64) + s


def iter_prime_blocks(lo, hi, workers=None, seg_len=SEGMENT_LEN):
    """Yield arrays of the primes in [lo, hi), one per segment, in order."""
    lo = max(lo, 0)
    if hi <= lo:
        return
    _check_hi(hi)
    spans = [(s, min(s + seg_len, hi)) for s in range(lo, hi, seg_len)]
    yield from ordered_map(_block_primes, spans, workers)


class _SmallTable:
    def __init__(self, size):
        seg = build_segment(0, size)
        self.size = size
        self.flags = seg.is_prime.astype(np.uint8)
        self.spf = seg.spf
        self.primes = seg.primes()
        # pi[m] = number of primes <= m
        self.pi = np.cumsum(self.flags, dtype=np.int32)


_small_state = {"table": None}


def _small(hi):
    """Small table covering [0, hi), or None when hi is too large for it."""
    if hi > SMALL_TABLE_MAX:
        return None
    tab = _small_state["table"]
    if tab is None or tab.size < hi:
        size = 2**16
        while size < hi:
            size *= 2
        tab = _small_state["table"] = _SmallTable(size)
    return tab


def small_table(hi):
    tab = _small(hi)
    if tab is None:
        raise LimitExceeded(f"{hi} is beyond the in-memory table ({SMALL_TABLE_MAX})")
    return tab


def is_prime(n):
    if n < 2:
        return False
    tab = _small(n + 1)
    if tab is not None:
        return bool(tab.flags[n])
    _check_hi(n + 1)
    return _trial_spf(n) == n


def theta(m):
    if m < 0:
        raise ValidationError("theta requires m >= 0")
    return math.log(m) if is_prime(m) else 0.0


def prime_pi(x, workers=None):
    if x < 2:
        return 0
    tab = _small(x + 1)
    if tab is not None:
        return int(tab.pi[x])
    return sum(int(b.size) for b in iter_prime_blocks(0, x + 1, workers))


def next_prime(m, limit=None):
    limit = SIEVE_LIMIT if limit is None else limit
    if m < 0:
        raise ValidationError("next_prime requires m >= 0")
    tab = _small(m + 2)
    if tab is not None:
        i = np.searchsorted(tab.primes, m, side="right")
        if i < tab.primes.size:
            if tab.primes[i] >= limit:
                raise LimitExceeded(f"no prime in ({m}, {limit})")
            return int(tab.primes[i])
    lo, width = m + 1, 4096
    while True:
        if lo >= limit:
            raise LimitExceeded(f"no prime in ({m}, {limit})")
        hi = min(lo + width, limit)
        block = primes_between(lo, hi)
        if block.size:
            return int(block[0])
        lo, width = hi, width * 2


def factor_small(n, bound=None):
    """Distinct prime factors of n that are <= bound (all when bound is None).

    Follows the spf chain through the small table while the cofactor stays
    inside it, then falls back to trial division.
    """
    if n < 2:
        return []
    out = []
    m = n
    bound = n if bound is None else bound
    tab = _small(n + 1) or _small_state["table"]
    while m > 1:
        if tab is not None and m < tab.size:
            p = int(tab.spf[m])
        else:
            p = _trial_spf(m)
        if p > bound:
            break
        out.append(p)
        while m % p == 0:
            m //= p
    return out


def _trial_spf(m):
    ps = base_primes(math.isqrt(m))
    hit = ps[m % ps == 0] if m < 2**62 else [p for p in ps if m % int(p) == 0]
    return int(hit[0]) if len(hit) else m


def mangoldt_segment(seg):
    """von Mangoldt Lambda(n) for every n in the segment, from its spf table."""
    n = np.arange(seg.base, seg.end, dtype=np.int64)
    p = seg.spf.astype(np.int64)
    p = np.where(p == 0, n, p)
    out = np.zeros(seg.length, dtype=np.float64)
    cand = n >= 2
    m = np.where(cand, n, 1)
    pp = np.where(cand, p, 2)
    # strip the smallest prime completely; prime powers reduce to 1
    while True:
        div = (m % pp == 0) & (m > 1)
        if not div.any():
            break
        m = np.where(div, m // pp, m)
    hit = cand & (m == 1)
    out[hit] = np.log(pp[hit].astype(np.float64))
    return out


def mangoldt_support(x):
    """(n, Lambda(n)) for every prime power n <= x, n ascending."""
    ns, ws = [], []
    for s in range(0, x + 1, SEGMENT_LEN):
        e = min(s + SEGMENT_LEN, x + 1)
        lam = mangoldt_segment(build_segment(s, e - s))
        idx = np.flatnonzero(lam)
        ns.append(idx.astype(np.int64) + s)
        ws.append(lam[idx])
    if not ns:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return np.concatenate(ns), np.concatenate(ws)


def psi_progression(x, q, a):
    """Chebyshev psi(x; q, a) = sum of Lambda(n) over n <= x, n = a (mod q)."""
    if q < 1:
        raise ValidationError("modulus must be >= 1")
    if not 0 <= a < q:
        raise InvalidResidue(f"residue {a} not in [0, {q})")
    if q > 1 and math.gcd(a, q) > 1:
        raise InvalidResidue(f"gcd({a}, {q}) > 1")
    if x < 2:
        return 0.0
    _check_hi(x + 1)
    n, w = mangoldt_support(x)
    return math.fsum(w[n % q == a].tolist())


def chebyshev(x):
    if x < 0:
        raise ValidationError("x must be non-negative")
    _check_hi(x + 1)
    _, w = mangoldt_support(x)
    ps = primes_between(0, x + 1)
    return ChebyshevTable(
        x=x,
        psi=math.fsum(w.tolist()),
        theta_sum=math.fsum(np.log(ps.astype(np.float64)).tolist()),
        pi=int(ps.size),
    )
