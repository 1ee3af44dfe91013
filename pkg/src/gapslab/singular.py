"""Certified truncations of the singular series and its Gallagher average.

Past max(2k^2, diameter) every prime sees all k offsets in distinct
classes, so the Euler factor depends only on k.  Those factors are summed
once per (k, p_cut) in log space and shared by every tuple of that size.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import engine
from .errors import BudgetExceeded, ValidationError
from . import tuples
from .tuples import KTuple, as_tuple, is_admissible

_EPS = 2.0**-52


@dataclass(frozen=True)
class SingularValue:
    value: float
    error_radius: float
    p_cut: int
    admissible: bool

    @property
    def interval(self):
        return (self.value - self.error_radius, self.value + self.error_radius)

    def contains(self, x):
        lo, hi = self.interval
        return lo <= x <= hi


def _primes_upto(x):
    if x <= engine.SMALL_TABLE_MAX:
        return engine.primes_between(0, x + 1)
    return np.concatenate(list(engine.iter_prime_blocks(0, x + 1)))


@lru_cache(maxsize=4)
def _tail_table(k, p_cut):
    """Primes k < p <= p_cut, their log Euler factors at nu = k, suffix sums."""
    ps = _primes_upto(p_cut)
    ps = ps[ps > k]
    pf = ps.astype(np.float64)
    terms = np.log1p(-k / pf) - k * np.log1p(-1.0 / pf)
    # suffix[i] = sum(terms[i:]); accumulated from the small end
    suffix = np.zeros(terms.size + 1)
    suffix[:-1] = np.cumsum(terms[::-1])[::-1]
    abs_total = float(np.abs(terms).sum())
    return ps, suffix, abs_total


def truncation_bound(k, p_cut):
    """Bound on |sum over p > p_cut of log Euler factor| when p_cut >= 2k^2."""
    if k == 1:
        return 0.0  # every factor is exactly 1
    return 4.0 * k * k / (p_cut * math.log(p_cut))


def _min_cut(H):
    return max(2 * H.k * H.k, H.diameter + 1)


def singular_series(H, p_cut):
    """Truncated Euler product over p <= p_cut with a rigorous error radius."""
    H = as_tuple(H)
    k = H.k
    if p_cut < _min_cut(H):
        raise ValidationError(f"p_cut must be >= max(2k^2, diameter+1) = {_min_cut(H)}")
    if not is_admissible(H):
        return SingularValue(0.0, 0.0, p_cut, False)

    split = max(2 * k * k, H.diameter)
    head = []
    for p in map(int, engine.base_primes(min(split, p_cut))):
        nu = len({h % p for h in H})
        head.append(math.log1p(-nu / p) - k * math.log1p(-1.0 / p))
    log_head = math.fsum(head)

    ps, suffix, abs_total = _tail_table(k, p_cut)
    i = int(np.searchsorted(ps, split, side="right"))
    log_tail = float(suffix[i])

    log_s = log_head + log_tail
    value = math.exp(log_s)
    rounding = (ps.size + len(head) + 8) * _EPS * (abs_total + abs(log_head) + abs(log_s))
    spread = truncation_bound(k, p_cut) + rounding
    radius = value * math.expm1(spread) + 4 * math.ulp(value)
    return SingularValue(value, radius, p_cut, True)


def _shapes(h, k):
    """Translation classes of k-subsets of [1, h] anchored at 0, with counts.

    A subset of diameter D has exactly h - D translates inside [1, h].
    """
    if k == 1:
        yield (0,), h
    elif k == 2:
        for d in range(1, h):
            yield (0, d), h - d
    else:
        for b in range(2, h):
            for a in range(1, b):
                yield (0, a, b), h - b


def gallagher_average(h, k, ordered=True, p_cut=None, cap=None):
    """Sum of S(H) over k-subsets of [1, h] divided by h^k.

    ``ordered`` multiplies by k!, i.e. sums over ordered tuples of distinct
    entries.  k <= 3.
    """
    if not 1 <= k <= 3:
        raise ValidationError("gallagher_average supports 1 <= k <= 3")
    if h < k:
        raise ValidationError("need h >= k")
    cap = tuples.ENUM_CAP if cap is None else cap
    if math.comb(h, k) > cap:
        raise BudgetExceeded(f"C({h},{k}) exceeds cap {cap}")
    if p_cut is None:
        p_cut = max(10**6, 2 * k * k, h + 1)
    terms = []
    for offs, mult in _shapes(h, k):
        sv = singular_series(KTuple(offs), p_cut)
        if sv.admissible:
            terms.append(mult * sv.value)
    unordered = math.fsum(terms) / h**k
    return unordered * math.factorial(k) if ordered else unordered
