"""Admissible k-tuples: residue coverage, admissibility, enumeration."""
import json
import math
from dataclasses import dataclass

from . import engine
from .stats import bump
from .errors import (BudgetExceeded, NotPrime, ProductOverflow, SegmentMiss,
                     ValidationError)

ENUM_CAP = 10**8


@dataclass(frozen=True)
class KTuple:
    """Sorted distinct non-negative offsets h_1 < ... < h_k."""

    offsets: tuple

    def __post_init__(self):
        offs = tuple(int(h) for h in self.offsets)
        if not offs:
            raise ValidationError("a tuple needs at least one offset")
        if any(h < 0 for h in offs):
            raise ValidationError("offsets must be non-negative")
        if len(set(offs)) != len(offs):
            raise ValidationError(f"offsets must be distinct: {list(offs)}")
        object.__setattr__(self, "offsets", tuple(sorted(offs)))

    @classmethod
    def parse(cls, text):
        """Parse the CLI form "0,2,6"."""
        try:
            offs = [int(t) for t in str(text).replace(" ", "").split(",") if t != ""]
        except ValueError as exc:
            raise ValidationError(f"malformed tuple {text!r}") from exc
        return cls(offs)

    @classmethod
    def from_json(cls, text):
        return cls(json.loads(text))

    def to_json(self):
        return json.dumps(list(self.offsets))

    @property
    def k(self):
        return len(self.offsets)

    @property
    def diameter(self):
        return self.offsets[-1] - self.offsets[0]

    def shifted(self, c):
        return KTuple(h + c for h in self.offsets)

    def union(self, extra):
        return KTuple(sorted(set(self.offsets) | {int(extra)}))

    def __iter__(self):
        return iter(self.offsets)

    def __len__(self):
        return len(self.offsets)

    def __str__(self):
        return ",".join(map(str, self.offsets))


def as_tuple(H):
    return H if isinstance(H, KTuple) else KTuple(tuple(H))


def nu_mod_p(H, p):
    """Number of residue classes mod p occupied by the offsets."""
    if p < 2 or not engine.is_prime(p):
        raise NotPrime(f"{p} is not prime")
    return len({h % p for h in as_tuple(H)})


def is_admissible(H):
    H = as_tuple(H)
    # nu(p) <= k < p for p > k
    return all(len({h % p for h in H}) < p for p in map(int, engine.base_primes(H.k)))


def poly_value(H, n):
    """P_H(n) = prod (n + h_i), exact; limited to 128-bit magnitude."""
    if n < 1:
        raise ValidationError("poly_value requires n >= 1")
    v = math.prod(n + h for h in as_tuple(H))
    if v >= 2**128:
        raise ProductOverflow(f"P_H({n}) exceeds 128 bits")
    return v


def enumerate_admissible(h, k, cap=None):
    """Yield the admissible k-subsets of {1, ..., h} in lexicographic order.

    Partial tuples carry a per-prime residue-coverage set (primes <= k); a
    branch dies as soon as some prime has every class covered.
    """
    if not 1 <= k <= h:
        raise ValidationError("need 1 <= k <= h")
    cap = ENUM_CAP if cap is None else cap
    if math.comb(h, k) > cap:
        raise BudgetExceeded(f"C({h},{k}) exceeds cap {cap}")
    primes = [int(p) for p in engine.base_primes(k)]
    for H in _enumerate(h, k, primes):
        bump("tuples_enumerated")
        yield H


def _enumerate(h, k, primes, seed=()):
    chosen = []
    cover = {p: [0] * p for p in primes}
    used = {p: 0 for p in primes}

    def add(x):
        for p in primes:
            r = x % p
            if cover[p][r] == 0:
                used[p] += 1
            cover[p][r] += 1

    def remove(x):
        for p in primes:
            r = x % p
            cover[p][r] -= 1
            if cover[p][r] == 0:
                used[p] -= 1

    for x in seed:
        add(x)
    if any(used[p] == p for p in primes):
        return

    def rec(start):
        if len(chosen) == k:
            yield KTuple(list(seed) + chosen)
            return
        need = k - len(chosen)
        for x in range(start, h - need + 2):
            add(x)
            if all(used[p] < p for p in primes):
                chosen.append(x)
                yield from rec(x + 1)
                chosen.pop()
            remove(x)

    yield from rec(1)


MIN_DIAMETER_K = (2, 8)


def min_diameter(k):
    """Smallest diameter of an admissible k-tuple, by exhaustive search."""
    lo, hi = MIN_DIAMETER_K
    if not lo <= k <= hi:
        raise ValidationError(f"min_diameter supports {lo} <= k <= {hi}")
    d = k - 1
    while True:
        # tuples {0, ..., d} with k-2 interior points from 1..d-1
        if _exists_with_diameter(d, k):
            return d
        d += 1


def _exists_with_diameter(d, k):
    primes = [int(p) for p in engine.base_primes(k)]
    if k == 2:
        return is_admissible([0, d])
    return next(_enumerate(d - 1, k - 2, primes, seed=(0, d)), None) is not None


def smooth_coprime(H, n, z, seg):
    """True iff no prime <= z divides any n + h_i, read from seg's spf table."""
    if z < 2:
        raise ValidationError("z must be >= 2")
    values = [n + h for h in as_tuple(H)]
    for m in values:
        if not seg.covers(m):
            raise SegmentMiss(f"{m} not in [{seg.base}, {seg.end})")
    return not any(m >= 2 and seg.spf_at(m) <= z for m in values)
