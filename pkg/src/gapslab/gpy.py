"""GPY/Selberg sieve weights and the weighted sums S_0, S_1, S_2.

    Lambda_R(n; H, a) = 1/a! * sum_{d | P_H(n), d <= R, d squarefree} mu(d) log^a(R/d)

with a = k + l.  Divisors above R are excluded.  The 1/a! factor is the
normalization under which the S_0/S_1 main terms hold; ``normalized=False``
drops it (the bare divisor sum).
"""
import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _backend, engine
from .errors import BudgetExceeded, SegmentMiss, ValidationError
from .parallel import ordered_fsum, ordered_map
from .singular import singular_series
from .tuples import as_tuple, enumerate_admissible

BLOCK_LEN = 2**20
MAX_FACTORS = 40


class ParameterWindowWarning(RuntimeWarning):
    """R lies outside the window where the main-term asymptotics apply."""


@dataclass(frozen=True)
class WeightParams:
    R: float
    k: int
    ell: int = 0
    delta: float = 0.0
    epsilon: float = 0.0
    vartheta: float = 0.5 + 7 / 300
    normalized: bool = True

    def __post_init__(self):
        if self.R < 2:
            raise ValidationError("R must be >= 2")
        if self.k < 1 or self.ell < 0:
            raise ValidationError("need k >= 1 and ell >= 0")
        if not 0 <= self.delta < 1:
            raise ValidationError("delta must lie in [0, 1)")
        if self.epsilon < 0:
            raise ValidationError("epsilon must be >= 0")
        if not 0 < self.vartheta < 1:
            raise ValidationError("vartheta must lie in (0, 1)")

    @property
    def power(self):
        return self.k + self.ell

    @property
    def scale(self):
        return 1.0 / math.factorial(self.power) if self.normalized else 1.0

    @property
    def smooth_bound(self):
        """R**delta: the restricted sums require every prime factor above it."""
        return self.R ** self.delta

    def to_dict(self):
        return {"R": self.R, "k": self.k, "ell": self.ell, "delta": self.delta,
                "epsilon": self.epsilon, "vartheta": self.vartheta,
                "normalized": self.normalized}


@dataclass(frozen=True)
class SumReport:
    value: float
    main_term: float
    ratio: float | None
    n_range: tuple
    params: WeightParams
    restricted: bool

    def to_dict(self):
        return {"value": self.value, "main_term": self.main_term, "ratio": self.ratio,
                "n_range": list(self.n_range), "params": self.params.to_dict(),
                "restricted": self.restricted}


def _report(value, main, N, params, restricted):
    ratio = value / main if main != 0 else None
    return SumReport(value, main, ratio, (N, 2 * N), params, restricted)


def _divisor_sum(primes, R, power):
    logR = math.log(R)
    total = [logR ** power]
    stack = [(1, 0, 1.0, 0.0)]
    while stack:
        d, start, sign, logd = stack.pop()
        for j in range(start, len(primes)):
            nd = d * primes[j]
            if nd > R:
                break
            nlog = logd + math.log(primes[j])
            total.append(-sign * (logR - nlog) ** power)
            stack.append((nd, j + 1, -sign, nlog))
    return math.fsum(total)


def tuple_prime_factors(H, n, bound):
    """Distinct primes <= bound dividing P_H(n), ascending."""
    ps = set()
    for h in as_tuple(H):
        ps.update(engine.factor_small(n + h, bound))
    if len(ps) > MAX_FACTORS:
        raise ValidationError(f"P_H({n}) has more than {MAX_FACTORS} small prime factors")
    return sorted(ps)


def lambda_R(n, H, params, seg=None):
    """Lambda_R(n; H, k + ell) for a single n."""
    H = as_tuple(H)
    if n < 1:
        raise ValidationError("n must be >= 1")
    if seg is not None:
        for h in H:
            if not seg.covers(n + h):
                raise SegmentMiss(f"{n + h} not in [{seg.base}, {seg.end})")
    primes = tuple_prime_factors(H, n, params.R)
    return _divisor_sum(primes, params.R, params.power) * params.scale


def lambda_values(H, n0, count, params, backend=None):
    """Vectorised Lambda_R over [n0, n0+count) plus the least prime <= R
    dividing P_H(n) (0 when there is none)."""
    H = as_tuple(H)
    kern = _backend.kernels if backend is None else _backend.get(backend)
    offs = np.array(H.offsets, dtype=np.int64)
    ps = engine.base_primes(int(math.floor(params.R)))
    lam, minp = kern.lambda_block(n0, count, offs, float(params.R), params.power, ps)
    if params.normalized and params.power > 1:
        lam *= params.scale
    return lam, minp


def _smooth_mask(minp, z):
    return (minp == 0) | (minp > z)


def _blocks(N):
    return [(s, min(s + BLOCK_LEN, 2 * N)) for s in range(N, 2 * N, BLOCK_LEN)]


def _check_range(N, H, extra=0):
    if N < 1:
        raise ValidationError("N must be >= 1")
    engine._check_hi(2 * N + H.offsets[-1] + extra)


def _window_warning(R, cap, label):
    if R > cap * (1 + 1e-12):
        warnings.warn(f"R={R:g} exceeds the {label} window {cap:g}",
                      ParameterWindowWarning, stacklevel=3)


def main_term_s0(H, N, params, p_cut=None):
    """S(H)/(k+2l)! * C(2l, l) * N (log R)^(k+2l)."""
    H = as_tuple(H)
    k, ell = params.k, params.ell
    sv = singular_series(H, p_cut or _default_cut(H))
    if not sv.admissible:
        return 0.0
    return (sv.value / math.factorial(k + 2 * ell) * math.comb(2 * ell, ell)
            * N * math.log(params.R) ** (k + 2 * ell))


def main_term_s1(H, h_star, N, params, p_cut=None):
    """S(H u {h*})/(k+2l+kappa)! * C(2(l+kappa), l+kappa) * N (log R)^(k+2l+kappa)."""
    H = as_tuple(H)
    k, ell = params.k, params.ell
    kappa = 1 if h_star in H.offsets else 0
    Hs = H.union(h_star)
    sv = singular_series(Hs, p_cut or _default_cut(Hs))
    if not sv.admissible:
        return 0.0
    m = ell + kappa
    return (sv.value / math.factorial(k + 2 * ell + kappa) * math.comb(2 * m, m)
            * N * math.log(params.R) ** (k + 2 * ell + kappa))


def _default_cut(H):
    return max(10**6, 2 * H.k * H.k, H.diameter + 1)


def s0(H, N, params, restricted=False, workers=None, backend=None):
    """Sum over n in [N, 2N) of Lambda_R^2, optionally only where P_H(n) has
    no prime factor <= R**delta."""
    H = as_tuple(H)
    _check_range(N, H)
    _window_warning(params.R, math.sqrt(N), "S_0 (R <= N^(1/2))")
    z = params.smooth_bound

    def block(span):
        s, e = span
        lam, minp = lambda_values(H, s, e - s, params, backend)
        sq = lam * lam
        if restricted:
            sq = sq[_smooth_mask(minp, z)]
        return math.fsum(sq.tolist())

    value = ordered_fsum(ordered_map(block, _blocks(N), workers))
    return _report(value, main_term_s0(H, N, params), N, params, restricted)


def s1(H, h_star, N, params, restricted=False, workers=None, backend=None):
    """Sum over n in [N, 2N) of theta(n + h*) Lambda_R^2."""
    H = as_tuple(H)
    if h_star < 0:
        raise ValidationError("h_star must be >= 0")
    _check_range(N, H, max(0, h_star - H.offsets[-1]))
    cap = N ** ((params.vartheta - params.epsilon) / 2)
    _window_warning(params.R, cap, "S_1 (R <= N^((vartheta-eps)/2))")
    z = params.smooth_bound

    def block(span):
        s, e = span
        flags = engine.prime_flags(s + h_star, e + h_star)
        idx = np.flatnonzero(flags)
        if idx.size == 0:
            return 0.0
        lam, minp = lambda_values(H, s, e - s, params, backend)
        if restricted:
            idx = idx[_smooth_mask(minp[idx], z)]
        logs = np.log((idx + s + h_star).astype(np.float64))
        return math.fsum((logs * lam[idx] ** 2).tolist())

    value = ordered_fsum(ordered_map(block, _blocks(N), workers))
    return _report(value, main_term_s1(H, h_star, N, params), N, params, restricted)


S2_MAX_K = 4


def s2_main_term(params, N):
    """Closing line of the S_2 lower bound, without the (1 + O(delta)) factor."""
    k, ell = params.k, params.ell
    lead = math.comb(2 * ell, ell) / math.factorial(k + 2 * ell)
    return lead * (k / (k + 2 * ell + 1) * 2 * (2 * ell + 1) / (ell + 1)
                   * math.log(params.R) - math.log(N))


def theta_windows(n0, count, h):
    """Theta(n, h) = sum_{j=1..h} theta(n + j) for n in [n0, n0+count)."""
    h = int(math.floor(h))
    flags = engine.prime_flags(n0 + 1, n0 + count + h)
    vals = np.where(flags, np.log(np.arange(n0 + 1, n0 + count + h, dtype=np.float64)), 0.0)
    csum = np.concatenate(([0.0], np.cumsum(vals)))
    return csum[h:h + count] - csum[:count]


def s2(h, N, params, workers=None, backend=None, cap=None):
    """Normalised S_2(h, delta) at toy scale (k <= 4)."""
    k = params.k
    if k > S2_MAX_K:
        raise BudgetExceeded(f"s2 is limited to k <= {S2_MAX_K}")
    hf = int(math.floor(h))
    if hf < 1:
        raise ValidationError("h must be >= 1")
    engine._check_hi(2 * N + hf)
    tuples = list(enumerate_admissible(hf, k, cap)) if k <= hf else []
    main = s2_main_term(params, N)
    norm = N * h**k * math.log(params.R) ** (k + 2 * params.ell)
    if not tuples:
        return _report(0.0, main, N, params, True)
    z = params.smooth_bound

    def block(span):
        s, e = span
        acc = np.zeros(e - s)
        for H in tuples:
            lam, minp = lambda_values(H, s, e - s, params, backend)
            acc += np.where(_smooth_mask(minp, z), lam * lam, 0.0)
        weight = theta_windows(s, e - s, hf) - math.log(3 * N)
        return math.fsum((weight * acc).tolist())

    value = ordered_fsum(ordered_map(block, _blocks(N), workers)) / norm
    return _report(value, main, N, params, True)
