"""Pure-Python (numpy) versions of the hot kernels.

Signatures and results match :mod:`gapslab._core`; the compiled module is
preferred when it imports.  The two Lambda_R kernels use different
algorithms (residue-class divisor sieve here, per-n divisor enumeration in
the extension) so each serves as a cross-check of the other.
"""
import math
import numpy as np


def _first_multiple(p, base):
    start = -(-base // p) * p
    return max(start, p * p)


def sieve_flags(base, length, primes):
    flags = np.ones(length, dtype=np.uint8)
    for n in range(base, min(base + length, 2)):
        flags[n - base] = 0
    hi = base + length
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        start = _first_multiple(p, base)
        if start < hi:
            flags[start - base::p] = 0
    return flags


def spf_table(base, length, primes):
    spf = np.zeros(length, dtype=np.uint32)
    hi = base + length
    usable = [int(p) for p in primes if int(p) * int(p) < hi]
    # descending so the smallest prime is written last
    for p in reversed(usable):
        start = _first_multiple(p, base)
        if start < hi:
            spf[start - base::p] = p
    unset = np.flatnonzero(spf == 0)
    if unset.size:
        vals = unset.astype(np.int64) + base
        vals = np.where(vals >= 2**32, 0, vals)
        vals = np.where(unset + base <= 1, 1, vals)
        spf[unset] = vals.astype(np.uint32)
    return spf


def count_pairs_window(pi, lo, hi, H):
    if hi <= lo:
        return 0
    d = pi[lo + H:hi + H].astype(np.int64) - pi[lo:hi]
    return int(np.count_nonzero(d >= 2))


def gaps_le_count(primes, i0, i1, H):
    if i1 <= i0:
        return 0
    g = np.diff(primes[i0:i1 + 1])
    return int(np.count_nonzero(g <= H))


def _roots(offsets, p):
    return sorted({(-int(h)) % p for h in offsets})


def _crt_classes(ps, roots):
    """All residues mod prod(ps) whose reduction mod each p lies in roots[p]."""
    classes, mod = [0], 1
    for p in ps:
        inv = pow(mod, -1, p)
        nxt = []
        for c in classes:
            for r in roots[p]:
                t = ((r - c) * inv) % p
                nxt.append(c + mod * t)
        classes, mod = nxt, mod * p
    return classes


def divisor_plan(n0, offsets, R, power, ps):
    """Every (d, first index, weight) needed to build Lambda_R on a block at n0.

    d runs over squarefree d <= R in depth-first order; each d appears once
    per residue class c with d | P_H(c), first index (c - n0) mod d, weight
    mu(d) log^power(R/d).  Shared by both backends so they add identical
    terms in identical order.
    """
    logR = math.log(R)
    ps = [int(p) for p in ps if p <= R]
    roots = {p: _roots(offsets, p) for p in ps}
    mods, starts, weights = [], [], []
    stack = [(1, 0, 0, 0.0)]  # (d, next prime index, omega, log d)
    while stack:
        d, start, omega, logd = stack.pop()
        for j in range(start, len(ps)):
            p = ps[j]
            nd = d * p
            if nd > R:
                break
            nlogd = logd + math.log(p)
            sign = -1.0 if (omega + 1) % 2 else 1.0
            w = sign * (logR - nlogd) ** power
            for c in _crt_classes(_factor_list(nd, ps), roots):
                mods.append(nd)
                starts.append((c - n0) % nd)
                weights.append(w)
            stack.append((nd, j + 1, omega + 1, nlogd))
    return (np.array(mods, dtype=np.int64), np.array(starts, dtype=np.int64),
            np.array(weights, dtype=np.float64), ps, roots)


def lambda_block(n0, count, offsets, R, power, primes):
    """Lambda_R(n) and the least prime <= R dividing P_H(n) for n in [n0, n0+count).

    Adds mu(d) log^power(R/d) to every n in the residue classes where
    d | P_H(n), for each squarefree d <= R.
    """
    lam = np.full(count, math.log(R) ** power, dtype=np.float64)
    minp = np.zeros(count, dtype=np.int64)
    mods, starts, weights, ps, roots = divisor_plan(n0, offsets, R, power, primes)
    for p in ps:
        for r in roots[p]:
            view = minp[(r - n0) % p::p]
            view[view == 0] = p
    for d, s, w in zip(mods.tolist(), starts.tolist(), weights.tolist()):
        lam[s::d] += w
    return lam, minp


def _factor_list(d, ps):
    out = []
    for p in ps:
        if d % p == 0:
            out.append(p)
            d //= p
            if d == 1:
                break
    return out
