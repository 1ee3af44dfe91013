# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels.  Mirrors :mod:`gapslab._fallback` exactly in
signature; every loop runs without the GIL so a thread pool scales."""

import numpy as np

from libc.math cimport log, pow
from libc.stdint cimport int32_t, int64_t, uint8_t, uint32_t
from libc.stdlib cimport malloc, free

cdef long long TILE = 262144


def sieve_flags(long long base, long long length, const int64_t[::1] primes):
    out = np.ones(length, dtype=np.uint8)
    cdef uint8_t[::1] f = out
    cdef long long hi = base + length
    cdef long long p, j, start, t0, t1
    cdef Py_ssize_t k, m = 0
    cdef Py_ssize_t np_ = primes.shape[0]
    cdef long long *nxt
    while m < np_ and primes[m] * primes[m] < hi:
        m += 1
    nxt = <long long *> malloc((m + 1) * sizeof(long long))
    if nxt == NULL:
        raise MemoryError()
    with nogil:
        j = base
        while j < 2 and j < hi:
            f[j - base] = 0
            j += 1
        for k in range(m):
            p = primes[k]
            start = ((base + p - 1) // p) * p
            if start < p * p:
                start = p * p
            nxt[k] = start - base
        # cache-sized tiles; nxt[k] carries each prime's next offset
        t0 = 0
        while t0 < length:
            t1 = t0 + TILE
            if t1 > length:
                t1 = length
            for k in range(m):
                p = primes[k]
                j = nxt[k]
                while j < t1:
                    f[j] = 0
                    j += p
                nxt[k] = j
            t0 = t1
    free(nxt)
    return out


def spf_table(long long base, long long length, const int64_t[::1] primes):
    out = np.zeros(length, dtype=np.uint32)
    cdef uint32_t[::1] s = out
    cdef long long hi = base + length
    cdef long long p, j, start, n
    cdef Py_ssize_t k, np_ = primes.shape[0]
    with nogil:
        for k in range(np_):
            p = primes[k]
            if p * p >= hi:
                break
            start = ((base + p - 1) // p) * p
            if start < p * p:
                start = p * p
            j = start - base
            while j < length:
                if s[j] == 0:
                    s[j] = <uint32_t> p
                j += p
        for j in range(length):
            if s[j] == 0:
                n = base + j
                if n <= 1:
                    s[j] = 1
                elif n < 4294967296LL:
                    s[j] = <uint32_t> n
    return out


def count_pairs_window(const int32_t[::1] pi, long long lo, long long hi, long long H):
    cdef long long n, c = 0
    with nogil:
        for n in range(lo, hi):
            if pi[n + H] - pi[n] >= 2:
                c += 1
    return c


def gaps_le_count(const int64_t[::1] primes, long long i0, long long i1, long long H):
    cdef long long j, c = 0
    with nogil:
        for j in range(i0, i1):
            if primes[j + 1] - primes[j] <= H:
                c += 1
    return c


def lambda_block(long long n0, long long count, const int64_t[::1] offsets,
                 double R, int power, const int64_t[::1] primes):
    """Lambda_R(n) and least prime <= R dividing P_H(n), n in [n0, n0+count).

    The divisor plan comes from the fallback module; only the strided
    accumulation runs here, in the same order, so results match it exactly.
    """
    from gapslab._fallback import divisor_plan
    mods_a, starts_a, weights_a, ps, roots = divisor_plan(
        n0, np.asarray(offsets), R, power, np.asarray(primes))
    pstarts = [((r - n0) % p, p) for p in ps for r in roots[p]]
    pst_a = np.array([a for a, _ in pstarts], dtype=np.int64)
    pmod_a = np.array([b for _, b in pstarts], dtype=np.int64)

    lam_arr = np.full(count, log(R) ** power, dtype=np.float64)
    minp_arr = np.zeros(count, dtype=np.int64)
    cdef double[::1] lam = lam_arr
    cdef int64_t[::1] minp = minp_arr
    cdef const int64_t[::1] mods = mods_a
    cdef const int64_t[::1] starts = starts_a
    cdef const double[::1] weights = weights_a
    cdef const int64_t[::1] pst = pst_a
    cdef const int64_t[::1] pmod = pmod_a
    cdef Py_ssize_t i
    cdef long long t, d
    cdef double w
    with nogil:
        for i in range(pst.shape[0]):
            d = pmod[i]
            t = pst[i]
            while t < count:
                if minp[t] == 0:
                    minp[t] = d
                t += d
        for i in range(mods.shape[0]):
            d = mods[i]
            w = weights[i]
            t = starts[i]
            while t < count:
                lam[t] += w
                t += d
    return lam_arr, minp_arr
