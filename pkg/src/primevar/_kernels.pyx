# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: odd-only segmented sieve, Hurwitz zeta partial sums,
and the exhaustive Diophantine scan. Mirrors ``primevar._fallback``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs, floor, log, fmod
from libc.string cimport memset, memcpy

cnp.import_array()

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)

# odd-only presieve pattern for 3, 5, 7: index i <-> odd number 2i+1, period 105
cdef unsigned char _PATTERN[105]
cdef int _pi
for _pi in range(105):
    _v = 2 * _pi + 1
    _PATTERN[_pi] = 0 if (_v % 3 == 0 or _v % 5 == 0 or _v % 7 == 0) else 1


def primes_in_window(long long lo, long long hi, cnp.int64_t[::1] base):
    """Primes p with lo <= p < hi. ``base`` must hold every prime <= sqrt(hi)."""
    if hi <= lo or hi <= 2:
        return np.empty(0, dtype=np.int64)
    cdef long long first_odd = lo | 1
    if first_odd < 3:
        first_odd = 3
    cdef long long nodd = 0
    if hi > first_odd:
        nodd = (hi - first_odd + 1) // 2
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] flags = np.empty(max(nodd, 1), dtype=np.uint8)
    cdef unsigned char* f = <unsigned char*> flags.data
    cdef long long i, j, p, start, idx, off
    # presieve with the 3*5*7 wheel pattern
    off = ((first_odd - 1) // 2) % 105
    i = 0
    while i < nodd:
        j = 105 - off
        if j > nodd - i:
            j = nodd - i
        memcpy(f + i, _PATTERN + off, j)
        i += j
        off = 0
    cdef Py_ssize_t nb = base.shape[0]
    cdef Py_ssize_t k
    for k in range(nb):
        p = base[k]
        if p == 2:
            continue
        if p * p >= hi:
            break
        start = p * p
        if start < first_odd:
            start = ((first_odd + p - 1) // p) * p
            if start % 2 == 0:
                start += p
        idx = (start - first_odd) // 2
        while idx < nodd:
            f[idx] = 0
            idx += p
    # the presieve pattern wrongly clears 3, 5, 7 themselves
    for p in (3, 5, 7):
        if first_odd <= p < hi:
            f[(p - first_odd) // 2] = 1
    cdef long long count = 0
    for i in range(nodd):
        count += f[i]
    has_two = 1 if (lo <= 2 < hi) else 0
    cdef cnp.ndarray[cnp.int64_t, ndim=1] out = np.empty(count + has_two, dtype=np.int64)
    cdef long long w = 0
    if has_two:
        out[0] = 2
        w = 1
    for i in range(nodd):
        if f[i]:
            out[w] = first_odd + 2 * i
            w += 1
    return out


def hurwitz_regular(cnp.complex128_t[::1] s, double x, cnp.int64_t[::1] nterms,
                    cnp.float64_t[::1] bern):
    """zeta(s, x) minus the pole term (N+x)^(1-s)/(s-1), Euler-Maclaurin.

    ``bern[j]`` holds B_{2j+2}/(2j+2)!; ``nterms[i]`` is the shift N for s[i].
    """
    cdef Py_ssize_t m = s.shape[0]
    cdef Py_ssize_t J = bern.shape[0]
    cdef cnp.ndarray[cnp.complex128_t, ndim=1] out = np.empty(m, dtype=np.complex128)
    cdef Py_ssize_t i, j
    cdef long long n, N
    cdef double complex si, acc, term, poch, tail
    cdef double y
    cdef double lv, ly
    for i in range(m):
        si = s[i]
        N = nterms[i]
        acc = 0
        for n in range(N):
            lv = log(n + x)
            acc = acc + cexp(-si * lv)
        y = N + x
        ly = log(y)
        term = cexp(-si * ly)
        acc = acc + 0.5 * term
        # B_{2j}/(2j)! * s(s+1)...(s+2j-2) * y^(-s-2j+1)
        poch = si
        term = term / y
        tail = 0
        for j in range(J):
            tail = tail + bern[j] * poch * term
            poch = poch * (si + 2 * j + 1) * (si + 2 * j + 2)
            term = term / (y * y)
        out[i] = acc + tail
    return out


def dio_scan(cnp.float64_t[::1] lam, long long n_lo, long long n_hi, double tol):
    """First n in [n_lo, n_hi] with ||n*lam_i|| <= tol for all i, else -1."""
    cdef Py_ssize_t k = lam.shape[0]
    cdef Py_ssize_t i
    cdef long long n
    cdef double v, d
    cdef int ok
    for n in range(n_lo, n_hi + 1):
        ok = 1
        for i in range(k):
            v = fmod(<double> n * lam[i], 1.0)
            if v < 0:
                v += 1.0
            d = v if v < 0.5 else 1.0 - v
            if d > tol:
                ok = 0
                break
        if ok:
            return n
    return -1
