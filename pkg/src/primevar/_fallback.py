"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

Signatures and results are identical; only speed differs.
"""
import numpy as np

_PATTERN = np.array([0 if (2 * i + 1) % 3 == 0 or (2 * i + 1) % 5 == 0
                     or (2 * i + 1) % 7 == 0 else 1 for i in range(105)],
                    dtype=np.uint8)


def primes_in_window(lo, hi, base):
    lo, hi = int(lo), int(hi)
    if hi <= lo or hi <= 2:
        return np.empty(0, dtype=np.int64)
    first_odd = max(lo | 1, 3)
    nodd = (hi - first_odd + 1) // 2 if hi > first_odd else 0
    off = ((first_odd - 1) // 2) % 105
    reps = (nodd + off) // 105 + 1
    flags = np.tile(_PATTERN, reps)[off:off + nodd].copy()
    for p in np.asarray(base, dtype=np.int64):
        p = int(p)
        if p == 2:
            continue
        if p * p >= hi:
            break
        start = p * p
        if start < first_odd:
            start = -(-first_odd // p) * p
            if start % 2 == 0:
                start += p
        flags[(start - first_odd) // 2::p] = 0
    for p in (3, 5, 7):
        if first_odd <= p < hi:
            flags[(p - first_odd) // 2] = 1
    odd = first_odd + 2 * np.flatnonzero(flags).astype(np.int64)
    if lo <= 2 < hi:
        return np.concatenate([np.array([2], dtype=np.int64), odd])
    return odd


def hurwitz_regular(s, x, nterms, bern):
    s = np.asarray(s, dtype=np.complex128)
    nterms = np.asarray(nterms, dtype=np.int64)
    out = np.empty(s.shape[0], dtype=np.complex128)
    # group by shift so each group is one vectorized outer product
    for N in np.unique(nterms):
        sel = np.flatnonzero(nterms == N)
        si = s[sel]
        logs = np.log(np.arange(N, dtype=np.float64) + x)
        acc = np.exp(-np.outer(si, logs)).sum(axis=1)
        y = N + x
        term = np.exp(-si * np.log(y))
        acc = acc + 0.5 * term
        poch = si.copy()
        term = term / y
        tail = np.zeros_like(si)
        for j, b in enumerate(bern):
            tail += b * poch * term
            poch = poch * (si + 2 * j + 1) * (si + 2 * j + 2)
            term = term / (y * y)
        out[sel] = acc + tail
    return out


def dio_scan(lam, n_lo, n_hi, tol, chunk=1 << 16):
    lam = np.asarray(lam, dtype=np.float64)
    n_lo, n_hi = int(n_lo), int(n_hi)
    start = n_lo
    while start <= n_hi:
        stop = min(n_hi, start + chunk - 1)
        n = np.arange(start, stop + 1, dtype=np.float64)
        ok = np.ones(n.shape[0], dtype=bool)
        for lv in lam:
            v = np.mod(n * lv, 1.0)
            ok &= np.minimum(v, 1.0 - v) <= tol
        hit = np.flatnonzero(ok)
        if hit.size:
            return start + int(hit[0])
        start = stop + 1
    return -1
