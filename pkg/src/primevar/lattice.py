"""LLL reduction of integer lattices.

Uses python-flint when it is installed and falls back to an exact integer
LLL (all Gram-Schmidt data kept as integers, so no precision is lost on the
large entries that simultaneous approximation produces).
"""
from __future__ import annotations

from fractions import Fraction
from typing import List, Sequence

from .kernels import HAVE_FLINT

DELTA = Fraction(99, 100)


def lll(rows: Sequence[Sequence[int]], backend: str = "auto") -> List[List[int]]:
    """LLL-reduce the row basis ``rows`` (delta = 0.99)."""
    rows = [[int(v) for v in r] for r in rows]
    if backend not in ("auto", "flint", "python"):
        raise ValueError(f"unknown LLL backend {backend!r}")
    if backend == "flint" or (backend == "auto" and HAVE_FLINT):
        import flint
        m = flint.fmpz_mat(rows)
        red = m.lll(delta=0.99, eta=0.51)
        return [[int(red[i, j]) for j in range(red.ncols())] for i in range(red.nrows())]
    return lll_integral(rows)


def _dot(a, b):
    return sum(x * y for x, y in zip(a, b))


def lll_integral(rows: List[List[int]], delta: Fraction = DELTA) -> List[List[int]]:
    """Integral LLL (de Weger's variant): exact integer arithmetic throughout."""
    b = [list(r) for r in rows]
    n = len(b)
    if n <= 1:
        return b
    dn, dd = delta.numerator, delta.denominator
    d = [0] * (n + 1)            # d[0] = 1, d[i+1] for row i
    lam = [[0] * n for _ in range(n)]
    d[0] = 1

    def red(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            b[k] = [x - q * y for x, y in zip(b[k], b[l])]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swap(k, kmax):
        b[k], b[k - 1] = b[k - 1], b[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lm = lam[k][k - 1]
        B = (d[k - 1] * d[k + 1] + lm * lm) // d[k]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lm * t) // d[k]
            lam[i][k - 1] = (B * t + lm * lam[i][k]) // d[k + 1]
        d[k] = B

    d[1] = _dot(b[0], b[0])
    if d[1] == 0:
        raise ValueError("zero vector in basis")
    k, kmax = 1, 0
    while k < n:
        if k > kmax:
            kmax = k
            for j in range(k + 1):
                u = _dot(b[k], b[j])
                for i in range(j):
                    u = (d[i + 1] * u - lam[k][i] * lam[j][i]) // d[i]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise ValueError("basis vectors are linearly dependent")
                    d[k + 1] = u
        red(k, k - 1)
        # Lovasz: d_k d_{k-2} < delta d_{k-1}^2 - lambda^2, scaled to integers
        if dd * d[k + 1] * d[k - 1] < dn * d[k] * d[k] - dd * lam[k][k - 1] ** 2:
            swap(k, kmax)
            k = max(1, k - 1)
        else:
            for l in range(k - 2, -1, -1):
                red(k, l)
            k += 1
    return b
