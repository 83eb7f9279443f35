"""Direct evaluation of smoothly weighted prime sums.

psi_eta(x, chi) = sum_n Lambda(n) chi(n) eta(n/x) and theta_eta(x, chi), the
same sum over primes only, are computed from per-residue totals

    S(a) = sum_{n = a mod q} Lambda(n) eta(n/x),

so that one pass of the sieve serves every character modulo q:
psi_eta(x, chi) = sum_a chi(a) S(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Optional, Tuple

import numpy as np

from . import kernels
from .characters import DirichletCharacter, factorize
from .errors import DomainError, ScaleTooLarge
from .weights import SmoothWeight, tail_integral

SEGMENT = 1 << 22
X_MAX = 1e9
CHEBYSHEV = 1.04          # psi(y) <= 1.04 y for all y > 0
TAIL_REL = 1e-9


@lru_cache(maxsize=8)
def small_primes(limit: int) -> np.ndarray:
    """All primes <= limit (plain sieve, for base primes)."""
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, int(math.isqrt(limit)) + 1):
        if flags[p]:
            flags[p * p::p] = False
    return np.flatnonzero(flags).astype(np.int64)


@lru_cache(maxsize=8)
def _prime_powers(limit: int) -> Tuple[np.ndarray, np.ndarray]:
    """(n, log p) for every p^k <= limit with k >= 2, sorted by n."""
    ns, ls = [], []
    for p in small_primes(math.isqrt(limit)).tolist():
        v = p * p
        lp = math.log(p)
        while v <= limit:
            ns.append(v)
            ls.append(lp)
            v *= p
    order = np.argsort(ns, kind="stable")
    return (np.asarray(ns, dtype=np.int64)[order],
            np.asarray(ls, dtype=np.float64)[order])


class SieveWindow:
    """Primes and higher prime powers up to ``limit``, produced by segments."""

    def __init__(self, limit: int, segment: int = SEGMENT):
        self.limit = int(limit)
        self.segment = int(segment)
        self.base = small_primes(math.isqrt(self.limit) + 1)
        self.pp_n, self.pp_log = _prime_powers(self.limit)

    def segments(self) -> Iterator[tuple]:
        """Yield (primes, powers, power_logs) for consecutive windows [lo, hi)."""
        lo = 0
        top = self.limit + 1
        while lo < top:
            hi = min(lo + self.segment, top)
            pr = kernels.primes_in_window(lo, hi, self.base)
            i, j = np.searchsorted(self.pp_n, [lo, hi])
            yield pr, self.pp_n[i:j], self.pp_log[i:j]
            lo = hi

    def primes(self) -> np.ndarray:
        return np.concatenate([s[0] for s in self.segments()])

    def von_mangoldt(self, upto: Optional[int] = None) -> np.ndarray:
        """Dense Lambda(n) for n <= upto (small limits only)."""
        upto = self.limit if upto is None else int(upto)
        lam = np.zeros(upto + 1, dtype=np.float64)
        pr = self.primes()
        pr = pr[pr <= upto]
        lam[pr] = np.log(pr.astype(np.float64))
        sel = self.pp_n <= upto
        lam[self.pp_n[sel]] = self.pp_log[sel]
        return lam


class _Compensated:
    """Vectorised Neumaier summation across segments."""

    def __init__(self, n):
        self.s = np.zeros(n)
        self.c = np.zeros(n)

    def add(self, v):
        t = self.s + v
        big = np.abs(self.s) >= np.abs(v)
        self.c += np.where(big, (self.s - t) + v, (v - t) + self.s)
        self.s = t

    def total(self):
        return self.s + self.c


def truncation(w: SmoothWeight, x: float) -> Tuple[float, float]:
    """(u0, bound) with sum_{n > u0 x} Lambda(n) eta(n/x) <= bound < 1e-9 x."""
    hi = w.support_hint[1]
    u0 = max(1.0, w.decreasing_from)
    while True:
        if u0 >= hi and w.support_hint[0] > 0:
            return hi, 0.0          # compact support ends here
        eta_u0 = float(w(np.array([u0]))[0])
        bound = CHEBYSHEV * x * (u0 * eta_u0 + tail_integral(w, u0))
        if bound < TAIL_REL * x:
            return u0, bound
        u0 *= 2
        if u0 > 1e6:
            raise DomainError(f"{w.name}: no truncation point found")


@dataclass
class ResidueSums:
    """Per-residue totals of the psi and theta sums for one (w, x, q)."""
    q: int
    x: float
    weight: str
    psi: np.ndarray
    theta: np.ndarray
    truncation_bound: float
    n_max: int

    def psi_chi(self, chi: DirichletCharacter) -> complex:
        return complex(np.dot(chi.value_table(), self.psi))

    def theta_chi(self, chi: DirichletCharacter) -> complex:
        return complex(np.dot(chi.value_table(), self.theta))


def _accumulate(q: int, n_max: int, fn: Callable[[np.ndarray], np.ndarray]):
    psi = _Compensated(q)
    th = _Compensated(q)
    for pr, ppn, ppl in SieveWindow(n_max).segments():
        if pr.size:
            v = np.log(pr.astype(np.float64)) * fn(pr.astype(np.float64))
            r = np.bincount(pr % q, weights=v, minlength=q)
            th.add(r)
            psi.add(r)
        if ppn.size:
            v = ppl * fn(ppn.astype(np.float64))
            psi.add(np.bincount(ppn % q, weights=v, minlength=q))
    return psi.total(), th.total()


def residue_sums(w: SmoothWeight, x: float, q: int) -> ResidueSums:
    if not x >= 1:
        raise DomainError("x must be >= 1")
    if x > X_MAX:
        raise ScaleTooLarge(f"x = {x:g} exceeds the direct-sum limit {X_MAX:g}; "
                            "use the explicit-formula evaluator")
    u0, bound = truncation(w, x)
    n_max = int(math.floor(u0 * x))
    psi, th = _accumulate(q, n_max, lambda n: w(n / x))
    return ResidueSums(q, float(x), w.name, psi, th, bound, n_max)


@dataclass
class WeightedPrimeSum:
    value: complex
    x: float
    kind: str
    truncation_bound: float
    character: Tuple[int, int]
    weight: str = ""


def _direct(w, x, chi, kind):
    rs = residue_sums(w, x, chi.modulus)
    v = rs.psi_chi(chi) if kind == "psi_eta" else rs.theta_chi(chi)
    return WeightedPrimeSum(v, float(x), kind, rs.truncation_bound,
                            (chi.modulus, chi.label), w.name)


def psi_eta_direct(w: SmoothWeight, x: float, chi: DirichletCharacter) -> WeightedPrimeSum:
    return _direct(w, x, chi, "psi_eta")


def theta_eta_direct(w: SmoothWeight, x: float, chi: DirichletCharacter) -> WeightedPrimeSum:
    return _direct(w, x, chi, "theta_eta")


def classical_sums(x: float, q: int) -> Tuple[np.ndarray, np.ndarray]:
    """(theta table, psi table): sums of log p and Lambda(n) up to x by residue."""
    if x > X_MAX:
        raise ScaleTooLarge(f"x = {x:g} exceeds {X_MAX:g}")
    if q < 1:
        raise DomainError("q must be >= 1")
    n_max = int(math.floor(x))
    psi, th = _accumulate(q, max(n_max, 1), lambda n: np.ones_like(n))
    return th, psi


def prime_power_correction(w: SmoothWeight, x: float, q: int) -> float:
    """sum_{p | q} sum_k log p eta(p^k / x): psi_eta(x, chi*) - psi_eta(x, chi) for chi_0."""
    u0, _ = truncation(w, x)
    total = []
    for p, _ in factorize(q):
        lp = math.log(p)
        v = p
        while v <= u0 * x:
            total.append(lp * float(w(np.array([v / x]))[0]))
            v *= p
    return math.fsum(total)
