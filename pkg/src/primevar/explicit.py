"""The explicit formula for psi_eta(x, chi) as a sum over zeros.

For a primitive character,

    psi_eta(x, chi) = 1_{chi = chi_0} M eta(1) x - sum_rho M eta(rho) x^rho
                      - 1_{even, chi != chi_0} M eta(0) + O(log(q + 1)),

the last sum running over non-trivial zeros. Here x only appears through
t = log x and results are kept normalised by sqrt(x), so t may be far beyond
floating range for x itself.
"""
from __future__ import annotations

import math
import threading
from dataclasses import asdict, dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

import mpmath
import numpy as np

from .characters import DirichletCharacter, factorize
from .errors import DomainError, ModeError
from .lfunctions import ZeroTable
from .weights import SmoothWeight, mellin, mellin_bound_constant, sector_constant

C_ERR = 10.0
ABS_T_MAX = 25.0         # absolute values only for t = log x <= 25
FLOAT_PHASE_MAX = 1e6    # beyond this |gamma t| is reduced mod 2 pi in mpmath


NEGLIGIBLE = 1e-30      # |M eta(s)| certified below this is stored as 0


class MellinCache:
    """Memo of M eta(s) keyed by (weight, s); insert-if-absent under a lock.

    Uses M eta(conj s) = conj M eta(s) (the weights are real), and skips the
    quadrature where the sector majorant already certifies |M eta(s)| < 1e-30.
    """

    def __init__(self):
        self._d: Dict[tuple, complex] = {}
        self._sector: Dict[tuple, float] = {}
        self._lock = threading.Lock()

    def _negligible(self, w: SmoothWeight, s: complex) -> bool:
        if w.sector <= 0 or abs(s.imag) < 20 or not -0.5 <= s.real <= 2:
            return False
        phi = 0.9 * w.sector
        key = (w.name, w.scale, s.real)
        A = self._sector.get(key)
        if A is None:
            A = self._sector.setdefault(key, sector_constant(w, s.real, phi))
        return A * math.exp(-phi * abs(s.imag)) < NEGLIGIBLE

    def get(self, w: SmoothWeight, s: complex) -> complex:
        s = complex(s)
        key = (w.name, w.scale, s)
        v = self._d.get(key)
        if v is None:
            mirror = self._d.get((w.name, w.scale, s.conjugate()))
            if mirror is not None:
                v = mirror.conjugate()
            elif self._negligible(w, s):
                v = 0j
            else:
                v = mellin(w, s)
            with self._lock:
                v = self._d.setdefault(key, v)
        return v

    def many(self, w: SmoothWeight, ss: Iterable[complex]) -> np.ndarray:
        return np.array([self.get(w, s) for s in ss], dtype=np.complex128)

    def __len__(self):
        return len(self._d)


CACHE = MellinCache()

_B_CACHE: Dict[tuple, float] = {}


def b_eta(w: SmoothWeight) -> float:
    key = (w.name, w.scale)
    if key not in _B_CACHE:
        _B_CACHE[key] = mellin_bound_constant(w)[0]
    return _B_CACHE[key]


def tail_certificate(w: SmoothWeight, q: int, T: float, c_abs: float = 1.0) -> float:
    """B_eta c_abs log(qT)/T bound on sum_{|gamma| > T} |M eta(rho)|."""
    if T <= 0:
        return math.inf
    return b_eta(w) * c_abs * math.log(max(q, 2) * T) / T


def phases(gammas: np.ndarray, t) -> np.ndarray:
    """exp(i gamma t) with the argument reduced accurately for huge t."""
    gammas = np.asarray(gammas, dtype=np.float64)
    tf = float(t)
    if abs(tf) * (np.max(np.abs(gammas), initial=0.0)) <= FLOAT_PHASE_MAX:
        return np.exp(1j * gammas * tf)
    tm = mpmath.mpf(t) if not isinstance(t, int) else mpmath.mpf(t)
    digits = int(math.log10(abs(tf) * max(1.0, np.max(np.abs(gammas))) + 1)) + 30
    out = np.empty(gammas.size, dtype=np.complex128)
    with mpmath.workdps(digits):
        two_pi = 2 * mpmath.pi
        if isinstance(t, int):
            tm = mpmath.mpf(t)
        for i, g in enumerate(gammas.tolist()):
            a = float(mpmath.fmod(mpmath.mpf(g) * tm, two_pi))
            out[i] = complex(math.cos(a), math.sin(a))
    return out


@dataclass
class ExplicitEvaluation:
    x_log: float
    normalized: complex
    main_term_included: bool
    truncation_height: float
    tail_certificate: float
    offline_contribution: complex
    error_interval: float            # c_err log(q+1), un-normalised
    character: Tuple[int, int]
    weight: str
    n_zeros: int
    mode: str = "strict"
    imprimitive_correction: float = 0.0

    @property
    def value(self) -> complex:
        """psi_eta(x, chi) itself; only for t <= 25."""
        if self.x_log > ABS_T_MAX:
            raise DomainError(f"absolute values only for log x <= {ABS_T_MAX}")
        return self.normalized * math.exp(self.x_log / 2)

    def as_dict(self):
        d = asdict(self)
        for k in ("normalized", "offline_contribution"):
            d[k] = [d[k].real, d[k].imag]
        return d


def _imprimitive(w: SmoothWeight, chi: DirichletCharacter, t: float) -> complex:
    """psi_eta(x, chi*) - psi_eta(x, chi), normalised by sqrt(x)."""
    star = chi.primitive()
    if star.modulus == chi.modulus or t > 700:
        return 0j
    u0 = w.support_hint[1]
    total = 0j
    for p, _ in factorize(chi.modulus):
        if star.modulus % p == 0:
            continue
        lp = math.log(p)
        k = 1
        while k * lp <= t + math.log(u0):
            u = math.exp(k * lp - t)
            total += star(p**k) * lp * float(w(np.array([u]))[0])
            k += 1
    return total * math.exp(-t / 2)


def psi_eta_explicit(w: SmoothWeight, t, chi: DirichletCharacter, table: ZeroTable,
                     T: float, mode: str = "strict", c_abs: float = 1.0,
                     c_err: float = C_ERR, cache: MellinCache = CACHE) -> ExplicitEvaluation:
    if mode not in ("strict", "exploratory"):
        raise ModeError(f"unknown mode {mode!r}")
    star = chi.primitive()
    rho = table.zeros(star, T)
    offline = rho.real != 0.5
    if np.any(offline) and mode == "strict":
        raise ModeError("table holds off-line zeros; run in exploratory mode")
    tf = float(t)
    m = cache.many(w, rho)
    ph = phases(rho.imag, t)
    on = ~offline
    zero_sum = -np.sum(m[on] * ph[on])
    off = 0j
    if np.any(offline):
        scale = np.exp((rho.real[offline] - 0.5) * tf)
        off = complex(-np.sum(m[offline] * ph[offline] * scale))
    norm = complex(zero_sum) + off
    principal = star.is_principal
    if principal:
        norm += cache.get(w, 1.0) * math.exp(tf / 2)
    elif star.kappa == 0 and tf < 1400:
        # trivial zero of L(s, chi) at s = 0
        norm -= cache.get(w, 0.0) * math.exp(-tf / 2)
    corr = _imprimitive(w, chi, tf)
    norm -= corr
    return ExplicitEvaluation(
        x_log=tf, normalized=norm, main_term_included=principal,
        truncation_height=float(T),
        tail_certificate=tail_certificate(w, star.modulus, T, c_abs),
        offline_contribution=off, error_interval=c_err * math.log(chi.modulus + 1),
        character=(chi.modulus, chi.label), weight=w.name, n_zeros=int(rho.size),
        mode=mode, imprimitive_correction=abs(corr))


def weil_sum(w: SmoothWeight, chi: DirichletCharacter, table: ZeroTable, T: float,
             cache: MellinCache = CACHE) -> complex:
    """sum_{|gamma| <= T} M eta(rho); compare with eta(1) log q_chi."""
    if chi.is_principal:
        raise DomainError("Weil sum is stated for non-principal characters")
    if T <= 0:
        return 0j
    rho = table.zeros(chi.primitive(), T)
    m = cache.many(w, rho)
    return complex(math.fsum(m.real.tolist()), math.fsum(m.imag.tolist()))


def weil_deviation(w: SmoothWeight, chi: DirichletCharacter, table: ZeroTable,
                   T: float) -> float:
    return abs(weil_sum(w, chi, table, T) - w.at_one * math.log(chi.conductor))


def default_t_grid(n: int = 200, t_max: float = 25.0) -> np.ndarray:
    return t_max * np.arange(1, n + 1) / n


def grh_bound_scan(w: SmoothWeight, chi: DirichletCharacter, table: ZeroTable,
                   t_grid: Sequence[float], T: Optional[float] = None) -> float:
    """max over the grid of |psi_eta(x, chi)/sqrt(x)| / log q (strict mode)."""
    if T is None:
        T = table.complete_height(chi)
    lq = math.log(chi.modulus)
    best = 0.0
    for t in t_grid:
        ev = psi_eta_explicit(w, t, chi, table, T, mode="strict")
        best = max(best, abs(ev.normalized) / lq)
    return best
