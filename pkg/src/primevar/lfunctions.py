"""Dirichlet L-functions on the critical strip, their zeros, and zero tables.

L(s, chi) = q^-s sum_a chi(a) zeta(s, a/q), with the Hurwitz zeta function
computed by Euler-Maclaurin in ``kernels.hurwitz_regular``. Zeros on the
critical line are sign changes of the real function

    Z(t) = eps^(-1/2) e^(i theta(t)) L(1/2 + it, chi),
    theta(t) = (t/2) log(q/pi) + Im log Gamma((1/2 + kappa + it)/2),

where eps = tau(chi) / (i^kappa sqrt(q)) is the root number.
"""
from __future__ import annotations

import io
import logging
import math
import os
import re
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np
from scipy.special import bernoulli, factorial, loggamma

from . import kernels
from .characters import DirichletCharacter, character, character_group
from .errors import (CountMismatch, DomainError, IncompleteTable, ModeError,
                     ParseError, PoleError, PrecisionLoss, SymmetryViolation)

log = logging.getLogger(__name__)

N_BERNOULLI = 12
_B = bernoulli(2 * N_BERNOULLI)
BERN = np.array([_B[2 * j] / factorial(2 * j, exact=True)
                 for j in range(1, N_BERNOULLI + 1)], dtype=np.float64)
MAX_HALVINGS = 6


def _shifts(s: np.ndarray) -> np.ndarray:
    return np.ceil(10.0 + np.abs(s.imag)).astype(np.int64)


def _check_tail(s: np.ndarray, y: np.ndarray) -> None:
    """Euler-Maclaurin corrections must shrink; compare last to first."""
    mag = np.abs(s)
    first = abs(BERN[0]) * mag * y ** (-s.real - 1)
    last = abs(BERN[-1]) * y ** (-s.real - 2 * N_BERNOULLI + 1)
    for k in range(2 * N_BERNOULLI - 1):
        last = last * np.abs(s + k)
    if np.any(last > first * 1e-6 + 1e-300):
        raise PrecisionLoss("Euler-Maclaurin corrections fail to decrease")


def _lsum(chi: DirichletCharacter, s: np.ndarray) -> np.ndarray:
    q = chi.modulus
    vals = chi.value_table()
    N = _shifts(s)
    s = np.ascontiguousarray(s)
    _check_tail(s, N + 1.0 / q)
    reg = np.zeros(s.shape, dtype=np.complex128)
    pole = np.zeros(s.shape, dtype=np.complex128)
    at_one = s == 1.0
    sm1 = np.where(at_one, 1.0, s - 1.0)
    total = 0j
    for a in range(1, q + 1):
        c = vals[a % q]
        if c == 0:
            continue
        x = a / q
        reg += c * kernels.hurwitz_regular(s, x, N, BERN)
        ly = np.log(N + x)
        # (y^(1-s) - 1)/(s-1); the -1 cancels against sum chi(a) = 0
        pole += c * np.where(at_one, -ly, np.expm1((1.0 - s) * ly) / sm1)
        total += c
    if chi.is_principal:
        if np.any(at_one):
            raise PoleError("L(s, chi_0) has a pole at s = 1")
        pole += total / sm1
    return np.exp(-s * math.log(q)) * (reg + pole)


def l_values(chi: DirichletCharacter, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=np.complex128))
    if np.any(s.real <= 0) or np.any(s.real >= 3) or np.any(np.abs(s.imag) > 500):
        raise DomainError("l_value needs 0 < Re(s) < 3 and |Im(s)| <= 500")
    return _lsum(chi, s)


def l_value(chi: DirichletCharacter, s) -> complex:
    return complex(l_values(chi, [s])[0])


# ---------------------------------------------------------------- Hardy Z

def root_number(chi: DirichletCharacter) -> complex:
    if not chi.is_primitive:
        raise DomainError("root number needs a primitive character")
    return chi.gauss_sum() / (1j ** chi.kappa * math.sqrt(chi.modulus))


def theta(chi: DirichletCharacter, t):
    t = np.asarray(t, dtype=np.float64)
    return 0.5 * t * math.log(chi.modulus / math.pi) + \
        loggamma((0.5 + chi.kappa + 1j * t) / 2).imag


def hardy_z(chi: DirichletCharacter, t, eps_half: Optional[complex] = None):
    """Real-valued Z(t); returns (Z, max |Im| before projection)."""
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    if eps_half is None:
        eps_half = np.sqrt(root_number(chi))
    z = _lsum(chi, 0.5 + 1j * t) * np.exp(1j * theta(chi, t)) / eps_half
    return z.real, float(np.max(np.abs(z.imag), initial=0.0))


# ---------------------------------------------------------------- zeros

@dataclass(frozen=True)
class LZero:
    q: int
    label: int
    beta: float
    gamma: float
    source: str = "computed"

    @property
    def rho(self) -> complex:
        return complex(self.beta, self.gamma)


def rvm_predict(chi: DirichletCharacter, T: float, one_sided: bool = False) -> float:
    """(T/pi) log(q_chi T / (2 pi e)), counting both signs of gamma."""
    if T <= 0:
        return 0.0
    v = T / math.pi * math.log(chi.conductor * T / (2 * math.pi * math.e))
    return v / 2 if one_sided else v


def rvm_slack(chi: DirichletCharacter, T: float) -> float:
    return 2.0 + math.log(chi.modulus * (T + 2.0))


def _theta_count(chi, T):
    # argument-principle main term; the pole of zeta adds one zero per side
    v = 2.0 * float(theta(chi, T)) / math.pi
    return v + (2.0 if chi.is_principal else 0.0)


def _bisect(f, lo, hi, flo, tol):
    """Vectorized bisection of sign changes of f on [lo, hi]."""
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    while np.max(hi - lo, initial=0.0) > tol:
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def _scan(f, a, b, h):
    n = max(2, int(math.ceil((b - a) / h)) + 1)
    t = np.linspace(a, b, n)
    z = f(t)
    brackets = []
    sgn = np.sign(z)
    idx = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
    brackets += [(t[i], t[i + 1], z[i]) for i in idx]
    exact = np.flatnonzero(z == 0.0)
    # dips: local minima of |Z| with no sign change may hide a close pair
    az = np.abs(z)
    dips = [i for i in range(1, n - 1)
            if az[i] < az[i - 1] and az[i] < az[i + 1]
            and sgn[i - 1] == sgn[i] == sgn[i + 1] != 0]
    for i in dips:
        lo, hi = t[i - 1], t[i + 1]
        for _ in range(4):
            u = np.linspace(lo, hi, 17)
            zu = f(u)
            su = np.sign(zu)
            ch = np.flatnonzero(su[:-1] * su[1:] < 0)
            if ch.size:
                brackets += [(u[j], u[j + 1], zu[j]) for j in ch]
                break
            k = int(np.argmin(np.abs(zu)))
            lo, hi = u[max(k - 1, 0)], u[min(k + 1, 16)]
    return brackets, [t[i] for i in exact]


def find_zeros(chi: DirichletCharacter, T: float, tol: float = 1e-11) -> List[LZero]:
    """Zeros with |gamma| <= T of a primitive L(s, chi) on the critical line."""
    if not chi.is_primitive:
        raise DomainError("find_zeros needs a primitive character")
    if T <= 0:
        return []
    if T > 500:
        raise DomainError("zero search limited to T <= 500")
    q = chi.modulus
    eh = np.sqrt(root_number(chi))
    f = lambda t: hardy_z(chi, t, eh)[0]
    h = min(0.2, 1.0 / math.log(max(q * T, 3.0)))
    real = chi.is_real
    lo_end = 0.0 if real else -T
    rvm = rvm_predict(chi, T)
    slack = rvm_slack(chi, T)
    for attempt in range(MAX_HALVINGS + 1):
        brackets, exact = _scan(f, lo_end, T, h)
        if brackets:
            lo = np.array([b[0] for b in brackets])
            hi = np.array([b[1] for b in brackets])
            fl = np.array([b[2] for b in brackets])
            roots = list(_bisect(f, lo, hi, fl, tol))
        else:
            roots = []
        roots = np.sort(np.array(roots + exact, dtype=float))
        if roots.size:
            roots = roots[np.concatenate([[True], np.diff(roots) > 10 * tol])]
        if real:
            roots = roots[roots > 0]
            gam = np.concatenate([-roots[::-1], roots])
        else:
            gam = roots
        gam = gam[np.abs(gam) <= T]
        count = len(gam)
        soft = abs(count - _theta_count(chi, T)) <= 2.0
        if soft and abs(count - rvm) <= slack:
            break
        h /= 2
    else:
        if abs(count - rvm) > slack:
            raise CountMismatch(f"q={q} label={chi.label}: found {count} zeros up to "
                                f"{T}, main term {rvm:.2f}, allowed slack {slack:.2f}")
        log.warning("q=%d label=%d: count %d vs theta count %.2f", q, chi.label,
                    count, _theta_count(chi, T))
    return [LZero(q, chi.label, 0.5, float(g), "computed") for g in gam]


# ---------------------------------------------------------------- tables

@dataclass
class _Entry:
    betas: np.ndarray
    gammas: np.ndarray        # gamma > 0, ascending
    height: float
    source: str = "computed"


@dataclass
class ZeroTable:
    entries: Dict[Tuple[int, int], _Entry] = field(default_factory=dict)
    mode: str = "strict"

    def keys(self):
        return sorted(self.entries)

    def height(self, q: int, label: int) -> float:
        e = self.entries.get((q, label))
        return e.height if e else 0.0

    def add(self, q: int, label: int, betas, gammas, height: float,
            source: str = "computed") -> None:
        betas = np.asarray(betas, dtype=np.float64)
        gammas = np.asarray(gammas, dtype=np.float64)
        if gammas.size and (np.any(gammas <= 0) or np.any(np.diff(gammas) <= 0)):
            raise SymmetryViolation(f"q={q} label={label}: stored ordinates must be "
                                    "positive and strictly increasing")
        if self.mode == "strict" and np.any(betas != 0.5):
            raise ModeError(f"q={q} label={label}: off-line zero in strict mode")
        if np.any(betas != 0.5) and source != "synthetic":
            raise ModeError("off-line zeros must be marked source=synthetic")
        if np.any((betas <= 0) | (betas >= 1)):
            raise DomainError("zero real parts must lie in (0, 1)")
        self.entries[(q, label)] = _Entry(betas, gammas, float(height), source)

    def merge(self, other: "ZeroTable") -> "ZeroTable":
        out = ZeroTable(dict(self.entries), self.mode)
        for k, e in other.entries.items():
            if k not in out.entries or e.height > out.entries[k].height:
                out.entries[k] = e
        return out

    def _primitive_key(self, chi: DirichletCharacter) -> DirichletCharacter:
        return chi.primitive()

    def complete_height(self, chi: DirichletCharacter) -> float:
        p = chi.primitive()
        return min(self.height(p.modulus, p.label),
                   self.height(p.modulus, p.conj().label))

    def zeros(self, chi: DirichletCharacter, T: Optional[float] = None) -> np.ndarray:
        """All rho with |gamma| <= T (both signs) of the primitive character inducing chi."""
        p = chi.primitive()
        H = self.complete_height(chi)
        if (p.modulus, p.label) not in self.entries or \
                (p.modulus, p.conj().label) not in self.entries:
            raise IncompleteTable(f"no zeros stored for q={p.modulus} label={p.label}")
        if T is None:
            T = H
        if T > H + 1e-12:
            raise IncompleteTable(f"q={p.modulus} label={p.label} certified only to {H}")
        pos = self.entries[(p.modulus, p.label)]
        neg = self.entries[(p.modulus, p.conj().label)]
        mp = pos.gammas <= T
        mn = neg.gammas <= T
        rho_pos = pos.betas[mp] + 1j * pos.gammas[mp]
        rho_neg = neg.betas[mn] - 1j * neg.gammas[mn]
        return np.concatenate([rho_neg[::-1], rho_pos])

    def all_zeros(self) -> List[LZero]:
        out = []
        for (q, lab) in self.keys():
            e = self.entries[(q, lab)]
            out += [LZero(q, lab, float(b), float(g), e.source)
                    for b, g in zip(e.betas, e.gammas)]
        return out


def table_from_zeros(zeros: Iterable[LZero], heights: Dict[Tuple[int, int], float],
                     mode: str = "strict") -> ZeroTable:
    tab = ZeroTable(mode=mode)
    groups: Dict[Tuple[int, int], list] = {k: [] for k in heights}
    for z in zeros:
        if z.gamma > 0:
            groups.setdefault((z.q, z.label), []).append(z)
    for k, zs in groups.items():
        zs.sort(key=lambda z: z.gamma)
        src = zs[0].source if zs else "computed"
        tab.add(k[0], k[1], [z.beta for z in zs], [z.gamma for z in zs],
                heights[k], src)
    return tab


def compute_table(q: int, T: float, primitive_only: bool = True) -> ZeroTable:
    """Zeros of every primitive character mod q up to height T."""
    tab = ZeroTable()
    for chi in character_group(q):
        if primitive_only and not chi.is_primitive:
            continue
        zs = find_zeros(chi, T)
        g = np.array([z.gamma for z in zs if z.gamma > 0])
        tab.add(q, chi.label, np.full(g.size, 0.5), g, T)
    return tab


_HEADER = re.compile(r"#\s*q=(\d+)\s+label=(\d+)\s+complete_to=([0-9.eE+-]+)"
                     r"(?:\s+source=(\w+))?\s*$")


def read_zero_text(text: str, mode: str = "strict", name: str = "<text>") -> ZeroTable:
    if mode not in ("strict", "exploratory"):
        raise ModeError(f"unknown mode {mode!r}")
    tab = ZeroTable(mode=mode)
    blocks = []
    cur = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            m = _HEADER.match(line)
            if m is None:
                if cur is None and not blocks:
                    continue  # free comment before the first block
                raise ParseError(f"malformed header {line!r}", lineno)
            cur = {"q": int(m.group(1)), "label": int(m.group(2)),
                   "T": float(m.group(3)), "source": m.group(4) or "computed",
                   "rows": [], "line": lineno}
            blocks.append(cur)
            continue
        if cur is None:
            raise ParseError("data line before any header", lineno)
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<beta> <gamma>', got {line!r}", lineno)
        try:
            b, g = float(parts[0]), float(parts[1])
        except ValueError:
            raise ParseError(f"not a number in {line!r}", lineno) from None
        if cur["rows"] and g <= cur["rows"][-1][1]:
            raise ParseError("ordinates must be strictly increasing", lineno)
        cur["rows"].append((b, g, lineno))
    negatives = {}
    for blk in blocks:
        rows = blk["rows"]
        pos = [(b, g) for b, g, _ in rows if g > 0]
        neg = [(b, g) for b, g, _ in rows if g < 0]
        key = (blk["q"], blk["label"])
        if key in tab.entries:
            raise ParseError(f"duplicate block for q={key[0]} label={key[1]}", blk["line"])
        try:
            tab.add(key[0], key[1], [b for b, _ in pos], [g for _, g in pos],
                    blk["T"], blk["source"])
        except (SymmetryViolation, ModeError, DomainError) as exc:
            raise type(exc)(f"{name}: {exc}") from None
        if neg:
            negatives[key] = np.array(sorted(-g for _, g in neg))
    # negative ordinates, when present, must mirror the conjugate character
    for (q, lab), ng in negatives.items():
        conj = character(q, lab).conj()
        other = tab.entries.get((q, conj.label))
        if other is None:
            continue
        H = min(tab.height(q, lab), other.height)
        a = ng[ng <= H]
        b = other.gammas[other.gammas <= H]
        if a.size != b.size or np.any(np.abs(a - b) > 1e-8):
            raise SymmetryViolation(f"q={q} label={lab}: negative ordinates do not "
                                    f"match the conjugate (label {conj.label})")
    return tab


def ingest_zeros(path, mode: str = "strict") -> ZeroTable:
    with open(path, encoding="utf-8") as fh:
        return read_zero_text(fh.read(), mode, str(path))


def write_zero_text(tab: ZeroTable, stream) -> None:
    for (q, lab) in tab.keys():
        e = tab.entries[(q, lab)]
        src = f" source={e.source}" if e.source == "synthetic" else ""
        stream.write(f"# q={q} label={lab} complete_to={e.height:g}{src}\n")
        for b, g in zip(e.betas, e.gammas):
            stream.write(f"{float(b)!r} {float(g):.17g}\n")


def write_zeros(tab: ZeroTable, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        write_zero_text(tab, fh)


@lru_cache(maxsize=1)
def bundled_table() -> ZeroTable:
    """Zeros shipped with the package (see ``data/``)."""
    tab = ZeroTable()
    d = resources.files("primevar") / "data"
    for entry in sorted(d.iterdir(), key=lambda p: p.name):
        if entry.name.startswith("zeros_") and entry.name.endswith(".txt"):
            tab = tab.merge(read_zero_text(entry.read_text(encoding="utf-8"),
                                           name=entry.name))
    return tab


# ---------------------------------------------------------------- counts

def count_zeros(table: ZeroTable, chi: DirichletCharacter, T: float) -> int:
    if T <= 0:
        return 0
    return int(table.zeros(chi, T).size)


def inverse_square_sum(table: ZeroTable, chi: DirichletCharacter, T_min: float):
    """(sum over stored |gamma| > T_min of 1/|rho|^2, density tail beyond the table)."""
    H = table.complete_height(chi)
    if H <= 0:
        raise IncompleteTable("no certified zeros")
    rho = table.zeros(chi, H)
    sel = np.abs(rho.imag) > T_min
    partial = math.fsum((1.0 / np.abs(rho[sel]) ** 2).tolist())
    start = max(H, T_min)
    a = chi.conductor / (2 * math.pi)
    # int_start^inf (1/pi) log(a t) / t^2 dt over both signs of gamma
    tail = (math.log(a * start) + 1.0) / (math.pi * start) if start > 0 else math.inf
    return partial, max(tail, 0.0)


@dataclass
class CalibrationReport:
    c_abs: float
    ratio_tail: float
    ratio_total: float
    worst_tail: tuple
    worst_total: tuple
    admissible: bool

    def as_dict(self):
        return dict(self.__dict__)


def calibrate(table: ZeroTable, moduli: Iterable[int], c_abs: float = 1.0,
              T_grid=None) -> CalibrationReport:
    """Empirical constants of the 1/|rho|^2 bounds over the stored zeros."""
    if T_grid is None:
        T_grid = [2, 5, 10, 20, 50]
    worst_tail, worst_total = (0.0, None), (0.0, None)
    for q in moduli:
        for chi in character_group(q):
            try:
                H = table.complete_height(chi)
            except IncompleteTable:
                continue
            if H <= 0:
                continue
            for T in T_grid:
                if T >= H:
                    continue
                p, tl = inverse_square_sum(table, chi, T)
                r = (p + tl) * T / math.log(max(q, 3) * T)
                if r > worst_tail[0]:
                    worst_tail = (r, (q, chi.label, T))
            if q >= 3:
                p, tl = inverse_square_sum(table, chi, 0.0)
                r = (p + tl) / math.log(q)
                if r > worst_total[0]:
                    worst_total = (r, (q, chi.label))
    admissible = c_abs >= max(worst_tail[0], worst_total[0])
    return CalibrationReport(c_abs, worst_tail[0], worst_total[0], worst_tail[1],
                             worst_total[1], admissible)
