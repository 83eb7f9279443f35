"""Dirichlet characters modulo q and large-conductor families.

The group (Z/qZ)^* is split over prime powers by the CRT. Each odd prime power
contributes one cyclic factor generated by a primitive root; 2^a contributes
the factors generated by -1 and 5. A character is the exponent vector
``(j_1, ..., j_r)`` with chi(g_i) = e(j_i / n_i). Values are kept as integer
exponents modulo the group exponent ``e`` so that orthogonality and conductor
questions are exact; complex values are derived on demand.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

import numpy as np

from .errors import DomainError, FamilyTooSmall

MAX_MODULUS = 10**6


def factorize(n: int) -> list:
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            a = 0
            while n % p == 0:
                n //= p
                a += 1
            out.append((p, a))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def euler_phi(n: int) -> int:
    r = n
    for p, _ in factorize(n):
        r -= r // p
    return r


def _primitive_root(p: int) -> int:
    """Smallest primitive root modulo p^2 (hence modulo every p^a), p odd."""
    phi = p - 1
    qs = [r for r, _ in factorize(phi)]
    g = 2
    while True:
        if all(pow(g, phi // r, p) != 1 for r in qs) and pow(g, p - 1, p * p) != 1:
            return g
        g += 1


@dataclass(frozen=True)
class _Component:
    prime: int
    modulus: int        # prime power p^a
    generator: int      # generator modulo p^a
    order: int          # n_i
    lifted: int         # generator lifted to Z/qZ (== 1 at the other prime powers)
    role: str           # "odd", "minus_one" or "five"


class CharacterGroup:
    """Structure of (Z/qZ)^* with cached discrete logarithms."""

    def __init__(self, q: int):
        if q < 1:
            raise DomainError("modulus must be >= 1")
        if q > MAX_MODULUS:
            raise OverflowError(f"modulus {q} exceeds supported bound {MAX_MODULUS}")
        self.q = q
        self.factors = factorize(q)
        comps = []
        for p, a in self.factors:
            pa = p**a
            rest = q // pa

            def lift(g, pa=pa, rest=rest):
                # x = g mod pa, x = 1 mod rest
                if rest == 1:
                    return g % q
                return (g * rest * pow(rest, -1, pa) + pa * pow(pa, -1, rest)) % q

            if p == 2:
                if a >= 2:
                    comps.append(_Component(2, pa, pa - 1, 2, lift(pa - 1), "minus_one"))
                if a >= 3:
                    comps.append(_Component(2, pa, 5, 2 ** (a - 2), lift(5), "five"))
            else:
                g = _primitive_root(p)
                comps.append(_Component(p, pa, g, pa // p * (p - 1), lift(g), "odd"))
        self.components = tuple(comps)
        self.orders = tuple(c.order for c in comps)
        self.exponent = math.lcm(*self.orders) if comps else 1
        self.order = euler_phi(q)
        self._dlog_cache: Dict[int, np.ndarray] = {}
        self._table: Optional[np.ndarray] = None

    # discrete logs -------------------------------------------------------
    def _local_dlog(self, i: int) -> np.ndarray:
        """k_i(r) for residues r modulo the component's prime power (-1 if not a unit)."""
        if i in self._dlog_cache:
            return self._dlog_cache[i]
        c = self.components[i]
        m = c.modulus
        out = np.full(m, -1, dtype=np.int64)
        if c.role == "odd":
            x = 1
            for k in range(c.order):
                out[x] = k
                x = x * c.generator % m
        elif c.role == "minus_one":
            r = np.arange(m)
            out[(r % 2) == 1] = 0
            out[(r % 4) == 3] = 1
        else:
            x = 1
            for k in range(c.order):
                out[x] = k
                out[m - x] = k
                x = x * 5 % m
        self._dlog_cache[i] = out
        return out

    def dlog(self, n: int) -> Optional[tuple]:
        n %= self.q
        if math.gcd(n, self.q) != 1:
            return None
        return tuple(int(self._local_dlog(i)[n % c.modulus])
                     for i, c in enumerate(self.components))

    def dlog_table(self) -> np.ndarray:
        """(r, q) int array of discrete logs of every residue (-1 on non-units)."""
        if self._table is None:
            n = np.arange(self.q)
            rows = [self._local_dlog(i)[n % c.modulus]
                    for i, c in enumerate(self.components)]
            self._table = (np.vstack(rows) if rows
                           else np.zeros((0, self.q), dtype=np.int64))
            self._units = np.gcd(n, self.q) == 1
        return self._table

    def units_mask(self) -> np.ndarray:
        self.dlog_table()
        return self._units

    # labels ----------------------------------------------------------------
    def exponents_of(self, label: int) -> tuple:
        if not 0 <= label < self.order:
            raise DomainError(f"label {label} out of range for modulus {self.q}")
        out = []
        for n_i in reversed(self.orders):
            out.append(label % n_i)
            label //= n_i
        return tuple(reversed(out))

    def label_of(self, exps: Sequence[int]) -> int:
        label = 0
        for j, n_i in zip(exps, self.orders):
            label = label * n_i + (j % n_i)
        return label


@lru_cache(maxsize=256)
def group(q: int) -> CharacterGroup:
    return CharacterGroup(q)


@dataclass(frozen=True, eq=False)
class DirichletCharacter:
    modulus: int
    label: int
    exponents: tuple
    conductor: int
    kappa: int
    is_principal: bool
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def group(self) -> CharacterGroup:
        return group(self.modulus)

    @property
    def q(self) -> int:
        return self.modulus

    @property
    def q_chi(self) -> int:
        return self.conductor

    @property
    def is_primitive(self) -> bool:
        return self.conductor == self.modulus

    @property
    def is_real(self) -> bool:
        return all((2 * j) % n == 0 for j, n in zip(self.exponents, self.group.orders))

    def __eq__(self, other):
        return (isinstance(other, DirichletCharacter) and self.modulus == other.modulus
                and self.label == other.label)

    def __hash__(self):
        return hash((self.modulus, self.label))

    def __repr__(self):
        return (f"DirichletCharacter(q={self.modulus}, label={self.label}, "
                f"conductor={self.conductor}, kappa={self.kappa})")

    def exponent(self, n: int) -> int:
        """Integer a with chi(n) = e(a / E), E the group exponent; -1 if gcd(n,q) > 1."""
        g = self.group
        ks = g.dlog(n)
        if ks is None:
            return -1
        return sum(j * k * (g.exponent // o)
                   for j, k, o in zip(self.exponents, ks, g.orders)) % g.exponent

    def __call__(self, n: int) -> complex:
        a = self.exponent(n)
        if a < 0:
            return 0j
        return _root(a, self.group.exponent)

    def exponent_table(self) -> np.ndarray:
        """Exact exponents for every residue 0..q-1 (-1 where chi vanishes)."""
        t = self._cache.get("exp")
        if t is None:
            g = self.group
            tab = g.dlog_table()
            acc = np.zeros(self.modulus, dtype=np.int64)
            for j, row, o in zip(self.exponents, tab, g.orders):
                if j:
                    acc = (acc + (j * (g.exponent // o)) * row) % g.exponent
            t = np.where(g.units_mask(), acc, -1)
            self._cache["exp"] = t
        return t

    def value_table(self) -> np.ndarray:
        """Complex chi(n) for n = 0..q-1."""
        t = self._cache.get("val")
        if t is None:
            e = self.exponent_table()
            E = self.group.exponent
            roots = np.array([_root(a, E) for a in range(E)], dtype=np.complex128)
            t = np.where(e >= 0, roots[np.maximum(e, 0)], 0.0)
            self._cache["val"] = t
        return t

    def conj(self) -> "DirichletCharacter":
        g = self.group
        return character(self.modulus, g.label_of([-j for j in self.exponents]))

    def primitive(self) -> "DirichletCharacter":
        """The primitive character modulo the conductor that induces this one."""
        d = self.conductor
        if d == self.modulus:
            return self
        gd = group(d)
        exps = []
        for c in gd.components:
            n = c.lifted
            while math.gcd(n, self.modulus) != 1:
                n += d
            a = self.exponent(n)
            # chi*(g) = e(a/E) = e(j/n_i)
            j = a * c.order
            if j % self.group.exponent:
                raise AssertionError("inconsistent exponent on generator")
            exps.append(j // self.group.exponent)
        return character(d, gd.label_of(exps))

    def gauss_sum(self) -> complex:
        q = self.modulus
        a = np.arange(q)
        return complex(np.sum(self.value_table() * np.exp(2j * np.pi * a / q)))


@lru_cache(maxsize=4096)
def _root(a: int, E: int) -> complex:
    # exact values at the quarter turns keep real characters exactly real
    num, den = a % E, E
    g = math.gcd(num, den)
    num, den = num // g, den // g
    special = {(0, 1): 1 + 0j, (1, 2): -1 + 0j, (1, 4): 1j, (3, 4): -1j}
    if (num, den) in special:
        return special[(num, den)]
    ang = 2 * math.pi * num / den
    return complex(math.cos(ang), math.sin(ang))


def _conductor_of(g: CharacterGroup, exps: Sequence[int]) -> int:
    cond = 1
    five_order = 1
    minus_one = 0
    for j, c in zip(exps, g.components):
        m = c.order // math.gcd(j, c.order)   # order of the local character
        if c.role == "odd":
            if m > 1:
                v = 0
                while m % c.prime == 0:
                    m //= c.prime
                    v += 1
                cond *= c.prime ** (v + 1)
        elif c.role == "minus_one":
            minus_one = j % 2
        else:
            five_order = m
    if five_order > 1:
        cond *= 4 * five_order
    elif minus_one:
        cond *= 4
    return cond


def character(q: int, label: int) -> DirichletCharacter:
    g = group(q)
    exps = g.exponents_of(label)
    key = ("char", label)
    # characters are cached on the group so tables are built once
    cache = g.__dict__.setdefault("_chars", {})
    chi = cache.get(key)
    if chi is None:
        principal = all(j == 0 for j in exps)
        minus = g.dlog(q - 1) if q > 2 else None
        if minus is None:
            kappa = 0
        else:
            a = sum(j * k * (g.exponent // o) for j, k, o in zip(exps, minus, g.orders))
            kappa = 0 if (a % g.exponent) == 0 else 1
        chi = DirichletCharacter(q, label, exps, _conductor_of(g, exps), kappa, principal)
        cache[key] = chi
    return chi


def character_group(q: int) -> List[DirichletCharacter]:
    g = group(q)
    return [character(q, lab) for lab in range(g.order)]


def conductor(chi: DirichletCharacter) -> int:
    return chi.conductor


def principal(q: int) -> DirichletCharacter:
    return character(q, 0)


def induce(chi_star: DirichletCharacter, q: int) -> DirichletCharacter:
    d = chi_star.modulus
    if q % d:
        raise DomainError(f"{d} does not divide {q}")
    g = group(q)
    exps = []
    for c in g.components:
        a = chi_star.exponent(c.lifted % d) if d > 1 else 0
        E = chi_star.group.exponent
        j = a * c.order
        if j % E:
            raise AssertionError("generator order incompatible with inducing character")
        exps.append(j // E)
    return character(q, g.label_of(exps))


# ------------------------------------------------------------------ families

@dataclass
class CharacterFamily:
    Q: int
    g_target: float
    moduli: tuple
    members: Dict[int, List[DirichletCharacter]]
    large: Dict[int, int]          # |F_q|
    Phi: Dict[int, int]
    E_value: Dict[int, float]

    def as_dict(self):
        return {"Q": self.Q, "g_target": self.g_target, "moduli": list(self.moduli),
                "Phi": {str(q): v for q, v in self.Phi.items()},
                "F_size": {str(q): v for q, v in self.large.items()},
                "E_value": {str(q): v for q, v in self.E_value.items()},
                "labels": {str(q): [c.label for c in m] for q, m in self.members.items()}}


PHI_EPS = 1e-9  # absorbs rounding in g*|F|/log q when the ratio is an integer


def large_conductor(q: int) -> List[DirichletCharacter]:
    """F_q: characters with log q_chi > log q - (log log q)^2, by label."""
    cut = math.log(q) - math.log(math.log(q)) ** 2
    return [c for c in character_group(q) if math.log(c.conductor) > cut]


def select_family(Q: int, g_target: float, moduli=None) -> CharacterFamily:
    if Q < 3:
        raise DomainError("Q must be at least 3")
    if not 1.0 <= g_target <= math.log(Q) + 1e-12:
        raise DomainError(f"g_target must lie in [1, log Q] = [1, {math.log(Q):.6g}]")
    moduli = tuple(sorted(set(moduli))) if moduli is not None else tuple(range(Q, 2 * Q + 1))
    for q in moduli:
        if not Q <= q <= 2 * Q:
            raise DomainError(f"modulus {q} outside [{Q}, {2 * Q}]")
    members, large, Phi, E = {}, {}, {}, {}
    for q in moduli:
        F = large_conductor(q)
        phi = euler_phi(q)
        if 2 * len(F) < phi:
            raise FamilyTooSmall(f"|F_q| = {len(F)} < phi({q})/2 = {phi / 2}; "
                                 "increase Q")
        n = int(math.floor(g_target * len(F) / math.log(q) + PHI_EPS))
        G = F[:n]
        members[q], large[q], Phi[q] = G, len(F), n
        E[q] = math.fsum(math.log(q) - math.log(c.conductor) for c in G)
    return CharacterFamily(Q, g_target, moduli, members, large, Phi, E)


def dump_csv(q: int, stream) -> int:
    """Value tables as CSV rows (q, label, conductor, kappa, n, num, den, re, im)."""
    w = csv.writer(stream, lineterminator="\r\n")
    w.writerow(["q", "label", "conductor", "kappa", "n", "angle_num", "angle_den",
                "re", "im"])
    rows = 0
    g = group(q)
    for chi in character_group(q):
        et = chi.exponent_table()
        for n in range(q):
            a = int(et[n])
            if a < 0:
                continue
            d = math.gcd(a, g.exponent)
            v = _root(a, g.exponent)
            w.writerow([q, chi.label, chi.conductor, chi.kappa, n, a // d,
                        g.exponent // d, repr(v.real), repr(v.imag)])
            rows += 1
    return rows
