"""Variances of weighted prime counts over residue classes, two ways.

Residue side: squared deviations of the class totals S(a) from their mean.
Character side: the Parseval identities

    V_eta = (1/phi(q)) sum_{chi != chi_0} |psi_eta(x, chi)|^2,
    G_eta = (1/phi(q)) sum_chi |theta_eta(x, chi) - 1_{chi = chi_0} M eta(1) x|^2.

Both use the same sieve pass, so any disagreement is a bug rather than
approximation error.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .characters import character_group, euler_phi
from .errors import DomainError
from .primesums import ResidueSums, classical_sums, residue_sums
from .weights import SmoothWeight, mellin


def _fsum_sq(v: np.ndarray) -> float:
    return math.fsum((np.abs(v) ** 2).tolist())


def _coprime(q: int) -> np.ndarray:
    return np.gcd(np.arange(q), q) == 1


def _check_q(q):
    if q < 3:
        raise DomainError("variances need q >= 3")


def _sums(w, x, q, rs: Optional[ResidueSums]):
    if rs is None:
        rs = residue_sums(w, x, q)
    return rs


def v_eta_residue_side(w: SmoothWeight, x: float, q: int,
                       rs: Optional[ResidueSums] = None) -> float:
    _check_q(q)
    rs = _sums(w, x, q, rs)
    S = rs.psi[_coprime(q)]
    mean = math.fsum(S.tolist()) / S.size
    return _fsum_sq(S - mean)


def v_eta_parseval_side(w: SmoothWeight, x: float, q: int,
                        rs: Optional[ResidueSums] = None) -> float:
    _check_q(q)
    rs = _sums(w, x, q, rs)
    vals = [rs.psi_chi(c) for c in character_group(q) if not c.is_principal]
    return _fsum_sq(np.array(vals)) / euler_phi(q)


def g_eta_both_sides(w: SmoothWeight, x: float, q: int,
                     rs: Optional[ResidueSums] = None, m1: Optional[float] = None):
    """(residue side, character side) of G_eta (summed over coprime classes)."""
    _check_q(q)
    rs = _sums(w, x, q, rs)
    if m1 is None:
        m1 = mellin(w, 1.0).real
    phi = euler_phi(q)
    main = m1 * x
    T = rs.theta[_coprime(q)]
    residue = _fsum_sq(T - main / phi)
    vals = []
    for c in character_group(q):
        v = rs.theta_chi(c)
        vals.append(v - main if c.is_principal else v)
    return residue, _fsum_sq(np.array(vals)) / phi


def classical_variances(x: float, q: int):
    """(V_Lambda, G) with unweighted sums up to x."""
    _check_q(q)
    th, ps = classical_sums(x, q)
    mask = _coprime(q)
    P = ps[mask]
    V = _fsum_sq(P - math.fsum(P.tolist()) / P.size)
    G = _fsum_sq(th[mask] - x / euler_phi(q))
    return V, G


@dataclass
class VarianceReport:
    x: float
    q: int
    weight: str
    v_eta_residue: float
    v_eta_parseval: float
    g_eta_residue: float
    g_eta_parseval: float
    v_classical: Optional[float]
    g_classical: Optional[float]
    hooley_ratio: float
    grh_ratio: float
    truncation_bound: float

    def as_dict(self):
        return asdict(self)


def variance_report(w: SmoothWeight, x: float, q: int, classical: bool = False,
                    m1: Optional[float] = None) -> VarianceReport:
    _check_q(q)
    rs = residue_sums(w, x, q)
    v_res = v_eta_residue_side(w, x, q, rs)
    v_par = v_eta_parseval_side(w, x, q, rs)
    g_res, g_par = g_eta_both_sides(w, x, q, rs, m1)
    vc = gc = None
    if classical:
        vc, gc = classical_variances(x, q)
    lq = math.log(q)
    return VarianceReport(float(x), q, w.name, v_res, v_par, g_res, g_par, vc, gc,
                          v_res / (x * lq), v_res / (x * lq * lq), rs.truncation_bound)
