"""Synchronising zero phases and the variance lower bound it certifies.

Two parts:

* simultaneous Diophantine approximation: find an integer t with
  ||t lambda|| <= 1/M for every frequency lambda, by exhaustive scan (small
  problems, with the n in (N^(1/3), N] guarantee) or by lattice reduction;
* the experiment: take the frequencies gamma/2pi of the low zeros of a
  character family, align them, and turn the aligned explicit formula into a
  certified lower bound for V_eta(e^t; q)/(e^t log q) via Cauchy-Schwarz.

Ordinates from the zero table are only good to ~1e-11, useless once
t ~ 1e50, so the aligned zeros are refined in mpmath first and every phase
that enters a certificate is computed from the refined values.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import mpmath
import numpy as np

from . import kernels
from .characters import DirichletCharacter, euler_phi, select_family
from .errors import DomainError, ModeError, NotFound, QualityMiss, SyncFailed, TailDominates
from .explicit import C_ERR, CACHE, b_eta, psi_eta_explicit, tail_certificate
from .lattice import lll
from .lfunctions import ZeroTable, bundled_table
from .weights import SmoothWeight, constants, sector_constant

BRUTE_MAX_K = 6
BRUTE_MAX_M = 20
PRUNE = 0.1            # kept frequencies must leave 2 * rest <= PRUNE * |S0|
MAX_ALIGNED = 200


# -- Diophantine search ------------------------------------------------------

@dataclass
class SyncProblem:
    lambdas: tuple
    M: int
    N: int = 0

    def __post_init__(self):
        self.lambdas = tuple(self.lambdas)
        if not self.lambdas:
            raise DomainError("need at least one frequency")
        for v in self.lambdas:
            if isinstance(v, float) and not math.isfinite(v):
                raise DomainError("frequencies must be finite")
        if int(self.M) != self.M or self.M < 2:
            raise DomainError("M must be an integer >= 2")
        self.M = int(self.M)
        self.N = int(self.N)

    @property
    def k(self) -> int:
        return len(self.lambdas)


@dataclass
class SyncResult:
    t: int
    defect: float
    phase_sum: Optional[complex] = None
    lower_bound: Optional[float] = None
    search_method: str = "brute"


def icbrt(n: int) -> int:
    """floor(n^(1/3)) for n >= 0."""
    r = int(round(n ** (1.0 / 3.0)))
    while r**3 > n:
        r -= 1
    while (r + 1) ** 3 <= n:
        r += 1
    return r


def _exact(v):
    """Frequencies as exact rationals when possible, mpf otherwise."""
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, (float, np.floating)):
        return Fraction(float(v))
    if isinstance(v, mpmath.mpf):
        return v
    raise DomainError(f"unsupported frequency type {type(v).__name__}")


def _dist_int(x):
    if isinstance(x, Fraction):
        return abs(x - round(x))
    return abs(x - mpmath.nint(x))


def defects(lambdas: Sequence, t: int) -> list:
    """||t lambda|| for each frequency, computed exactly (Fraction) or in mpmath."""
    t = int(t)
    out = []
    bits = max(t.bit_length(), 1) + 80
    for v in lambdas:
        v = _exact(v)
        if isinstance(v, Fraction):
            out.append(_dist_int(t * v))
        else:
            with mpmath.workprec(max(bits, mpmath.mp.prec)):
                out.append(_dist_int(t * v))
    return out


def verify(p: SyncProblem, t: int) -> Tuple[bool, float]:
    """Independent re-check: (all ||t lambda|| <= 1/M, max defect)."""
    ds = defects(p.lambdas, t)
    tol = Fraction(1, p.M)
    ok = all((d <= tol) if isinstance(d, Fraction) else (d <= mpmath.mpf(1) / p.M) for d in ds)
    return ok, float(max(ds))


def dio_search_brute(p: SyncProblem) -> SyncResult:
    """Smallest n in (N^(1/3), N] with ||n lambda|| <= 1/M for all lambda."""
    if p.k > BRUTE_MAX_K or p.M > BRUTE_MAX_M:
        raise DomainError(f"brute force needs k <= {BRUTE_MAX_K} and M <= {BRUTE_MAX_M}")
    if p.N < 1:
        raise DomainError("N must be >= 1")
    lam = np.array([float(v) for v in p.lambdas], dtype=np.float64)
    # float slack covers the rounding of n * lambda; hits are re-verified exactly
    slack = 8.0 * p.N * max(1.0, float(np.max(np.abs(lam)))) * 2.0**-52 + 1e-12
    n = icbrt(p.N) + 1
    while n <= p.N:
        hit = kernels.dio_scan(lam, n, p.N, 1.0 / p.M + slack)
        if hit < 0:
            break
        ok, d = verify(p, hit)
        if ok:
            return SyncResult(t=int(hit), defect=d, search_method="brute")
        n = hit + 1
    budget = p.M ** (3 * p.k)
    if p.N < budget:
        raise NotFound(f"no n in (N^(1/3), N] for N = {p.N} < M^(3k) = {budget}")
    raise NotFound(f"no n found although N >= M^(3k) = {budget}")  # pragma: no cover


def _convergents(v):
    """Continued-fraction convergent denominators of v (Fraction or mpf)."""
    h0, h1 = 1, 0            # q_{-2}, q_{-1}
    x = v
    for _ in range(10_000):
        a = int(math.floor(x))
        h0, h1 = h1, a * h1 + h0
        yield h1
        frac = x - a
        if frac == 0:
            return
        x = 1 / frac


def _cf_search(p: SyncProblem) -> SyncResult:
    v = _exact(p.lambdas[0])
    for q in _convergents(v):
        if q < 1:
            continue
        if isinstance(v, mpmath.mpf) and q.bit_length() > mpmath.mp.prec - 20:
            break  # beyond the working precision of v
        ok, d = verify(p, q)
        if ok:
            return SyncResult(t=q, defect=d, search_method="lattice")
    raise QualityMiss("continued fraction ran out of precision", best=None)


def _scaled(v, P: int) -> int:
    v = _exact(v)
    if isinstance(v, Fraction):
        return round(v * (1 << P))
    with mpmath.workprec(P + 64):
        return int(mpmath.nint(mpmath.ldexp(v, P)))


def lattice_bits(k: int, M: int) -> int:
    """Working precision for the simultaneous-approximation lattice."""
    return int(k * (math.log2(M) + 2) + 64)


def dio_search_lattice(p: SyncProblem, seed: int = 0, bits: Optional[int] = None,
                       step: Optional[int] = None, combos: int = 400) -> SyncResult:
    """LLL on the (k+1)-dimensional simultaneous-approximation lattice.

    The first column carries t scaled by E = 2^(P - b); b sweeps upwards
    (larger t, smaller defects) until a reduced vector meets 1/M.  Random
    +-1 combinations of the reduced rows then look for a smaller valid t.
    """
    if p.k > 200:
        raise DomainError("lattice search supports k <= 200")
    if p.k == 1:
        return _cf_search(p)
    P = bits or lattice_bits(p.k, p.M)
    step = step or max(1, int(math.ceil(math.log2(p.M))) // 2)
    scaled = [_scaled(v, P) for v in p.lambdas]
    k = p.k
    target_bits = int(math.floor(math.log2(p.M)))
    rng = random.Random(seed)
    best: Optional[SyncResult] = None
    b = step
    while P - b - target_bits >= 8:
        E = 1 << (P - b - target_bits)
        rows = [[E] + scaled]
        for i in range(k):
            r = [0] * (k + 1)
            r[i + 1] = 1 << P
            rows.append(r)
        red = lll(rows)
        found = []
        cands = [(r[0] // E, "lattice") for r in red]
        for _ in range(combos):
            i, j = rng.sample(range(len(red)), 2)
            sgn = rng.choice((1, -1))
            cands.append(((red[i][0] + sgn * red[j][0]) // E, "randomized"))
        seen = set()
        for t, how in cands:
            t = abs(int(t))
            if t == 0 or t in seen:
                continue
            seen.add(t)
            ok, d = verify(p, t)
            res = SyncResult(t=t, defect=d, search_method=how)
            if ok:
                found.append(res)
            elif best is None or d < best.defect:
                best = res
        if found:
            return min(found, key=lambda r: (r.t, r.search_method != "lattice"))
        b += step
    raise QualityMiss(f"defect {best.defect if best else float('nan'):.3g} > 1/M = "
                      f"{1.0 / p.M:.3g} within {P} bits", best=best)


# -- zero refinement ---------------------------------------------------------

_REFINED: Dict[tuple, Tuple[int, mpmath.mpf]] = {}


def _chi_values(chi: DirichletCharacter) -> list:
    """chi(n), n = 0..q-1, at the current mpmath precision from exact exponents."""
    E = chi.group.exponent
    return [mpmath.expjpi(mpmath.mpf(2 * int(a)) / E) if a >= 0 else mpmath.mpf(0)
            for a in chi.exponent_table().tolist()]


def refine_zero(chi: DirichletCharacter, gamma: float, dps: int) -> mpmath.mpf:
    """Ordinate of the zero of L(s, chi) near 1/2 + i gamma to ``dps`` digits (gamma > 0)."""
    key = (chi.modulus, chi.label, float(gamma))
    have = _REFINED.get(key)
    if have is not None and have[0] >= dps:
        return have[1]
    with mpmath.workdps(dps + 10):
        vals = _chi_values(chi)
        start = mpmath.mpc(0.5, have[1] if have is not None else gamma)
        root = mpmath.findroot(lambda s: mpmath.dirichlet(s, vals), start,
                               solver="secant", tol=mpmath.mpf(10) ** (-2 * dps))
        if abs(root.real - 0.5) > mpmath.mpf(10) ** (-(dps // 2)) or \
                abs(root.imag - gamma) > 1e-7:
            raise DomainError(f"refining q={chi.modulus} label={chi.label} "
                              f"gamma={gamma} left the line or drifted")
        g = +root.imag
    _REFINED[key] = (dps, g)
    return g


# -- the violation experiment ------------------------------------------------

_SECTOR_A: Dict[tuple, Tuple[float, float]] = {}


def _sector(w: SmoothWeight) -> Tuple[float, float]:
    key = (w.name, w.scale)
    if key not in _SECTOR_A:
        phi = 0.9 * w.sector
        _SECTOR_A[key] = (sector_constant(w, 0.5, phi), phi)
    return _SECTOR_A[key]


def zero_majorant(w: SmoothWeight, gammas: np.ndarray) -> np.ndarray:
    """Upper bounds for |M eta(1/2 + i gamma)|."""
    g = np.abs(np.asarray(gammas, dtype=np.float64))
    out = b_eta(w) / (0.25 + g * g)
    if w.sector > 0:
        A, phi = _sector(w)
        out = np.minimum(out, A * np.exp(-phi * g))
    return out


def zero_tail_bound(w: SmoothWeight, q: int, T: float, c_abs: float = 1.0) -> float:
    """Bound on sum_{|gamma| > T} |M eta(1/2 + i gamma)| for one character mod q.

    Weights analytic in a sector use |M eta(1/2 + i tau)| <= A exp(-phi |tau|)
    with at most 2 log(q (n + 2)) + 10 ordinates in each [n, n + 1]; others fall
    back to the B_eta / |s|^2 certificate.
    """
    if w.sector <= 0:
        return tail_certificate(w, q, T, c_abs)
    A, phi = _sector(w)
    n = int(math.floor(T))
    terms = []
    while True:
        term = (2 * math.log(q * (n + 2)) + 10) * A * math.exp(-phi * n)
        terms.append(term)
        if term <= 1e-18 * math.fsum(terms) or term < 1e-300:
            break
        n += 1
    return math.fsum(terms) * 1.000001


@dataclass
class _Zero:
    q: int
    chi: DirichletCharacter
    gamma: float
    m: complex
    source: DirichletCharacter   # primitive character whose positive ordinate is |gamma|


@dataclass
class _Group:
    gamma: float                 # |gamma|
    weight: float
    members: List[_Zero]


@dataclass
class ExperimentSetup:
    weight: SmoothWeight
    Q: int
    mode: str
    D_eta: float
    family: object
    M_dio: int
    C_eta: float
    H_eta: float
    c_abs: float
    c_err: float
    groups: List[_Group]         # kept (aligned) frequencies, heaviest first
    dropped: List[_Group]
    S0: Dict[int, complex]
    rest: Dict[Tuple[int, int], float]     # unaligned |M| below D, per character
    mid: Dict[Tuple[int, int], float]      # zeros in (D, T_chi], per character
    tail: Dict[Tuple[int, int], float]     # beyond T_chi
    heights: Dict[Tuple[int, int], float]
    weil: Dict[Tuple[int, int], complex]   # sum of M eta(rho) over |gamma| <= D
    n_zeros: int

    @property
    def moduli(self):
        return self.family.moduli

    def members(self, q):
        return self.family.members[q]


def _collect(w, chi, table, D, q):
    star = chi.primitive()
    rho = table.zeros(chi, D)
    m = CACHE.many(w, rho)
    out = []
    for r, mv in zip(rho.tolist(), m.tolist()):
        g = r.imag
        src = star if g > 0 else star.conj()
        out.append(_Zero(q, chi, g, complex(mv), src))
    return out


def prepare_experiment(w: SmoothWeight, Q: int, table: Optional[ZeroTable] = None,
                       mode: str = "single", D_eta: Optional[float] = None,
                       g_target: Optional[float] = None, c_abs: float = 1.0,
                       c_err: float = C_ERR, prune: float = PRUNE,
                       max_aligned: int = MAX_ALIGNED) -> ExperimentSetup:
    """Family, zeros below D_eta, their Mellin weights and the aligned subset."""
    if mode not in ("single", "averaged"):
        raise DomainError(f"mode must be single or averaged, not {mode!r}")
    table = bundled_table() if table is None else table
    if table.mode != "strict":
        raise ModeError("the violation experiment runs in strict mode only")
    consts = constants(w, c_abs=c_abs)
    D = consts.D_eta if D_eta is None else float(D_eta)
    if D <= 0:
        raise DomainError("D_eta must be positive")
    g = math.log(Q) if g_target is None else g_target
    moduli = (Q,) if mode == "single" else tuple(range(Q + 1, 2 * Q + 1))
    fam = select_family(Q, g, moduli)
    zeros: List[_Zero] = []
    S0, mid, tail, heights, weil = {}, {}, {}, {}, {}
    for q in fam.moduli:
        acc = []
        for chi in fam.members[q]:
            key = (q, chi.label)
            zs = _collect(w, chi, table, D, q)
            zeros += zs
            acc += [z.m for z in zs]
            weil[key] = complex(math.fsum(z.m.real for z in zs), math.fsum(z.m.imag for z in zs))
            H = table.complete_height(chi)
            heights[key] = H
            rho = table.zeros(chi, H)
            above = rho.imag[np.abs(rho.imag) > D]
            mid[key] = math.fsum(zero_majorant(w, above).tolist())
            tail[key] = zero_tail_bound(w, chi.conductor, H, c_abs)
        S0[q] = complex(math.fsum(v.real for v in acc), math.fsum(v.imag for v in acc))

    # merge +-gamma (and conjugate characters) into frequencies |gamma| / 2 pi
    zeros.sort(key=lambda z: (abs(z.gamma), z.q, z.chi.label, z.gamma))
    groups: List[_Group] = []
    for z in zeros:
        a = abs(z.gamma)
        if groups and abs(a - groups[-1].gamma) <= 1e-9 * max(1.0, a):
            groups[-1].members.append(z)
        else:
            groups.append(_Group(a, 0.0, [z]))
    for gr in groups:
        gr.weight = math.fsum(abs(z.m) for z in gr.members)
    order = sorted(groups, key=lambda gr: (-gr.weight, gr.gamma))

    per_q = {q: math.fsum(abs(z.m) for z in zeros if z.q == q) for q in fam.moduli}
    kept_w = {q: [] for q in fam.moduli}
    k = 0
    for k in range(1, min(len(order), max_aligned) + 1):
        for z in order[k - 1].members:
            kept_w[z.q].append(abs(z.m))
        if all(2 * (per_q[q] - math.fsum(kept_w[q])) <= prune * abs(S0[q])
               for q in fam.moduli):
            break
    kept, dropped = order[:k], order[k:]
    rest = {key: 0.0 for key in heights}
    for gr in dropped:
        for z in gr.members:
            rest[(z.q, z.chi.label)] += abs(z.m)
    return ExperimentSetup(
        weight=w, Q=Q, mode=mode, D_eta=D, family=fam,
        M_dio=int(math.ceil(math.exp(consts.C_eta))), C_eta=consts.C_eta,
        H_eta=consts.H_eta, c_abs=c_abs, c_err=c_err, groups=kept, dropped=dropped,
        S0=S0, rest=rest, mid=mid, tail=tail, heights=heights, weil=weil,
        n_zeros=len(zeros))


def _refined_gammas(setup: ExperimentSetup, dps: int) -> list:
    out = []
    for gr in setup.groups:
        src = gr.members[0].source
        out.append(refine_zero(src, gr.gamma, dps))
    return out


def _dps_for_bits(bits: int) -> int:
    return int(math.ceil(bits * math.log10(2))) + 20


def synchronize(setup: ExperimentSetup, search: str = "auto", seed: int = 0):
    """(SyncResult, refined |gamma| list, dps) aligning the kept frequencies."""
    if search not in ("auto", "brute", "lattice"):
        raise DomainError(f"unknown search {search!r}")
    k, M = len(setup.groups), setup.M_dio
    bits = lattice_bits(k, M)
    dps = _dps_for_bits(bits)
    gam = _refined_gammas(setup, dps)
    with mpmath.workdps(dps):
        lam = [g / (2 * mpmath.pi) for g in gam]
    brute_ok = k <= BRUTE_MAX_K and M <= BRUTE_MAX_M
    if search == "brute" or (search == "auto" and brute_ok):
        prob = SyncProblem(lam, M, M ** (3 * k))
        res = dio_search_brute(prob)
    else:
        prob = SyncProblem(lam, M)
        try:
            with mpmath.workdps(dps):
                res = dio_search_lattice(prob, seed=seed, bits=bits)
        except QualityMiss as exc:
            err = SyncFailed(f"no synchronising t: {exc}")
            err.best = exc.best
            raise err from exc
    # phases at t need about log2(t) + 80 bits of every ordinate
    need = _dps_for_bits(res.t.bit_length() + 80)
    if need > dps:
        dps = need
        gam = _refined_gammas(setup, dps)
        with mpmath.workdps(dps):
            lam = [g / (2 * mpmath.pi) for g in gam]
        ok, d = verify(SyncProblem(lam, M), res.t)
        if not ok:
            raise SyncFailed(f"t = {res.t} fails 1/M after refinement (defect {d:.3g})")
        res.defect = d
    return res, gam, dps


def _fractional_parts(gam, t: int, dps: int) -> List[float]:
    """Signed t gamma / 2 pi minus the nearest integer."""
    out = []
    with mpmath.workdps(dps):
        for g in gam:
            x = t * g / (2 * mpmath.pi)
            out.append(float(x - mpmath.nint(x)))
    return out


def _err_scale(t: int) -> float:
    return 0.0 if t > 1e300 else math.exp(-float(t) / 2)


def _per_char_error(setup: ExperimentSetup, chi: DirichletCharacter, t: int) -> float:
    """Explicit-formula remainder (normalised) beyond the zero sum at x = e^t."""
    w = setup.weight
    e = _err_scale(t)
    if e == 0.0:
        return 0.0
    val = setup.c_err * math.log(chi.modulus + 1)
    if chi.kappa == 0 and not chi.is_principal:
        val += abs(CACHE.get(w, 0.0))
    if not chi.is_primitive:
        grid = np.linspace(max(w.support_hint[0], 1e-9), w.support_hint[1], 4001)
        sup = float(np.max(np.abs(w(grid))))
        val += (float(t) + w.support_hint[1] + 10) * math.log(chi.modulus) * sup
    return val * e


def certify(setup: ExperimentSetup, t: int, gam: Sequence, dps: int = 30) -> dict:
    """Certificate components and the Cauchy-Schwarz lower bound at x = e^t."""
    t = int(t)
    fr = _fractional_parts(gam, t, dps) if t else [0.0] * len(gam)
    two_pi = 2 * math.pi
    aligned = {key: 0j for key in setup.heights}
    nz = {key: 0 for key in setup.heights}
    loss = {q: [] for q in setup.moduli}
    for gr, f in zip(setup.groups, fr):
        for z in gr.members:
            s = 1.0 if z.gamma > 0 else -1.0
            ph = complex(math.cos(two_pi * s * f), math.sin(two_pi * s * f))
            key = (z.q, z.chi.label)
            aligned[key] += z.m * ph
            nz[key] += 1
            loss[z.q].append(abs(z.m) * min(2.0, 4 * math.pi**2 * abs(f)))
    defect = max((abs(f) for f in fr), default=0.0)

    rows, per_q = [], {}
    for q in setup.moduli:
        lq = math.log(q)
        phi = euler_phi(q)
        chis = setup.members(q)
        keys = [(q, c.label) for c in chis]
        errs = {key: _per_char_error(setup, c, t) for key, c in zip(keys, chis)}
        rest = math.fsum(setup.rest[k] for k in keys)
        mid = math.fsum(setup.mid[k] for k in keys)
        tail = math.fsum(setup.tail[k] for k in keys)
        err = math.fsum(errs.values())
        los = math.fsum(loss[q])
        S0 = abs(setup.S0[q])
        lb = S0 - los - 2 * rest - mid - tail - err
        Phi = len(chis)
        known = {k: -aligned[k] for k in keys}
        rad = {k: setup.rest[k] + setup.mid[k] + setup.tail[k] + errs[k] for k in keys}
        d_mid = math.fsum(abs(known[k]) ** 2 for k in keys)
        d_lo = math.fsum(max(abs(known[k]) - rad[k], 0.0) ** 2 for k in keys)
        d_hi = math.fsum((abs(known[k]) + rad[k]) ** 2 for k in keys)
        ps = sum((aligned[k] for k in keys), 0j)
        per_q[q] = dict(q=q, phi=phi, Phi=Phi, Phi_over_phi=Phi / phi, S0=abs(setup.S0[q]),
                        misalignment_loss=los, unaligned=2 * rest, above_D=mid,
                        tail=tail, remainder=err, lower_sum=lb,
                        phase_sum=[ps.real, ps.imag],
                        _direct=(d_mid / phi, d_lo / phi, d_hi / phi, lq))
        for k, c in zip(keys, chis):
            rows.append(dict(q=q, label=c.label, conductor=c.conductor, kappa=c.kappa,
                             n_aligned=nz[k], re=known[k].real, im=known[k].imag,
                             abs=abs(known[k]), radius=rad[k], height=setup.heights[k]))

    if setup.mode == "single":
        (v,) = per_q.values()
        lq = math.log(v["q"])
        bound = max(v["lower_sum"], 0.0) ** 2 / (v["phi"] * v["Phi"] * lq)
        dm, dl, dh, _ = v["_direct"]
        direct = (dm / lq, dl / lq, dh / lq)
    else:
        lQ = math.log(setup.Q)
        bound = math.fsum(max(v["lower_sum"], 0.0) ** 2 / (v["phi"] * v["Phi"] * lQ)
                          for v in per_q.values()) / setup.Q
        direct = tuple(math.fsum(v["_direct"][i] for v in per_q.values()) / (setup.Q * lQ)
                       for i in range(3))
    for v in per_q.values():
        del v["_direct"]
    sum_phi_log = math.fsum(v["Phi"] * math.log(v["q"]) for v in per_q.values())
    S0_tot = math.fsum(v["S0"] for v in per_q.values())
    phase = sum((complex(*v["phase_sum"]) for v in per_q.values()), 0j)
    return dict(
        t=t, log_t=math.log(t) if t > 0 else float("-inf"), defect=defect,
        defect_target=1.0 / setup.M_dio, defect_met=defect <= 1.0 / setup.M_dio,
        phase_sum=[phase.real, phase.imag], lower_bound=bound,
        direct=direct[0], direct_lower=direct[1], direct_upper=direct[2],
        direct_exceeds_bound=direct[1] >= bound,
        achieved_fraction=S0_tot / (setup.weight.at_one * sum_phi_log),
        reference_fraction=3.0 / 8.0,
        paper_loss=4 * math.pi**2 * defect * setup.H_eta * sum_phi_log,
        per_modulus=[per_q[q] for q in setup.moduli], per_character=rows)


def explicit_crosscheck(setup: ExperimentSetup, t: int, rows: list) -> Optional[float]:
    """Largest |psi_eta_explicit - aligned part| - unaligned weight, for moderate t.

    The table ordinates carry ~1e-11 absolute error, so this is only
    meaningful while t stays below ~1e5.
    """
    if t > 1e5:
        return None
    worst = -math.inf
    table = bundled_table()
    by_key = {(r["q"], r["label"]): r for r in rows}
    for q in setup.moduli:
        for chi in setup.members(q):
            ev = psi_eta_explicit(setup.weight, t, chi, table, setup.D_eta)
            r = by_key[(q, chi.label)]
            known = complex(r["re"], r["im"])
            gap = (abs(ev.normalized - known) - setup.rest[(q, chi.label)]
                   - _per_char_error(setup, chi, t))
            worst = max(worst, gap)
    return worst


@dataclass
class ViolationReport:
    summary: dict
    per_modulus: list
    per_character: list

    def as_dict(self):
        return dict(summary=self.summary, per_modulus=self.per_modulus,
                    per_character=self.per_character)


def violation_experiment(w: SmoothWeight, Q: int, target_M: float,
                         table: Optional[ZeroTable] = None, mode: str = "single",
                         D_eta: Optional[float] = None, search: str = "auto",
                         seed: int = 0, c_abs: float = 1.0, c_err: float = C_ERR,
                         g_target: Optional[float] = None,
                         prune: float = PRUNE) -> ViolationReport:
    setup = prepare_experiment(w, Q, table, mode, D_eta, g_target, c_abs, c_err, prune)
    for q in setup.moduli:
        keys = [(q, c.label) for c in setup.members(q)]
        slack = math.fsum(2 * setup.rest[k] + setup.mid[k] + setup.tail[k] for k in keys)
        if mode == "single" and slack >= abs(setup.S0[q]):
            raise TailDominates(f"unaligned and tail terms {slack:.3g} exceed "
                                f"|S0| = {abs(setup.S0[q]):.3g}; increase D_eta")
    res, gam, dps = synchronize(setup, search, seed)
    cert = certify(setup, res.t, gam, dps)
    rows = cert.pop("per_character")
    per_mod = cert.pop("per_modulus")
    res.phase_sum = complex(*cert["phase_sum"])
    res.lower_bound = cert["lower_bound"]
    summary = dict(
        Q=Q, mode=mode, weight=w.name, D_eta=setup.D_eta, g_target=setup.family.g_target,
        moduli=list(setup.moduli), C_eta=setup.C_eta, H_eta=setup.H_eta,
        M_dio=setup.M_dio, c_abs=c_abs, c_err=c_err, seed=seed, prune=prune,
        search_method=res.search_method, n_zeros=setup.n_zeros,
        n_frequencies=len(setup.groups) + len(setup.dropped),
        n_aligned=len(setup.groups), refine_digits=dps,
        aligned_ordinates=[mpmath.nstr(g, 30) for g in gam],
        target=target_M, target_met=cert["lower_bound"] > target_M)
    summary.update(cert)
    summary["explicit_crosscheck"] = explicit_crosscheck(setup, res.t, rows)
    report = ViolationReport(summary, per_mod, rows)
    rest = sum(v["unaligned"] + v["above_D"] + v["tail"] + v["remainder"] for v in per_mod)
    if cert["lower_bound"] <= 0:
        S0 = sum(v["S0"] for v in per_mod)
        exc = (TailDominates(f"unaligned and tail terms {rest:.3g} exceed |S0| = {S0:.3g}; "
                             "increase D_eta")
               if rest >= S0 else
               SyncFailed(f"misalignment loss leaves no lower bound (defect "
                          f"{cert['defect']:.3g})"))
        exc.report = report
        raise exc
    return report
