"""Smooth weights and their Mellin transforms.

A weight is a C^2 function on (0, inf) that vanishes like t at the origin and
decays faster than any power at infinity. Everything downstream only needs
point evaluations of the weight and of its first two derivatives, plus (when
available) a complex-analytic extension to a sector ``|arg z| < sector`` which
lets ``mellin`` rotate the integration ray and avoid catastrophic cancellation
at large imaginary part.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .errors import DomainError, NonConvergent

_TINY = 1e-22          # relative integrand level treated as outside the support
_QUAD_LIMIT = 400


@dataclass(frozen=True)
class SmoothWeight:
    name: str
    eval: Callable
    eval_d1: Callable
    eval_d2: Callable
    support_hint: tuple
    decreasing_from: float
    eval_c: Optional[Callable] = None
    eval_d2_c: Optional[Callable] = None
    sector: float = 0.0
    scale: float = 1.0

    def __call__(self, t):
        return self.scale * self.eval(t)

    def d1(self, t):
        return self.scale * self.eval_d1(t)

    def d2(self, t):
        return self.scale * self.eval_d2(t)

    def c(self, z):
        return self.scale * self.eval_c(z)

    def d2c(self, z):
        return self.scale * self.eval_d2_c(z)

    @property
    def at_one(self) -> float:
        return float(self(np.array([1.0]))[0])

    def scaled(self, factor: float) -> "SmoothWeight":
        return replace(self, scale=self.scale * factor,
                       name=f"{self.name}*{factor:g}")


@dataclass(frozen=True)
class WeightConstants:
    B_eta: float
    H_eta: float
    C_eta: float
    D_eta: float
    C_abs: float
    sigma_argmax: float
    q_ref: int = 3
    grid: tuple = field(default=(), repr=False)

    def as_dict(self):
        return {"B_eta": self.B_eta, "H_eta": self.H_eta, "C_eta": self.C_eta,
                "D_eta": self.D_eta, "C_abs": self.C_abs,
                "sigma_argmax": self.sigma_argmax, "q_ref": self.q_ref}


# ---------------------------------------------------------------- presets

def _exp_linear():
    f = lambda t: t * np.exp(-t)
    return SmoothWeight(
        name="exp_linear", eval=f,
        eval_d1=lambda t: (1.0 - t) * np.exp(-t),
        eval_d2=lambda t: (t - 2.0) * np.exp(-t),
        support_hint=(0.0, 50.0), decreasing_from=1.0,
        eval_c=f, eval_d2_c=lambda z: (z - 2.0) * np.exp(-z),
        sector=math.pi / 2)


def _gauss_quadratic():
    f = lambda t: t * t * np.exp(-t * t)
    d2 = lambda t: (2.0 - 10.0 * t**2 + 4.0 * t**4) * np.exp(-t * t)
    return SmoothWeight(
        name="gauss_quadratic", eval=f,
        eval_d1=lambda t: (2.0 * t - 2.0 * t**3) * np.exp(-t * t),
        eval_d2=d2, support_hint=(0.0, 7.5), decreasing_from=1.0,
        eval_c=f, eval_d2_c=d2, sector=math.pi / 4)


def _bump_parts(t):
    t = np.asarray(t, dtype=np.float64)
    inside = (t > 0.5) & (t < 2.0)
    w = np.where(inside, (t - 0.5) * (2.0 - t), 0.0)
    wp = np.where(inside, 2.5 - 2.0 * t, 0.0)
    return w, wp


def _bump():
    # 8 [(t - 1/2)(2 - t)]^3 on [1/2, 2]: triple roots at the ends make it C^2
    def f(t):
        w, _ = _bump_parts(t)
        return 8.0 * w**3

    def d1(t):
        w, wp = _bump_parts(t)
        return 24.0 * w**2 * wp

    def d2(t):
        w, wp = _bump_parts(t)
        return 48.0 * w * wp**2 - 48.0 * w**2

    return SmoothWeight(name="bump", eval=f, eval_d1=d1, eval_d2=d2,
                        support_hint=(0.5, 2.0), decreasing_from=1.0)


_PRESETS = {"exp_linear": _exp_linear, "gauss_quadratic": _gauss_quadratic,
            "bump": _bump}


def preset_weights() -> list:
    return [make() for make in _PRESETS.values()]


def get_weight(name: str) -> SmoothWeight:
    try:
        return _PRESETS[name]()
    except KeyError:
        raise DomainError(f"unknown weight {name!r}; choose from "
                          f"{', '.join(_PRESETS)}") from None


# ---------------------------------------------------------------- checks

def check_weight(w: SmoothWeight, n: int = 400) -> dict:
    """Sample the class-S conditions. Returns the fitted small-t constant K."""
    if not w.at_one > 0:
        raise DomainError(f"{w.name}: eta(1) must be positive")
    t = np.geomspace(1e-8, max(w.support_hint[1], 10.0) * 4, n)
    vals = w(t)
    if np.any(vals < 0):
        raise DomainError(f"{w.name}: negative values sampled")
    big = np.geomspace(10.0, 1e3, n)
    decay = w(big) * big**8
    if np.any(np.diff(decay) > 1e-300 + 1e-12 * np.abs(decay[:-1])) or decay[-1] > 1e-12:
        raise DomainError(f"{w.name}: t^8 eta(t) not decreasing to 0 for t >= 10")
    small = np.geomspace(1e-10, 0.1, n)
    K = float(max(np.max(np.abs(w(small)) / small), np.max(np.abs(w.d1(small)))))
    if not math.isfinite(K):
        raise DomainError(f"{w.name}: no finite constant near 0")
    return {"K": K, "eta_one": w.at_one}


# ---------------------------------------------------------------- quadrature

def _rotation(w: SmoothWeight, s: complex) -> float:
    tau = s.imag
    if w.sector <= 0 or abs(tau) <= 1.0:
        return 0.0
    # ray through the saddle of t^s * eta(t), capped inside the sector
    frac = (2 / math.pi) * math.atan(abs(tau) / max(s.real + 1.0, 1e-3))
    return math.copysign(w.sector * min(frac, 0.98), tau)


def _u_window(absf, lo_hint, hi_hint, sigma):
    """Range of u = log t carrying the integrand mass, found on a coarse grid."""
    u_lo = max(-700.0, -60.0 / max(sigma + 1.0, 0.05))
    if lo_hint > 0:
        u_lo = max(u_lo, math.log(lo_hint))
    u_hi = math.log(hi_hint) + math.log(1e4)
    u = np.linspace(u_lo, u_hi, 6000)
    with np.errstate(all="ignore"):
        a = absf(u)
    a = np.where(np.isfinite(a), a, 0.0)
    peak = a.max()
    if peak == 0:
        return None
    keep = np.flatnonzero(a > _TINY * peak)
    du = u[1] - u[0]
    lo = u[max(keep[0] - 1, 0)]
    hi = u[min(keep[-1] + 1, len(u) - 1)]
    if lo_hint > 0:
        lo = max(lo, math.log(lo_hint))
    if hi_hint > 0 and lo_hint > 0:
        # compact support: integrate exactly over it
        hi = min(hi, math.log(hi_hint)) if hi_hint <= math.exp(u_hi) else hi
    return lo, hi + (0 if lo_hint > 0 else du)


def _oscillations(f, a, b):
    """Number of turns of arg f on [a, b], resolving the phase adaptively."""
    n = 2048
    while True:
        u = np.linspace(a, b, n)
        with np.errstate(all="ignore"):
            v = f(u)
        av = np.abs(v)
        # the phase only matters where the integrand is not negligible
        v = v[av > max(1e-300, 1e-20 * av.max(initial=0.0))]
        d = np.abs(np.diff(np.unwrap(np.angle(v))))
        if d.max(initial=0.0) < 1.0 or n >= 1 << 16:
            return float(d.sum()) / (2 * math.pi)
        n *= 4


def _left_tail(f, a):
    """int_{-inf}^a f for a power-law left tail f ~ c exp(p u)."""
    if a > -650.0:
        return 0j
    h = 1e-3
    fa, fb = complex(f(np.array([a]))[0]), complex(f(np.array([a + h]))[0])
    if fa == 0 or fb == 0:
        return 0j
    p = (np.log(fb) - np.log(fa)) / h
    return fa / p if p.real > 0 else 0j


_GL = {n: np.polynomial.legendre.leggauss(n) for n in (48, 64)}


def _gauss_legendre(f, edges, rtol):
    """Composite Gauss-Legendre at two orders; None if they disagree."""
    lo, hi = edges[:-1, None], edges[1:, None]
    half = (hi - lo) / 2
    res = []
    for n in (48, 64):
        x, wt = _GL[n]
        u = (lo + hi) / 2 + half * x[None, :]
        with np.errstate(all="ignore"):
            v = f(u.ravel()).reshape(u.shape)
        if not np.all(np.isfinite(v)):
            return None
        res.append(((v * wt[None, :]) * half).sum(axis=1))
        absv = (np.abs(v) * wt[None, :] * half).sum()
    i48, i64 = (complex(math.fsum(r.real), math.fsum(r.imag)) for r in res)
    floor = 100 * np.finfo(float).eps * absv
    if abs(i48 - i64) > max(rtol * abs(i64), floor):
        return None
    return i64, float(absv)


def _mellin_integral(g, g_c, w: SmoothWeight, s: complex, rtol: float,
                     phi: float):
    """int_0^inf g(t) t^(s-1) dt with the ray t = r e^(i phi)."""
    rot = complex(math.cos(phi), math.sin(phi))

    if phi == 0.0:
        def f(u):
            e = np.exp(u)
            return g(np.asarray(e)) * np.exp(u * s)
    else:
        def f(u):
            z = np.exp(u) * rot
            return g_c(z) * np.exp(u * s)

    def absf(u):
        return np.abs(f(u))

    lo_hint = w.support_hint[0]
    hi_hint = w.support_hint[1]
    win = _u_window(absf, lo_hint if phi == 0.0 else 0.0, hi_hint, s.real)
    if win is None:
        return 0j, 0.0
    a, b = win
    npieces = int(min(4000, max(1, math.ceil(_oscillations(f, a, b) / 2.0))))
    for _ in range(4):
        edges = np.linspace(a, b, npieces + 1)
        fast = _gauss_legendre(f, edges, rtol)
        if fast is not None or npieces >= 4000:
            break
        npieces *= 4
    if fast is not None:
        total, l1 = fast
        total += _left_tail(f, a)
        return total * (np.exp(1j * phi * s) if phi != 0.0 else 1.0), l1
    re_parts, im_parts, l1_parts, errs = [], [], [], []
    fs = lambda u: complex(f(np.array([u]))[0])
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, err, *_ = quad(fs, lo, hi, complex_func=True, epsabs=0.0,
                            epsrel=min(rtol, 1e-11), limit=_QUAD_LIMIT,
                            full_output=True)
        l1, *_ = quad(lambda u: abs(fs(u)), lo, hi, epsabs=0.0, epsrel=1e-6,
                      limit=_QUAD_LIMIT, full_output=True)
        re_parts.append(val.real)
        im_parts.append(val.imag)
        l1_parts.append(l1)
        errs.append(abs(err[0]) + abs(err[1]) if isinstance(err, tuple) else abs(err))
    total = complex(math.fsum(re_parts), math.fsum(im_parts)) + _left_tail(f, a)
    l1 = math.fsum(l1_parts)
    err = math.fsum(errs)
    floor = 1e3 * np.finfo(float).eps * l1
    if err > max(rtol * abs(total), floor) * 10:
        raise NonConvergent(f"{w.name}: quadrature at s={s} did not reach "
                            f"tolerance (err {err:.2e}, |I| {abs(total):.2e})")
    return total * (np.exp(1j * phi * s) if phi != 0.0 else 1.0), l1


def mellin(w: SmoothWeight, s, rtol: float = 1e-10) -> complex:
    """Mellin transform int_0^inf eta(t) t^(s-1) dt for Re(s) > -1."""
    s = complex(s)
    if s.real <= -1.0:
        raise DomainError(f"Mellin transform needs Re(s) > -1, got {s}")
    phi = _rotation(w, s)
    val, _ = _mellin_integral(w.__call__, w.c if w.eval_c else None, w, s,
                              rtol, phi)
    return val


def mellin_by_parts(w: SmoothWeight, s, rtol: float = 1e-10) -> complex:
    """(1/(s(s+1))) int_0^inf eta''(t) t^(s+1) dt."""
    s = complex(s)
    if s.real <= -1.0:
        raise DomainError(f"need Re(s) > -1, got {s}")
    if abs(s) < 1e-14 or abs(s + 1) < 1e-14:
        raise DomainError("double integration by parts is singular at s = 0, -1")
    phi = _rotation(w, s + 2)
    val, _ = _mellin_integral(w.d2, w.d2c if w.eval_d2_c else None, w,
                              s + 2, rtol, phi)
    return val / (s * (s + 1))


def _sign_breaks(func, lo, hi, n=4000):
    t = np.geomspace(max(lo, 1e-9), hi, n)
    v = func(t)
    roots = []
    for i in np.flatnonzero(np.sign(v[:-1]) * np.sign(v[1:]) < 0):
        roots.append(brentq(lambda x: float(func(np.array([x]))[0]), t[i], t[i + 1]))
    return roots


def abs_moment(func, w: SmoothWeight, sigma: float, breaks=None) -> float:
    """int_0^inf |func(t)| t^(sigma+1) dt."""
    lo, hi = w.support_hint
    if breaks is None:
        breaks = _sign_breaks(func, lo if lo > 0 else 1e-9, hi)
    pts = [lo] + list(breaks) + [hi]
    g = lambda t: abs(float(func(np.array([t]))[0])) * t ** (sigma + 1)
    total = []
    for a, b in zip(pts[:-1], pts[1:]):
        val, err = quad(g, a, b, epsabs=0.0, epsrel=1e-12, limit=_QUAD_LIMIT)
        total.append(val)
    return math.fsum(total)


def mellin_bound_constant(w: SmoothWeight, step: float = 0.05):
    """B = max over sigma in [-1/2, 2] of int |eta''(t)| t^(sigma+1) dt."""
    lo, hi = w.support_hint
    breaks = _sign_breaks(w.d2, lo if lo > 0 else 1e-9, hi)
    sigmas = np.round(np.arange(-0.5, 2.0 + step / 2, step), 12)
    vals = [abs_moment(w.d2, w, float(sg), breaks) for sg in sigmas]
    i = int(np.argmax(vals))
    return float(vals[i]), float(sigmas[i]), tuple(zip(sigmas.tolist(), vals))


def sector_constant(w: SmoothWeight, sigma: float, phi: float) -> float:
    """A with |M eta(sigma + i tau)| <= A exp(-phi |tau|), from the rotated ray."""
    if w.sector <= 0 or not 0 < phi < w.sector:
        raise DomainError("sector bound needs 0 < phi < sector")
    rot = complex(math.cos(phi), math.sin(phi))
    g = lambda u: abs(complex(w.c(np.array([math.exp(u) * rot]))[0])) * math.exp(u * sigma)
    absf = lambda u: np.abs(w.c(np.exp(u) * rot)) * np.exp(u * sigma)
    a, b = _u_window(absf, 0.0, w.support_hint[1], sigma)
    val, _ = quad(g, a, b, epsabs=0.0, epsrel=1e-10, limit=_QUAD_LIMIT)
    return val * 1.0000001


def mellin_majorant(w: SmoothWeight, s, B: float, sector_A: Optional[float] = None,
                    sector_phi: float = 0.0) -> float:
    """Certified upper bound for |M eta(s)| on -1/2 <= Re(s) <= 2."""
    s = complex(s)
    bound = B / abs(s) ** 2
    if sector_A is not None:
        bound = min(bound, sector_A * math.exp(-sector_phi * abs(s.imag)))
    return bound


def tail_integral(w: SmoothWeight, u0: float) -> float:
    """int_{u0}^inf eta(u) du."""
    hi = w.support_hint[1]
    if u0 >= hi:
        return 0.0
    g = lambda t: float(w(np.array([t]))[0])
    val, _ = quad(g, u0, hi, epsabs=0.0, epsrel=1e-10, limit=_QUAD_LIMIT)
    return max(val, 0.0)


def constants(w: SmoothWeight, c_abs: float = 1.0, q_ref: int = 3) -> WeightConstants:
    if c_abs <= 0:
        raise DomainError("c_abs must be positive")
    B, sigma_star, grid = mellin_bound_constant(w)
    H = c_abs * B
    eta1 = w.at_one
    C = math.log(math.floor(16 * math.pi**2 * H / eta1) + 1)
    target = eta1 / 16 * math.log(q_ref)
    D = 10.0
    while B * c_abs * math.log(q_ref * D) / D >= target:
        D *= 2
        if D > 2.0**60:
            raise NonConvergent("no truncation height found")
    return WeightConstants(B_eta=B, H_eta=H, C_eta=C, D_eta=D, C_abs=c_abs,
                           sigma_argmax=sigma_star, q_ref=q_ref, grid=grid)
