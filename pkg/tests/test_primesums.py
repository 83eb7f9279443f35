import math

import numpy as np
import pytest

from primevar.characters import character_group, principal
from primevar.errors import DomainError, ScaleTooLarge
from primevar.primesums import (SieveWindow, classical_sums, prime_power_correction,
                                psi_eta_direct, residue_sums, small_primes, theta_eta_direct,
                                truncation)

PSI_1E6 = 999999.9999817946        # frozen reference, eta_1, trivial character
CHI4_1E4 = -0.10895629955939512    # frozen reference, eta_1, chi mod 4


def naive_mangoldt(n_max):
    lam = np.zeros(n_max + 1)
    is_p = np.ones(n_max + 1, bool)
    is_p[:2] = False
    for p in range(2, n_max + 1):
        if not is_p[p]:
            continue
        is_p[p * p::p] = False
        v = p
        while v <= n_max:
            lam[v] = math.log(p)
            v *= p
    return lam, is_p


def nonprincipal(q):
    return [c for c in character_group(q) if not c.is_principal]


def test_small_primes():
    assert small_primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_sieve_window_matches_naive():
    lam, _ = naive_mangoldt(5000)
    got = np.zeros(5001)
    for pr, ppn, ppl in SieveWindow(5000).segments():
        got[pr] = np.log(pr.astype(float))
        got[ppn] = ppl
    assert np.allclose(got, lam)


@pytest.mark.parametrize("q", [3, 4, 7, 12])
def test_psi_theta_naive(eta1, q):
    x = 2000.0
    u0, _ = truncation(eta1, x)
    n_max = int(u0 * x)
    lam, is_p = naive_mangoldt(n_max)
    n = np.arange(n_max + 1)
    wv = np.zeros(n_max + 1)
    wv[1:] = eta1(n[1:] / x)
    for chi in character_group(q):
        cv = np.array([chi(int(k)) for k in n])
        psi = np.sum(lam * cv * wv)
        th = np.sum(np.where(is_p, lam, 0) * cv * wv)
        assert abs(psi_eta_direct(eta1, x, chi).value - psi) < 1e-8 * x
        assert abs(theta_eta_direct(eta1, x, chi).value - th) < 1e-8 * x


def test_psi_1e6(eta1):
    r = psi_eta_direct(eta1, 1e6, principal(1))
    assert abs(r.value.real - 1e6) < 2e-3 * 1e6
    assert r.value.real == pytest.approx(PSI_1E6, rel=1e-12)
    th = theta_eta_direct(eta1, 1e6, principal(1)).value.real
    assert abs(r.value.real - th) <= 3 * math.sqrt(1e6)


def test_chi4_regression(eta1):
    v = psi_eta_direct(eta1, 1e4, nonprincipal(4)[0]).value
    assert v.real == pytest.approx(CHI4_1E4, rel=1e-9) and v.imag == 0


def test_bump_single_term(bump):
    x = 1.5
    for chi in character_group(3):
        want = math.log(2) * chi(2) * float(bump(np.array([2 / x]))[0])
        assert abs(psi_eta_direct(bump, x, chi).value - want) < 1e-14
    assert abs(psi_eta_direct(bump, 1.0, principal(1)).value) < 1e-14


def test_classical_hand():
    th, ps = classical_sums(10, 3)
    assert th[1] == pytest.approx(math.log(7))
    assert th[2] == pytest.approx(math.log(2) + math.log(5))
    th, _ = classical_sums(2, 3)
    assert th[2] == pytest.approx(math.log(2)) and th[1] == 0


def test_classical_q4():
    th, _ = classical_sums(1e6, 4)
    assert abs(th[1] - 5e5) < 5e3 and abs(th[3] - 5e5) < 5e3


def test_prime_power_correction(eta1):
    x = 1e4
    q = 12
    chi0 = principal(q)
    full = psi_eta_direct(eta1, x, principal(1)).value.real
    part = psi_eta_direct(eta1, x, chi0).value.real
    assert full - part == pytest.approx(prime_power_correction(eta1, x, q), rel=1e-10)


def test_errors(eta1):
    with pytest.raises(ScaleTooLarge):
        residue_sums(eta1, 1e10, 3)
    with pytest.raises(DomainError):
        residue_sums(eta1, 0.5, 3)


def test_truncation_bound(eta1):
    u0, b = truncation(eta1, 1e6)
    assert b < 1e-9 * 1e6
