import math

import numpy as np
import pytest

from primevar.characters import character_group, principal
from primevar.errors import DomainError, ModeError
from primevar.explicit import (MellinCache, b_eta, grh_bound_scan, phases, psi_eta_explicit,
                               tail_certificate, weil_deviation, weil_sum)
from primevar.lfunctions import inverse_square_sum, read_zero_text
from primevar.primesums import psi_eta_direct
from primevar.weights import mellin


def nonprincipal(q):
    return [c for c in character_group(q) if not c.is_principal]


def discrepancy(w, chi, table, x, T):
    ev = psi_eta_explicit(w, math.log(x), chi, table, T)
    return abs(psi_eta_direct(w, x, chi).value - ev.value), ev


@pytest.mark.parametrize("q", [4, 5, 7])
def test_direct_agreement(eta1, table, q):
    for chi in nonprincipal(q):
        if not chi.is_primitive:
            continue
        for x in (1e3, 1e5):
            d, ev = discrepancy(eta1, chi, table, x, 100)
            assert d <= ev.tail_certificate * math.sqrt(x) + 10 * math.log(q)
            # the quadrature and zeros are accurate far beyond the certificate
            assert d < 1e-3 * math.sqrt(x)


def test_imprimitive_reduction(eta1, table):
    chi = [c for c in character_group(15) if c.conductor == 5][0]
    for x in (1e3, 1e4):
        d, ev = discrepancy(eta1, chi, table, x, 100)
        assert d < 1e-3 * math.sqrt(x)


def test_trivial_character_x1(eta1, table):
    # t = 0: psi_eta(1) = sum_n Lambda(n) eta(n) with the main term M eta(1)
    d, ev = discrepancy(eta1, principal(1), table, 1.0, 100)
    assert ev.main_term_included
    assert d <= ev.tail_certificate + 10 * math.log(2)


def test_strict_structure(eta1, table):
    chi = nonprincipal(3)[0]
    t = 7.3
    ev = psi_eta_explicit(eta1, t, chi, table, 50)
    rho = table.zeros(chi, 50)
    want = -sum(mellin(eta1, r) * np.exp(1j * r.imag * t) for r in rho)
    assert ev.offline_contribution == 0
    assert abs(ev.normalized - want) < 1e-12


def test_periodicity_guard(eta1, table):
    chi = nonprincipal(5)[0]
    g1 = table.zeros(chi, 100).imag
    g1 = g1[g1 > 0][0]
    a = psi_eta_explicit(eta1, 9.1, chi, table, 100).normalized
    b = psi_eta_explicit(eta1, 9.1 + 2 * math.pi / g1, chi, table, 100).normalized
    assert abs(a - b) > 1e-6


def test_value_limit(eta1, table):
    ev = psi_eta_explicit(eta1, 30.0, nonprincipal(3)[0], table, 50)
    with pytest.raises(DomainError):
        ev.value


def test_tail_certificate_monotone(eta1):
    vals = [tail_certificate(eta1, 7, T) for T in (25, 50, 100, 200, 400)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_weil_real_and_zero(eta1, table):
    chi = nonprincipal(3)[0]
    assert abs(weil_sum(eta1, chi, table, 100).imag) < 1e-9
    assert weil_sum(eta1, chi, table, 0) == 0
    with pytest.raises(DomainError):
        weil_sum(eta1, principal(3), table, 10)


def test_weil_stabilises(eta1, table):
    for q in (3, 5, 7):
        for chi in nonprincipal(q):
            if not chi.is_primitive:
                continue
            vals = [weil_sum(eta1, chi, table, T) for T in (25, 50, 100)]
            for (a, b), T in zip(zip(vals, vals[1:]), (25, 50)):
                assert abs(a - b) <= 2 * b_eta(eta1) * math.log(q * T) / T


def test_weil_mod3_regression(eta1, table):
    dev = weil_deviation(eta1, nonprincipal(3)[0], table, 100)
    assert dev < 1.0


def test_grh_scan(eta1, table):
    chi = nonprincipal(3)[0]
    single = psi_eta_explicit(eta1, 4.0, chi, table, 100)
    assert grh_bound_scan(eta1, chi, table, [4.0], 100) == abs(single.normalized) / math.log(3)
    c3 = grh_bound_scan(eta1, chi, table, np.linspace(0.5, 25, 50), 100)
    p, t = inverse_square_sum(table, chi, 0)
    assert c3 <= 2 * b_eta(eta1) * (p + t) / math.log(3)


def test_mode_checks(eta1):
    tab = read_zero_text("# q=1 label=0 complete_to=30 source=synthetic\n0.6 14\n",
                         mode="exploratory")
    with pytest.raises(ModeError):
        psi_eta_explicit(eta1, 3.0, principal(1), tab, 30)
    ev = psi_eta_explicit(eta1, 3.0, principal(1), tab, 30, mode="exploratory")
    assert ev.offline_contribution != 0


def test_phases_large_t():
    g = np.array([14.134725141734693, 21.022039638771555])
    t = 10 ** 20 + 7
    ph = phases(g, t)
    import mpmath
    with mpmath.workdps(60):
        ref = [complex(mpmath.expj(mpmath.mpf(x) * t)) for x in g.tolist()]
    assert np.allclose(ph, ref, atol=1e-12)
    assert np.allclose(phases(g, 3.0), np.exp(3j * g))


def test_cache(eta1):
    c = MellinCache()
    s = 0.5 + 14.134725141734693j
    a = c.get(eta1, s)
    assert a == mellin(eta1, s)
    assert c.get(eta1, s.conjugate()) == a.conjugate()
    assert len(c) == 2
    # certified negligible far up the line
    assert c.get(eta1, 0.5 + 90j) == 0
    assert abs(mellin(eta1, 0.5 + 90j)) < 1e-30
