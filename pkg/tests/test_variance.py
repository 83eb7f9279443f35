import math

import numpy as np
import pytest

from primevar.characters import character_group
from primevar.errors import DomainError
from primevar.primesums import psi_eta_direct, residue_sums
from primevar.variance import (classical_variances, g_eta_both_sides, v_eta_parseval_side,
                               v_eta_residue_side, variance_report)
from primevar.weights import mellin

V_Q4_1E6 = 0.01446339422435525   # frozen reference, eta_1
G_Q4_1E5 = 21746.227734402008


@pytest.mark.parametrize("q", [3, 5, 8, 12, 30])
@pytest.mark.parametrize("x", [1e2, 1e4])
def test_parseval(eta1, bump, q, x):
    for w in (eta1, bump):
        r = variance_report(w, x, q)
        assert r.v_eta_parseval == pytest.approx(r.v_eta_residue, rel=1e-9, abs=1e-12)
        assert r.g_eta_parseval == pytest.approx(r.g_eta_residue, rel=1e-9)


def test_q3_single_character(eta1):
    chi = [c for c in character_group(3) if not c.is_principal][0]
    psi = psi_eta_direct(eta1, 1e4, chi).value
    assert v_eta_residue_side(eta1, 1e4, 3) == pytest.approx(abs(psi) ** 2 / 2, rel=1e-9)


def test_empty_window(bump):
    # at x = 1 the window (1/2, 2) holds only n = 1, where Lambda vanishes
    rs = residue_sums(bump, 1.0, 3)
    assert v_eta_residue_side(bump, 1.0, 3, rs) == 0
    m1 = mellin(bump, 1.0).real
    res, par = g_eta_both_sides(bump, 1.0, 3, rs)
    assert res == pytest.approx((m1 * 1.0) ** 2 / 2, rel=1e-12)
    assert par == pytest.approx(res, rel=1e-12)


def test_regressions(eta1):
    assert variance_report(eta1, 1e6, 4).v_eta_residue == pytest.approx(V_Q4_1E6, rel=1e-6)
    assert variance_report(eta1, 1e5, 4).g_eta_residue == pytest.approx(G_Q4_1E5, rel=1e-9)


def test_classical():
    th_hand = {1: math.log(7), 2: math.log(2) + math.log(5)}
    V, G = classical_variances(10, 3)
    assert G == pytest.approx(sum((v - 5) ** 2 for v in th_hand.values()))
    V, G = classical_variances(3, 3)
    assert V >= 0 and G >= 0
    V, _ = classical_variances(1e6, 101)
    assert 0.1 < V / (1e6 * math.log(101)) < 10


def test_label_order_invariance(eta1):
    rs = residue_sums(eta1, 1e4, 15)
    vals = [abs(rs.psi_chi(c)) ** 2 for c in character_group(15) if not c.is_principal]
    assert math.fsum(vals[::-1]) / 8 == pytest.approx(v_eta_parseval_side(eta1, 1e4, 15, rs))


def test_bad_q(eta1):
    with pytest.raises(DomainError):
        variance_report(eta1, 100, 2)
