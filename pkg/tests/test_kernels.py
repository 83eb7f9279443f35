import numpy as np
import pytest

from primevar import _fallback, kernels
from primevar.lfunctions import BERN

try:
    from primevar import _kernels
except ImportError:  # extension not built
    _kernels = None

compiled = pytest.mark.skipif(_kernels is None, reason="compiled kernels not built")


def naive_primes(lo, hi):
    return [n for n in range(max(lo, 2), hi) if all(n % d for d in range(2, int(n**0.5) + 1))]


@pytest.mark.parametrize("lo,hi", [(0, 200), (2, 3), (1000, 1300), (99991, 100500), (5, 5)])
def test_fallback_primes(lo, hi):
    base = np.array(naive_primes(2, 400), dtype=np.int64)
    assert _fallback.primes_in_window(lo, hi, base).tolist() == naive_primes(lo, hi)


@compiled
@pytest.mark.parametrize("lo,hi", [(0, 200), (1000, 1300), (99991, 100500), (10**7, 10**7 + 5000)])
def test_compiled_primes(lo, hi):
    base = np.array(naive_primes(2, 4000), dtype=np.int64)
    assert _kernels.primes_in_window(lo, hi, base).tolist() == \
        _fallback.primes_in_window(lo, hi, base).tolist()


@compiled
def test_compiled_hurwitz():
    s = np.array([0.5 + 14j, 2.0 + 0j, 0.3 - 40j, 1.5 + 100j])
    n = np.array([24, 24, 50, 110], dtype=np.int64)
    a = _kernels.hurwitz_regular(s, 0.25, n, BERN)
    b = _fallback.hurwitz_regular(s, 0.25, n, BERN)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-14)


def test_hurwitz_vs_mpmath():
    import mpmath
    s = np.array([0.5 + 14j, 2.0 + 0j])
    n = np.array([24, 24], dtype=np.int64)
    x = 1.0 / 3
    v = kernels.hurwitz_regular(s, x, n, BERN)
    # the kernel omits the (N + x)^(1 - s) / (s - 1) term
    v = v + (n + x) ** (1 - s) / (s - 1)
    for si, vi in zip(s, v):
        assert abs(complex(mpmath.zeta(si, x)) - vi) < 1e-10


@compiled
def test_compiled_dio_scan():
    rng = np.random.default_rng(3)
    for _ in range(20):
        lam = rng.random(int(rng.integers(1, 4)))
        assert _kernels.dio_scan(lam, 5, 200000, 0.1) == _fallback.dio_scan(lam, 5, 200000, 0.1)


def test_backend_flag():
    assert kernels.BACKEND in ("cython", "python")
    if _kernels is None:
        assert kernels.BACKEND == "python"
