"""Weighted variances of primes in arithmetic progressions.

Direct prime sums, Dirichlet L-function zeros, the explicit formula and a
phase-synchronisation experiment, with a compiled kernel when available.
"""
__version__ = "0.1.0"

from .kernels import BACKEND, HAVE_FLINT  # noqa: E402,F401
