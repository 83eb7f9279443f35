"""Kernel selection: the compiled extension when it imports, numpy otherwise.

Set ``PRIMEVAR_PURE=1`` to force the numpy fallback.
"""
import os

from . import _fallback

BACKEND = "python"
if os.environ.get("PRIMEVAR_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

primes_in_window = _impl.primes_in_window
hurwitz_regular = _impl.hurwitz_regular
dio_scan = _impl.dio_scan

try:
    import flint as _flint  # noqa: F401
    HAVE_FLINT = True
except ImportError:
    HAVE_FLINT = False
