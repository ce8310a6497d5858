"""Optional numba acceleration.

The loop kernels in :mod:`chfnet.kernels` are compiled with numba when it is
importable. Which implementation the rest of the package calls is decided once,
at import time: set ``CHFNET_NO_NUMBA=1`` to force the pure-numpy path (useful
for debugging, or where numba is broken).
"""
import os


def _have_numba():
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


def _numba_disabled():
    return os.environ.get("CHFNET_NO_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")


HAVE_NUMBA = _have_numba()
USE_NUMBA = HAVE_NUMBA and not _numba_disabled()

if HAVE_NUMBA:
    from numba import njit
else:
    def njit(func=None, **kwargs):
        """A decorator that does nothing."""
        if func is not None:
            return func

        def wrapper(f):
            return f
        return wrapper
