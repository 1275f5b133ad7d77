"""Numba switch.

Kernels are compiled with numba unless ``LINEFIELD_NUMBA=0`` is set or numba
is not importable, in which case the pure numpy / Python twins are used.
``LINEFIELD_THREADS`` caps numba's thread pool.
"""
import os

_flag = os.environ.get("LINEFIELD_NUMBA", "1").strip().lower()
_wanted = _flag not in ("0", "false", "no", "off")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _wanted

if HAVE_NUMBA and os.environ.get("LINEFIELD_THREADS"):
    try:
        _n = int(os.environ["LINEFIELD_THREADS"])
        numba.set_num_threads(max(1, min(_n, numba.config.NUMBA_NUM_THREADS)))
    except ValueError:
        pass


def njit(*args, **kwargs):
    """``numba.njit`` with caching on; identity decorator without numba."""
    kwargs.setdefault("cache", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def pick(nb_impl, np_impl):
    return nb_impl if USE_NUMBA else np_impl
