"""Numba shim.

Set ``LTLSHAPE_DISABLE_NUMBA=1`` to run the kernels as plain Python/numpy.
Both paths execute the same source and draw from the same MT19937 stream,
so results are bit-identical; only speed differs.
"""
import os

_DISABLED = os.environ.get("LTLSHAPE_DISABLE_NUMBA", "").lower() in ("1", "true", "yes")

try:
    if _DISABLED:
        raise ImportError
    from numba import njit
    HAS_NUMBA = True
except ImportError:
    HAS_NUMBA = False

    def njit(*args, **kw):
        if len(args) == 1 and callable(args[0]) and not kw:
            return args[0]
        return lambda f: f


def backend() -> str:
    return "numba" if HAS_NUMBA else "python"
