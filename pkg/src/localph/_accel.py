"""Optional numba acceleration.

Set ``LOCALPH_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The kernels are written in the numba-compatible subset so both paths execute
the same source.
"""

import os

USE_NUMBA = os.environ.get("LOCALPH_DISABLE_NUMBA", "0").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if USE_NUMBA:

    def jit(fn):
        return _njit(cache=True, nogil=True)(fn)

else:

    def jit(fn):
        return fn


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"
