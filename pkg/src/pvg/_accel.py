"""Numba acceleration toggle.

Hot numeric kernels in this package exist twice: a scalar-loop version
compiled with numba's ``@njit`` and a vectorized pure-numpy fallback.
Which one runs is decided here, once, at import time:

* ``PVG_NUMBA=0`` (also ``false``/``off``/``no``) forces the numpy path.
* If numba is not importable the numpy path is used silently.
* Otherwise numba is used.

``jit`` below is a no-op decorator when numba is off, so kernel modules
can decorate unconditionally and keep a plain-python (debuggable) copy
of the loop code alive.
"""

from __future__ import annotations

import os

__all__ = ["NUMBA_ENABLED", "jit"]


def _numba_wanted() -> bool:
    flag = os.environ.get("PVG_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = False

if _numba_wanted():
    try:
        import numba

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def jit(func):
        return numba.njit(cache=True, nogil=True)(func)
else:
    def jit(func):
        return func
