"""Kernel backend selection.

Set ``LACKAWALK_BACKEND=numpy`` to force the pure-numpy kernels; the default
uses numba when it can be imported.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

REQUESTED = os.environ.get("LACKAWALK_BACKEND", "numba").strip().lower()
if REQUESTED not in ("numba", "numpy"):
    raise ValueError(f"LACKAWALK_BACKEND must be 'numba' or 'numpy', got {REQUESTED!r}")

HAS_NUMBA = numba is not None
USE_NUMBA = HAS_NUMBA and REQUESTED == "numba"
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(fn):
    """``numba.njit(cache=True)`` when numba is installed, identity otherwise."""
    if numba is None:
        return fn
    return numba.njit(cache=True)(fn)
