"""Spectral radius of an irreducible block, shared by classgraph and perron."""
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import ConvergenceError

SPR_TOL = 1e-13
MAX_ITER = 1_000_000


def irreducible_spr(block, tol=SPR_TOL, max_iter=MAX_ITER):
    """Perron root and vector of an irreducible nonnegative block.

    Returns ``(spr, x)`` with ``x`` strictly positive and ``max(x) == 1``.
    The bracket ``min(Ax/x) <= spr <= max(Ax/x)`` is closed to relative width
    ``tol`` before returning.
    """
    block = np.asarray(block, dtype=float)
    n = block.shape[0]
    if n == 1:
        return float(block[0, 0]), np.ones(1)
    lo, hi, x, its = kernels.perron_iterate(block, tol, max_iter)
    if not hi - lo <= tol * hi:
        raise ConvergenceError(
            f"power iteration did not close the spectral bracket [{lo}, {hi}]",
            estimate=0.5 * (lo + hi),
            iterations=its,
        )
    return 0.5 * (lo + hi), x


@lru_cache(maxsize=65536)
def _cached_spr(key, n):
    block = np.frombuffer(key, dtype=float).reshape(n, n)
    return irreducible_spr(block)[0]


def block_spr(block):
    """Memoised spectral radius of an irreducible block (closures repeat blocks)."""
    block = np.ascontiguousarray(block, dtype=float)
    if block.shape[0] == 1:
        return float(block[0, 0])
    return _cached_spr(block.tobytes(), block.shape[0])
