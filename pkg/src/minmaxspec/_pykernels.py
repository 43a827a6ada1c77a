"""Pure-numpy implementations of the hot loops.

These mirror ``_kernels.pyx`` function for function and are used whenever the
compiled extension is unavailable.  Row-choice families are passed in stacked
form: ``rows`` is an (M, N) array holding every candidate row, and the choices
for state ``i`` are ``rows[offsets[i]:offsets[i + 1]]``.
"""
import numpy as np

NAME = "python"


def apply_rows(rows, offsets, v, maximize):
    prods = rows @ v
    if maximize:
        return np.maximum.reduceat(prods, offsets[:-1])
    return np.minimum.reduceat(prods, offsets[:-1])


def _log_products(logw, logv):
    # log(sum_j w_j exp(l_j)) per stacked row, -inf where the row misses supp(v)
    terms = logw + logv[None, :]
    top = terms.max(axis=1)
    out = np.full(terms.shape[0], -np.inf)
    ok = np.isfinite(top)
    if ok.any():
        shifted = np.exp(terms[ok] - top[ok, None])
        out[ok] = top[ok] + np.log(shifted.sum(axis=1))
    return out


def _log_weights(rows):
    logw = np.full(rows.shape, -np.inf)
    np.log(rows, out=logw, where=rows > 0)
    return logw


def log_apply(rows, offsets, logv, maximize):
    vals = _log_products(_log_weights(rows), logv)
    if maximize:
        return np.maximum.reduceat(vals, offsets[:-1])
    return np.minimum.reduceat(vals, offsets[:-1])


def log_trace(rows, offsets, logv0, steps, maximize):
    logw = _log_weights(rows)
    reduce = np.maximum.reduceat if maximize else np.minimum.reduceat
    starts = offsets[:-1]
    out = np.empty((steps + 1, logv0.shape[0]))
    out[0] = logv0
    cur = logv0
    for n in range(1, steps + 1):
        cur = reduce(_log_products(logw, cur), starts)
        out[n] = cur
    return out


def perron_iterate(A, tol, max_iter):
    """Power iteration on ``A + I`` with a Collatz-Wielandt stopping rule.

    ``A`` must be irreducible, which keeps every iterate strictly positive.
    Returns ``(lower, upper, x, iterations)`` where ``lower <= spr(A) <= upper``.
    """
    n = A.shape[0]
    x = np.ones(n)
    lo, hi = 0.0, np.inf
    for it in range(1, max_iter + 1):
        ax = A @ x
        ratios = ax / x
        lo = ratios.min()
        hi = ratios.max()
        if hi - lo <= tol * hi:
            return lo, hi, x / x.max(), it
        y = ax + x
        x = y / y.max()
    return lo, hi, x / x.max(), max_iter
