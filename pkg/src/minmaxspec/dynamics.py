"""Iteration engine and empirical growth estimator.

:func:`iterate` runs ``v, h(v), h(h(v)), ...`` for a homogeneous
nondecreasing ``h`` without overflow or underflow, and
:func:`estimate_growth` fits ``(h^n v)_i ~ n^(k-1) beta^n`` to one component.
This is the independent oracle every asymptotic prediction is checked
against.

For a matrix or a row-choice family the iteration is carried out on
log-magnitudes, one log-sum-exp per candidate row, so components keep full
relative precision even when their magnitudes differ by thousands of orders.
A generic callable is iterated on vectors rescaled to max-norm 1 each step.
"""
import math
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import kernels
from .errors import ContractViolation, PreconditionError
from .family import RowChoiceFamily, _check_mode, single

MIN_POINTS = 200
K_CONFIDENCE = 0.25


@dataclass(frozen=True, eq=False)
class IterationTrace:
    """``log_magnitudes[n, i] = log((h^n v0)_i)``; ``-inf`` marks an exact zero.

    The rescaled view is derived: ``log_scale[n]`` is the largest
    log-magnitude at step ``n`` and ``vectors[n]`` has max-norm 1, so that
    ``h^n(v0) = exp(log_scale[n]) * vectors[n]``.
    """

    log_magnitudes: np.ndarray

    @property
    def steps(self):
        return self.log_magnitudes.shape[0] - 1

    @property
    def n(self):
        return self.log_magnitudes.shape[1]

    @cached_property
    def log_scale(self):
        top = self.log_magnitudes.max(axis=1)
        return np.where(np.isfinite(top), top, 0.0)

    @cached_property
    def vectors(self):
        return np.exp(self.log_magnitudes - self.log_scale[:, None])

    def magnitudes(self, step):
        """``h^step(v0)`` in linear scale (may overflow to ``inf`` for huge steps)."""
        return np.exp(self.log_magnitudes[step])

    def series(self, i):
        return self.log_magnitudes[:, i]

    def collapsed(self, i):
        """True when component ``i`` has become exactly zero (it then stays zero)."""
        return not np.isfinite(self.log_magnitudes[-1, i])


def _stacked_for(op):
    if isinstance(op, RowChoiceFamily):
        return op.stacked
    A = np.asarray(op, dtype=float)
    return single(A).stacked


def iterate(op, v0, steps, mode="min"):
    """Trace of ``v0, h(v0), ..., h^steps(v0)``.

    ``op`` is a :class:`RowChoiceFamily` (``h = f_K`` for ``mode="min"``,
    ``g_K`` for ``"max"``), a nonnegative square matrix, or any callable
    mapping a vector to a vector.  ``v0`` must be strictly positive.  A
    callable that returns a negative or non-finite entry raises
    :class:`ContractViolation`.
    """
    v0 = np.asarray(v0, dtype=float)
    if v0.ndim != 1 or not np.all(v0 > 0) or not np.all(np.isfinite(v0)):
        raise PreconditionError("start vector must be finite and strictly positive")
    steps = int(steps)
    if steps < 0:
        raise ValueError("steps must be >= 0")
    if callable(op) and not isinstance(op, RowChoiceFamily):
        return _iterate_callable(op, v0, steps)
    maximize = _check_mode(mode)
    rows, offsets = _stacked_for(op)
    if rows.shape[1] != v0.shape[0]:
        raise ValueError(f"start vector has length {v0.shape[0]}, operator needs {rows.shape[1]}")
    return IterationTrace(kernels.log_trace(rows, offsets, np.log(v0), steps, maximize))


def _iterate_callable(op, v0, steps):
    out = np.empty((steps + 1, v0.shape[0]))
    scale = float(np.log(v0.max()))
    cur = v0 / v0.max()
    with np.errstate(divide="ignore"):
        out[0] = np.log(cur) + scale
        for n in range(1, steps + 1):
            nxt = np.asarray(op(cur), dtype=float)
            if nxt.shape != cur.shape or not np.all(np.isfinite(nxt)) or np.any(nxt < 0):
                raise ContractViolation(f"operator returned an invalid vector at step {n}")
            top = nxt.max()
            if top == 0:
                out[n:] = -np.inf
                break
            scale += float(np.log(top))
            cur = nxt / top
            out[n] = np.log(cur) + scale
    return IterationTrace(out)


class GrowthEstimate(NamedTuple):
    """Fitted ``(beta, k)`` plus fit diagnostics."""

    beta: float
    k: int
    diagnostics: dict


def estimate_growth(trace, i, burn_in=0.25, min_points=MIN_POINTS):
    """Estimate ``(beta, k)`` with ``(h^n v)_i ~ n^(k-1) beta^n`` from a trace.

    After discarding the first ``burn_in`` fraction of steps, the
    log-magnitudes are fitted jointly by least squares to
    ``c + n log(beta) + (k - 1) log(n)``; ``k`` is the rounded coefficient
    plus one.  Fitting both terms at once keeps period-``p`` oscillations
    (which only add a bounded periodic residual) from biasing either
    estimate.  ``diagnostics`` holds the raw slope, the fit's rms residual,
    the median-of-differences growth factor, and a ``low_confidence`` flag
    set when the slope is farther than 0.25 from an integer.

    A component that has become exactly zero gives ``(0.0, 1)`` with
    ``collapsed=True``.
    """
    if not 0 <= burn_in < 1:
        raise ValueError("burn_in must lie in [0, 1)")
    start = max(1, math.ceil(burn_in * trace.steps))
    count = trace.steps + 1 - start
    if count < min_points:
        raise PreconditionError(
            f"need at least {min_points} post-burn-in steps, have {count}"
        )
    if trace.collapsed(i):
        diag = dict(collapsed=True, low_confidence=False, slope=0.0, rms=0.0,
                    beta_median=0.0, window=(start, trace.steps))
        return GrowthEstimate(0.0, 1, diag)
    y = trace.series(i)[start:]
    n = np.arange(start, trace.steps + 1, dtype=float)
    # centre the regressors; the intercept absorbs the shifts
    X = np.column_stack([np.ones_like(n), n - n.mean(), np.log(n) - np.log(n).mean()])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    rms = float(np.sqrt(np.mean((X @ coef - y) ** 2)))
    log_beta, slope = float(coef[1]), float(coef[2])
    k = max(1, 1 + int(round(slope)))
    low = abs(slope - round(slope)) > K_CONFIDENCE or slope < -K_CONFIDENCE
    diag = dict(
        collapsed=False,
        low_confidence=bool(low),
        slope=slope,
        rms=rms,
        beta_median=float(np.exp(np.median(np.diff(y)))),
        window=(start, trace.steps),
    )
    return GrowthEstimate(float(np.exp(log_beta)), k, diag)


def compare_growth(predicted, estimated, tol_beta=1e-2, require_k=True):
    """True when ``estimated`` agrees with ``predicted`` within ``tol_beta`` (relative).

    ``predicted`` is a :class:`~minmaxspec.perron.GrowthDescriptor` or a
    ``(beta, k)`` pair; ``estimated`` a :class:`GrowthEstimate` or a pair.
    """
    beta, k = _pair(predicted)
    beta_hat, k_hat = _pair(estimated)
    top = max(beta, beta_hat)
    if top == 0:
        ok_beta = True
    else:
        ok_beta = abs(beta_hat - beta) / top <= tol_beta
    return bool(ok_beta and (not require_k or k_hat == k))


def _pair(x):
    if hasattr(x, "as_tuple"):
        return x.as_tuple()
    return float(x[0]), int(x[1])


__all__ = [
    "GrowthEstimate",
    "IterationTrace",
    "compare_growth",
    "estimate_growth",
    "iterate",
]
