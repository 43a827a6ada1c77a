"""Backend selection for the hot loops.

The compiled extension is preferred; the numpy fallback is used when it has not
been built.  ``use_backend`` switches explicitly (tests and the benchmark use it
to compare the two).
"""
import numpy as np

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _pykernels}
if _compiled is not None:
    _BACKENDS["cython"] = _compiled

_active = _compiled if _compiled is not None else _pykernels


def available_backends():
    return sorted(_BACKENDS)


def backend_name():
    return _active.NAME


def use_backend(name):
    """Select ``"python"`` or ``"cython"``; returns the previous backend name."""
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {available_backends()}")
    previous = _active.NAME
    _active = _BACKENDS[name]
    return previous


def _f64(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def _idx(a):
    return np.ascontiguousarray(a, dtype=np.intp)


def apply_rows(rows, offsets, v, maximize=False):
    return _active.apply_rows(_f64(rows), _idx(offsets), _f64(v), bool(maximize))


def log_apply(rows, offsets, logv, maximize=False):
    return _active.log_apply(_f64(rows), _idx(offsets), _f64(logv), bool(maximize))


def log_trace(rows, offsets, logv0, steps, maximize=False):
    return _active.log_trace(
        _f64(rows), _idx(offsets), _f64(logv0), int(steps), bool(maximize)
    )


def perron_iterate(A, tol, max_iter):
    return _active.perron_iterate(_f64(A), float(tol), int(max_iter))
