"""Optional numba compilation.

Set ``EARLAB_DISABLE_JIT=1`` to run every kernel as plain Python/numpy. The
kernels are written so both paths consume the random streams identically and
return bit-identical results.
"""
import os

DISABLE_JIT = os.environ.get("EARLAB_DISABLE_JIT", "0").strip().lower() not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

JIT_ENABLED = _numba is not None and not DISABLE_JIT


def njit(*args, **kwargs):
    """``numba.njit`` when the JIT is enabled, otherwise an identity decorator."""
    if JIT_ENABLED:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda fn: fn


def python_impl(fn):
    """Return the uncompiled function behind a kernel."""
    return getattr(fn, "py_func", fn)
