"""Kernel backend selection.

Hot loops are written twice: a numba ``@njit`` version and a numpy (or plain
Python) version.  The numba path is used when numba imports cleanly and the
environment variable ``MONODIMER_DISABLE_NUMBA`` is unset or ``0``.
"""
import os
import warnings

_flag = os.environ.get("MONODIMER_DISABLE_NUMBA", "0").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a hard dependency in practice
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not _disabled


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity otherwise.

    Decoration happens regardless of ``USE_NUMBA`` so that both variants stay
    callable (the benchmark and the cross-backend tests rely on this).
    """
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    kwargs.setdefault("cache", True)
    return _numba.njit(*args, **kwargs)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"


def set_num_threads(n):
    """Bound numba's worker pool; results never depend on it."""
    if HAVE_NUMBA and n:
        with warnings.catch_warnings():
            # numba probes its threading layers here and may warn about an old TBB
            warnings.simplefilter("ignore", _numba.NumbaWarning)
            _numba.set_num_threads(min(int(n), _numba.config.NUMBA_NUM_THREADS))
