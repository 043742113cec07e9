"""Kernel backend selection.

``SRSIM_NUMBA=0`` (or ``false``/``no``/``off``) forces the pure-numpy kernels;
otherwise numba is used when it imports cleanly.
"""
import os
import warnings

from . import _kernels_numpy

_FALSEY = {"0", "false", "no", "off"}


def numba_requested() -> bool:
    return os.environ.get("SRSIM_NUMBA", "1").strip().lower() not in _FALSEY


def load_kernels(use_numba: bool | None = None):
    if use_numba is None:
        use_numba = numba_requested()
    if not use_numba:
        return _kernels_numpy
    try:
        from . import _kernels_numba
    except ImportError:
        warnings.warn("numba is not available; falling back to numpy kernels", RuntimeWarning, stacklevel=2)
        return _kernels_numpy
    return _kernels_numba


kernels = load_kernels()
BACKEND = "numba" if kernels is not _kernels_numpy else "numpy"
