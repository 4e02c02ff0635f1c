"""Numba availability and backend selection.

Set ``NEOCC_DISABLE_NUMBA=1`` before importing :mod:`neocc` to force the
pure-numpy kernels. ``NEOCC_THREADS`` caps the numba thread pool when no
explicit ``--threads`` value is given on the command line.
"""
from __future__ import annotations

import os

_FALSY = {"", "0", "false", "no", "off"}


def _env_flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() not in _FALSY


NUMBA_DISABLED = _env_flag("NEOCC_DISABLE_NUMBA")

try:
    import numba as _numba  # noqa: F401

    if "NUMBA_THREADING_LAYER" not in os.environ:
        # the default probe warns about old TBB builds before settling on omp
        _numba.config.THREADING_LAYER = "omp"
    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None
    NUMBA_AVAILABLE = False

USE_NUMBA = NUMBA_AVAILABLE and not NUMBA_DISABLED


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def set_threads(n: int | None = None) -> int:
    """Configure the numba thread pool; returns the count in effect.

    ``None`` falls back to ``NEOCC_THREADS`` and then to all cores.
    """
    if n is None:
        env = os.environ.get("NEOCC_THREADS", "").strip()
        n = int(env) if env else None
    if not USE_NUMBA:
        return 1
    if n is None:
        return _numba.get_num_threads()
    n = max(1, min(int(n), _numba.config.NUMBA_NUM_THREADS))
    _numba.set_num_threads(n)
    return n
