"""Runtime switches for the compiled kernels.

``FRACPATH_DISABLE_NUMBA=1`` forces the vectorised numpy code paths even when
numba is importable. ``NUMBA_DISABLE_JIT`` is honoured as well.
"""

import os

_TRUE = ("1", "true", "yes", "on")


def _flag(name: str) -> bool:
    return os.environ.get(name, "").strip().lower() in _TRUE


# the system TBB is often too old for numba; prefer OpenMP/workqueue unless the
# user picked a layer explicitly
os.environ.setdefault("NUMBA_THREADING_LAYER", "omp")

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and not _flag("FRACPATH_DISABLE_NUMBA") and not _flag("NUMBA_DISABLE_JIT")

NUMBA_OPTS = {"cache": True, "nogil": True}


def set_threads(n: int | None) -> None:
    """Cap the thread count used by numba-parallel kernels."""
    if n is None or not USE_NUMBA:
        return
    import numba

    numba.set_num_threads(max(1, min(int(n), numba.config.NUMBA_NUM_THREADS)))
