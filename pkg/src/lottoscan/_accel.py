"""Switch between numba-compiled kernels and the pure-numpy fallback.

Set ``LOTTOSCAN_DISABLE_NUMBA=1`` to force the numpy path. The numba path is
also skipped when numba cannot be imported.
"""

import os

_FLAG = "LOTTOSCAN_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a hard dep in practice
    numba = None
    HAVE_NUMBA = False


def numba_enabled() -> bool:
    if not HAVE_NUMBA:
        return False
    return os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


def set_threads(n: int | None) -> None:
    """Cap numba worker threads. Results never depend on this value."""
    if n is None or not HAVE_NUMBA:
        return
    n = max(1, min(int(n), numba.config.NUMBA_NUM_THREADS))
    numba.set_num_threads(n)
