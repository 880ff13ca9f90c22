"""Backend switch for the hot kernels.

Numba is used when it imports and ``HYPERINFO_DISABLE_NUMBA`` is unset (or
``0``).  Every kernel in :mod:`hyperinfo.kernels` also has a pure-numpy twin,
so the package works and gives matching results without numba.
"""
import logging
import os

logger = logging.getLogger(__name__)

_disabled = os.environ.get("HYPERINFO_DISABLE_NUMBA", "0").strip().lower() not in ("", "0", "false", "no")

try:
    if _disabled:
        raise ImportError("disabled by HYPERINFO_DISABLE_NUMBA")
    import numba

    njit = numba.njit
    HAVE_NUMBA = True
except ImportError as exc:  # pragma: no cover - depends on environment
    logger.debug("numba unavailable (%s); using numpy kernels", exc)
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        """No-op stand-in for ``numba.njit``."""
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(func):
            return func

        return wrap


BACKEND = "numba" if HAVE_NUMBA else "numpy"


def thread_cap():
    """Worker-thread limit from ``HYPERINFO_THREADS`` (default: CPU count)."""
    raw = os.environ.get("HYPERINFO_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring non-integer HYPERINFO_THREADS=%r", raw)
    return os.cpu_count() or 1
