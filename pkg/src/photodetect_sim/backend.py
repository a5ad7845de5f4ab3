"""Kernel backend selection.

The hot kernels in ``_kernels`` ship in two builds: a numba ``@njit`` one and
a pure-numpy / plain-loop fallback.  The environment variable
``PHOTODETECT_SIM_BACKEND`` picks which build the package dispatches to:

* ``auto`` (default) - numba when importable, numpy otherwise
* ``numba``          - require numba, fail at import if missing
* ``numpy``          - force the fallback even when numba is installed

Both builds stay importable regardless of the flag so tests and
``benchmarks/bench_backends.py`` can compare them directly.
"""

import os

ENV_VAR = "PHOTODETECT_SIM_BACKEND"
_CHOICES = ("auto", "numba", "numpy")

_requested = os.environ.get(ENV_VAR, "auto").strip().lower() or "auto"
if _requested not in _CHOICES:
    raise ValueError(f"{ENV_VAR} must be one of {_CHOICES}, got {_requested!r}")

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - depends on environment
    NUMBA_AVAILABLE = False

if _requested == "numba" and not NUMBA_AVAILABLE:
    raise ImportError(f"{ENV_VAR}=numba requested but numba is not importable")

USE_NUMBA = NUMBA_AVAILABLE if _requested == "auto" else _requested == "numba"


def active_backend() -> str:
    """Name of the kernel backend in use, 'numba' or 'numpy'."""
    return "numba" if USE_NUMBA else "numpy"
