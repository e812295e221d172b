"""Backend selection for the hot scoring kernels.

The numba path is the default when importable; set ENTAILRE_BACKEND=numpy
(or numba) to force a path. Within one backend results are deterministic;
across backends they agree to float64 round-off only.
"""

from __future__ import annotations

import os

from . import numpy_backend

ENV_VAR = "ENTAILRE_BACKEND"

try:
    from . import numba_backend

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised only without numba
    numba_backend = None  # type: ignore[assignment]
    NUMBA_AVAILABLE = False


def get_backend(name: str | None = None):
    """Return the kernel module for name, the env flag, or the best default."""
    if name is None:
        name = os.environ.get(ENV_VAR, "").strip().lower() or None
    if name is None:
        name = "numba" if NUMBA_AVAILABLE else "numpy"
    if name == "numpy":
        return numpy_backend
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise ImportError("numba backend requested but numba is not installed")
        return numba_backend
    raise ValueError(f"unknown kernel backend {name!r}; expected 'numba' or 'numpy'")
