"""Execution-backend selection.

The trajectory runners have two interchangeable implementations: a compiled
extension (``dcgnet._kernels``, Cython) for the hot per-node update loops,
and a pure-NumPy fallback built on the filter classes.  The compiled backend
is used when available; set the environment variable ``DCGNET_BACKEND=python``
or pass ``backend="python"`` to force the fallback.

The two backends implement the same arithmetic; within one backend results
are bit-reproducible.  Across backends, trajectories agree to tight floating
point tolerance over moderate horizons; over long horizons the
forgetting-factor recursions amplify last-ulp rounding differences along any
single path (ensemble statistics are unaffected).
"""

from __future__ import annotations

import os

try:
    from . import _kernels  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on build environment
    _kernels = None
    HAVE_COMPILED = False

BACKENDS = ("compiled", "python")


def default_backend() -> str:
    env = os.environ.get("DCGNET_BACKEND", "").strip().lower()
    if env in BACKENDS:
        if env == "compiled" and not HAVE_COMPILED:
            raise RuntimeError("DCGNET_BACKEND=compiled but the extension is not built")
        return env
    if env and env != "auto":
        raise RuntimeError(f"unknown DCGNET_BACKEND value {env!r}")
    return "compiled" if HAVE_COMPILED else "python"


def resolve(backend: str | None) -> str:
    """Normalize a backend argument to ``"compiled"`` or ``"python"``."""
    if backend is None or backend == "auto":
        return default_backend()
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; expected one of {BACKENDS} or 'auto'")
    if backend == "compiled" and not HAVE_COMPILED:
        raise RuntimeError("compiled backend requested but the extension is not built")
    return backend


def kernels():
    if _kernels is None:
        raise RuntimeError("compiled kernels are not available")
    return _kernels
