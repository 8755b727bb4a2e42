"""Backend selection for the hot kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementations in ``_pykernels`` are used.  Setting the environment
variable ``KCONES_PURE_PYTHON=1`` forces the fallback.

Callers go through the module-level functions here, never through the
backends directly, so :func:`use_backend` can switch them at runtime.
"""

from __future__ import annotations

import contextlib
import os

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

if os.environ.get("KCONES_PURE_PYTHON") == "1" or _ckernels is None:
    BACKEND = "python"
else:
    BACKEND = "cython"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def _impl():
    return _BACKENDS[BACKEND]


@contextlib.contextmanager
def use_backend(name: str):
    """Temporarily route kernel calls to backend ``name``."""
    global BACKEND
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    old = BACKEND
    BACKEND = name
    try:
        yield
    finally:
        BACKEND = old


def orthonormalize(M):
    return _impl().orthonormalize(M)


def altmin(A, n, m, k, Y0, max_sweeps=200, rtol=1e-12):
    """See :func:`kcones._pykernels.altmin`."""
    return _impl().altmin(A, n, m, k, Y0, max_sweeps, rtol)


def column_tail(w, n, m, k):
    return _impl().column_tail(w, n, m, k)


def anneal_frame(V, n, m, k, pairs, angles, phases, uniforms, T0, ratio, sweep_len):
    """See :func:`kcones._pykernels.anneal_frame`."""
    return _impl().anneal_frame(V, n, m, k, pairs, angles, phases, uniforms, T0, ratio, sweep_len)
