"""Backend selection for the simulation kernel.

The compiled core is preferred when it built; the pure-numpy fallback is
selected otherwise.  Override with STOCHDISC_BACKEND=cython|numpy (``auto`` or
unset keeps the default behavior).
"""

from __future__ import annotations

import os

from . import numpy_backend

_requested = os.environ.get("STOCHDISC_BACKEND", "auto").strip().lower() or "auto"
if _requested not in {"auto", "cython", "numpy"}:
    raise ImportError(
        f"STOCHDISC_BACKEND={_requested!r}: expected 'auto', 'cython' or 'numpy'"
    )

if _requested in {"auto", "cython"}:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise ImportError(
                "STOCHDISC_BACKEND=cython but the compiled core is not built; "
                "reinstall without STOCHDISC_NO_EXTENSION=1"
            )
        _impl = numpy_backend
else:
    _impl = numpy_backend

BACKEND = _impl.BACKEND_NAME
KIND_OU = numpy_backend.KIND_OU
KIND_FELLER = numpy_backend.KIND_FELLER
KIND_LOGNORMAL = numpy_backend.KIND_LOGNORMAL

simulate_block = _impl.simulate_block


def get_backend(name: str = "active"):
    """Return a kernel module by name: 'active', 'numpy' or 'cython'."""
    if name == "active":
        return _impl
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        from . import _core  # type: ignore[attr-defined]

        return _core
    raise ValueError(f"unknown backend {name!r}")
