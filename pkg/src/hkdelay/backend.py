"""Kernel backend selection.

HKDELAY_BACKEND chooses the accumulation kernel: "compiled" demands the
built extension, "python" forces the numpy fallback, "auto" (default)
prefers compiled and falls back with a warning.
"""
from __future__ import annotations

import os
import warnings

_CHOICES = ("auto", "compiled", "python")
_requested = os.environ.get("HKDELAY_BACKEND", "auto").strip().lower()
if _requested not in _CHOICES:
    raise RuntimeError(
        f"HKDELAY_BACKEND={_requested!r} not understood; expected one of {_CHOICES}"
    )

if _requested == "python":
    from . import _kernels_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError as exc:
        if _requested == "compiled":
            raise RuntimeError(
                f"HKDELAY_BACKEND=compiled but the extension failed to import: {exc}"
            ) from exc
        from . import _kernels_py as _impl

        BACKEND = "python"
        warnings.warn(
            "hkdelay: compiled core unavailable, falling back to the pure-python "
            "kernel (set HKDELAY_BACKEND=python to silence)",
            RuntimeWarning,
            stacklevel=2,
        )

rhs_accumulate = _impl.rhs_accumulate


def backend_name() -> str:
    """Name of the kernel actually in use: "compiled" or "python"."""
    return BACKEND
