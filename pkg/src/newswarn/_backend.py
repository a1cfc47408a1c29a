"""Selection of the simulation kernel backend.

The compiled kernels are preferred when the extension built; the pure
Python kernels are a drop-in replacement producing bit-identical traces.
Set ``NEWSWARN_BACKEND=python`` (or ``compiled``) to force a choice —
forcing ``compiled`` raises if the extension is unavailable.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("NEWSWARN_BACKEND", "").strip().lower()

try:
    from . import _kernels  # compiled extension, may be absent
except ImportError:
    _kernels = None

if _FORCED == "python":
    kernels = _kernels_py
elif _FORCED == "compiled":
    if _kernels is None:
        raise ImportError(
            "NEWSWARN_BACKEND=compiled but the compiled kernels are not built; "
            "reinstall with a C toolchain or unset the variable"
        )
    kernels = _kernels
elif _FORCED:
    raise ImportError(f"unknown NEWSWARN_BACKEND value {_FORCED!r}")
else:
    kernels = _kernels if _kernels is not None else _kernels_py


def backend_name() -> str:
    """Name of the active kernel backend: 'compiled' or 'python'."""
    return kernels.BACKEND_NAME


def get_backend(name: str | None = None):
    """Resolve a kernel module by name ('compiled', 'python', or None=active)."""
    if name is None or name == "auto":
        return kernels
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _kernels is None:
            raise ImportError("compiled kernels are not available in this install")
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
