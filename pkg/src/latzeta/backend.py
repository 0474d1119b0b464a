"""Selection between the compiled convolution core and its numpy fallback.

The compiled extension is preferred when importable; `get_backend` also
accepts an explicit name so benchmarks and tests can pin either
implementation.
"""

from __future__ import annotations

from types import ModuleType

from . import _core_py

try:
    from . import _core

    HAVE_COMPILED = True
except ImportError:  # extension not built
    _core = None
    HAVE_COMPILED = False

DEFAULT_BACKEND = "compiled" if HAVE_COMPILED else "python"


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` ("compiled", "python", or None
    for the best available)."""
    if name is None or name == "auto":
        name = DEFAULT_BACKEND
    if name == "compiled":
        if not HAVE_COMPILED:
            raise RuntimeError("compiled core requested but the extension is not built")
        return _core
    if name == "python":
        return _core_py
    raise ValueError(f"unknown backend {name!r}; use 'compiled' or 'python'")
