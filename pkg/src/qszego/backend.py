"""Kernel backend selection.

The hot kernels exist twice: a compiled Cython extension (``_kernels``) and a
pure-NumPy fallback (``_kernels_py``).  At import time the compiled module is
preferred when available.  The environment variable ``QSZEGO_KERNELS``
overrides the choice:

* ``auto``     - compiled if importable, else python (default);
* ``compiled`` - require the extension, raise if missing;
* ``python``   - force the NumPy fallback.

``benchmarks/bench_backends.py`` compares the two implementations.
"""

from __future__ import annotations

import os

from . import _kernels_py

_ENV_VAR = "QSZEGO_KERNELS"


def _load(choice: str):
    if choice == "python":
        return _kernels_py
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        if choice == "compiled":
            raise ImportError(
                "QSZEGO_KERNELS=compiled but the qszego._kernels extension "
                "is not built; reinstall with Cython available or use "
                "QSZEGO_KERNELS=python"
            ) from None
        return _kernels_py
    return _kernels


def available_backends() -> list[str]:
    names = ["python"]
    try:
        from . import _kernels  # noqa: F401
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


def get_kernels(name: str | None = None):
    """Return the kernel module for an explicit backend name (or the active one)."""
    if name is None:
        return kernels
    if name not in ("auto", "python", "compiled"):
        raise ValueError(f"unknown backend {name!r}; use auto, python or compiled")
    return _load(name)


_choice = os.environ.get(_ENV_VAR, "auto")
if _choice not in ("auto", "python", "compiled"):
    raise ImportError(
        f"invalid {_ENV_VAR}={_choice!r}; expected auto, compiled or python"
    )
kernels = _load(_choice)
KERNELS = kernels.BACKEND_NAME
