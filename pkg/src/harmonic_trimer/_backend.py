"""Select the kinetic kernels at import: compiled extension if present, numpy otherwise.

Set ``HARMONIC_TRIMER_BACKEND=python`` to force the numpy implementation.
"""

import os
from types import ModuleType

from . import _kernels_py


def _load_compiled() -> ModuleType | None:
    try:
        from . import _kernels  # type: ignore[attr-defined]
    except ImportError:
        return None
    return _kernels


compiled = _load_compiled()

if compiled is not None and os.environ.get("HARMONIC_TRIMER_BACKEND", "").lower() != "python":
    _active: ModuleType = compiled
    BACKEND = "cython"
else:
    _active = _kernels_py
    BACKEND = "python"


def get(name: str) -> ModuleType:
    """Return the kernel module ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if compiled is None:
            raise ImportError("compiled kernels are not built; run `pip install -e .`")
        return compiled
    raise ValueError(f"unknown backend {name!r}")


kinetic_apply = _active.kinetic_apply
kinetic_diagonal = _active.kinetic_diagonal
