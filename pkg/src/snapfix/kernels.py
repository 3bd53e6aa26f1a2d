"""Kernel selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin is. Set ``SNAPFIX_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("SNAPFIX_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

witness = _impl.witness
covers_sphere = _impl.covers_sphere
valid_fixture = _impl.valid_fixture
enumerate_palm = _impl.enumerate_palm


def get_backend(name):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
