"""Kernel backend selection.

The compiled extension is used when importable; ``DWLINK_PURE_PYTHON=1``
forces the NumPy kernels.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("DWLINK_PURE_PYTHON"):
    kernels = _compiled
    BACKEND = "cython"
else:
    kernels = _kernels_py
    BACKEND = "numpy"


def get_kernels(name=None):
    """Return the kernel module called ``name`` ("cython" or "numpy")."""
    if name is None:
        return kernels
    if name == "numpy":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("dwlink._kernels extension is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    return ["numpy"] + (["cython"] if _compiled is not None else [])
