"""Kernel selection.

The compiled extension is used when it imports; otherwise the numpy
implementation is used. Setting ``BELIEFAPE_PURE_PYTHON=1`` forces the
numpy path.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("BELIEFAPE_PURE_PYTHON") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"

expect_working = _impl.expect_working
interp3 = _impl.interp3
lasso_gram = _impl.lasso_gram


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
