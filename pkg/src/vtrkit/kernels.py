"""Backend selection for the renderer kernels.

The compiled extension ``vtrkit._kernels`` is used when it was built; otherwise
(or when ``VTRKIT_PURE_PYTHON=1`` is set) the NumPy fallback is used. Both
expose ``warp_affine``, ``box_blur`` and ``composite`` with identical
signatures.
"""
import importlib
import os

from . import _kernels_py

_compiled = None
if not os.environ.get("VTRKIT_PURE_PYTHON"):
    try:
        _compiled = importlib.import_module("vtrkit._kernels")
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "cython" if _compiled is not None else "python"

warp_affine = _impl.warp_affine
box_blur = _impl.box_blur
composite = _impl.composite


def get_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("vtrkit._kernels extension is not built")
        return _compiled
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    return ["cython", "python"] if _compiled is not None else ["python"]
