"""Backend selection for the pointwise constitutive and drag kernels.

The compiled extension is used when it was built; otherwise the numpy
fallback.  ``VOIGT_EVP_BACKEND=python`` forces the fallback.
"""

import os

from . import _kernels_py

SIMPLIFIED = _kernels_py.SIMPLIFIED
ORIGINAL = _kernels_py.ORIGINAL
SMOOTHED_MAX = _kernels_py.SMOOTHED_MAX

_compiled = None
if os.environ.get("VOIGT_EVP_BACKEND", "").lower() != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None

_impl = _compiled if _compiled is not None else _kernels_py
BACKEND = "compiled" if _compiled is not None else "python"


def available_backends():
    return ("compiled", "python") if _compiled is not None else ("python",)


def get_backend(name=None):
    """Module implementing the kernels for ``name`` (default: active one)."""
    if name is None:
        return _impl
    if name == "python":
        return _kernels_py
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def constitutive(G, sigma, variant, eps, gamma, e_bar, P):
    return _impl.constitutive(G, sigma, variant, eps, gamma, e_bar, P)


def drag(V, coef, angle):
    return _impl.drag(V, coef, angle)
