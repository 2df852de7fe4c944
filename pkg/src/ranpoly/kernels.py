"""Backend selection for the hot log-modulus kernels.

The compiled ``_ckernels`` extension is used when it was built; otherwise, or
when ``RANPOLY_PURE_PYTHON`` is set to a non-empty value, the numpy versions in
``_pykernels`` are used. Both expose the same two functions.
"""
import os

from . import _pykernels

if os.environ.get("RANPOLY_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _ckernels as _impl
    except ImportError:
        _impl = _pykernels

BACKEND = _impl.NAME
grid_log_modulus = _impl.grid_log_modulus
point_log_modulus = _impl.point_log_modulus


def available_backends():
    """Map backend name -> module for every backend importable here."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
    except ImportError:
        pass
    else:
        out["cython"] = _ckernels
    return out
