"""Backend selection for the hot kernels.

The compiled extension ``udcscatter._ckernels`` is used when it imports;
otherwise the numpy fallback in ``udcscatter._pykernels`` is used. Setting
``UDCSCATTER_PURE_PYTHON=1`` forces the fallback.
"""
import importlib
import os

from . import _pykernels

_BACKENDS = {"python": _pykernels}

try:
    _BACKENDS["compiled"] = importlib.import_module("udcscatter._ckernels")
except ImportError:  # extension not built
    pass


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name):
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"backend {name!r} is not available (have {available_backends()})"
        ) from None


if os.environ.get("UDCSCATTER_PURE_PYTHON") or "compiled" not in _BACKENDS:
    BACKEND = "python"
else:
    BACKEND = "compiled"

_active = _BACKENDS[BACKEND]

random_u64 = _active.random_u64
uniforms = _active.uniforms
standard_normals = _active.standard_normals
conv2d_wrap = _active.conv2d_wrap
