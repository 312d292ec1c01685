"""Hot-loop kernels with a compiled backend and a numpy fallback.

The compiled module is used when it was built at install time, unless the
environment variable ``RESODECAY_PURE_PYTHON`` is set to a non-empty value
other than ``0``.  ``BACKEND`` names the active implementation.
"""
import os

from . import _fallback

_force_pure = os.environ.get("RESODECAY_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_pure:
        raise ImportError("pure-python backend requested")
    from . import _ckernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _fallback
    BACKEND = "python"


def compiled_available():
    try:
        from . import _ckernels  # noqa: F401
    except ImportError:
        return False
    return True


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python")."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


philox4x64 = _impl.philox4x64
random_words = _impl.random_words
random_uniforms = _impl.random_uniforms
bin_counts = _impl.bin_counts
rational_eval = _impl.rational_eval
bw_intensity = _impl.bw_intensity

__all__ = [
    "BACKEND", "compiled_available", "get_backend", "philox4x64", "random_words",
    "random_uniforms", "bin_counts", "rational_eval", "bw_intensity",
]
