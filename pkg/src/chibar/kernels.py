"""Select the compiled kernels when importable, else the numpy fallback.

Set ``CHIBAR_PURE_PYTHON=1`` before import to force the fallback.
"""
import os

if os.environ.get("CHIBAR_PURE_PYTHON", "") not in ("", "0"):
    from . import _fallback as _impl
else:
    try:
        from . import _kernels as _impl
    except ImportError:  # extension not built
        from . import _fallback as _impl

from . import _fallback

IMPLEMENTATION = _impl.IMPLEMENTATION
nnls_gram = _impl.nnls_gram
lrs_batch = _impl.lrs_batch
# ndtri dominates the Genz integrand; numpy's vectorized ufunc beats a C loop
genz_orthant_mean = _fallback.genz_orthant_mean


def get_backend(name=None):
    """Return the kernel module for ``name`` in {"compiled", "python"}, or the active one."""
    if name is None:
        return _impl
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
