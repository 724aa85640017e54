"""Pick the compiled kernels if they import, else the numpy fallback.

Set ``HILBERTPOLY_PURE=1`` to force the fallback.
"""
import os

from . import _fallback

pure = _fallback
compiled = None
if os.environ.get("HILBERTPOLY_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as compiled
    except ImportError:  # not built
        compiled = None

kernels = compiled if compiled is not None else pure
NAME = "cython" if compiled is not None else "numpy"


def get(name=None):
    """Kernel module by name: None/'auto', 'cython' or 'numpy'."""
    if name in (None, "auto"):
        return kernels
    if name == "numpy":
        return pure
    if name == "cython":
        if compiled is None:
            raise RuntimeError("compiled kernels are not available")
        return compiled
    raise ValueError("unknown backend %r" % name)
