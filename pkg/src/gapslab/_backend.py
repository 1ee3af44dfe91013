"""Kernel selection.  The compiled extension is used when it imports and
``GAPSLAB_PURE`` is unset; otherwise the numpy fallback."""
import os

from . import _fallback

try:
    if os.environ.get("GAPSLAB_PURE"):
        raise ImportError("GAPSLAB_PURE set")
    from . import _core as _compiled
except ImportError:
    _compiled = None

kernels = _compiled if _compiled is not None else _fallback
BACKEND = "compiled" if _compiled is not None else "python"


def get(name):
    """Return a backend module by name ("compiled" or "python")."""
    if name == "python":
        return _fallback
    if name == "compiled":
        if _compiled is None:
            raise ImportError("gapslab._core is not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def available():
    return ["python"] + (["compiled"] if _compiled is not None else [])
