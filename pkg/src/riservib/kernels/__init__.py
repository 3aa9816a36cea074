"""Kernel backend selection.

The compiled Cython backend is used when its extension module imports; the
pure-Python backend is the fallback and can be forced with the environment
variable ``RISERVIB_PURE_PYTHON=1``.
"""
import os

if os.environ.get("RISERVIB_PURE_PYTHON"):
    from . import _fallback as _backend
    BACKEND = "python"
else:
    try:
        from . import _core as _backend  # type: ignore[attr-defined]
        BACKEND = "compiled"
    except ImportError:
        from . import _fallback as _backend
        BACKEND = "python"

rigid_cylinder_run = _backend.rigid_cylinder_run
riser_run = _backend.riser_run

__all__ = ["BACKEND", "rigid_cylinder_run", "riser_run"]
