"""Kernel backend selection.

The compiled ``_core`` extension is used when it was built; otherwise the
numpy fallback is loaded. Set ``FTLSIM_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _core_py

if os.environ.get("FTLSIM_PURE_PYTHON"):
    core = _core_py
    BACKEND = "python"
else:
    try:
        from . import _core as core
        BACKEND = "cython"
    except ImportError:
        core = _core_py
        BACKEND = "python"

__all__ = ["core", "BACKEND"]
