"""Kernel backend selection.

The compiled extension is used when importable. Set ``DPMST_BACKEND`` to
``python`` to force the numpy fallback, or to ``compiled`` to fail loudly
when the extension is missing.
"""

import importlib
import os

from . import _fallback

_requested = os.environ.get("DPMST_BACKEND", "auto").strip().lower()

if _requested not in ("auto", "python", "compiled"):
    raise ImportError(f"DPMST_BACKEND must be auto, python or compiled, got {_requested!r}")

kernels = _fallback
if _requested != "python":
    try:
        kernels = importlib.import_module("dpmst._kernels")
    except ImportError:
        if _requested == "compiled":
            raise

BACKEND: str = kernels.NAME


def available_backends() -> list[str]:
    names = ["python"]
    try:
        importlib.import_module("dpmst._kernels")
    except ImportError:
        return names
    return ["compiled", *names]


def get_kernels(name: str):
    """Kernel module for ``name`` (``compiled`` or ``python``)."""
    if name == "python":
        return _fallback
    if name == "compiled":
        return importlib.import_module("dpmst._kernels")
    raise ValueError(f"unknown backend {name!r}")
