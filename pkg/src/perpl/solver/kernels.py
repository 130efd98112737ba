"""Kernel backend selection.

The compiled extension is used when it has been built, unless the
environment variable PERPL_PURE_PYTHON is set to a non-empty value.
"""
from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled  # type: ignore[attr-defined]
except ImportError:  # extension not built
    _compiled = None

if _compiled is not None and not os.environ.get("PERPL_PURE_PYTHON"):
    backend = _compiled
    BACKEND_NAME = "compiled"
else:
    backend = _kernels_py
    BACKEND_NAME = "python"

FALLBACK = _kernels_py
COMPILED = _compiled
