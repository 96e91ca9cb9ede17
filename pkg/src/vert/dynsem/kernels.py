"""Kernel selection: the compiled extension when importable, else the Python fallback.

Set ``VERT_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import logging
import os

from vert.dynsem import _fallback

log = logging.getLogger(__name__)

BACKEND = "python"
run_sim = _fallback.run_sim
pack_grams = _fallback.pack_grams

if os.environ.get("VERT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from vert.dynsem import _vm
    except ImportError:  # pragma: no cover - depends on the build
        log.debug("compiled kernels unavailable; using the Python fallback")
    else:
        BACKEND = "cython"
        run_sim = _vm.run_sim
        pack_grams = _vm.pack_grams

__all__ = ["BACKEND", "pack_grams", "run_sim"]
