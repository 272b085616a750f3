"""Hot DAG kernels: the compiled extension when available, else pure Python.

Set ``THREADMOD_PURE=1`` to force the Python implementation.
"""

from __future__ import annotations

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("THREADMOD_PURE") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _kernels_py
else:
    _impl = _kernels_py

maximal_predecessors = _impl.maximal_predecessors
ancestors = _kernels_py.ancestors
topo_order = _kernels_py.topo_order

__all__ = ["BACKEND", "ancestors", "maximal_predecessors", "topo_order"]
