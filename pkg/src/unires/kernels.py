"""Backend selection for the elimination kernels.

The compiled extension is preferred when it imports; the pure-Python
module is the fallback.  Set ``UNIRES_PURE_PYTHON=1`` to force the
fallback (the benchmark uses this to compare the two).
"""

from __future__ import annotations

import os

from unires import _kernels_py

if os.environ.get("UNIRES_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from unires import _kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py

BACKEND = _impl.BACKEND
rank_mod_p_dense = _impl.rank_mod_p_dense
rank_mod_p_sparse = _impl.rank_mod_p_sparse


def available_backends():
    names = ["python"]
    try:
        from unires import _kernels  # noqa: F401

        names.append("compiled")
    except ImportError:
        pass
    return names
