"""Kernel backend selection.

The compiled extension is used when it was built; otherwise the numpy
fallback is imported. Set ``SILENCER_PURE_PYTHON=1`` to force the fallback.
"""

import os

BACKEND = "python"

if os.environ.get("SILENCER_PURE_PYTHON", "") not in ("", "0"):
    from ._pykernels import greedy_modularity, soft_weight_matrix
else:
    try:
        from ._ckernels import greedy_modularity, soft_weight_matrix

        BACKEND = "cython"
    except ImportError:
        from ._pykernels import greedy_modularity, soft_weight_matrix

__all__ = ["BACKEND", "greedy_modularity", "soft_weight_matrix"]
