"""Hot kernels with a compiled backend and a numpy fallback.

The Cython extensions are used when they import cleanly. Setting
``FSPL_PURE_PYTHON=1`` forces the numpy implementations.
"""

import os

from . import _fallback
from ._fallback import (
    RATIO_FLOOR,
    STATUS_CONVERGED,
    STATUS_TIMEOUT,
    STATUS_UNSTABLE,
    STRAIGHT_KAPPA,
    TRACE_COLUMNS,
)

BACKEND = "python"
batch_tips = _fallback.batch_tips
relax_chain = _fallback.relax_chain

if os.environ.get("FSPL_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _chain, _pcc
    except ImportError:
        pass
    else:
        batch_tips = _pcc.batch_tips
        relax_chain = _chain.relax_chain
        BACKEND = "cython"

__all__ = [
    "BACKEND",
    "RATIO_FLOOR",
    "STATUS_CONVERGED",
    "STATUS_TIMEOUT",
    "STATUS_UNSTABLE",
    "STRAIGHT_KAPPA",
    "TRACE_COLUMNS",
    "batch_tips",
    "relax_chain",
]
