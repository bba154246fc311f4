"""Hot array kernels: compiled extension when available, numpy otherwise.

Set ``KLMINIMAX_PURE_PYTHON=1`` to force the numpy fallback.
"""

import os

from . import _pykernels as python_backend

compiled_backend = None
if not os.environ.get("KLMINIMAX_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:
        compiled_backend = None

_active = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "cython" if _active is compiled_backend else "python"

gk21_reduce = _active.gk21_reduce
pchip_slopes = _active.pchip_slopes
pchip_eval = _active.pchip_eval

__all__ = ["BACKEND", "gk21_reduce", "pchip_slopes", "pchip_eval",
           "python_backend", "compiled_backend"]
