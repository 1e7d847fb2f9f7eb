"""Pick the kernel implementation at import time.

The compiled extension is preferred; set ``MORGREED_PURE_PYTHON=1`` to force
the numpy fallback.
"""

import os

from . import _pykernels

if os.environ.get("MORGREED_PURE_PYTHON", "") not in ("", "0"):
    kernels = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as kernels
        BACKEND = "cython"
    except ImportError:
        kernels = _pykernels
        BACKEND = "python"
