"""Hot-loop kernels, compiled when available.

The compiled extension is used unless it failed to build or
``RADAR_EOT_PURE_PYTHON=1`` is set. ``BACKEND`` names the active one.
"""

import os

from . import _pykernels

if os.environ.get("RADAR_EOT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

rls_multi = _impl.rls_multi
dbscan_expand = _impl.dbscan_expand


def available_backends():
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
