"""Select the compiled core when present, else the numpy fallback.

Set ``FRACDYN_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

pycore = _pycore

if os.environ.get("FRACDYN_PURE_PYTHON", "") not in ("", "0"):
    core = _pycore
else:
    try:
        from . import _core as core
    except ImportError:
        core = _pycore

NAME = core.NAME
